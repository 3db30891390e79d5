#include "ldp/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <utility>

namespace ldp {

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t fnv1a64(const std::string& text) {
  return fnv1a64(text.data(), text.size());
}

std::string hex64(std::uint64_t value) {
  static const char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return s;
}

std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

Json control_to_json(const Control& g) {
  Json grid = Json::array();
  for (Index k = 0; k < g.time_grid().size(); ++k)
    grid.push_back(g.time_grid()[k]);
  Json values = Json::array();
  for (Index k = 0; k < g.cells(); ++k) {
    Json row = Json::array();
    for (Index j = 0; j < g.marks(); ++j) row.push_back(g.values()(k, j));
    values.push_back(std::move(row));
  }
  return Json{{"time_grid", std::move(grid)}, {"values", std::move(values)}};
}

Json rate_to_json(const RateEstimate& est) {
  Json j;
  j["feasible"] = est.feasible;
  if (std::isfinite(est.value))
    j["value"] = est.value;
  else
    j["value"] = "inf";
  j["constraint_residual"] = est.constraint_residual;
  j["iterations"] = est.iterations;
  j["minimizer"] = control_to_json(est.minimizer);
  return j;
}

Json report_to_json(const ExperimentReport& rep) {
  Json rows = Json::array();
  for (const auto& r : rep.rows) {
    rows.push_back(Json{{"name", r.name},
                        {"observed", r.observed},
                        {"threshold", r.threshold},
                        {"relation", r.relation},
                        {"passed", r.passed},
                        {"hard", r.hard}});
  }
  Json series = Json::array();
  for (const auto& s : rep.series) {
    Json pts = Json::array();
    for (const auto& p : s.points)
      pts.push_back(Json{{"x", p.x}, {"y", p.y}, {"stderr", p.se}});
    series.push_back(Json{{"name", s.name}, {"points", std::move(pts)}});
  }
  Json j;
  j["name"] = rep.name;
  j["verdict"] = verdict_name(rep.verdict);
  j["seed"] = rep.seed;
  j["inputs_digest"] = rep.inputs_digest;
  j["note"] = rep.note;
  j["rows"] = std::move(rows);
  j["series"] = std::move(series);
  return j;
}

Json audit_to_json(const AuditReport& rep) {
  Json j;
  j["hypothesis"] = rep.hypothesis;
  j["passed"] = rep.passed;
  j["worst_margin"] = rep.worst_margin;
  j["tolerance"] = rep.tolerance;
  j["samples"] = rep.samples;
  if (rep.witness) {
    const AuditWitness& w = *rep.witness;
    Json wj;
    wj["t"] = w.t;
    wj["mark"] = w.mark;
    wj["lhs"] = w.lhs;
    wj["rhs"] = w.rhs;
    Json v1 = Json::array();
    for (Index i = 0; i < w.v1.size(); ++i) v1.push_back(w.v1[i]);
    wj["v1"] = std::move(v1);
    Json v2 = Json::array();
    for (Index i = 0; i < w.v2.size(); ++i) v2.push_back(w.v2[i]);
    wj["v2"] = std::move(v2);
    j["witness"] = std::move(wj);
  }
  return j;
}

std::string series_csv(const MetricSeries& s) {
  std::string out = "x,y,stderr\n";
  for (const auto& p : s.points) {
    out += format_double(p.x);
    out += ',';
    out += format_double(p.y);
    out += ',';
    out += format_double(p.se);
    out += '\n';
  }
  return out;
}

std::string trajectory_csv(const Trajectory& y) {
  std::string out = "t";
  for (Index i = 0; i < y.states.rows(); ++i) {
    out += ",x";
    out += std::to_string(i);
  }
  out += '\n';
  for (Index k = 0; k < y.times.size(); ++k) {
    out += format_double(y.times[k]);
    for (Index i = 0; i < y.states.rows(); ++i) {
      out += ',';
      out += format_double(y.states(i, k));
    }
    out += '\n';
  }
  return out;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir, std::uint64_t seed)
    : dir_(std::move(dir)), seed_(seed) {
  std::filesystem::create_directories(dir_);
}

void ArtifactWriter::write_text(const std::string& name,
                                const std::string& content) {
  if (finalized_)
    throw config_error("artifact writer: directory already finalized");
  const std::filesystem::path path = dir_ / name;
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw config_error("cannot open output file: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out)
    throw config_error("failed writing output file: " + path.string());
  entries_.push_back({name, content.size(), hex64(fnv1a64(content))});
}

void ArtifactWriter::write_json(const std::string& name, const Json& value) {
  write_text(name, value.dump(2) + "\n");
}

void ArtifactWriter::write_report(const ExperimentReport& rep) {
  write_json(rep.name + "_report.json", report_to_json(rep));
  for (const auto& s : rep.series)
    write_text(rep.name + "_" + s.name + ".csv", series_csv(s));
}

void ArtifactWriter::finalize() {
  if (finalized_) return;
  Json files = Json::array();
  for (const auto& e : entries_)
    files.push_back(Json{
        {"name", e.name}, {"bytes", e.bytes}, {"fnv1a64", e.digest}});
  Json manifest;
  manifest["seed"] = seed_;
  manifest["files"] = std::move(files);
  const std::string text = manifest.dump(2) + "\n";
  const std::filesystem::path path = dir_ / "manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw config_error("cannot open output file: " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  finalized_ = true;
}

}  // namespace ldp
