#pragma once

#include "ldp/control.hpp"
#include "ldp/harness.hpp"
#include "ldp/rate.hpp"
#include "ldp/skeleton.hpp"
#include "ldp/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ldp {

using Json = nlohmann::json;

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64(const std::string& text);
std::string hex64(std::uint64_t value);

/// Shortest round-trip decimal form (std::to_chars), so numeric artifacts
/// are byte-identical across reruns.
std::string format_double(double x);

Json control_to_json(const Control& g);
Json rate_to_json(const RateEstimate& est);
Json report_to_json(const ExperimentReport& rep);
Json audit_to_json(const AuditReport& rep);

/// One CSV row per point: x, y, stderr.
std::string series_csv(const MetricSeries& s);
/// One CSV row per grid time: t, then one column per coordinate.
std::string trajectory_csv(const Trajectory& y);

/// Collects artifacts for one run directory and finishes with a manifest
/// (seed plus name, byte count, and digest of every file written), so a
/// rerun can be compared file by file.
class ArtifactWriter {
 public:
  ArtifactWriter(std::filesystem::path dir, std::uint64_t seed);

  [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }

  void write_text(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const Json& value);
  /// Report JSON plus one plot-ready CSV per metric series.
  void write_report(const ExperimentReport& rep);

  /// Writes manifest.json; call once, after the last artifact.
  void finalize();

 private:
  struct Entry {
    std::string name;
    std::uint64_t bytes;
    std::string digest;
  };
  std::filesystem::path dir_;
  std::uint64_t seed_;
  std::vector<Entry> entries_;
  bool finalized_ = false;
};

}  // namespace ldp
