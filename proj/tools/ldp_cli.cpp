#include "ldp/config.hpp"
#include "ldp/harness.hpp"
#include "ldp/io.hpp"
#include "ldp/parallel.hpp"
#include "ldp/rng.hpp"
#include "ldp/spde.hpp"
#include "ldp/stats.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

using namespace ldp;

void print_audit(const AuditReport& r) {
  std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.hypothesis
            << "  worst margin " << format_double(r.worst_margin) << " (slack "
            << format_double(r.tolerance) << ", " << r.samples
            << " samples)\n";
  if (!r.passed && r.witness) {
    const AuditWitness& w = *r.witness;
    std::cout << "       witness: t=" << format_double(w.t);
    if (w.mark >= 0) std::cout << " mark=" << w.mark;
    std::cout << " lhs=" << format_double(w.lhs)
              << " rhs=" << format_double(w.rhs) << "\n";
  }
}

void print_report(const ExperimentReport& rep) {
  std::cout << "[" << rep.name << "] verdict: " << verdict_name(rep.verdict)
            << "\n";
  for (const auto& r : rep.rows)
    std::cout << "  " << (r.passed ? "ok  " : "BAD ") << r.name << ": "
              << format_double(r.observed) << " " << r.relation << " "
              << format_double(r.threshold) << (r.hard ? "" : "  (soft)")
              << "\n";
  if (!rep.note.empty()) std::cout << "  note: " << rep.note << "\n";
}

Json trajectory_json(const Trajectory& y) {
  Json times = Json::array();
  for (Index k = 0; k < y.times.size(); ++k) times.push_back(y.times[k]);
  Json states = Json::array();
  for (Index k = 0; k < y.states.cols(); ++k) {
    Json col = Json::array();
    for (Index i = 0; i < y.states.rows(); ++i) col.push_back(y.states(i, k));
    states.push_back(std::move(col));
  }
  return Json{{"times", std::move(times)}, {"states", std::move(states)}};
}

int run_check(const RunSetup& rs, ArtifactWriter* w) {
  const AuditOptions opts = audit_options(rs);
  const Problem& pb = rs.problem;
  std::vector<AuditReport> reports;
  reports.push_back(check_hemicontinuity(pb.space, pb.drift, opts, rs.seed));
  reports.push_back(
      check_local_monotonicity(pb.space, pb.drift, opts, rs.seed));
  reports.push_back(check_coercivity(pb.space, pb.drift, opts, rs.seed));
  reports.push_back(check_growth(pb.space, pb.drift, opts, rs.seed));
  reports.push_back(check_rho_growth(pb.space, pb.drift, opts, rs.seed));
  reports.push_back(
      check_noise_growth(pb.space, pb.marks, pb.noise, opts, rs.seed));
  reports.push_back(
      check_noise_lipschitz(pb.space, pb.marks, pb.noise, opts, rs.seed));

  bool all = true;
  Json out = Json::array();
  for (const auto& r : reports) {
    print_audit(r);
    all = all && r.passed;
    out.push_back(audit_to_json(r));
  }
  std::cout << (all ? "all audits passed\n" : "audit failures present\n");
  if (w) w->write_json("audits.json", out);
  return all ? 0 : 1;
}

int run_skeleton_cmd(const RunSetup& rs, ArtifactWriter* w,
                     const std::string& format) {
  const Problem& pb = rs.problem;
  const SkeletonResult res = solve_skeleton(pb.space, pb.drift, pb.noise,
                                            pb.marks, rs.psi, pb.x0, rs.solve);
  int worst_iters = 0;
  double worst_ratio = -1.0;
  for (const auto& wd : res.windows) {
    worst_iters = std::max(worst_iters, wd.picard_iterations);
    worst_ratio = std::max(worst_ratio, wd.max_ratio);
  }
  std::cout << "skeleton: " << res.trajectory.steps() << " steps, "
            << res.windows.size() << " windows, residual "
            << format_double(res.max_residual) << "\n";
  std::cout << "  picard iterations <= " << worst_iters
            << ", measured contraction ratio <= " << format_double(worst_ratio)
            << "\n";
  if (skeleton_oracle_requested(rs)) {
    double err = 0.0;
    for (Index k = 0; k < res.trajectory.times.size(); ++k)
      err = std::max(
          err, pb.space.h_norm(res.trajectory.states.col(k) -
                               skeleton_oracle_terminal(
                                   rs, res.trajectory.times[k])));
    std::cout << "  closed-form max error " << format_double(err) << "\n";
  }
  if (w) {
    if (format == "csv")
      w->write_text("skeleton.csv", trajectory_csv(res.trajectory));
    else
      w->write_json("skeleton.json", trajectory_json(res.trajectory));
    Json diag = Json::array();
    for (const auto& wd : res.windows)
      diag.push_back(Json{{"start", wd.start},
                          {"end", wd.end},
                          {"picard_iterations", wd.picard_iterations},
                          {"halvings", wd.halvings},
                          {"final_delta", wd.final_delta},
                          {"max_ratio", wd.max_ratio}});
    w->write_json("skeleton_windows.json", diag);
  }
  return 0;
}

int run_simulate_cmd(const RunSetup& rs, ArtifactWriter* w) {
  const Problem& pb = rs.problem;
  const Index paths = rs.paths;
  struct Row {
    int censored = 0;
    double censor_time = 0.0;
    Index jumps = 0;
    double terminal_h = 0.0;
    double sup_h = 0.0;
  };
  std::vector<Row> rows(static_cast<std::size_t>(paths));
  const StreamRng root(rs.seed, 2);
  parallel_for(paths, rs.threads, [&](Index i) {
    const PathResult pr =
        simulate(pb.space, pb.drift, pb.noise, pb.marks, pb.x0, pb.horizon,
                 rs.eps, root.fork(static_cast<std::uint64_t>(i)), rs.sim);
    double sup = 0.0;
    for (Index k = 0; k < pr.trajectory.times.size(); ++k)
      sup = std::max(sup, pb.space.h_norm(pr.trajectory.states.col(k)));
    Row& row = rows[static_cast<std::size_t>(i)];
    row.censored = pr.censored ? 1 : 0;
    row.censor_time = pr.censor_time;
    row.jumps = static_cast<Index>(pr.jumps.size());
    row.terminal_h = pb.space.h_norm(pr.trajectory.terminal());
    row.sup_h = sup;
  });

  Index censored = 0;
  std::vector<double> terminal_norms;
  for (const Row& r : rows) {
    if (r.censored) {
      ++censored;
      continue;
    }
    terminal_norms.push_back(r.terminal_h);
  }
  std::cout << "simulate: " << paths << " paths at eps "
            << format_double(rs.eps) << ", censored " << censored << "\n";
  if (!terminal_norms.empty()) {
    const MeanStderr ms = mean_stderr(terminal_norms);
    std::cout << "  terminal H-norm " << format_double(ms.mean) << " +- "
              << format_double(ms.stderr_) << "\n";
  }
  if (w) {
    std::string csv = "path,censored,censor_time,jumps,terminal_h_norm,sup_h_norm\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Row& r = rows[i];
      csv += std::to_string(i);
      csv += ',';
      csv += std::to_string(r.censored);
      csv += ',';
      csv += format_double(r.censor_time);
      csv += ',';
      csv += std::to_string(r.jumps);
      csv += ',';
      csv += format_double(r.terminal_h);
      csv += ',';
      csv += format_double(r.sup_h);
      csv += '\n';
    }
    w->write_text("paths.csv", csv);
    Json summary;
    summary["paths"] = paths;
    summary["eps"] = rs.eps;
    summary["censored"] = censored;
    if (!terminal_norms.empty()) {
      const MeanStderr ms = mean_stderr(terminal_norms);
      summary["terminal_h_norm_mean"] = ms.mean;
      summary["terminal_h_norm_stderr"] = ms.stderr_;
    }
    w->write_json("simulate_summary.json", summary);
  }
  return 0;
}

int run_rate_cmd(const RunSetup& rs, ArtifactWriter* w) {
  const EventSpec ev = event_spec(rs);
  const MinimizeOptions mo = minimize_options(rs);
  const Vector grid = rate_time_grid(rs);
  const Problem& pb = rs.problem;
  const RateEstimate est = minimize_rate(pb.space, pb.drift, pb.noise,
                                         pb.marks, pb.x0, grid, ev, mo);
  std::cout << "rate: value "
            << (est.feasible ? format_double(est.value) : std::string("inf"))
            << (est.feasible ? "" : " (event infeasible)") << ", residual "
            << format_double(est.constraint_residual) << ", iterations "
            << est.iterations << "\n";
  if (w) w->write_json("rate.json", rate_to_json(est));
  return 0;
}

int run_verify_cmd(const RunSetup& rs, ArtifactWriter* w,
                   const std::string& which, const std::string& format) {
  const Problem& pb = rs.problem;
  const std::string digest = hex64(fnv1a64(rs.doc.dump()));
  auto want = [&which](const char* name) {
    return which == "all" || which == name;
  };
  std::vector<ExperimentReport> reports;
  if (want("ldp1")) reports.push_back(run_ldp1(pb, rs.psi, ldp1_options(rs)));
  if (want("ldp2")) reports.push_back(run_ldp2(pb, rs.psi, ldp2_options(rs)));
  if (want("dyadic"))
    reports.push_back(run_dyadic_diagnostic(pb, rs.psi, dyadic_options(rs)));
  if (want("tail")) {
    if (has_event(rs))
      reports.push_back(run_tail_trend(pb, event_spec(rs), tail_options(rs)));
    else if (which == "tail")
      throw config_error("/event: required for the tail experiment");
  }

  bool any_fail = false;
  for (auto& rep : reports) {
    rep.inputs_digest = digest;
    print_report(rep);
    any_fail = any_fail || rep.verdict == Verdict::fail;
    if (w) {
      if (format == "csv")
        w->write_report(rep);
      else
        w->write_json(rep.name + "_report.json", report_to_json(rep));
    }
  }
  return any_fail ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"laboratory for jump-driven dissipative evolution equations"};
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  long long threads = -1;
  std::string format = "csv";
  std::string which = "all";

  CLI::Option* seed_opt =
      app.add_option("--seed", seed, "override /run/seed")
          ->envname("LDPLAB_SEED");
  app.add_option("-c,--config", config_path, "JSON configuration file")
      ->envname("LDPLAB_CONFIG");
  app.add_option("-o,--out", out_dir,
                 "output directory (resolved config and manifest land here)")
      ->envname("LDPLAB_OUT");
  app.add_option("--threads", threads, "override /run/threads (0 = all cores)")
      ->envname("LDPLAB_THREADS");
  app.add_option("--format", format, "tabular artifact format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->envname("LDPLAB_FORMAT");

  CLI::App* c_check = app.add_subcommand(
      "check", "audit the structural hypotheses of the configured problem");
  CLI::App* c_skel =
      app.add_subcommand("skeleton", "solve the deterministic controlled path");
  CLI::App* c_sim = app.add_subcommand("simulate", "sample jump-driven paths");
  CLI::App* c_rate = app.add_subcommand(
      "rate", "minimize the control cost subject to an event");
  CLI::App* c_verify =
      app.add_subcommand("verify", "run the convergence experiments");
  c_verify->add_option("which", which, "ldp1|ldp2|dyadic|tail|all")
      ->check(CLI::IsMember({"ldp1", "ldp2", "dyadic", "tail", "all"}));
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (config_path.empty())
      throw ldp::config_error("--config is required (or set LDPLAB_CONFIG)");
    ldp::Json doc = ldp::load_json_file(config_path);
    if (seed_opt->count() > 0) doc["run"]["seed"] = seed;
    if (threads >= 0) doc["run"]["threads"] = threads;
    ldp::RunSetup rs = ldp::make_run_setup(doc);

    std::optional<ldp::ArtifactWriter> writer;
    if (!out_dir.empty()) {
      writer.emplace(std::filesystem::path(out_dir), rs.seed);
      writer->write_json("config.json", rs.doc);
    }
    ldp::ArtifactWriter* w = writer ? &*writer : nullptr;

    int rc = 0;
    if (c_check->parsed())
      rc = run_check(rs, w);
    else if (c_skel->parsed())
      rc = run_skeleton_cmd(rs, w, format);
    else if (c_sim->parsed())
      rc = run_simulate_cmd(rs, w);
    else if (c_rate->parsed())
      rc = run_rate_cmd(rs, w);
    else
      rc = run_verify_cmd(rs, w, which, format);

    if (writer) writer->finalize();
    return rc;
  } catch (const ldp::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ldp::resource_error& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return 4;
  } catch (const ldp::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
