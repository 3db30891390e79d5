#include "ldp/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ldp {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw config_error((path.empty() ? "/" : path) + ": " + msg);
}

const Json* find(const Json& obj, const char* key) {
  if (!obj.is_object()) return nullptr;
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const Json& need(const Json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path + "/" + key, "missing required field");
  return *it;
}

void check_keys(const Json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known) fail(path + "/" + item.key(), "unknown field");
  }
}

double as_num(const Json& j, const std::string& path) {
  if (!j.is_number())
    fail(path, std::string("expected a number, got ") + j.type_name());
  return j.get<double>();
}

double num_at(const Json& obj, const std::string& path, const char* key) {
  return as_num(need(obj, path, key), path + "/" + key);
}

double num_or(const Json& obj, const std::string& path, const char* key,
              double def) {
  const Json* j = find(obj, key);
  return j ? as_num(*j, path + "/" + key) : def;
}

Index index_or(const Json& obj, const std::string& path, const char* key,
               Index def) {
  const Json* j = find(obj, key);
  if (!j) return def;
  const std::string p = path + "/" + key;
  if (!j->is_number_integer() && !j->is_number_unsigned())
    fail(p, "expected an integer");
  return static_cast<Index>(j->get<long long>());
}

std::uint64_t seed_or(const Json& obj, const std::string& path,
                      const char* key, std::uint64_t def) {
  const Json* j = find(obj, key);
  if (!j) return def;
  const std::string p = path + "/" + key;
  if (j->is_number_unsigned()) return j->get<std::uint64_t>();
  if (j->is_number_integer() && j->get<long long>() >= 0)
    return static_cast<std::uint64_t>(j->get<long long>());
  fail(p, "expected a nonnegative integer");
}

bool bool_or(const Json& obj, const std::string& path, const char* key,
             bool def) {
  const Json* j = find(obj, key);
  if (!j) return def;
  if (!j->is_boolean()) fail(path + "/" + key, "expected a boolean");
  return j->get<bool>();
}

std::string str_at(const Json& obj, const std::string& path, const char* key) {
  const Json& j = need(obj, path, key);
  if (!j.is_string()) fail(path + "/" + key, "expected a string");
  return j.get<std::string>();
}

Vector vec_at(const Json& obj, const std::string& path, const char* key) {
  const Json& j = need(obj, path, key);
  const std::string p = path + "/" + key;
  if (!j.is_array()) fail(p, "expected an array of numbers");
  Vector out(static_cast<Index>(j.size()));
  Index i = 0;
  for (const auto& item : j) {
    out[i] = as_num(item, p + "/" + std::to_string(i));
    ++i;
  }
  return out;
}

std::vector<double> dlist_at(const Json& obj, const std::string& path,
                             const char* key) {
  const Json& j = need(obj, path, key);
  const std::string p = path + "/" + key;
  if (!j.is_array() || j.empty()) fail(p, "expected a nonempty array of numbers");
  std::vector<double> out;
  Index i = 0;
  for (const auto& item : j) {
    out.push_back(as_num(item, p + "/" + std::to_string(i)));
    ++i;
  }
  return out;
}

std::vector<double> dlist_or(const Json& obj, const std::string& path,
                             const char* key, std::vector<double> def) {
  return find(obj, key) ? dlist_at(obj, path, key) : std::move(def);
}

std::vector<int> ilist_or(const Json& obj, const std::string& path,
                          const char* key, std::vector<int> def) {
  const Json* j = find(obj, key);
  if (!j) return def;
  const std::string p = path + "/" + key;
  if (!j->is_array() || j->empty())
    fail(p, "expected a nonempty array of integers");
  std::vector<int> out;
  Index i = 0;
  for (const auto& item : *j) {
    if (!item.is_number_integer() && !item.is_number_unsigned())
      fail(p + "/" + std::to_string(i), "expected an integer");
    out.push_back(item.get<int>());
    ++i;
  }
  return out;
}

MarkSpace parse_marks(const Json& pj) {
  const std::string path = "/problem/marks";
  const Json& mj = need(pj, "/problem", "marks");
  check_keys(mj, path, {"points", "nu"});
  MarkSpace ms;
  ms.points = vec_at(mj, path, "points");
  ms.nu = vec_at(mj, path, "nu");
  if (ms.points.size() == 0) fail(path + "/points", "need at least one mark");
  if (ms.nu.size() != ms.points.size())
    fail(path + "/nu", "size must match points");
  for (Index j = 0; j < ms.nu.size(); ++j)
    if (!(ms.nu[j] > 0.0) || !std::isfinite(ms.nu[j]))
      fail(path + "/nu/" + std::to_string(j),
           "intensities must be positive and finite");
  return ms;
}

Problem parse_problem(const Json& doc) {
  const Json& pj = need(doc, "", "problem");
  const std::string path = "/problem";
  check_keys(pj, path, {"operator", "noise", "marks", "horizon", "x0"});

  MarkSpace ms = parse_marks(pj);

  const Json& oj = need(pj, path, "operator");
  const std::string opath = path + "/operator";
  const std::string kind = str_at(oj, opath, "kind");
  GalerkinSpace space = GalerkinSpace::euclidean(1);
  DriftOperator drift;
  try {
    if (kind == "scalar_linear") {
      check_keys(oj, opath, {"kind", "a", "dim", "forcing"});
      const Index dim = index_or(oj, opath, "dim", 1);
      if (dim < 1) fail(opath + "/dim", "need dim >= 1");
      space = GalerkinSpace::euclidean(dim);
      drift = make_scalar_linear(space, num_at(oj, opath, "a"),
                                 num_or(oj, opath, "forcing", 0.0));
    } else if (kind == "p_laplace") {
      check_keys(oj, opath,
                 {"kind", "p", "cells", "length", "damping", "forcing"});
      const double p = num_at(oj, opath, "p");
      const Index cells = index_or(oj, opath, "cells", 32);
      if (cells < 3) fail(opath + "/cells", "need at least 3 grid cells");
      const double length = num_or(oj, opath, "length", 1.0);
      if (!(length > 0.0)) fail(opath + "/length", "need length > 0");
      space = GalerkinSpace::periodic_grid(cells, length, p);
      drift = make_p_laplace(space, p,
                             num_or(oj, opath, "damping", p == 2.0 ? 0.0 : 1.0),
                             num_or(oj, opath, "forcing", 0.0));
    } else if (kind == "burgers") {
      check_keys(oj, opath, {"kind", "viscosity", "cells", "length", "forcing"});
      const Index cells = index_or(oj, opath, "cells", 32);
      if (cells < 3) fail(opath + "/cells", "need at least 3 grid cells");
      const double length = num_or(oj, opath, "length", 1.0);
      if (!(length > 0.0)) fail(opath + "/length", "need length > 0");
      space = GalerkinSpace::periodic_grid(cells, length, 2.0);
      drift = make_burgers(space, num_at(oj, opath, "viscosity"),
                           num_or(oj, opath, "forcing", 0.0));
    } else {
      fail(opath + "/kind", "unknown operator kind '" + kind + "'");
    }
  } catch (const std::invalid_argument& e) {
    fail(opath, e.what());
  }

  const Json& nj = need(pj, path, "noise");
  const std::string npath = path + "/noise";
  const std::string nkind = str_at(nj, npath, "kind");
  NoiseCoefficient noise;
  if (nkind == "zero") {
    check_keys(nj, npath, {"kind"});
    noise = make_zero_noise(space, ms.size());
  } else if (nkind == "affine" || nkind == "sqrt") {
    if (nkind == "affine")
      check_keys(nj, npath, {"kind", "sigma", "kappa"});
    else
      check_keys(nj, npath, {"kind", "sigma", "claimed_lipschitz"});
    Vector sigma = vec_at(nj, npath, "sigma");
    if (sigma.size() != ms.size())
      fail(npath + "/sigma", "size must match the mark count");
    if (nkind == "affine")
      noise = make_affine_noise(space, std::move(sigma),
                                num_or(nj, npath, "kappa", 0.0));
    else
      noise = make_sqrt_noise(space, std::move(sigma),
                              num_or(nj, npath, "claimed_lipschitz", 1.0));
  } else {
    fail(npath + "/kind", "unknown noise kind '" + nkind + "'");
  }

  const double horizon = num_or(pj, path, "horizon", 1.0);
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    fail(path + "/horizon", "need a positive finite horizon");

  const Json& xj = need(pj, path, "x0");
  const std::string xpath = path + "/x0";
  Vector x0;
  if (xj.is_number()) {
    x0 = Vector::Constant(space.dim(), xj.get<double>());
  } else if (xj.is_object()) {
    check_keys(xj, xpath, {"constant", "values", "profile", "amplitude",
                           "offset"});
    if (find(xj, "constant")) {
      x0 = Vector::Constant(space.dim(), num_at(xj, xpath, "constant"));
    } else if (find(xj, "values")) {
      x0 = vec_at(xj, xpath, "values");
      if (x0.size() != space.dim())
        fail(xpath + "/values", "size must match the space dimension");
    } else if (find(xj, "profile")) {
      const std::string profile = str_at(xj, xpath, "profile");
      if (profile != "sine")
        fail(xpath + "/profile", "unknown profile '" + profile + "'");
      if (space.v_norm_kind() != VNormKind::w1p)
        fail(xpath + "/profile", "the sine profile needs a grid operator");
      const double amp = num_at(xj, xpath, "amplitude");
      const double off = num_or(xj, xpath, "offset", 0.0);
      x0 = Vector(space.dim());
      for (Index i = 0; i < space.dim(); ++i)
        x0[i] = off + amp * std::sin(kTwoPi * static_cast<double>(i) /
                                     static_cast<double>(space.dim()));
    } else {
      fail(xpath, "need one of constant, values, profile");
    }
  } else {
    fail(xpath, "expected a number or an object");
  }
  for (Index i = 0; i < x0.size(); ++i)
    if (!std::isfinite(x0[i]))
      fail(xpath, "start state entries must be finite");

  return Problem{std::move(space), std::move(drift), std::move(noise),
                 std::move(ms),    std::move(x0),    horizon};
}

Control parse_control(const Json& doc, const Problem& pb) {
  const Index marks = pb.marks.size();
  const Json* cj = find(doc, "control");
  if (!cj) return Control::constant(1.0, 16, pb.horizon, marks);
  const std::string path = "/control";
  check_keys(*cj, path, {"cells", "constant", "per_mark", "time_grid",
                         "values"});
  try {
    if (find(*cj, "time_grid") || find(*cj, "values")) {
      Vector grid = vec_at(*cj, path, "time_grid");
      const Json& vj = need(*cj, path, "values");
      const std::string vpath = path + "/values";
      if (!vj.is_array() || vj.empty())
        fail(vpath, "expected a nonempty array of rows");
      const auto cells = static_cast<Index>(vj.size());
      if (grid.size() != cells + 1)
        fail(path + "/time_grid", "need one more grid point than value rows");
      Matrix vals(cells, marks);
      Index k = 0;
      for (const auto& rowj : vj) {
        const std::string rpath = vpath + "/" + std::to_string(k);
        if (!rowj.is_array() || static_cast<Index>(rowj.size()) != marks)
          fail(rpath, "expected " + std::to_string(marks) + " entries");
        Index j = 0;
        for (const auto& x : rowj) {
          vals(k, j) = as_num(x, rpath + "/" + std::to_string(j));
          if (!(vals(k, j) >= 0.0))
            fail(rpath + "/" + std::to_string(j),
                 "control values must be >= 0");
          ++j;
        }
        ++k;
      }
      if (std::abs(grid[cells] - pb.horizon) >
          1e-9 * std::max(1.0, pb.horizon))
        fail(path + "/time_grid", "must end at the problem horizon");
      return Control(std::move(grid), std::move(vals));
    }
    const Index cells = index_or(*cj, path, "cells", 16);
    if (cells < 1) fail(path + "/cells", "need at least one cell");
    if (find(*cj, "per_mark")) {
      const Vector per = vec_at(*cj, path, "per_mark");
      if (per.size() != marks)
        fail(path + "/per_mark", "size must match the mark count");
      for (Index j = 0; j < marks; ++j)
        if (!(per[j] >= 0.0))
          fail(path + "/per_mark/" + std::to_string(j),
               "control values must be >= 0");
      Control g = Control::constant(1.0, cells, pb.horizon, marks);
      for (Index k = 0; k < cells; ++k)
        for (Index j = 0; j < marks; ++j) g.values()(k, j) = per[j];
      return g;
    }
    const double c = num_or(*cj, path, "constant", 1.0);
    if (!(c >= 0.0)) fail(path + "/constant", "control values must be >= 0");
    return Control::constant(c, cells, pb.horizon, marks);
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

const Json* section(const RunSetup& rs, const char* name) {
  return find(rs.doc, name);
}

}  // namespace

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open config file: " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw config_error("config parse error in " + path.string() + ": " +
                       e.what());
  }
}

RunSetup make_run_setup(const Json& doc) {
  check_keys(doc, "", {"name", "problem", "control", "run", "check", "event",
                       "rate", "skeleton", "ldp1", "ldp2", "dyadic", "tail"});
  Problem pb = parse_problem(doc);
  Control psi = parse_control(doc, pb);
  if (psi.marks() != pb.marks.size())
    fail("/control", "mark count must match the problem mark space");
  RunSetup rs{.doc = doc, .problem = std::move(pb), .psi = std::move(psi)};

  if (const Json* run = find(doc, "run")) {
    const std::string path = "/run";
    check_keys(*run, path,
               {"seed", "threads", "dt", "eps", "paths", "censor_factor",
                "max_expected_jumps", "band_bound", "fp_tol", "max_picard",
                "scheme"});
    rs.seed = seed_or(*run, path, "seed", 1);
    rs.threads = static_cast<int>(index_or(*run, path, "threads", 1));
    if (rs.threads < 0) fail(path + "/threads", "must be >= 0");
    const double dt = num_or(*run, path, "dt", 0.0);
    if (dt < 0.0 || !std::isfinite(dt)) fail(path + "/dt", "must be >= 0");
    rs.sim.dt = dt;
    rs.solve.dt = dt;
    rs.eps = num_or(*run, path, "eps", 0.1);
    if (!(rs.eps > 0.0)) fail(path + "/eps", "must be > 0");
    rs.paths = index_or(*run, path, "paths", 100);
    if (rs.paths < 1) fail(path + "/paths", "must be >= 1");
    rs.sim.censor_factor = num_or(*run, path, "censor_factor", 1e6);
    if (!(rs.sim.censor_factor > 0.0))
      fail(path + "/censor_factor", "must be > 0");
    rs.sim.prm.max_expected =
        num_or(*run, path, "max_expected_jumps", rs.sim.prm.max_expected);
    rs.sim.prm.band_bound =
        num_or(*run, path, "band_bound", rs.sim.prm.band_bound);
    rs.solve.fp_tol = num_or(*run, path, "fp_tol", 0.0);
    rs.solve.max_picard =
        static_cast<int>(index_or(*run, path, "max_picard", 40));
    if (const Json* sj = find(*run, "scheme")) {
      if (!sj->is_string()) fail(path + "/scheme", "expected a string");
      const std::string s = sj->get<std::string>();
      if (s == "semi_implicit") {
        rs.sim.scheme = TimeScheme::semi_implicit;
      } else if (s == "explicit_euler") {
        rs.sim.scheme = TimeScheme::explicit_euler;
      } else {
        fail(path + "/scheme", "unknown scheme '" + s + "'");
      }
      rs.solve.scheme = rs.sim.scheme;
    }
  }

  // eager schema checks for the optional sections
  if (section(rs, "check")) audit_options(rs);
  if (section(rs, "ldp1")) ldp1_options(rs);
  if (section(rs, "ldp2")) ldp2_options(rs);
  if (section(rs, "dyadic")) dyadic_options(rs);
  if (section(rs, "tail")) tail_options(rs);
  if (section(rs, "rate")) {
    minimize_options(rs);
    rate_time_grid(rs);
  }
  if (section(rs, "event")) event_spec(rs);
  skeleton_oracle_requested(rs);
  if (const Json* nm = find(doc, "name")) {
    if (!nm->is_string()) fail("/name", "expected a string");
  }
  return rs;
}

AuditOptions audit_options(const RunSetup& rs) {
  AuditOptions opts;
  opts.threads = rs.threads;
  const Json* cj = section(rs, "check");
  if (!cj) return opts;
  const std::string path = "/check";
  check_keys(*cj, path, {"samples", "t_max", "scale_lo", "scale_hi", "tol_rel",
                         "threads"});
  opts.samples = index_or(*cj, path, "samples", opts.samples);
  if (opts.samples < 1) fail(path + "/samples", "must be >= 1");
  opts.t_max = num_or(*cj, path, "t_max", opts.t_max);
  opts.scale_lo = num_or(*cj, path, "scale_lo", opts.scale_lo);
  opts.scale_hi = num_or(*cj, path, "scale_hi", opts.scale_hi);
  if (!(opts.scale_lo > 0.0) || !(opts.scale_hi >= opts.scale_lo))
    fail(path, "need 0 < scale_lo <= scale_hi");
  opts.tol_rel = num_or(*cj, path, "tol_rel", opts.tol_rel);
  opts.threads =
      static_cast<int>(index_or(*cj, path, "threads", opts.threads));
  return opts;
}

Ldp1Options ldp1_options(const RunSetup& rs) {
  Ldp1Options opts;
  opts.solve = rs.solve;
  const Json* j = section(rs, "ldp1");
  if (!j) return opts;
  const std::string path = "/ldp1";
  check_keys(*j, path, {"n", "gamma", "level", "tune_amplitude",
                        "distance_ratio", "slope_lo", "slope_hi"});
  opts.n_list = ilist_or(*j, path, "n", opts.n_list);
  for (std::size_t i = 0; i < opts.n_list.size(); ++i)
    if (opts.n_list[i] < 1)
      fail(path + "/n/" + std::to_string(i), "indices must be >= 1");
  opts.gamma = num_or(*j, path, "gamma", opts.gamma);
  opts.level = num_or(*j, path, "level", opts.level);
  if (!(opts.level > 0.0)) fail(path + "/level", "must be > 0");
  opts.tune_amplitude =
      bool_or(*j, path, "tune_amplitude", opts.tune_amplitude);
  opts.distance_ratio = num_or(*j, path, "distance_ratio", opts.distance_ratio);
  opts.slope_lo = num_or(*j, path, "slope_lo", opts.slope_lo);
  opts.slope_hi = num_or(*j, path, "slope_hi", opts.slope_hi);
  return opts;
}

Ldp2Options ldp2_options(const RunSetup& rs) {
  Ldp2Options opts;
  opts.seed = rs.seed;
  opts.threads = rs.threads;
  opts.sim = rs.sim;
  const Json* j = section(rs, "ldp2");
  if (!j) return opts;
  const std::string path = "/ldp2";
  check_keys(*j, path, {"eps", "paths", "delta", "slope_min", "censor_limit"});
  opts.eps_list = dlist_or(*j, path, "eps", opts.eps_list);
  opts.paths = index_or(*j, path, "paths", opts.paths);
  if (opts.paths < 8) fail(path + "/paths", "need at least 8 paths");
  opts.delta = num_or(*j, path, "delta", opts.delta);
  if (!(opts.delta > 0.0)) fail(path + "/delta", "must be > 0");
  opts.slope_min = num_or(*j, path, "slope_min", opts.slope_min);
  opts.censor_limit = num_or(*j, path, "censor_limit", opts.censor_limit);
  return opts;
}

DyadicOptions dyadic_options(const RunSetup& rs) {
  DyadicOptions opts;
  opts.seed = rs.seed;
  opts.solve = rs.solve;
  opts.sim = rs.sim;
  const Json* j = section(rs, "dyadic");
  if (!j) return opts;
  const std::string path = "/dyadic";
  check_keys(*j, path, {"m", "eps", "ratio_threshold", "slope_max"});
  opts.m_list = ilist_or(*j, path, "m", opts.m_list);
  opts.eps = num_or(*j, path, "eps", opts.eps);
  if (opts.eps < 0.0) fail(path + "/eps", "must be >= 0");
  opts.ratio_threshold =
      num_or(*j, path, "ratio_threshold", opts.ratio_threshold);
  opts.slope_max = num_or(*j, path, "slope_max", opts.slope_max);
  return opts;
}

TailOptions tail_options(const RunSetup& rs) {
  TailOptions opts;
  opts.seed = rs.seed;
  opts.threads = rs.threads;
  opts.sim = rs.sim;
  opts.rate_opts = minimize_options(rs);
  const Json* j = section(rs, "tail");
  if (!j) return opts;
  const std::string path = "/tail";
  check_keys(*j, path, {"eps", "paths", "margin", "min_hits", "level_cap",
                        "grid_cells"});
  opts.eps_list = dlist_or(*j, path, "eps", opts.eps_list);
  opts.paths = index_or(*j, path, "paths", opts.paths);
  if (opts.paths < 1) fail(path + "/paths", "must be >= 1");
  opts.margin = num_or(*j, path, "margin", opts.margin);
  opts.min_hits = index_or(*j, path, "min_hits", opts.min_hits);
  opts.level_cap = num_or(*j, path, "level_cap", opts.level_cap);
  if (!(opts.level_cap > 0.0)) fail(path + "/level_cap", "must be > 0");
  const Index cells = index_or(*j, path, "grid_cells", 1);
  if (cells < 1) fail(path + "/grid_cells", "must be >= 1");
  opts.control_grid = Vector::LinSpaced(cells + 1, 0.0, rs.problem.horizon);
  return opts;
}

bool has_event(const RunSetup& rs) { return section(rs, "event") != nullptr; }

EventSpec event_spec(const RunSetup& rs) {
  const Json* j = section(rs, "event");
  if (!j) throw config_error("/event: missing required section");
  const std::string path = "/event";
  check_keys(*j, path, {"kind", "component", "threshold", "direction",
                        "target"});
  EventSpec ev;
  const std::string kind = str_at(*j, path, "kind");
  if (kind == "terminal_threshold") {
    ev.kind = EventKind::terminal_threshold;
    ev.component = index_or(*j, path, "component", 0);
    if (ev.component < 0 || ev.component >= rs.problem.space.dim())
      fail(path + "/component", "out of range for the space dimension");
    ev.threshold = num_at(*j, path, "threshold");
    const auto dir = static_cast<int>(index_or(*j, path, "direction", 1));
    if (dir != 1 && dir != -1) fail(path + "/direction", "must be 1 or -1");
    ev.direction = dir;
  } else if (kind == "terminal_point") {
    ev.kind = EventKind::terminal_point;
    ev.target = vec_at(*j, path, "target");
    if (ev.target.size() != rs.problem.space.dim())
      fail(path + "/target", "size must match the space dimension");
  } else {
    fail(path + "/kind", "unknown event kind '" + kind + "'");
  }
  return ev;
}

MinimizeOptions minimize_options(const RunSetup& rs) {
  MinimizeOptions opts;
  opts.solve = rs.solve;
  const Json* j = section(rs, "rate");
  if (!j) return opts;
  const std::string path = "/rate";
  check_keys(*j, path,
             {"grid_cells", "level_cap", "penalty_ladder", "max_iterations",
              "residual_tol", "g_floor", "g_cap", "fd_step"});
  opts.penalty_ladder =
      dlist_or(*j, path, "penalty_ladder", opts.penalty_ladder);
  for (std::size_t i = 0; i < opts.penalty_ladder.size(); ++i)
    if (!(opts.penalty_ladder[i] > 0.0))
      fail(path + "/penalty_ladder/" + std::to_string(i), "must be > 0");
  opts.max_iterations = static_cast<int>(
      index_or(*j, path, "max_iterations", opts.max_iterations));
  if (opts.max_iterations < 1) fail(path + "/max_iterations", "must be >= 1");
  opts.residual_tol = num_or(*j, path, "residual_tol", opts.residual_tol);
  opts.g_floor = num_or(*j, path, "g_floor", opts.g_floor);
  opts.g_cap = num_or(*j, path, "g_cap", opts.g_cap);
  if (!(opts.g_floor > 0.0) || !(opts.g_cap > opts.g_floor))
    fail(path, "need 0 < g_floor < g_cap");
  opts.fd_step = num_or(*j, path, "fd_step", opts.fd_step);
  opts.level_cap = num_or(*j, path, "level_cap", opts.level_cap);
  return opts;
}

Vector rate_time_grid(const RunSetup& rs) {
  Index cells = 1;
  if (const Json* j = section(rs, "rate")) {
    cells = index_or(*j, "/rate", "grid_cells", 1);
    if (cells < 1) fail("/rate/grid_cells", "must be >= 1");
  }
  return Vector::LinSpaced(cells + 1, 0.0, rs.problem.horizon);
}

bool skeleton_oracle_requested(const RunSetup& rs) {
  const Json* j = section(rs, "skeleton");
  if (!j) return false;
  check_keys(*j, "/skeleton", {"oracle"});
  return bool_or(*j, "/skeleton", "oracle", false);
}

Vector skeleton_oracle_terminal(const RunSetup& rs, double t) {
  const Problem& pb = rs.problem;
  if (pb.drift.name != "scalar_linear")
    throw config_error(
        "/skeleton/oracle: closed form needs the scalar_linear operator");
  if (pb.noise.state_dependent)
    throw config_error(
        "/skeleton/oracle: closed form needs state-independent noise");
  for (Index k = 1; k < rs.psi.cells(); ++k)
    if ((rs.psi.values().row(k) - rs.psi.values().row(0))
            .cwiseAbs()
            .maxCoeff() != 0.0)
      throw config_error(
          "/skeleton/oracle: closed form needs a control constant in time");
  // linear drift -a v: a recovered from the coercivity modulus theta = 2a
  const double a = pb.drift.hyp.theta / 2.0;
  Vector forcing = Vector::Zero(pb.space.dim());
  for (Index j = 0; j < pb.marks.size(); ++j)
    forcing += pb.marks.nu[j] * (rs.psi.values()(0, j) - 1.0) *
               pb.noise.apply(0.0, Vector::Zero(pb.space.dim()), j);
  const double decay = std::exp(-a * t);
  return decay * pb.x0 + ((1.0 - decay) / a) * forcing;
}

}  // namespace ldp
