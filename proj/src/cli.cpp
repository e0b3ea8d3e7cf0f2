#include "soliton/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>

#include "soliton/construct.hpp"
#include "soliton/domain.hpp"
#include "soliton/elliptic.hpp"
#include "soliton/field_io.hpp"
#include "soliton/flow.hpp"
#include "soliton/geometry.hpp"
#include "soliton/radial.hpp"

namespace soliton::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct OptionSpec {
  const char* key;
  const char* help;
};

const std::map<std::string, std::vector<OptionSpec>>& option_table() {
  static const std::map<std::string, std::vector<OptionSpec>> table{
      {"radial",
       {{"C", "soliton constant C > 1 (default 2)"},
        {"n", "dimension (default 2)"},
        {"rmax", "profile radius (default 200)"},
        {"tol", "integrator tolerance (default 1e-10)"},
        {"fit_window", "fit window r1,r2 (default rmax/4,rmax)"}}},
      {"dirichlet",
       {{"C", "soliton constant (default 2)"},
        {"n", "dimension, must be 2"},
        {"domain", "disk:r=R[,cx=X,cy=Y] or polygon:x,y;x,y;... (default disk:r=4)"},
        {"boundary", "const:G, linear:vx,vy,b or table:v1,v2,... (default const:0)"},
        {"h", "grid spacing (default 0.1)"},
        {"tol", "Newton tolerance (default 1e-10)"},
        {"kappa", "gradient bound slack constant (default 5)"}}},
      {"construct",
       {{"C", "soliton constant (default 2)"},
        {"n", "dimension, must be 2"},
        {"f", "cos:amp=A,freq=K, const:value=V or csv:PATH (default cos:amp=0.3,freq=3)"},
        {"M", "quadratic deviation constant (estimated when omitted)"},
        {"levels", "exhaustion levels (default 20,40,80)"},
        {"compact_radius", "radius of the compact disk (default 10)"},
        {"h", "grid spacing (default 0.5)"},
        {"n_angles", "envelope angles (default 720)"},
        {"samples", "samples of built-in f (default 720)"},
        {"radii", "radii for the angular profile (default 10,20,40)"}}},
      {"blowdown",
       {{"C", "soliton constant (default 2 or from the field sidecar)"},
        {"n", "dimension, must be 2"},
        {"in", "field CSV to blow down"},
        {"source", "radial: blow down the radial soliton instead of a file"},
        {"h_values", "rescaling parameters (default 10,20,40,80)"},
        {"directions", "number of unit directions (default 360)"},
        {"kink_tol", "jump in one-sided slopes marking a kink (default 0.05)"},
        {"eikonal_tol", "tolerance on | |DV| - ctilde | (default 0.02)"}}},
      {"verify",
       {{"C", "soliton constant (default from the sidecar, else 2)"},
        {"n", "dimension, must be 2"},
        {"in", "field CSV"},
        {"checks", "residual,spacelike,meanconvex,convex,curvature (default all)"},
        {"residual_tol", "residual tolerance (default h^2)"},
        {"slack", "curvature slack factor: bounds are -slack*h (default 10)"},
        {"curvature_max", "bound on |A|^2 (default 1e6)"}}},
      {"flow",
       {{"C", "soliton constant (default 2)"},
        {"n", "dimension, must be 2"},
        {"radius", "disk radius (default 4)"},
        {"h", "grid spacing (default 0.1)"},
        {"t_end", "final time (default 1)"},
        {"snapshots", "number of snapshots (default 5)"},
        {"init", "soliton or perturbed (default soliton)"},
        {"amp", "bump amplitude for perturbed data (default 0.05)"},
        {"cfl", "CFL factor (default 0.25)"},
        {"observe_radius", "diagnostics radius (default radius/2)"}}},
  };
  return table;
}

std::string flag_name(const std::string& key) {
  std::string s = key;
  std::replace(s.begin(), s.end(), '_', '-');
  return "--" + s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur.erase(0, cur.find_first_not_of(" \t"));
    cur.erase(cur.find_last_not_of(" \t") + 1);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

double to_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + ": '" + s + "' is not a number");
  }
}

std::map<std::string, double> key_values(const std::string& s, const std::string& what) {
  std::map<std::string, double> out;
  for (const auto& item : split(s, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError(what + ": expected key=value, got '" + item + "'");
    out[item.substr(0, eq)] = to_number(item.substr(eq + 1), what);
  }
  return out;
}

// Typed access to the parameter map; every value read is echoed into the summary.
class Params {
 public:
  Params(const json& j, const std::string& command, json& echo) : j_(j), echo_(echo) {
    const auto& specs = option_table().at(command);
    for (const auto& [key, value] : j.items()) {
      const bool known = std::any_of(specs.begin(), specs.end(), [&](const OptionSpec& s) { return key == s.key; });
      if (!known) throw ConfigError("unknown parameter '" + key + "' for command " + command);
    }
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_[key].is_null(); }

  double num(const std::string& key, double def) const {
    double v = def;
    if (has(key)) {
      const json& x = j_[key];
      if (x.is_number()) v = x.get<double>();
      else if (x.is_string()) v = to_number(x.get<std::string>(), key);
      else throw ConfigError(key + " must be a number");
    }
    if (!std::isfinite(v)) throw ConfigError(key + " must be finite");
    echo_[key] = v;
    return v;
  }

  int integer(const std::string& key, int def) const {
    const double v = num(key, def);
    if (v != std::floor(v)) throw ConfigError(key + " must be an integer");
    echo_[key] = static_cast<int>(v);
    return static_cast<int>(v);
  }

  std::string str(const std::string& key, const std::string& def) const {
    std::string v = def;
    if (has(key)) {
      const json& x = j_[key];
      v = x.is_string() ? x.get<std::string>() : x.dump();
    }
    echo_[key] = v;
    return v;
  }

  std::vector<double> list(const std::string& key, std::vector<double> def) const {
    std::vector<double> v = std::move(def);
    if (has(key)) {
      const json& x = j_[key];
      v.clear();
      if (x.is_array()) {
        for (const auto& e : x) {
          if (!e.is_number()) throw ConfigError(key + " must be a list of numbers");
          v.push_back(e.get<double>());
        }
      } else if (x.is_number()) {
        v.push_back(x.get<double>());
      } else {
        for (const auto& s : split(x.get<std::string>(), ',')) v.push_back(to_number(s, key));
      }
    }
    echo_[key] = v;
    return v;
  }

  const json& raw(const std::string& key) const { return j_[key]; }
  json& echo() { return echo_; }

 private:
  const json& j_;
  json& echo_;
};

class Report {
 public:
  explicit Report(Summary& s) : s_(s) {}
  void at_most(const std::string& name, double value, double tol) { add(name, value, tol, value <= tol); }
  void at_least(const std::string& name, double value, double tol) { add(name, value, tol, value >= tol); }
  void add(const std::string& name, double value, double tol, bool pass) {
    s_.checks.push_back({name, value, tol, pass && std::isfinite(value)});
  }
  json& metrics() { return s_.metrics; }

 private:
  Summary& s_;
};

SolitonParams planar_params(Params& p, double c_default = 2.0) {
  const double c = p.num("C", c_default);
  const int n = p.integer("n", 2);
  if (n != 2) throw ConfigError("this command works in two dimensions (n = 2)");
  try {
    return SolitonParams::make(c, n);
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
}

ConvexDomain parse_domain(const Params& p) {
  if (!p.has("domain")) return ConvexDomain::disk(Vec2::Zero(), 4.0);
  const json& d = p.raw("domain");
  try {
    if (d.is_object()) {
      const std::string kind = d.value("kind", "");
      if (kind == "disk") {
        Vec2 c = Vec2::Zero();
        if (d.contains("center")) c = Vec2(d["center"][0].get<double>(), d["center"][1].get<double>());
        return ConvexDomain::disk(c, d.at("radius").get<double>());
      }
      if (kind == "polygon") {
        std::vector<Vec2> v;
        for (const auto& e : d.at("vertices")) v.emplace_back(e[0].get<double>(), e[1].get<double>());
        return ConvexDomain::polygon(std::move(v));
      }
      throw ConfigError("domain kind must be disk or polygon");
    }
    const std::string s = d.get<std::string>();
    const auto colon = s.find(':');
    const std::string kind = s.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : s.substr(colon + 1);
    if (kind == "disk") {
      auto kv = key_values(rest, "domain");
      if (!kv.count("r")) throw ConfigError("disk domain needs r=");
      return ConvexDomain::disk(Vec2(kv["cx"], kv["cy"]), kv["r"]);
    }
    if (kind == "polygon") {
      std::vector<Vec2> v;
      for (const auto& pt : split(rest, ';')) {
        const auto xy = split(pt, ',');
        if (xy.size() != 2) throw ConfigError("polygon vertices are x,y pairs separated by ';'");
        v.emplace_back(to_number(xy[0], "domain"), to_number(xy[1], "domain"));
      }
      return ConvexDomain::polygon(std::move(v));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("domain: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("domain: ") + e.what());
  }
  throw ConfigError("domain must be disk:... or polygon:...");
}

BoundaryData parse_boundary(const Params& p, const ConvexDomain& domain) {
  if (!p.has("boundary")) return BoundaryData::constant(0.0);
  const json& b = p.raw("boundary");
  std::string kind;
  std::vector<double> values;
  if (b.is_object()) {
    kind = b.value("kind", "");
    if (b.contains("values")) {
      if (b["values"].is_array()) {
        for (const auto& e : b["values"]) values.push_back(e.get<double>());
      } else {
        values.push_back(b["values"].get<double>());
      }
    }
  } else {
    const std::string s = b.get<std::string>();
    const auto colon = s.find(':');
    kind = s.substr(0, colon);
    if (colon != std::string::npos) {
      for (const auto& v : split(s.substr(colon + 1), ',')) values.push_back(to_number(v, "boundary"));
    }
  }
  try {
    if (kind == "const") {
      if (values.size() != 1) throw ConfigError("const boundary takes one value");
      return BoundaryData::constant(values[0]);
    }
    if (kind == "linear") {
      if (values.size() != 3) throw ConfigError("linear boundary takes vx,vy,b");
      return BoundaryData::linear(Vec2(values[0], values[1]), values[2]);
    }
    if (kind == "table") return BoundaryData::table(domain.center(), values);
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("boundary: ") + e.what());
  }
  throw ConfigError("boundary kind must be const, linear or table");
}

SphereFunction parse_sphere(Params& p, const SolitonParams& params) {
  const std::string spec = p.str("f", "cos:amp=0.3,freq=3");
  const int samples = p.integer("samples", 720);
  std::optional<double> m;
  if (p.has("M")) m = p.num("M", 0.0);
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  std::vector<double> v(static_cast<std::size_t>(std::max(samples, 0)));
  if (kind == "csv") return SphereFunction::from_csv(rest, params, m);
  if (samples < 8) throw ConfigError("samples must be at least 8");
  if (kind == "cos") {
    auto kv = key_values(rest, "f");
    const double amp = kv.count("amp") ? kv["amp"] : 0.3;
    const double freq = kv.count("freq") ? kv["freq"] : 3.0;
    for (int k = 0; k < samples; ++k) {
      v[static_cast<std::size_t>(k)] = amp * std::cos(freq * 2.0 * std::numbers::pi * k / samples);
    }
  } else if (kind == "const") {
    double value = 0.0;
    if (rest.find('=') != std::string::npos) {
      auto kv = key_values(rest, "f");
      value = kv.count("value") ? kv["value"] : 0.0;
    } else if (!rest.empty()) {
      value = to_number(rest, "f");
    }
    std::fill(v.begin(), v.end(), value);
  } else {
    throw ConfigError("f must be cos:..., const:... or csv:PATH");
  }
  return SphereFunction::from_samples(std::move(v), params, m);
}

struct CurvatureStats {
  double min_h = std::numeric_limits<double>::infinity();
  double min_lambda = std::numeric_limits<double>::infinity();
  double max_a2 = 0.0;
  double max_grad = 0.0;
};

CurvatureStats curvature_stats(const ScalarField& u, const SolitonParams& params) {
  const auto b = bundle(u, params);
  CurvatureStats s;
  for (std::size_t k = 0; k < b.w.size(); ++k) {
    s.min_h = std::min(s.min_h, b.mean_h[k]);
    s.min_lambda = std::min(s.min_lambda, b.lam_min[k]);
    s.max_a2 = std::max(s.max_a2, b.norm_a_sq[k]);
    s.max_grad = std::max(s.max_grad, b.du[k].norm());
  }
  return s;
}

fs::path out_file(const RunConfig& c, const std::string& name) { return fs::path(c.out) / name; }

void run_radial(const RunConfig& cfg, Params& p, Report& r) {
  const double c = p.num("C", 2.0);
  const int n = p.integer("n", 2);
  SolitonParams params;
  try {
    params = SolitonParams::make(c, n);
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  const double rmax = p.num("rmax", 200.0);
  const double tol = p.num("tol", 1e-10);
  const auto window = p.list("fit_window", {std::max(10.0, rmax / 4.0), rmax});
  if (window.size() != 2) throw ConfigError("fit_window takes two radii");
  if (!(rmax >= window[1])) throw ConfigError("fit window must lie inside [0, rmax]");

  const RadialProfile prof = solve_radial(params, rmax, tol);
  const AsymptoticFit fit = asymptotic_fit(prof, window[0], window[1]);
  const double expect_log = -(n - 1) / (c * c);

  {
    std::ofstream csv(out_file(cfg, "radial.csv"));
    csv << "r,phi,dphi\n";
    char buf[96];
    for (std::size_t i = 0; i < prof.r.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", prof.r[i], prof.phi[i], prof.dphi[i]);
      csv << buf;
    }
  }
  const json fit_json{{"slope", fit.slope}, {"logcoef", fit.logcoef}, {"offset", fit.offset},
                      {"window", {fit.r1, fit.r2}}, {"rms", fit.rms_residual}, {"samples", fit.samples}};
  std::ofstream(out_file(cfg, "radial_fit.json")) << fit_json.dump(1) << '\n';

  auto& m = r.metrics();
  m["fit"] = fit_json;
  m["ctilde"] = params.ctilde;
  m["expected_logcoef"] = expect_log;
  m["nodes"] = prof.r.size();
  m["r_max"] = prof.r_max();
  m["ddphi0"] = prof.ddphi.front();
  m["max_dphi"] = *std::max_element(prof.dphi.begin(), prof.dphi.end());

  r.at_most("slope_error", std::abs(fit.slope - params.ctilde), 1e-3);
  if (n > 1) {
    r.at_most("logcoef_relative_error", std::abs(fit.logcoef - expect_log) / std::abs(expect_log), 0.1);
  } else {
    r.at_most("logcoef_error", std::abs(fit.logcoef), 1e-3);
  }
  r.at_most("series_curvature_error", std::abs(prof.ddphi.front() - (c - 1.0) / n), 1e-6);
  r.at_most("slope_below_ctilde", m["max_dphi"].get<double>() - params.ctilde, 0.0);
}

void run_dirichlet(const RunConfig& cfg, Params& p, Report& r) {
  const SolitonParams params = planar_params(p);
  const ConvexDomain domain = parse_domain(p);
  const BoundaryData data = parse_boundary(p, domain);
  p.str("domain", "disk:r=4");
  p.str("boundary", "const:0");
  const double h = p.num("h", 0.1);
  const double kappa = p.num("kappa", 5.0);
  NewtonOptions opt;
  opt.tol = p.num("tol", 1e-10);
  if (!(h > 0.0)) throw ConfigError("h must be positive");

  const DirichletProblem problem{params, domain, data, h};
  auto [u, rep] = solve_dirichlet(problem, opt);
  write_field(out_file(cfg, "u.csv").string(), u, params);

  auto& m = r.metrics();
  m["unknowns"] = u.grid->unknown_count();
  m["iterations"] = rep.iterations;
  m["residual_history"] = rep.residual_history;
  m["spacelike_margin"] = rep.spacelike_margin;
  m["linear_iterations"] = rep.linear_iterations;
  m["smooth_boundary"] = domain.smooth_boundary();
  if (!domain.smooth_boundary()) {
    m["note"] = "polygonal domain: boundary is not C^{2,alpha}, existence is not covered by the smooth theory";
  }
  const double res = max_abs(residual_values(u, params));
  r.at_most("residual", res, opt.tol);

  if (data.is_constant()) {
    const double g = data.constant_value();
    const auto grad = gradient_bound_check(u, params, kappa);
    const auto cs = curvature_stats(u, params);
    m["max_grad"] = grad.max_grad;
    m["min_mean_curvature"] = cs.min_h;
    m["min_hessian_eigenvalue"] = cs.min_lambda;
    m["max_second_fundamental_sq"] = cs.max_a2;
    r.at_most("gradient_bound", grad.max_grad, grad.bound);
    r.at_least("mean_convexity", cs.min_h, -10.0 * h);
    double above = -std::numeric_limits<double>::infinity();
    for (double v : u.values) above = std::max(above, v - g);
    r.at_most("upper_barrier", above, 1e-8);
    if (domain.kind() == ConvexDomain::Kind::disk) {
      r.at_least("convexity", cs.min_lambda, -10.0 * h);
      const double radius = domain.radius();
      const RadialProfile prof = solve_radial(params, radius + 1.0);
      double err = 0.0;
      for (int k = 0; k < u.grid->unknown_count(); ++k) {
        const double rr = (u.grid->position(k) - domain.center()).norm();
        err = std::max(err, std::abs(u.values[static_cast<std::size_t>(k)] - (prof.value(rr) - prof.value(radius) + g)));
      }
      m["radial_oracle_error"] = err;
      r.at_most("radial_oracle_error", err, 0.5 * h * h);
    }
  }
}

void run_construct(const RunConfig& cfg, Params& p, Report& r) {
  const SolitonParams params = planar_params(p);
  const SphereFunction f = parse_sphere(p, params);
  const auto levels = p.list("levels", {20.0, 40.0, 80.0});
  const double rk = p.num("compact_radius", 10.0);
  const double h = p.num("h", 0.5);
  const auto radii = p.list("radii", {10.0, 20.0, 40.0});
  ExhaustionOptions opt;
  opt.n_angles = p.integer("n_angles", 720);

  auto& m = r.metrics();
  m["M"] = f.m_bound();
  r.at_most("supporting_planes", supporting_plane_violation(f, 10000, cfg.seed), 1e-12);

  const ExhaustionResult res = exhaustion_construct(f, params, levels, rk, h, opt);
  const double tol = 1e-2 * (1.0 + h);
  json lv = json::array();
  for (const auto& rep : res.reports) {
    lv.push_back({{"level", rep.level}, {"unknowns", rep.unknowns}, {"iterations", rep.solve.iterations},
                  {"residual", rep.solve.residual_history.back()}, {"lower_gap", rep.lower_gap},
                  {"upper_gap", rep.upper_gap}});
    std::ostringstream level;
    level << rep.level;
    r.at_least("sandwich_lower_m" + level.str(), rep.lower_gap, -tol);
    r.at_least("sandwich_upper_m" + level.str(), rep.upper_gap, -tol);
  }
  m["levels"] = lv;
  m["cauchy_gaps"] = res.cauchy_gaps;
  double rise = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < res.cauchy_gaps.size(); ++i) rise = std::max(rise, res.cauchy_gaps[i] - res.cauchy_gaps[i - 1]);
  if (res.cauchy_gaps.size() >= 2) r.at_most("cauchy_gaps_nonincreasing", rise, 0.0);

  const FieldInterpolator outer(res.solutions.back());
  const HeightFn u = [&outer](const Vec2& x) { return outer(x); };
  json prof = json::array();
  std::vector<double> devs;
  for (double rad : radii) {
    bool covered = true;
    for (int k = 0; k < 360 && covered; ++k) {
      const double t = 2.0 * std::numbers::pi * k / 360;
      covered = outer.covers(rad * Vec2(std::cos(t), std::sin(t)));
    }
    if (!covered) continue;
    const auto ap = angular_profile(u, f, rad);
    prof.push_back({{"radius", rad}, {"std", ap.std_dev}, {"sup_deviation", ap.sup_deviation}, {"mean", ap.mean}});
    devs.push_back(ap.sup_deviation);
  }
  m["angular_profiles"] = prof;
  if (devs.size() >= 2) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < devs.size(); ++i) worst = std::max(worst, devs[i] - devs[i - 1]);
    r.at_most("asymptotic_deviation_decreasing", worst, 0.0);
  }
  const double sym = angular_std(u, rk);
  m["angular_std"] = sym;
  double f_spread = 0.0;
  for (double v : f.values()) f_spread = std::max(f_spread, std::abs(v - f.values().front()));
  if (f_spread > 0.0) r.at_least("angular_std", sym, 0.05);

  const auto cs = curvature_stats(res.final, params);
  m["min_mean_curvature"] = cs.min_h;
  m["min_hessian_eigenvalue"] = cs.min_lambda;
  m["max_second_fundamental_sq"] = cs.max_a2;
  r.at_least("mean_convexity", cs.min_h, -10.0 * h);
  r.at_least("convexity", cs.min_lambda, -10.0 * h);

  write_field(out_file(cfg, "final.csv").string(), res.final, params);
  write_field(out_file(cfg, "entire.csv").string(), res.solutions.back(), params);
  const json report{{"levels", m["levels"]}, {"gaps", res.cauchy_gaps}, {"fit_deviations", prof},
                    {"symmetry_std", sym}, {"symmetry_variance", sym * sym}, {"M", f.m_bound()}};
  std::ofstream(out_file(cfg, "construct_report.json")) << report.dump(1) << '\n';
}

void run_blowdown(const RunConfig& cfg, Params& p, Report& r) {
  const std::string source = p.str("source", p.has("in") ? "file" : "radial");
  const std::string in = p.str("in", "");
  std::optional<FieldFile> file;
  double c_default = 2.0;
  if (source == "file") {
    if (in.empty()) throw ConfigError("blowdown needs --in FILE or --source radial");
    if (!fs::exists(in)) throw ConfigError("input file not found: " + in);
    file = read_field(in);
    if (file->params) c_default = file->params->c;
  } else if (source != "radial") {
    throw ConfigError("source must be radial or file");
  }
  const SolitonParams params = planar_params(p, c_default);
  const auto hs = p.list("h_values", {10.0, 20.0, 40.0, 80.0});
  const int ndir = p.integer("directions", 360);
  const double kink = p.num("kink_tol", 0.05);
  const double etol = p.num("eikonal_tol", 0.02);
  if (hs.empty()) throw ConfigError("h_values must not be empty");

  HeightFn u;
  std::shared_ptr<FieldInterpolator> interp;
  std::shared_ptr<const RadialProfile> prof;
  if (file) {
    interp = std::make_shared<FieldInterpolator>(file->field);
    u = [interp](const Vec2& x) { return (*interp)(x); };
  } else {
    prof = std::make_shared<const RadialProfile>(solve_radial(params, hs.back() * 1.1 + 10.0));
    u = translated_radial(prof, Vec2::Zero(), 0.0);
  }
  auto& m = r.metrics();
  const auto dirs = uniform_directions(ndir);
  ConeSamples cone;
  try {
    cone = blowdown(u, dirs, hs);
  } catch (const NotConvex& e) {
    m["not_convex"] = e.what();
    r.add("monotone_rescaling", -1.0, -1e-10, false);
    return;
  }
  r.at_least("monotone_rescaling", cone.min_increment, -1e-10);
  const auto ek = eikonal_check(cone, params, kink);
  m["eikonal_resolved"] = ek.resolved;
  m["eikonal_excluded"] = ek.excluded;
  r.at_most("eikonal_deviation", ek.max_deviation, etol);
  r.at_most("lipschitz_excess", cone_lipschitz_excess(cone, params), 1e-3);
  std::ofstream csv(out_file(cfg, "cone.csv"));
  csv << "theta,V\n";
  char buf[64];
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", std::atan2(dirs[k].y(), dirs[k].x()), cone.values[k]);
    csv << buf;
  }
}

void run_verify(const RunConfig&, Params& p, Report& r) {
  const std::string in = p.str("in", "");
  if (in.empty()) throw ConfigError("verify needs --in FILE");
  if (!fs::exists(in)) throw ConfigError("input file not found: " + in);
  const auto list = p.str("checks", "residual,spacelike,meanconvex,convex,curvature");
  const std::vector<std::string> names = split(list, ',');
  static const std::vector<std::string> known{"residual", "spacelike", "meanconvex", "convex", "curvature"};
  for (const auto& n : names) {
    if (std::find(known.begin(), known.end(), n) == known.end()) throw ConfigError("unknown check '" + n + "'");
  }
  const FieldFile file = read_field(in);
  const SolitonParams params = planar_params(p, file.params ? file.params->c : 2.0);
  const ScalarField& u = file.field;
  const double h = u.grid->spacing();
  const double rtol = p.num("residual_tol", h * h);
  const double slack = p.num("slack", 10.0);
  const double amax = p.num("curvature_max", 1e6);
  auto& m = r.metrics();
  m["unknowns"] = u.grid->unknown_count();
  m["h"] = h;

  const double g = max_gradient_norm(gradient(u));
  m["max_grad"] = g;
  m["spacelike_margin"] = params.ctilde - g;
  const bool spacelike = g <= 1.0 - kSpacelikeEps;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const CurvatureStats cs = spacelike ? curvature_stats(u, params) : CurvatureStats{nan, nan, nan, g};
  for (const auto& n : names) {
    if (n == "spacelike") r.at_most("spacelike", g, 1.0 - kSpacelikeEps);
    if (n == "residual") r.at_most("residual", spacelike ? max_abs(residual_values(u, params)) : nan, rtol);
    if (n == "meanconvex") r.at_least("meanconvex", cs.min_h, -slack * h);
    if (n == "convex") r.at_least("convex", cs.min_lambda, -slack * h);
    if (n == "curvature") r.at_most("curvature", cs.max_a2, amax);
  }
}

void run_flow(const RunConfig& cfg, Params& p, Report& r) {
  const SolitonParams params = planar_params(p);
  const double radius = p.num("radius", 4.0);
  const double h = p.num("h", 0.1);
  const double t_end = p.num("t_end", 1.0);
  const int snaps = p.integer("snapshots", 5);
  const std::string init = p.str("init", "soliton");
  const double amp = p.num("amp", 0.05);
  FlowOptions opt;
  opt.cfl = p.num("cfl", 0.25);
  opt.observe_radius = p.num("observe_radius", radius / 2.0);
  if (init != "soliton" && init != "perturbed") throw ConfigError("init must be soliton or perturbed");
  if (!(radius > 0.0) || !(h > 0.0) || !(t_end >= 0.0) || snaps < 2) {
    throw ConfigError("flow needs radius > 0, h > 0, t_end >= 0 and at least 2 snapshots");
  }

  const DirichletProblem problem{params, ConvexDomain::disk(Vec2::Zero(), radius), BoundaryData::constant(0.0), h};
  const ScalarField disc = discretize(problem);
  auto prof = std::make_shared<const RadialProfile>(solve_radial(params, radius + 2.0));
  const HeightFn psi = translated_radial(prof, Vec2::Zero(), 0.0);
  const double bump = init == "perturbed" ? amp : 0.0;
  const ScalarField u0 = ScalarField::sample(disc.grid, [&](const Vec2& x) { return psi(x) + bump * std::exp(-x.squaredNorm()); });

  const FlowRun run = run_to(initial_state(u0, params), t_end, params, opt, snaps);
  write_flow((fs::path(cfg.out) / "flow").string(), run, params);

  auto& m = r.metrics();
  json series = json::array();
  for (const auto& s : run.series) series.push_back({{"t", s.t}, {"r", s.r}, {"s", s.s}, {"dt", s.dt}});
  m["series"] = series;
  m["steps"] = run.steps;
  const double dt = run.series.back().dt;
  if (init == "soliton") {
    double speed_err = 0.0;
    const auto speed = speed_field(u0, params.c);
    for (int k = 0; k < u0.grid->unknown_count(); ++k) {
      if (u0.grid->unknown_class(k) != NodeClass::interior || u0.grid->position(k).norm() > opt.observe_radius) continue;
      speed_err = std::max(speed_err, std::abs(speed[static_cast<std::size_t>(k)] + 1.0));
    }
    m["initial_speed_error"] = speed_err;
    r.at_most("translation_drift", run.series.back().s, 10.0 * (h * h + dt));
  } else {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < run.series.size(); ++i) worst = std::max(worst, run.series[i].r - run.series[i - 1].r);
    r.add("residual_decreasing", worst, 0.0, worst < 0.0);
  }
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const NonConvergence*>(&e)) return "NonConvergence";
  if (dynamic_cast<const NotSpacelike*>(&e)) return "NotSpacelike";
  if (dynamic_cast<const ConstructionFailure*>(&e)) return "ConstructionFailure";
  if (dynamic_cast<const BadCurvatureBound*>(&e)) return "BadCurvatureBound";
  if (dynamic_cast<const RefinementError*>(&e)) return "RefinementError";
  if (dynamic_cast<const IntegrationFailure*>(&e)) return "IntegrationFailure";
  if (dynamic_cast<const FlowBlowup*>(&e)) return "FlowBlowup";
  if (dynamic_cast<const NotConvex*>(&e)) return "NotConvex";
  if (dynamic_cast<const RangeError*>(&e)) return "RangeError";
  if (dynamic_cast<const DimensionError*>(&e)) return "DimensionError";
  if (dynamic_cast<const ArgumentError*>(&e)) return "ArgumentError";
  if (dynamic_cast<const Error*>(&e)) return "Error";
  return "InternalError";
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

bool Summary::ok() const {
  if (!error.is_null()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

json Summary::to_json() const {
  json j{{"command", command}, {"params", params}, {"metrics", metrics}, {"seed", seed}};
  j["checks"] = json::array();
  for (const auto& c : checks) {
    j["checks"].push_back({{"name", c.name}, {"value", number_or_null(c.value)},
                           {"tolerance", number_or_null(c.tolerance)}, {"pass", c.pass}});
  }
  j["pass"] = ok();
  if (!error.is_null()) j["error"] = error;
  return j;
}

int exit_status(const Summary& summary) { return summary.ok() ? 0 : 1; }

Summary run(const RunConfig& config) {
  if (!option_table().count(config.command)) throw ConfigError("unknown command '" + config.command + "'");
  Summary s;
  s.command = config.command;
  s.seed = config.seed;
  Params p(config.params, config.command, s.params);
  Report r(s);
  try {
    fs::create_directories(config.out);
  } catch (const fs::filesystem_error& e) {
    throw ConfigError(std::string("cannot create output directory: ") + e.what());
  }
  try {
    if (config.command == "radial") run_radial(config, p, r);
    else if (config.command == "dirichlet") run_dirichlet(config, p, r);
    else if (config.command == "construct") run_construct(config, p, r);
    else if (config.command == "blowdown") run_blowdown(config, p, r);
    else if (config.command == "verify") run_verify(config, p, r);
    else run_flow(config, p, r);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    s.error = {{"type", error_kind(e)}, {"message", e.what()}};
    if (const auto* nc = dynamic_cast<const NonConvergence*>(&e)) {
      s.error["iterations"] = nc->report().iterations;
      s.error["residual_history"] = nc->report().residual_history;
    }
    if (const auto* cf = dynamic_cast<const ConstructionFailure*>(&e)) s.error["level"] = cf->level();
  }
  s.params["out"] = config.out;
  std::ofstream(out_file(config, "summary.json")) << s.to_json().dump(1) << '\n';
  return s;
}

namespace {

json config_value(const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for translating solitons of mean curvature flow in Minkowski space"};
  app.fallthrough();
  std::string config_path, out;
  std::uint64_t seed = 42;
  app.add_option("--config", config_path, "JSON configuration file; flags override its values");
  app.add_option("--out", out, "output directory (default .)");
  app.add_option("--seed", seed, "seed for randomized checks (default 42)");

  std::map<std::string, std::map<std::string, std::string>> flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [command, specs] : option_table()) {
    auto* sub = app.add_subcommand(command, "run the " + command + " pipeline");
    subs[command] = sub;
    sub->set_help_flag("--help", "print this help message and exit");
    for (const auto& spec : specs) sub->add_option(flag_name(spec.key), flags[command][spec.key], spec.help);
  }
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg;
    cfg.seed = seed;
    json file = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot open config file " + config_path);
      try {
        file = json::parse(in);
      } catch (const json::exception& e) {
        throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
      }
      if (!file.is_object()) throw ConfigError("config file must hold a JSON object");
    }
    for (const auto& [command, sub] : subs) {
      if (sub->parsed()) cfg.command = command;
    }
    if (cfg.command.empty()) cfg.command = file.value("command", "");
    if (cfg.command.empty()) throw ConfigError("no command given (radial, dirichlet, construct, blowdown, verify or flow)");
    if (file.contains("command") && file["command"] != cfg.command) {
      throw ConfigError("config file is for command " + file["command"].dump());
    }
    cfg.out = file.value("out", std::string("."));
    if (file.contains("seed") && app.get_option("--seed")->count() == 0) cfg.seed = file["seed"].get<std::uint64_t>();
    for (const auto& [key, value] : file.items()) {
      if (key != "command" && key != "out" && key != "seed") cfg.params[key] = value;
    }
    auto* sub = subs.count(cfg.command) ? subs[cfg.command] : nullptr;
    if (sub) {
      for (const auto& [key, value] : flags[cfg.command]) {
        if (sub->get_option(flag_name(key))->count() > 0) cfg.params[key] = config_value(value);
      }
    }
    if (!out.empty()) cfg.out = out;

    const Summary s = run(cfg);
    for (const auto& c : s.checks) {
      std::printf("%s %-34s value %-14.6g tolerance %.6g\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.tolerance);
    }
    if (!s.error.is_null()) {
      std::fprintf(stderr, "error (%s): %s\n", s.error["type"].get<std::string>().c_str(),
                   s.error["message"].get<std::string>().c_str());
    }
    std::printf("summary: %s\n", (fs::path(cfg.out) / "summary.json").string().c_str());
    return exit_status(s);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  }
}

}  // namespace soliton::cli
