#include "soliton/flow.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "soliton/errors.hpp"
#include "soliton/field_io.hpp"

namespace soliton {

FlowState initial_state(ScalarField field, const SolitonParams& params) {
  require_spacelike(gradient(field));
  return {std::move(field), 0.0, params.c, 0.0};
}

std::vector<double> speed_field(const ScalarField& u, double forcing) {
  const auto du = gradient(u);
  const auto hess = hessian(u);
  std::vector<double> v(u.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const Mat2 a = inverse_metric(du[k]);
    v[k] = (a.array() * hess[k].array()).sum() - forcing * lorentz_factor(du[k]);
  }
  return v;
}

double stable_dt(const ScalarField& u, double cfl) {
  const double g = max_gradient_norm(gradient(u));
  const double h = u.grid->spacing();
  return cfl * h * h * (1.0 - g * g);
}

FlowState step(const FlowState& state, const SolitonParams& params, const FlowOptions& options) {
  (void)params;
  const ScalarField& u = state.field;
  const Grid2& g = *u.grid;
  const auto speed = speed_field(u, state.forcing);
  double dt = std::min(stable_dt(u, options.cfl), options.dt_max);
  for (;;) {
    if (dt < options.dt_min) {
      std::ostringstream msg;
      msg << "flow step fell below dt_min at t = " << state.time;
      throw FlowBlowup(msg.str());
    }
    FlowState next{u, state.time + dt, state.forcing, dt};
    for (int k = 0; k < g.unknown_count(); ++k) {
      const auto kk = static_cast<std::size_t>(k);
      next.field.values[kk] += g.unknown_class(k) == NodeClass::interior ? dt * speed[kk] : -dt;
    }
    for (double& b : next.field.boundary) b -= dt;
    if (max_gradient_norm(gradient(next.field)) <= 1.0 - options.eps_space) return next;
    dt *= 0.5;
  }
}

namespace {

std::vector<int> observed_nodes(const Grid2& g, double radius) {
  std::vector<int> out;
  for (int k = 0; k < g.unknown_count(); ++k) {
    if (g.unknown_class(k) != NodeClass::interior) continue;
    if (radius > 0.0 && g.position(k).norm() > radius) continue;
    out.push_back(k);
  }
  return out;
}

double drift(const ScalarField& u, const ScalarField& u0, double t, const std::vector<int>& nodes) {
  double s = 0.0;
  for (int k : nodes) {
    const auto kk = static_cast<std::size_t>(k);
    s = std::max(s, std::abs(u.values[kk] + t - u0.values[kk]));
  }
  return s;
}

}  // namespace

double flow_residual(const ScalarField& u, const SolitonParams& params, double observe_radius) {
  const auto res = residual(u, params);
  const auto du = gradient(u);
  double r = 0.0;
  for (int k : observed_nodes(*u.grid, observe_radius)) {
    const auto kk = static_cast<std::size_t>(k);
    r = std::max(r, std::abs(res.values[kk]) / lorentz_factor(du[kk]));
  }
  return r;
}

FlowRun run_to(const FlowState& state, double t_end, const SolitonParams& params,
               const FlowOptions& options, int snapshots) {
  if (!(t_end >= state.time)) throw ArgumentError("t_end must not precede the current time");
  if (snapshots < 1) throw ArgumentError("need at least one snapshot");
  const auto nodes = observed_nodes(*state.field.grid, options.observe_radius);
  const ScalarField& u0 = state.field;
  const double t0 = state.time;

  FlowRun run;
  run.state = state;
  auto record = [&](double dt) {
    run.series.push_back({run.state.time, flow_residual(run.state.field, params, options.observe_radius),
                          drift(run.state.field, u0, run.state.time - t0, nodes), dt});
    run.snapshots.push_back(run.state.field);
  };
  if (t_end == t0) {
    record(0.0);
    return run;
  }
  std::vector<double> marks;
  for (int i = 0; i < snapshots; ++i) {
    marks.push_back(snapshots == 1 ? t_end : t0 + (t_end - t0) * i / (snapshots - 1));
  }
  std::size_t next_mark = 0;
  if (snapshots > 1) {
    record(0.0);
    next_mark = 1;
  }
  while (next_mark < marks.size()) {
    FlowOptions opt = options;
    opt.dt_max = std::min(options.dt_max, marks[next_mark] - run.state.time);
    run.state = step(run.state, params, opt);
    ++run.steps;
    if (marks[next_mark] - run.state.time <= 1e-12 * std::max(1.0, std::abs(t_end))) {
      run.state.time = marks[next_mark];
      record(run.state.dt_used);
      ++next_mark;
    }
  }
  return run;
}

void write_flow(const std::string& prefix, const FlowRun& run, const SolitonParams& params) {
  nlohmann::json series = nlohmann::json::array();
  for (std::size_t k = 0; k < run.series.size(); ++k) {
    const auto& s = run.series[k];
    const std::string csv = prefix + "_" + std::to_string(k) + ".csv";
    write_field(csv, run.snapshots[k], params);
    series.push_back({{"t", s.t}, {"r", s.r}, {"s", s.s}, {"dt", s.dt}, {"snapshot", csv}});
  }
  std::ofstream out(prefix + "_series.json");
  out << series.dump(1) << '\n';
}

}  // namespace soliton
