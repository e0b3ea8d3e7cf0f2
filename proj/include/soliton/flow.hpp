#pragma once

#include <limits>
#include <string>
#include <vector>

#include "soliton/field.hpp"
#include "soliton/geometry.hpp"
#include "soliton/params.hpp"

namespace soliton {

/// Graph u(., t) evolving by u_t = w (div(Du / w) - H) = a^{ij} u_ij - H w.
struct FlowState {
  ScalarField field;
  double time = 0.0;
  double forcing = 2.0;
  double dt_used = 0.0;
};

/// Starts at t = 0 with forcing H = C.
FlowState initial_state(ScalarField field, const SolitonParams& params);

struct FlowOptions {
  /// dt <= cfl h^2 w_min^2.
  double cfl = 0.25;
  double dt_max = std::numeric_limits<double>::infinity();
  double dt_min = 1e-12;
  double eps_space = kSpacelikeEps;
  /// Diagnostics use interior nodes with |x| <= observe_radius (all interior
  /// nodes when not positive).
  double observe_radius = 0.0;
};

/// w (div(Du / w) - H) at every unknown node.
std::vector<double> speed_field(const ScalarField& u, double forcing);

double stable_dt(const ScalarField& u, double cfl);

/// One explicit Euler step. Interior nodes follow the flow; nodes with a
/// boundary arm and the boundary values translate down as u - dt. The step
/// is halved until the result is spacelike (FlowBlowup below dt_min).
FlowState step(const FlowState& state, const SolitonParams& params, const FlowOptions& options = {});

struct FlowSample {
  double t = 0.0;
  double r = 0.0;  // max |div(Du / w) - (C - 1/w)|
  double s = 0.0;  // max |u(t) + t - u(0)|
  double dt = 0.0;
};

struct FlowRun {
  FlowState state;
  std::vector<FlowSample> series;
  std::vector<ScalarField> snapshots;
  long steps = 0;
};

/// Advances to t_end, recording `snapshots` equally spaced samples from the
/// start time to t_end inclusive (the steps land on them exactly).
FlowRun run_to(const FlowState& state, double t_end, const SolitonParams& params,
               const FlowOptions& options = {}, int snapshots = 5);

/// Soliton residual max |div(Du / w) - (C - 1/w)| over the observed nodes.
double flow_residual(const ScalarField& u, const SolitonParams& params, double observe_radius = 0.0);

/// One CSV per snapshot (`<prefix>_<k>.csv`) plus `<prefix>_series.json`.
void write_flow(const std::string& prefix, const FlowRun& run, const SolitonParams& params);

}  // namespace soliton
