// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

#include "qwalk/simulation.hpp"

#include <algorithm>

#include "qwalk/errors.hpp"

namespace qwalk {

Observable parse_observable(const std::string& name) {
  if (name == "prob" || name == "position_distribution") return Observable::position_distribution;
  if (name == "momentum" || name == "momentum_distribution") return Observable::momentum_distribution;
  if (name == "variance" || name == "moments") return Observable::moments;
  if (name == "density" || name == "density_matrix_snapshot") return Observable::density_matrix_snapshot;
  if (name == "corr" || name == "correlation_profile") return Observable::correlation_profile;
  if (name == "wigner") return Observable::wigner;
  throw InvalidArgument("unknown observable '" + name + "'");
}

std::string observable_name(Observable o) {
  switch (o) {
    case Observable::position_distribution:
      return "prob";
    case Observable::momentum_distribution:
      return "momentum";
    case Observable::moments:
      return "variance";
    case Observable::density_matrix_snapshot:
      return "density";
    case Observable::correlation_profile:
      return "corr";
    case Observable::wigner:
      return "wigner";
  }
  return "";
}

WalkParameters fit_lattice(const WalkParameters& walk, const InitialState& init) {
  const int needed = required_halfwidth(init, walk.steps());
  if (needed <= walk.lattice_halfwidth()) return walk;
  return WalkParameters(walk.theta(), walk.steps(), needed, walk.alternating_shift());
}

std::vector<StepRecord> run_simulation(const SimulationConfig& config) {
  const WalkParameters walk = fit_lattice(config.walk, config.init);
  SimulationConfig adjusted = config;
  adjusted.walk = walk;
  return run_simulation(adjusted, DensityMatrix::from_pure(make_initial_state(config.init, walk)));
}

std::vector<StepRecord> run_simulation(const SimulationConfig& config, const DensityMatrix& initial) {
  const auto& obs = config.observables;
  const auto wants = [&](Observable o) { return obs.count(o) > 0; };
  for (int s : config.record_steps) {
    if (s < 0 || s > config.walk.steps()) {
      throw InvalidArgument("record step " + std::to_string(s) + " outside 0.." +
                            std::to_string(config.walk.steps()));
    }
  }
  const std::vector<double> k_grid =
      wants(Observable::momentum_distribution) ? uniform_k_grid(config.momentum_points) : std::vector<double>{};

  std::vector<StepRecord> records;
  auto observer = [&](int step, const DensityMatrix& rho) {
    if (!config.record_steps.empty() &&
        std::find(config.record_steps.begin(), config.record_steps.end(), step) == config.record_steps.end()) {
      return;
    }
    StepRecord r;
    r.step = step;
    if (wants(Observable::position_distribution)) r.probability = position_distribution(rho);
    if (wants(Observable::moments)) r.moments = moments(rho, step);
    if (wants(Observable::momentum_distribution)) r.momentum = momentum_distribution(rho, k_grid);
    if (wants(Observable::density_matrix_snapshot)) r.density = rho;
    if (wants(Observable::correlation_profile)) r.correlation = correlation_function(rho);
    if (wants(Observable::wigner)) r.wigner = wigner(rho, config.walk.theta(), config.wigner_points);
    records.push_back(std::move(r));
  };
  evolve_density(initial, config.walk, config.dec, observer);
  return records;
}

}  // namespace qwalk
