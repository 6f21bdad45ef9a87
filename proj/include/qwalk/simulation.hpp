// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file simulation.hpp
 * @brief Runs a decohered walk and records the requested observables.
 */

#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qwalk/coherence.hpp"
#include "qwalk/density_evolution.hpp"
#include "qwalk/wigner.hpp"

namespace qwalk {

enum class Observable {
  position_distribution,
  momentum_distribution,
  moments,
  density_matrix_snapshot,
  correlation_profile,
  wigner,
};

/// Accepts the long names above and the short forms prob, momentum,
/// variance, density, corr, wigner. Throws InvalidArgument otherwise.
Observable parse_observable(const std::string& name);
std::string observable_name(Observable o);

struct SimulationConfig {
  explicit SimulationConfig(WalkParameters walk_, DecoherenceParameters dec_ = {},
                            InitialState init_ = InitialState::symmetric())
      : walk(walk_), dec(dec_), init(init_) {}

  WalkParameters walk;
  DecoherenceParameters dec;
  InitialState init;
  std::set<Observable> observables{Observable::position_distribution};
  /// Steps at which to record; empty records every step 0..n.
  std::vector<int> record_steps;
  int momentum_points = 1024;
  /// 0 selects the default Wigner grid of the lattice.
  int wigner_points = 0;
};

struct StepRecord {
  int step = 0;
  std::optional<std::vector<double>> probability;
  std::optional<WalkMoments> moments;
  std::optional<MomentumDistribution> momentum;
  std::optional<DensityMatrix> density;
  std::optional<CorrelationProfile> correlation;
  std::optional<WignerGrid> wigner;
};

/// Lattice for `walk` grown, if needed, to hold the initial state.
WalkParameters fit_lattice(const WalkParameters& walk, const InitialState& init);

std::vector<StepRecord> run_simulation(const SimulationConfig& config);

/// Same with an explicit initial density matrix on the walk's lattice.
std::vector<StepRecord> run_simulation(const SimulationConfig& config, const DensityMatrix& initial);

}  // namespace qwalk
