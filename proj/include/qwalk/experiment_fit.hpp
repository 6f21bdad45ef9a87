// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file experiment_fit.hpp
 * @brief Detection model, synthetic histograms and maximum-likelihood fits
 *        of (theta, p_C, p_S) to measured site histograms.
 *
 * The detector reports the true final site with probability `efficiency`
 * and otherwise a site displaced by an offset drawn from `kernel`, once per
 * walk.
 */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qwalk/density_evolution.hpp"

namespace qwalk {

struct DetectionModel {
  double efficiency = 0.9;
  /// (offset, weight) pairs for misdetected walks, weights summing to 1.
  std::vector<std::pair<int, double>> kernel{{-1, 0.5}, {1, 0.5}};

  void validate() const;
  /// Largest |offset| with nonzero weight (0 when efficiency is 1).
  int reach() const;
};

/// Probabilities on sites -halfwidth..halfwidth.
struct SiteDistribution {
  int halfwidth = 0;
  std::vector<double> p;

  double at(int x) const {
    return (x < -halfwidth || x > halfwidth) ? 0.0 : p[static_cast<std::size_t>(x + halfwidth)];
  }
};

/// eta P(x) + (1 - eta) sum_d kernel(d) P(x - d) on a lattice widened by reach().
SiteDistribution apply_detection(const SiteDistribution& truth, const DetectionModel& detection);

SiteDistribution predicted_distribution(const WalkParameters& walk, const DecoherenceParameters& dec,
                                        const InitialState& init, const DetectionModel& detection);

struct PositionHistogram {
  int steps = 0;
  std::map<int, std::int64_t> counts;
  std::string initial_state = "symmetric";
  std::string notes;

  std::int64_t total() const;
};

/// Draws `atoms` independent sites from `observed`. Reproducible for a seed.
PositionHistogram synthesize_histogram(const SiteDistribution& observed, int steps,
                                       std::int64_t atoms, std::uint64_t seed);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double v) const { return v >= lower && v <= upper; }
};

/// Equal-tailed exact binomial interval from Beta quantiles.
Interval clopper_pearson(std::int64_t k, std::int64_t n, double confidence);

struct FitSpec {
  int steps = 0;
  InitialState init = InitialState::symmetric();
  bool alternating_shift = false;
  DetectionModel detection;

  bool free_theta = true;
  bool free_spin = true;
  bool free_space = false;
  /// Values of fixed parameters.
  double theta = 0.5 * kPi;
  double p_spin = 0.0;
  double p_space = 0.0;

  double confidence = 0.68;
  double theta_grid_step = kPi / 64.0;
  /// Rate grid step when a single rate is free; both free use 5x coarser.
  double rate_grid_step = 0.01;
  int max_evaluations = 4000;
};

struct BinContribution {
  int site = 0;
  std::int64_t count = 0;
  double probability = 0.0;
  double log_likelihood = 0.0;
};

struct FitResult {
  double theta = 0.0;
  double p_spin = 0.0;
  double p_space = 0.0;
  double log_likelihood = 0.0;
  std::optional<Interval> theta_ci;
  std::optional<Interval> p_spin_ci;
  std::optional<Interval> p_space_ci;
  bool converged = false;
  int evaluations = 0;
  std::vector<int> excluded_sites;
  std::vector<std::string> warnings;
  std::vector<BinContribution> bins;
};

/// Thrown when the local refinement fails to converge; carries the best point found.
class FitConvergenceError : public std::runtime_error {
 public:
  FitConvergenceError(const std::string& what, FitResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const FitResult& best() const noexcept { return best_; }

 private:
  FitResult best_;
};

/// Maximum-likelihood fitter. The grid of model distributions used for
/// seeding is computed on the first fit and reused for later histograms.
class Fitter {
 public:
  explicit Fitter(FitSpec spec);

  const FitSpec& spec() const noexcept { return spec_; }

  FitResult fit(const PositionHistogram& hist);

  /// Observed-site model distribution at a parameter point.
  SiteDistribution model(double theta, double p_spin, double p_space) const;

  /// Multinomial log-likelihood over non-structural sites.
  double log_likelihood(const PositionHistogram& hist, double theta, double p_spin,
                        double p_space) const;

 private:
  struct GridPoint {
    double theta;
    double p_spin;
    double p_space;
    SiteDistribution dist;
  };

  void build_grid();
  std::vector<bool> structural_mask() const;

  FitSpec spec_;
  int halfwidth_;
  std::vector<GridPoint> grid_;
  std::vector<bool> allowed_;
};

FitResult fit(const PositionHistogram& hist, const FitSpec& spec);

}  // namespace qwalk
