// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file density_evolution.hpp
 * @brief Density-matrix evolution under spin (p_C) and spatial (p_S)
 *        decoherence applied at the end of every step.
 *
 * One step maps rho to
 *   (1 - p_C - p_S) W rho W^+  +  p_C sum_s P_s W rho W^+ P_s
 *                              +  p_S sum_x P_x W rho W^+ P_x,
 * which is evaluated as a unitary step followed by an elementwise mask on
 * rho_{(s,x),(s',x')}:
 *
 *   same spin, same site            1
 *   other spin, same site           1 - p_C
 *   same spin, other site           1 - p_S
 *   other spin, other site          1 - p_C - p_S
 *
 * The single point p_C = p_S = 1 outside p_C + p_S <= 1 is admitted and
 * means projection onto spin and site after every step: every coherence
 * is removed, so the mixed factor is 0 there.
 */

#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "qwalk/walk_core.hpp"

namespace qwalk {

/// Per-step spin and spatial decoherence rates, p_C + p_S <= 1 or p_C = p_S = 1.
class DecoherenceParameters {
 public:
  DecoherenceParameters() = default;
  DecoherenceParameters(double p_spin, double p_space);

  double p_spin() const noexcept { return p_spin_; }
  double p_space() const noexcept { return p_space_; }
  bool coherent() const noexcept { return p_spin_ == 0.0 && p_space_ == 0.0; }
  bool fully_decohered() const noexcept { return p_spin_ == 1.0 && p_space_ == 1.0; }

 private:
  double p_spin_ = 0.0;
  double p_space_ = 0.0;
};

/// Dense density matrix over the spin x lattice basis of walk_core.hpp.
///
/// Tracks a support window [support_lo, support_hi] of sites outside which
/// every entry is exactly zero, and whether all occupied sites share one
/// parity. Evolution only touches the window.
class DensityMatrix {
 public:
  explicit DensityMatrix(Lattice lattice);

  static DensityMatrix from_pure(const SpinorLatticeState& state);
  static DensityMatrix from_matrix(Lattice lattice, Eigen::MatrixXcd rho);

  const Lattice& lattice() const noexcept { return lattice_; }
  const Eigen::MatrixXcd& matrix() const noexcept { return rho_; }

  complex operator()(Spin s, int x, Spin t, int y) const {
    return rho_(lattice_.index(s, x), lattice_.index(t, y));
  }

  double trace() const;
  /// Largest |rho - rho^+| entry.
  double hermiticity_defect() const;

  int support_lo() const noexcept { return lo_; }
  int support_hi() const noexcept { return hi_; }
  /// 0 or 1 when every occupied site has that parity, -1 otherwise.
  int parity() const noexcept { return parity_; }
  bool empty() const noexcept { return lo_ > hi_; }

  /// kraus_step writing into `out`, whose storage is reused. `out` must
  /// live on the same lattice and must not alias *this.
  void step_into(DensityMatrix& out, const WalkParameters& walk, const DecoherenceParameters& dec,
                 int step_index) const;

 private:
  void scan_support();

  Lattice lattice_;
  Eigen::MatrixXcd rho_;
  int lo_ = 1;
  int hi_ = 0;
  int parity_ = -1;
};

/// One decohered step. Throws TruncationError on lattice overflow and
/// InvalidArgument when the lattice does not match `walk`.
DensityMatrix kraus_step(const DensityMatrix& rho, const WalkParameters& walk,
                         const DecoherenceParameters& dec, int step_index);

/// Called with the number of steps applied so far (0 for the initial state).
using StepObserver = std::function<void(int step, const DensityMatrix& rho)>;

/// Runs walk.steps() Kraus steps, invoking `observer` before the first step
/// and after each one. Returns the final state.
DensityMatrix evolve_density(DensityMatrix rho, const WalkParameters& walk,
                             const DecoherenceParameters& dec, const StepObserver& observer = {});

/// P(x) = sum_s rho_{(s,x),(s,x)}, indexed by site_index(x). Roundoff
/// negatives are clamped to zero here and nowhere else.
std::vector<double> position_distribution(const DensityMatrix& rho);

struct WalkMoments {
  double mean = 0.0;
  double variance = 0.0;
  int step = 0;
};

WalkMoments moments(const DensityMatrix& rho, int step);
WalkMoments moments(std::span<const double> distribution, int halfwidth, int step);

/// Asymptotic diffusion constant [1 + (1 - p_C)^2] / [1 - (1 - p_C)^2] of
/// the spin-decohered walk. Throws SingularityError at p_C = 0.
double diffusion_constant(double p_spin);

/// <k_a, s| rho |k_b, t> for every pair of grid momenta, with
/// <x|k> = exp(ikx) / sqrt(2 pi).
Eigen::MatrixXcd momentum_block(const DensityMatrix& rho, Spin s, Spin t,
                                std::span<const double> k_grid);

/// Momentum density <k, s| rho |k, s> on the grid, one row per spin.
struct MomentumDistribution {
  std::vector<double> k;
  std::array<std::vector<double>, 2> density;  // [spin][k index]

  /// Spin-summed density.
  std::vector<double> total() const;
};

MomentumDistribution momentum_distribution(const DensityMatrix& rho, std::span<const double> k_grid);

}  // namespace qwalk
