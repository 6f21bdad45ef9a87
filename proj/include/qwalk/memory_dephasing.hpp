// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file memory_dephasing.hpp
 * @brief Quasi-stationary dephasing: every realization of the walk runs
 *        with W_zeta = exp(i zeta sigma_z / 2) W for a fixed zeta drawn
 *        from f(zeta).
 *
 * For a walk started on site x0 each step displaces spin up by +1 and
 * spin down by -1 while imprinting exp(+-i zeta/2), so
 *   a_zeta(s, x) = exp(+i zeta (x - x0) / 2) <s, x| W^n |sigma, x0>.
 * Site populations and the local spin state are therefore independent of
 * zeta, while G(x, y) picks up chi(x - y) = E[exp(i zeta (x - y) / 2)].
 */

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "qwalk/coherence.hpp"
#include "qwalk/random.hpp"
#include "qwalk/walk_core.hpp"

namespace qwalk {

enum class DephasingFamily { gaussian, thermal_exponential, point_mass };

class DephasingDistribution {
 public:
  /// Zero-mean normal with standard deviation delta_zeta.
  static DephasingDistribution gaussian(double delta_zeta);
  /// exp(-zeta / delta_zeta) / delta_zeta on zeta > 0.
  static DephasingDistribution thermal(double delta_zeta);
  /// All weight on zeta = offset.
  static DephasingDistribution point_mass(double offset);

  DephasingFamily family() const noexcept { return family_; }
  double delta_zeta() const noexcept { return width_; }
  double offset() const noexcept { return offset_; }

  /// E[exp(i zeta d / 2)].
  complex characteristic(double d) const;
  double density(double zeta) const;
  double sample(Rng& rng) const;
  /// True when every draw gives the same zeta.
  bool degenerate() const noexcept { return family_ == DephasingFamily::point_mass || width_ == 0.0; }

 private:
  DephasingDistribution(DephasingFamily family, double width, double offset)
      : family_(family), width_(width), offset_(offset) {}

  DephasingFamily family_;
  double width_;
  double offset_;
};

/// Amplitudes of the zeta-shifted walk from a localized start, obtained
/// from the coherent walk by the site-dependent phase. Plain shift only.
SpinorLatticeState zeta_walk_amplitudes(const WalkParameters& walk, const InitialState& init,
                                        double zeta);

/// Direct evolution with W_zeta from an arbitrary initial state.
SpinorLatticeState evolve_zeta_walk(SpinorLatticeState state, const WalkParameters& walk, double zeta);

/// |chi(d)|.
double suppression_factor(const DephasingDistribution& dist, double d);

/// f(zeta)-averaged correlation G0(x, y) chi(x - y) for a localized start.
/// The phase of chi is kept, so the result is the ensemble average itself.
CorrelationProfile dephased_correlation(const WalkParameters& walk, const InitialState& init,
                                        const DephasingDistribution& dist);

/// f(zeta)-averaged position distribution for a localized start. Equals
/// the coherent distribution.
std::vector<double> dephased_position_distribution(const WalkParameters& walk,
                                                   const InitialState& init);

struct MonteCarloOptions {
  int samples = 10000;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct DephasingMonteCarlo {
  int samples = 0;
  /// Sample mean of the density matrix and its spin-traced correlation.
  Eigen::MatrixXcd density;
  CorrelationProfile correlation;
  /// Standard error of each correlation entry, sqrt(E|G - <G>|^2 / (N - 1)).
  Eigen::MatrixXd correlation_se;
  std::vector<double> position;
  std::vector<double> position_se;
};

/// Averages direct W_zeta evolutions over f(zeta). Chunks of samples use
/// their own seeded streams, so the result does not depend on `threads`.
DephasingMonteCarlo monte_carlo_dephasing(const WalkParameters& walk, const InitialState& init,
                                          const DephasingDistribution& dist,
                                          const MonteCarloOptions& options = {});

/// l = T2 / tau.
double coherence_length_from_T2(double t2, double tau);

struct WavepacketSplitOptions {
  int samples = 2000;
  std::uint64_t seed = 1;
};

/// Semiclassical f(zeta)-averaged position distribution of a packet
/// prepared in `band` at quasi momentum k with RMS width `width`, on the
/// lattice of `walk`. Each zeta splits it over the zeta-shifted bands with
/// weights |<s_b'(k - zeta/2)|s_band(k)>|^2, centers vg_b'(k - zeta/2) n and
/// widths sqrt(width^2 + (n omega'' / (2 width))^2).
std::vector<double> zeta_wavepacket_split(const WalkParameters& walk, double k, Band band,
                                          double width, const DephasingDistribution& dist,
                                          const WavepacketSplitOptions& options = {});

}  // namespace qwalk
