// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file wigner.hpp
 * @brief Discrete rotational Wigner function on integer x and a uniform
 *        quasi-momentum grid.
 *
 *   W_{s,t}(x, k) = (1/pi) int_{-pi/2}^{pi/2} dk' exp(-2i x k') <k-k', s| rho |k+k', t>
 *
 * On an M-point grid the k' integral runs over grid offsets j * 2pi/M with
 * k +- k' wrapped into the zone (trapezoid ends when M % 4 == 0, midpoint
 * set when M % 4 == 2). The result is periodic in x with period M/2, so
 * the grid covers one full period of x; sites beyond the lattice carry
 * zero weight as long as M >= 2(2L + 1).
 */

#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "qwalk/density_evolution.hpp"

namespace qwalk {

struct WignerGrid {
  double theta = 0.0;
  std::vector<int> x_values;
  std::vector<double> k_values;
  /// spin[s][t](i, a) = W_{s,t}(x_values[i], k_values[a]).
  std::array<std::array<Eigen::MatrixXcd, 2>, 2> spin;
  /// band[b](i, a) = <s_b(k)| W(x, k) |s_b(k)>.
  std::array<Eigen::MatrixXd, 2> band;

  double k_weight() const { return kTwoPi / static_cast<double>(k_values.size()); }
  /// Smallest value of W_{up,up}, W_{down,down} over the grid.
  double minimum() const;
  /// Largest |Im W_{s,s}| and |W_{s,t} - conj(W_{t,s})| over the grid.
  double hermiticity_defect() const;
  /// sum_x int dk sum_s W_{s,s}.
  double total_norm() const;
};

/// Default grid size 4(2L + 1).
int default_wigner_points(const Lattice& lattice);

/// Throws ResolutionError when k_points < 2(2L + 1) (or is odd).
WignerGrid wigner(const DensityMatrix& rho, double theta, int k_points = 0);

struct WignerMarginals {
  std::vector<int> x_values;
  std::vector<double> k_values;
  /// int dk sum_s W_{s,s}(x, k).
  std::vector<double> position;
  /// sum_x W_{s,s}(x, k) for each spin.
  std::array<std::vector<double>, 2> momentum;
  /// sum_x W_b(x, k): band populations per k, a genuine density.
  std::array<std::vector<double>, 2> band_momentum;
  /// int dk W_b(x, k): may be negative and is not a probability.
  std::array<std::vector<double>, 2> band_position;
  bool band_position_negative = false;
};

WignerMarginals marginals(const WignerGrid& grid);

/// <s_b(k)| rho(k, k) |s_b(k)> per band on the given grid.
std::array<std::vector<double>, 2> band_filling(const DensityMatrix& rho, double theta,
                                                std::span<const double> k_grid);

}  // namespace qwalk
