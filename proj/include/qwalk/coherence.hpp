// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file coherence.hpp
 * @brief Single-particle correlation function G(x, y) = sum_s rho_{(s,x),(s,y)}
 *        and coherence-length estimates from its antidiagonal.
 */

#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "qwalk/density_evolution.hpp"

namespace qwalk {

struct CorrelationProfile {
  int halfwidth = 0;
  /// values(x + L, y + L) = G(x, y).
  Eigen::MatrixXcd values;
  std::optional<double> coherence_length;

  complex operator()(int x, int y) const { return values(x + halfwidth, y + halfwidth); }
  /// |G(x, -x)| for x = -L..L.
  std::vector<double> antidiagonal() const;
  /// sum over x != y of |G(x, y)|.
  double off_diagonal_mass() const;
};

CorrelationProfile correlation_function(const DensityMatrix& rho);

struct CoherenceFitOptions {
  /// Points with |G0(x, -x)| below floor * max|G0(x, -x)| are skipped.
  double floor = 1e-6;
  /// Points with |G(x, -x)| below this absolute level are treated as
  /// roundoff and skipped.
  double roundoff = 1e-13;
};

/// Fits log(|G(x,-x)| / |G0(x,-x)|) = -2|x| / l by least squares through the
/// origin. Returns +infinity when the data show no decay. Throws
/// InsufficientDataError with fewer than three usable points.
double fit_coherence_length(const CorrelationProfile& profile, const CorrelationProfile& reference,
                            const CoherenceFitOptions& options = {});

/// l = 1 / log(1 / sqrt(1 - p_C)), 0 at p_C = 1. Throws SingularityError at p_C = 0.
double model_coherence_length(double p_spin);

}  // namespace qwalk
