// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

#include "qwalk/coherence.hpp"

#include <cmath>
#include <limits>

#include "qwalk/errors.hpp"

namespace qwalk {

std::vector<double> CorrelationProfile::antidiagonal() const {
  std::vector<double> out(static_cast<std::size_t>(2 * halfwidth + 1));
  for (int x = -halfwidth; x <= halfwidth; ++x) {
    out[static_cast<std::size_t>(x + halfwidth)] = std::abs((*this)(x, -x));
  }
  return out;
}

double CorrelationProfile::off_diagonal_mass() const {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      if (i != j) acc += std::abs(values(i, j));
    }
  }
  return acc;
}

CorrelationProfile correlation_function(const DensityMatrix& rho) {
  const Lattice lat = rho.lattice();
  const int n = lat.sites();
  CorrelationProfile out;
  out.halfwidth = lat.halfwidth;
  out.values = rho.matrix().block(0, 0, n, n) + rho.matrix().block(n, n, n, n);
  return out;
}

double fit_coherence_length(const CorrelationProfile& profile, const CorrelationProfile& reference,
                            const CoherenceFitOptions& options) {
  if (profile.halfwidth != reference.halfwidth) {
    throw InvalidArgument("profile and reference live on different lattices");
  }
  const auto g = profile.antidiagonal();
  const auto g0 = reference.antidiagonal();
  double g0_max = 0.0;
  for (double v : g0) g0_max = std::max(g0_max, v);
  const double threshold = options.floor * g0_max;

  double sxx = 0.0;
  double sxy = 0.0;
  int used = 0;
  for (int x = -profile.halfwidth; x <= profile.halfwidth; ++x) {
    if (x == 0) continue;
    const auto i = static_cast<std::size_t>(x + profile.halfwidth);
    if (g0[i] <= threshold || g0[i] == 0.0) continue;
    if (g[i] <= options.roundoff) continue;
    const double d = 2.0 * std::abs(x);
    const double y = std::log(g[i] / g0[i]);
    sxx += d * d;
    sxy += d * y;
    ++used;
  }
  if (used < 3) {
    throw InsufficientDataError("coherence fit needs at least 3 usable points, found " +
                                std::to_string(used));
  }
  const double slope = sxy / sxx;
  if (slope >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / slope;
}

double model_coherence_length(double p_spin) {
  if (!std::isfinite(p_spin) || p_spin < 0.0 || p_spin > 1.0) {
    throw InvalidArgument("p_C must lie in [0, 1]");
  }
  if (p_spin == 0.0) throw SingularityError("coherence length diverges for the coherent walk");
  if (p_spin == 1.0) return 0.0;
  return 1.0 / std::log(1.0 / std::sqrt(1.0 - p_spin));
}

}  // namespace qwalk
