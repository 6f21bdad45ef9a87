// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

#include "qwalk/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qwalk/errors.hpp"

namespace qwalk {

namespace {

int wrap_index(int a, int m) {
  const int r = a % m;
  return r < 0 ? r + m : r;
}

Eigen::Vector2cd as_vector(const Spinor& u) { return {u[0], u[1]}; }

}  // namespace

int default_wigner_points(const Lattice& lattice) { return 4 * lattice.sites(); }

double WignerGrid::minimum() const {
  double m = std::numeric_limits<double>::infinity();
  for (int s = 0; s < 2; ++s) m = std::min(m, spin[s][s].real().minCoeff());
  return m;
}

double WignerGrid::hermiticity_defect() const {
  double d = 0.0;
  for (int s = 0; s < 2; ++s) d = std::max(d, spin[s][s].imag().cwiseAbs().maxCoeff());
  d = std::max(d, (spin[0][1] - spin[1][0].conjugate()).cwiseAbs().maxCoeff());
  return d;
}

double WignerGrid::total_norm() const {
  return k_weight() * (spin[0][0].real().sum() + spin[1][1].real().sum());
}

WignerGrid wigner(const DensityMatrix& rho, double theta, int k_points) {
  const Lattice lat = rho.lattice();
  const int M = k_points == 0 ? default_wigner_points(lat) : k_points;
  if (M < 2 * lat.sites() || M % 2 != 0) {
    throw ResolutionError("Wigner grid needs an even number of at least " +
                          std::to_string(2 * lat.sites()) + " momenta, got " + std::to_string(M));
  }
  const int half = M / 2;  // period in x and number of k' nodes
  const double dk = kTwoPi / M;

  WignerGrid out;
  out.theta = normalize_angle(theta);
  out.k_values = uniform_k_grid(M);
  const int x_lo = -(half / 2);
  out.x_values.resize(static_cast<std::size_t>(half));
  for (int i = 0; i < half; ++i) out.x_values[static_cast<std::size_t>(i)] = x_lo + i;

  // k' = j dk for j in [j_lo, j_lo + half). With M % 4 == 0 the node
  // j = -M/4 stands for both trapezoid ends k' = -pi/2 and +pi/2, which
  // share the same exp(-2ixk'), and its value is their average.
  const bool trapezoid = M % 4 == 0;
  const int j_lo = trapezoid ? -(M / 4) : -((half - 1) / 2);

  // E(i, jj) = exp(-2 i x k'_j) = exp(-2 pi i x j / half).
  Eigen::MatrixXcd E(half, half);
  for (int i = 0; i < half; ++i) {
    for (int jj = 0; jj < half; ++jj) {
      const long long xj = static_cast<long long>(x_lo + i) * (j_lo + jj);
      const int r = static_cast<int>(((xj % half) + half) % half);
      E(i, jj) = std::polar(1.0, -kTwoPi * r / half);
    }
  }

  const double scale = dk / kPi;
  Eigen::MatrixXcd G(half, M);
  for (Spin s : kSpins) {
    for (Spin t : kSpins) {
      const Eigen::MatrixXcd R = momentum_block(rho, s, t, out.k_values);
      for (int a = 0; a < M; ++a) {
        for (int jj = 0; jj < half; ++jj) {
          const int j = j_lo + jj;
          complex v = R(wrap_index(a - j, M), wrap_index(a + j, M));
          if (trapezoid && jj == 0) {
            v = 0.5 * (v + R(wrap_index(a + j, M), wrap_index(a - j, M)));
          }
          G(jj, a) = v;
        }
      }
      out.spin[index_of(s)][index_of(t)] = scale * (E * G);
    }
  }

  for (Band b : kBands) {
    Eigen::MatrixXd& wb = out.band[index_of(b)];
    wb.resize(half, M);
    for (int a = 0; a < M; ++a) {
      const Eigen::Vector2cd u = as_vector(eigenspinor(out.theta, out.k_values[a], b));
      for (int i = 0; i < half; ++i) {
        complex acc{};
        for (int s = 0; s < 2; ++s) {
          for (int t = 0; t < 2; ++t) acc += std::conj(u(s)) * out.spin[s][t](i, a) * u(t);
        }
        wb(i, a) = acc.real();
      }
    }
  }
  return out;
}

WignerMarginals marginals(const WignerGrid& grid) {
  WignerMarginals m;
  m.x_values = grid.x_values;
  m.k_values = grid.k_values;
  const double w = grid.k_weight();
  const auto nx = static_cast<Eigen::Index>(grid.x_values.size());
  m.position.resize(static_cast<std::size_t>(nx));
  for (Eigen::Index i = 0; i < nx; ++i) {
    m.position[static_cast<std::size_t>(i)] =
        w * (grid.spin[0][0].row(i).real().sum() + grid.spin[1][1].row(i).real().sum());
  }
  for (int s = 0; s < 2; ++s) {
    const Eigen::VectorXd col = grid.spin[s][s].real().colwise().sum().transpose();
    m.momentum[s].assign(col.data(), col.data() + col.size());
  }
  for (int b = 0; b < 2; ++b) {
    const Eigen::VectorXd col = grid.band[b].colwise().sum().transpose();
    m.band_momentum[b].assign(col.data(), col.data() + col.size());
    const Eigen::VectorXd row = w * grid.band[b].rowwise().sum();
    m.band_position[b].assign(row.data(), row.data() + row.size());
    for (double v : m.band_position[b]) {
      if (v < -1e-12) m.band_position_negative = true;
    }
  }
  return m;
}

std::array<std::vector<double>, 2> band_filling(const DensityMatrix& rho, double theta,
                                                std::span<const double> k_grid) {
  const std::size_t M = k_grid.size();
  std::array<std::vector<double>, 2> out{std::vector<double>(M, 0.0), std::vector<double>(M, 0.0)};
  if (rho.empty()) return out;
  const Lattice lat = rho.lattice();
  const int lo = rho.support_lo();
  const int hi = rho.support_hi();
  const int w = hi - lo + 1;
  const double norm = 1.0 / std::sqrt(kTwoPi);
  // f_s(k) = sum_x exp(-ikx)/sqrt(2pi) rho_{(s,x),(t,y)} exp(iky)/sqrt(2pi), diagonal in k only.
  Eigen::VectorXcd phase(w);
  for (std::size_t a = 0; a < M; ++a) {
    const double k = k_grid[a];
    for (int x = lo; x <= hi; ++x) phase(x - lo) = std::polar(norm, -k * x);
    Eigen::Matrix2cd r;
    for (Spin s : kSpins) {
      for (Spin t : kSpins) {
        const auto block = rho.matrix().block(lat.index(s, lo), lat.index(t, lo), w, w);
        r(index_of(s), index_of(t)) = phase.transpose() * block * phase.conjugate();
      }
    }
    for (Band b : kBands) {
      const Eigen::Vector2cd u = as_vector(eigenspinor(theta, k, b));
      out[static_cast<std::size_t>(index_of(b))][a] = (u.adjoint() * r * u).value().real();
    }
  }
  return out;
}

}  // namespace qwalk
