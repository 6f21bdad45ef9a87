// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

#include "qwalk/density_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qwalk/errors.hpp"

namespace qwalk {

namespace {

bool rate_in_range(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

// Parity of x mapped to {0, 1} for negative x as well.
int parity_of(int x) { return x & 1; }

}  // namespace

DecoherenceParameters::DecoherenceParameters(double p_spin, double p_space)
    : p_spin_(p_spin), p_space_(p_space) {
  if (!rate_in_range(p_spin)) throw InvalidArgument("p_C must lie in [0, 1]");
  if (!rate_in_range(p_space)) throw InvalidArgument("p_S must lie in [0, 1]");
  // One ulp of slack so that e.g. 0.7 + 0.3 is accepted. The point (1, 1)
  // is the projective channel sum_{s,x} P_s P_x W rho W^+ P_x P_s.
  if (fully_decohered()) return;
  if (p_spin + p_space > 1.0 + 4.0 * std::numeric_limits<double>::epsilon()) {
    throw InvalidArgument("p_C + p_S must not exceed 1");
  }
}

// --- DensityMatrix -----------------------------------------------------------

DensityMatrix::DensityMatrix(Lattice lattice)
    : lattice_(lattice), rho_(Eigen::MatrixXcd::Zero(lattice.dim(), lattice.dim())) {
  if (lattice.halfwidth < 1) throw InvalidArgument("lattice halfwidth must be positive");
}

DensityMatrix DensityMatrix::from_pure(const SpinorLatticeState& state) {
  DensityMatrix out(state.lattice());
  const auto amps = state.data();
  const Eigen::Map<const Eigen::VectorXcd> v(amps.data(), static_cast<Eigen::Index>(amps.size()));
  out.rho_.noalias() = v * v.adjoint();
  out.scan_support();
  return out;
}

DensityMatrix DensityMatrix::from_matrix(Lattice lattice, Eigen::MatrixXcd rho) {
  DensityMatrix out(lattice);
  if (rho.rows() != lattice.dim() || rho.cols() != lattice.dim()) {
    throw InvalidArgument("density matrix has dimension " + std::to_string(rho.rows()) + "x" +
                          std::to_string(rho.cols()) + ", lattice needs " +
                          std::to_string(lattice.dim()));
  }
  out.rho_ = std::move(rho);
  out.scan_support();
  return out;
}

double DensityMatrix::trace() const { return rho_.trace().real(); }

double DensityMatrix::hermiticity_defect() const {
  return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
}

void DensityMatrix::scan_support() {
  const int n = lattice_.sites();
  std::vector<bool> occupied(static_cast<std::size_t>(n), false);
  for (Eigen::Index j = 0; j < rho_.cols(); ++j) {
    for (Eigen::Index i = 0; i < rho_.rows(); ++i) {
      if (rho_(i, j) != complex{}) {
        occupied[static_cast<std::size_t>(i % n)] = true;
        occupied[static_cast<std::size_t>(j % n)] = true;
      }
    }
  }
  lo_ = 1;
  hi_ = 0;
  parity_ = -1;
  bool first = true;
  bool mixed = false;
  for (int x = -lattice_.halfwidth; x <= lattice_.halfwidth; ++x) {
    if (!occupied[static_cast<std::size_t>(lattice_.site_index(x))]) continue;
    if (first) {
      lo_ = x;
      parity_ = parity_of(x);
      first = false;
    }
    hi_ = x;
    if (parity_of(x) != parity_) mixed = true;
  }
  if (mixed) parity_ = -1;
}

// Output entry (s, x; t, y) after the unitary step reads the input only at
// sites x - d_s and y - d_t, where d_s is the displacement of spin s, so
// whole output rows vanish whenever their source site lies outside the
// support window.
void DensityMatrix::step_into(DensityMatrix& out, const WalkParameters& walk,
                              const DecoherenceParameters& dec, int step_index) const {
  const DensityMatrix& rho = *this;
  const Lattice lat = lattice_;
  if (lat.halfwidth != walk.lattice_halfwidth()) {
    throw InvalidArgument("density matrix lattice does not match the walk parameters");
  }
  if (out.lattice_ != lat) throw InvalidArgument("output density matrix lattice differs");
  if (&out == this) throw InvalidArgument("kraus step cannot run in place");
  if (!out.empty()) {
    const int w = out.hi_ - out.lo_ + 1;
    for (Spin a : kSpins) {
      for (Spin b : kSpins) {
        out.rho_.block(lat.index(a, out.lo_), lat.index(b, out.lo_), w, w).setZero();
      }
    }
  }
  out.lo_ = 1;
  out.hi_ = 0;
  out.parity_ = -1;
  if (rho.empty()) return;

  const double c = std::cos(0.5 * walk.theta());
  const double s = std::sin(0.5 * walk.theta());
  // coin[s][s'] as in coin_matrix
  const double coin[2][2] = {{c, -s}, {s, c}};
  const int dir = shift_direction(walk, step_index);
  const int disp[2] = {dir, -dir};
  const int L = lat.halfwidth;
  const int N = lat.sites();

  const int lo = rho.support_lo();
  const int hi = rho.support_hi();
  const int stride = rho.parity() >= 0 ? 2 : 1;

  // Probability that would be pushed off the lattice.
  for (int si = 0; si < 2; ++si) {
    for (int xs : {lo, hi}) {
      const int x = xs + disp[si];
      if (lat.contains(x)) continue;
      double leak = 0.0;
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          leak += coin[si][a] * coin[si][b] *
                  rho_(a * N + xs + L, b * N + xs + L).real();
        }
      }
      if (leak != 0.0) {
        throw TruncationError("step " + std::to_string(step_index) + " moves probability " +
                              std::to_string(leak) + " past lattice edge " + std::to_string(x));
      }
    }
  }

  const double pc = dec.p_spin();
  const double ps = dec.p_space();
  const double mask_spin = 1.0 - pc;          // other spin, same site
  const double mask_site = 1.0 - ps;          // same spin, other site
  const double mask_both = dec.fully_decohered() ? 0.0 : 1.0 - pc - ps;     // other spin, other site

  const Eigen::MatrixXcd& A = rho_;
  Eigen::MatrixXcd& B = out.rho_;

  for (int ti = 0; ti < 2; ++ti) {
    for (int yt = lo; yt <= hi; yt += stride) {
      const int y = yt + disp[ti];
      if (!lat.contains(y)) continue;
      const Eigen::Index col = ti * N + y + L;
      for (int si = 0; si < 2; ++si) {
        const double w00 = coin[si][0] * coin[ti][0];
        const double w01 = coin[si][0] * coin[ti][1];
        const double w10 = coin[si][1] * coin[ti][0];
        const double w11 = coin[si][1] * coin[ti][1];
        const complex* a0 = &A(0, yt + L);      // column (up, yt)
        const complex* a1 = &A(0, N + yt + L);  // column (down, yt)
        complex* b = &B(0, col);
        for (int xs = lo; xs <= hi; xs += stride) {
          const int x = xs + disp[si];
          if (!lat.contains(x)) continue;
          const int r0 = xs + L;
          const int r1 = N + xs + L;
          complex v = w00 * a0[r0] + w01 * a1[r0] + w10 * a0[r1] + w11 * a1[r1];
          if (x == y) {
            if (si != ti) v *= mask_spin;
          } else {
            v *= (si == ti) ? mask_site : mask_both;
          }
          b[si * N + x + L] = v;
        }
      }
    }
  }

  // A clipped edge was checked to be empty, so the next occupied site of
  // the right parity is one stride further in.
  out.lo_ = lo - 1 < -L ? lo - 1 + stride : lo - 1;
  out.hi_ = hi + 1 > L ? hi + 1 - stride : hi + 1;
  out.parity_ = rho.parity() >= 0 ? 1 - rho.parity() : -1;
}

DensityMatrix kraus_step(const DensityMatrix& rho, const WalkParameters& walk,
                         const DecoherenceParameters& dec, int step_index) {
  DensityMatrix out(rho.lattice());
  rho.step_into(out, walk, dec, step_index);
  return out;
}

DensityMatrix evolve_density(DensityMatrix rho, const WalkParameters& walk,
                             const DecoherenceParameters& dec, const StepObserver& observer) {
  if (observer) observer(0, rho);
  DensityMatrix next(rho.lattice());
  for (int n = 0; n < walk.steps(); ++n) {
    rho.step_into(next, walk, dec, n);
    std::swap(rho, next);
    if (observer) observer(n + 1, rho);
  }
  return rho;
}

std::vector<double> position_distribution(const DensityMatrix& rho) {
  const Lattice lat = rho.lattice();
  std::vector<double> p(static_cast<std::size_t>(lat.sites()), 0.0);
  for (int x = -lat.halfwidth; x <= lat.halfwidth; ++x) {
    const double v = rho(Spin::up, x, Spin::up, x).real() + rho(Spin::down, x, Spin::down, x).real();
    p[static_cast<std::size_t>(lat.site_index(x))] = std::max(v, 0.0);
  }
  return p;
}

WalkMoments moments(std::span<const double> distribution, int halfwidth, int step) {
  if (distribution.size() != static_cast<std::size_t>(2 * halfwidth + 1)) {
    throw InvalidArgument("distribution length does not match the lattice");
  }
  double norm = 0.0;
  double m1 = 0.0;
  for (std::size_t i = 0; i < distribution.size(); ++i) {
    const double x = static_cast<double>(static_cast<int>(i) - halfwidth);
    norm += distribution[i];
    m1 += x * distribution[i];
  }
  if (norm <= 0.0) throw InvalidArgument("distribution has zero total probability");
  const double mean = m1 / norm;
  double var = 0.0;
  for (std::size_t i = 0; i < distribution.size(); ++i) {
    const double dx = static_cast<double>(static_cast<int>(i) - halfwidth) - mean;
    var += dx * dx * distribution[i];
  }
  return {mean, std::max(var / norm, 0.0), step};
}

WalkMoments moments(const DensityMatrix& rho, int step) {
  const auto p = position_distribution(rho);
  return moments(p, rho.lattice().halfwidth, step);
}

double diffusion_constant(double p_spin) {
  if (!std::isfinite(p_spin) || p_spin < 0.0 || p_spin > 1.0) {
    throw InvalidArgument("p_C must lie in [0, 1]");
  }
  if (p_spin == 0.0) throw SingularityError("diffusion constant diverges for the coherent walk");
  const double q = (1.0 - p_spin) * (1.0 - p_spin);
  return (1.0 + q) / (1.0 - q);
}

namespace {

// F(a, j) = exp(-i k_a x_j) / sqrt(2 pi) over the occupied window.
Eigen::MatrixXcd fourier_rows(std::span<const double> k_grid, int lo, int hi) {
  const double scale = 1.0 / std::sqrt(kTwoPi);
  Eigen::MatrixXcd F(static_cast<Eigen::Index>(k_grid.size()), hi - lo + 1);
  for (Eigen::Index a = 0; a < F.rows(); ++a) {
    for (int x = lo; x <= hi; ++x) {
      F(a, x - lo) = std::polar(scale, -k_grid[static_cast<std::size_t>(a)] * x);
    }
  }
  return F;
}

}  // namespace

Eigen::MatrixXcd momentum_block(const DensityMatrix& rho, Spin s, Spin t,
                                std::span<const double> k_grid) {
  const auto M = static_cast<Eigen::Index>(k_grid.size());
  if (rho.empty()) return Eigen::MatrixXcd::Zero(M, M);
  const Lattice lat = rho.lattice();
  const int lo = rho.support_lo();
  const int hi = rho.support_hi();
  const int w = hi - lo + 1;
  const Eigen::MatrixXcd F = fourier_rows(k_grid, lo, hi);
  const auto block = rho.matrix().block(lat.index(s, lo), lat.index(t, lo), w, w);
  return F * block * F.adjoint();
}

std::vector<double> MomentumDistribution::total() const {
  std::vector<double> out(k.size(), 0.0);
  for (std::size_t a = 0; a < k.size(); ++a) out[a] = density[0][a] + density[1][a];
  return out;
}

MomentumDistribution momentum_distribution(const DensityMatrix& rho, std::span<const double> k_grid) {
  MomentumDistribution out;
  out.k.assign(k_grid.begin(), k_grid.end());
  for (auto& d : out.density) d.assign(k_grid.size(), 0.0);
  if (rho.empty()) return out;
  const Lattice lat = rho.lattice();
  const int lo = rho.support_lo();
  const int hi = rho.support_hi();
  const int w = hi - lo + 1;
  const Eigen::MatrixXcd F = fourier_rows(k_grid, lo, hi);
  for (Spin s : kSpins) {
    const auto block = rho.matrix().block(lat.index(s, lo), lat.index(s, lo), w, w);
    const Eigen::MatrixXcd right = block * F.adjoint();  // w x M
    auto& dens = out.density[static_cast<std::size_t>(index_of(s))];
    for (Eigen::Index a = 0; a < F.rows(); ++a) {
      dens[static_cast<std::size_t>(a)] = (F.row(a) * right.col(a)).value().real();
    }
  }
  return out;
}

}  // namespace qwalk
