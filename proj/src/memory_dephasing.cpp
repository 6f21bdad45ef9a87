// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

#include "qwalk/memory_dephasing.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "qwalk/errors.hpp"

namespace qwalk {

namespace {

void require_width(double width) {
  if (!std::isfinite(width) || width < 0.0) {
    throw InvalidArgument("dephasing width must be finite and nonnegative");
  }
}

bool is_localized(const InitialState& init) {
  return init.kind == InitialKind::localized_up || init.kind == InitialKind::localized_symmetric ||
         init.kind == InitialKind::localized_spinor;
}

void require_localized_plain(const WalkParameters& walk, const InitialState& init) {
  if (!is_localized(init)) {
    throw InvalidArgument("the closed-form dephasing path needs a localized initial state");
  }
  if (walk.alternating_shift()) {
    throw InvalidArgument("the closed-form dephasing path needs the plain shift");
  }
}

// Samples per independently seeded stream.
constexpr int kChunk = 256;

struct ChunkSums {
  Eigen::MatrixXcd rho;
  Eigen::MatrixXd g_abs2;
  std::vector<double> p2;
};

void add_into(ChunkSums& acc, const ChunkSums& other) {
  acc.rho += other.rho;
  acc.g_abs2 += other.g_abs2;
  for (std::size_t i = 0; i < acc.p2.size(); ++i) acc.p2[i] += other.p2[i];
}

// Pairwise reduction over [lo, hi) in a fixed order.
ChunkSums reduce_pairwise(std::vector<ChunkSums>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return std::move(parts[lo]);
  const std::size_t mid = lo + (hi - lo) / 2;
  ChunkSums left = reduce_pairwise(parts, lo, mid);
  const ChunkSums right = reduce_pairwise(parts, mid, hi);
  add_into(left, right);
  return left;
}

}  // namespace

DephasingDistribution DephasingDistribution::gaussian(double delta_zeta) {
  require_width(delta_zeta);
  return {DephasingFamily::gaussian, delta_zeta, 0.0};
}

DephasingDistribution DephasingDistribution::thermal(double delta_zeta) {
  require_width(delta_zeta);
  return {DephasingFamily::thermal_exponential, delta_zeta, 0.0};
}

DephasingDistribution DephasingDistribution::point_mass(double offset) {
  if (!std::isfinite(offset)) throw InvalidArgument("dephasing offset must be finite");
  return {DephasingFamily::point_mass, 0.0, offset};
}

complex DephasingDistribution::characteristic(double d) const {
  switch (family_) {
    case DephasingFamily::gaussian:
      return {std::exp(-width_ * width_ * d * d / 8.0), 0.0};
    case DephasingFamily::thermal_exponential:
      return 1.0 / complex{1.0, -0.5 * width_ * d};
    case DephasingFamily::point_mass:
      return std::polar(1.0, 0.5 * offset_ * d);
  }
  throw InvalidArgument("unsupported dephasing family");
}

double DephasingDistribution::density(double zeta) const {
  switch (family_) {
    case DephasingFamily::gaussian:
      if (width_ == 0.0) throw InvalidArgument("zero-width Gaussian has no density");
      return std::exp(-0.5 * zeta * zeta / (width_ * width_)) / (std::sqrt(kTwoPi) * width_);
    case DephasingFamily::thermal_exponential:
      if (width_ == 0.0) throw InvalidArgument("zero-width thermal distribution has no density");
      return zeta < 0.0 ? 0.0 : std::exp(-zeta / width_) / width_;
    case DephasingFamily::point_mass:
      throw InvalidArgument("point mass has no density");
  }
  throw InvalidArgument("unsupported dephasing family");
}

double DephasingDistribution::sample(Rng& rng) const {
  switch (family_) {
    case DephasingFamily::gaussian:
      return width_ * rng.normal();
    case DephasingFamily::thermal_exponential:
      return -width_ * std::log(rng.uniform_open_low());
    case DephasingFamily::point_mass:
      return offset_;
  }
  throw InvalidArgument("unsupported dephasing family");
}

SpinorLatticeState zeta_walk_amplitudes(const WalkParameters& walk, const InitialState& init,
                                        double zeta) {
  require_localized_plain(walk, init);
  SpinorLatticeState state = evolve_pure(make_initial_state(init, walk), walk);
  const Lattice lat = state.lattice();
  for (int x = -lat.halfwidth; x <= lat.halfwidth; ++x) {
    const complex phase = std::polar(1.0, 0.5 * zeta * (x - init.site));
    for (Spin s : kSpins) state.amplitude(s, x) *= phase;
  }
  return state;
}

SpinorLatticeState evolve_zeta_walk(SpinorLatticeState state, const WalkParameters& walk,
                                    double zeta) {
  const complex up_phase = std::polar(1.0, 0.5 * zeta);
  const complex down_phase = std::conj(up_phase);
  const Lattice lat = state.lattice();
  for (int n = 0; n < walk.steps(); ++n) {
    state = apply_step(state, walk, n);
    for (int x = -lat.halfwidth; x <= lat.halfwidth; ++x) {
      state.amplitude(Spin::up, x) *= up_phase;
      state.amplitude(Spin::down, x) *= down_phase;
    }
  }
  return state;
}

double suppression_factor(const DephasingDistribution& dist, double d) {
  return std::abs(dist.characteristic(d));
}

CorrelationProfile dephased_correlation(const WalkParameters& walk, const InitialState& init,
                                        const DephasingDistribution& dist) {
  require_localized_plain(walk, init);
  const SpinorLatticeState psi = evolve_pure(make_initial_state(init, walk), walk);
  CorrelationProfile g = correlation_function(DensityMatrix::from_pure(psi));
  const int L = g.halfwidth;
  std::vector<complex> chi(static_cast<std::size_t>(4 * L + 1));
  for (int d = -2 * L; d <= 2 * L; ++d) chi[static_cast<std::size_t>(d + 2 * L)] = dist.characteristic(d);
  for (int y = -L; y <= L; ++y) {
    for (int x = -L; x <= L; ++x) g.values(x + L, y + L) *= chi[static_cast<std::size_t>(x - y + 2 * L)];
  }
  return g;
}

std::vector<double> dephased_position_distribution(const WalkParameters& walk,
                                                   const InitialState& init) {
  require_localized_plain(walk, init);
  return evolve_pure(make_initial_state(init, walk), walk).position_distribution();
}

DephasingMonteCarlo monte_carlo_dephasing(const WalkParameters& walk, const InitialState& init,
                                          const DephasingDistribution& dist,
                                          const MonteCarloOptions& options) {
  if (options.samples < 2) throw InvalidArgument("Monte-Carlo needs at least two samples");
  if (options.threads < 1) throw InvalidArgument("thread count must be positive");
  const SpinorLatticeState initial = make_initial_state(init, walk);
  const Lattice lat = walk.lattice();
  const int d = lat.dim();
  const int n = lat.sites();
  const int chunks = (options.samples + kChunk - 1) / kChunk;
  std::vector<ChunkSums> parts(static_cast<std::size_t>(chunks));

  auto run_chunk = [&](int c) {
    Rng rng(options.seed, static_cast<std::uint64_t>(c));
    ChunkSums sums{Eigen::MatrixXcd::Zero(d, d), Eigen::MatrixXd::Zero(n, n),
                   std::vector<double>(static_cast<std::size_t>(n), 0.0)};
    const int count = std::min(kChunk, options.samples - c * kChunk);
    for (int i = 0; i < count; ++i) {
      const SpinorLatticeState psi = evolve_zeta_walk(initial, walk, dist.sample(rng));
      const Eigen::Map<const Eigen::VectorXcd> v(psi.data().data(), d);
      sums.rho.noalias() += v * v.adjoint();
      const Eigen::VectorXcd up = v.head(n);
      const Eigen::VectorXcd dn = v.tail(n);
      const Eigen::MatrixXcd g = up * up.adjoint() + dn * dn.adjoint();
      sums.g_abs2 += g.cwiseAbs2();
      for (int x = 0; x < n; ++x) {
        const double p = std::norm(up(x)) + std::norm(dn(x));
        sums.p2[static_cast<std::size_t>(x)] += p * p;
      }
    }
    parts[static_cast<std::size_t>(c)] = std::move(sums);
  };

  const int workers = std::min(options.threads, chunks);
  if (workers == 1) {
    for (int c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int c = w; c < chunks; c += workers) run_chunk(c);
      });
    }
  }

  ChunkSums total = reduce_pairwise(parts, 0, parts.size());
  const double N = options.samples;
  DephasingMonteCarlo out;
  out.samples = options.samples;
  out.density = total.rho / N;
  out.correlation = correlation_function(DensityMatrix::from_matrix(lat, out.density));
  const Eigen::MatrixXd var =
      (total.g_abs2 / N - out.correlation.values.cwiseAbs2()).cwiseMax(0.0) * (N / (N - 1.0));
  out.correlation_se = (var / N).cwiseSqrt();
  out.position.resize(static_cast<std::size_t>(n));
  out.position_se.resize(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) {
    const double mean = out.correlation.values(x, x).real();
    const double v = std::max(total.p2[static_cast<std::size_t>(x)] / N - mean * mean, 0.0) * (N / (N - 1.0));
    out.position[static_cast<std::size_t>(x)] = mean;
    out.position_se[static_cast<std::size_t>(x)] = std::sqrt(v / N);
  }
  return out;
}

double coherence_length_from_T2(double t2, double tau) {
  if (!(t2 > 0.0) || !(tau > 0.0)) throw InvalidArgument("T2 and tau must be positive");
  return t2 / tau;
}

std::vector<double> zeta_wavepacket_split(const WalkParameters& walk, double k, Band band,
                                          double width, const DephasingDistribution& dist,
                                          const WavepacketSplitOptions& options) {
  if (!(width > 0.0)) throw InvalidArgument("packet width must be positive");
  if (!dist.degenerate() && options.samples < 1) throw InvalidArgument("need at least one sample");
  const Lattice lat = walk.lattice();
  const double theta = walk.theta();
  const double steps = walk.steps();
  const double dk0 = 1.0 / (2.0 * width);
  const Spinor prepared = eigenspinor(theta, wrap_to_zone(k), band);

  std::vector<double> out(static_cast<std::size_t>(lat.sites()), 0.0);
  std::vector<double> profile(out.size());
  auto add_zeta = [&](double zeta, double weight) {
    const double kz = wrap_to_zone(k - 0.5 * zeta);
    for (Band b : kBands) {
      const Spinor u = eigenspinor(theta, kz, b);
      const double overlap = std::norm(std::conj(u[0]) * prepared[0] + std::conj(u[1]) * prepared[1]);
      if (overlap == 0.0) continue;
      const double center = group_velocity(theta, kz, b) * steps;
      const double spread = steps * group_velocity_derivative(theta, kz, b) * dk0;
      const double sigma2 = width * width + spread * spread;
      double norm = 0.0;
      for (int x = -lat.halfwidth; x <= lat.halfwidth; ++x) {
        const double dx = x - center;
        const double v = std::exp(-0.5 * dx * dx / sigma2);
        profile[static_cast<std::size_t>(lat.site_index(x))] = v;
        norm += v;
      }
      if (norm == 0.0) continue;
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += weight * overlap * profile[i] / norm;
    }
  };

  if (dist.degenerate()) {
    add_zeta(dist.family() == DephasingFamily::point_mass ? dist.offset() : 0.0, 1.0);
  } else {
    Rng rng(options.seed);
    const double w = 1.0 / options.samples;
    for (int i = 0; i < options.samples; ++i) add_zeta(dist.sample(rng), w);
  }
  return out;
}

}  // namespace qwalk
