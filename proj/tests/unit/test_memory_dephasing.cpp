#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "qwalk/coherence.hpp"
#include "qwalk/density_evolution.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/memory_dephasing.hpp"
#include "qwalk/walk_core.hpp"

using namespace qwalk;

namespace {

// E[exp(i zeta d / 2)] by adaptive quadrature of the density.
complex characteristic_by_quadrature(const DephasingDistribution& dist, double d) {
  using boost::math::quadrature::gauss_kronrod;
  const double lo = dist.family() == DephasingFamily::gaussian ? -40.0 * dist.delta_zeta() : 0.0;
  const double hi = 40.0 * dist.delta_zeta();
  auto part = [&](auto trig) {
    return gauss_kronrod<double, 61>::integrate(
        [&](double z) { return dist.density(z) * trig(0.5 * z * d); }, lo, hi, 15, 1e-13);
  };
  return {part([](double a) { return std::cos(a); }), part([](double a) { return std::sin(a); })};
}

double max_abs_diff(const SpinorLatticeState& a, const SpinorLatticeState& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

CorrelationProfile coherent_correlation(const WalkParameters& w, const InitialState& init) {
  return correlation_function(DensityMatrix::from_pure(evolve_pure(make_initial_state(init, w), w)));
}

}  // namespace

TEST_CASE("distribution constructors validate their width") {
  CHECK_THROWS_AS(DephasingDistribution::gaussian(-0.1), InvalidArgument);
  CHECK_THROWS_AS(DephasingDistribution::thermal(std::nan("")), InvalidArgument);
  CHECK_THROWS_AS(DephasingDistribution::point_mass(INFINITY), InvalidArgument);
  CHECK(DephasingDistribution::gaussian(0.0).degenerate());
  CHECK_FALSE(DephasingDistribution::thermal(0.3).degenerate());
}

TEST_CASE("closed-form zeta amplitudes equal direct evolution with the zeta-shifted walk") {
  for (double theta : {kPi / 2, 0.9, 4.0}) {
    for (double zeta : {0.0, 0.37, -1.2, kPi, 5.5}) {
      for (const auto& init : {InitialState::up(), InitialState::symmetric(),
                               InitialState::localized({complex{0.6, 0.0}, complex{0.0, -0.8}}, 2)}) {
        const WalkParameters w(theta, 25, 28);
        const auto closed = zeta_walk_amplitudes(w, init, zeta);
        const auto direct = evolve_zeta_walk(make_initial_state(init, w), w, zeta);
        CHECK(max_abs_diff(closed, direct) < 1e-10);
      }
    }
  }
}

TEST_CASE("zeta = 0 gives the coherent amplitudes and every zeta the coherent distribution") {
  const WalkParameters w(kPi / 2, 30, 30);
  const auto coherent = evolve_pure(make_initial_state(InitialState::symmetric(), w), w);
  CHECK(max_abs_diff(zeta_walk_amplitudes(w, InitialState::symmetric(), 0.0), coherent) == 0.0);
  for (double zeta : {0.1, 1.0, 3.0}) {
    const auto direct = evolve_zeta_walk(make_initial_state(InitialState::symmetric(), w), w, zeta);
    CHECK(max_abs_diff(direct.position_distribution(), coherent.position_distribution()) < 1e-12);
  }
}

TEST_CASE("zeta = 2 pi multiplies the amplitudes by (-1)^(x - x0)") {
  const WalkParameters w(1.3, 12, 14);
  const auto init = InitialState::localized({complex{1.0, 0.0}, complex{0.0, 0.0}}, 1);
  const auto a0 = evolve_zeta_walk(make_initial_state(init, w), w, 0.0);
  const auto a2pi = evolve_zeta_walk(make_initial_state(init, w), w, kTwoPi);
  double worst = 0.0;
  for (int x = -14; x <= 14; ++x) {
    const double sign = ((x - 1) % 2 == 0) ? 1.0 : -1.0;
    for (Spin s : kSpins) worst = std::max(worst, std::abs(a2pi.amplitude(s, x) - sign * a0.amplitude(s, x)));
  }
  CHECK(worst < 1e-12);
  CHECK(max_abs_diff(a0.position_distribution(), a2pi.position_distribution()) < 1e-14);
}

TEST_CASE("closed-form path rejects states and walks it does not cover") {
  const WalkParameters alt(kPi / 2, 5, 5, true);
  CHECK_THROWS_AS(zeta_walk_amplitudes(alt, InitialState::up(), 0.3), InvalidArgument);
  const WalkParameters w(kPi / 2, 5, 40);
  CHECK_THROWS_AS(zeta_walk_amplitudes(w, InitialState::packet(0.0, 3.0, Band::plus), 0.3),
                  InvalidArgument);
}

TEST_CASE("characteristic functions agree with quadrature of the densities") {
  for (double width : {0.05, 0.5, 2.0}) {
    for (double d : {0.0, 1.0, 2.0, 7.0, 30.0}) {
      for (const auto& dist : {DephasingDistribution::gaussian(width), DephasingDistribution::thermal(width)}) {
        const complex ref = characteristic_by_quadrature(dist, d);
        CHECK(std::abs(dist.characteristic(d) - ref) < 1e-10);
      }
    }
  }
  const auto pm = DephasingDistribution::point_mass(0.8);
  CHECK(std::abs(pm.characteristic(3.0) - std::polar(1.0, 1.2)) < 1e-15);
}

TEST_CASE("suppression factor examples") {
  for (const auto& dist : {DephasingDistribution::gaussian(0.7), DephasingDistribution::thermal(0.7),
                           DephasingDistribution::point_mass(0.4)}) {
    CHECK(suppression_factor(dist, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  }
  const double dz = 0.1;
  CHECK(suppression_factor(DephasingDistribution::thermal(dz), 2.0 / dz) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  for (double d : {1.0, 4.0, 13.0}) {
    CHECK(suppression_factor(DephasingDistribution::thermal(dz), d) ==
          doctest::Approx(1.0 / std::sqrt(1.0 + dz * dz * d * d / 4.0)).epsilon(1e-12));
  }
}

// With the phase zeta d / 2 behind the thermal law 1 / sqrt(1 + dz^2 d^2 / 4),
// the quadrature oracle gives exp(-dz^2 d^2 / 8) for the Gaussian family, so
// this stated value is not reproduced.
TEST_CASE("Gaussian suppression factor equals exp(-dz^2 d^2 / 2)") {
  const double value = suppression_factor(DephasingDistribution::gaussian(0.5), 2.0);
  MESSAGE("Gaussian dz = 0.5, d = 2: " << value << " against exp(-0.5) = " << std::exp(-0.5));
  CHECK(value == doctest::Approx(std::exp(-0.5)).epsilon(1e-4));
}

TEST_CASE("suppression is non-increasing in |d|") {
  for (const auto& dist : {DephasingDistribution::gaussian(0.3), DephasingDistribution::thermal(0.3)}) {
    double prev = 1.0;
    for (int d = 0; d <= 80; ++d) {
      const double f = suppression_factor(dist, d);
      CHECK(f <= prev + 1e-15);
      CHECK(suppression_factor(dist, -d) == doctest::Approx(f).epsilon(1e-15));
      prev = f;
    }
  }
}

TEST_CASE("zero width leaves the coherent correlation untouched") {
  const WalkParameters w(kPi / 2, 20, 20);
  const auto g0 = coherent_correlation(w, InitialState::symmetric());
  for (const auto& dist : {DephasingDistribution::gaussian(0.0), DephasingDistribution::thermal(0.0)}) {
    const auto g = dephased_correlation(w, InitialState::symmetric(), dist);
    CHECK((g.values - g0.values).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("wide Gaussian removes the antidiagonal but keeps the diagonal") {
  const WalkParameters w(kPi / 2, 40, 40);
  const auto g0 = coherent_correlation(w, InitialState::symmetric());
  const auto g = dephased_correlation(w, InitialState::symmetric(), DephasingDistribution::gaussian(5.0));
  double anti = 0.0;
  for (int x = 1; x <= 40; ++x) anti = std::max({anti, std::abs(g(x, -x)), std::abs(g(-x, x))});
  CHECK(anti < 1e-4);
  CHECK((g.values.diagonal() - g0.values.diagonal()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("averaged position distribution equals the coherent one") {
  const WalkParameters w(kPi / 2, 40, 40);
  for (const auto& init : {InitialState::up(), InitialState::symmetric()}) {
    const auto coherent = evolve_pure(make_initial_state(init, w), w).position_distribution();
    CHECK(max_abs_diff(dephased_position_distribution(w, init), coherent) < 1e-12);
  }
}

TEST_CASE("dephased correlation divided by G0 depends only on x - y") {
  const WalkParameters w(1.1, 30, 30);
  const auto init = InitialState::symmetric();
  const auto g0 = coherent_correlation(w, init);
  for (const auto& dist : {DephasingDistribution::gaussian(0.2), DephasingDistribution::thermal(0.15),
                           DephasingDistribution::point_mass(0.6)}) {
    const auto g = dephased_correlation(w, init, dist);
    const double floor = 1e-8 * g0.values.cwiseAbs().maxCoeff();
    std::vector<complex> ratio_of(121, complex{NAN, NAN});
    double worst = 0.0;
    for (int x = -30; x <= 30; ++x) {
      for (int y = -30; y <= 30; ++y) {
        if (std::abs(g0(x, y)) < floor) continue;
        const complex r = g(x, y) / g0(x, y);
        complex& slot = ratio_of[static_cast<std::size_t>(x - y + 60)];
        if (std::isnan(slot.real())) slot = r;
        worst = std::max(worst, std::abs(r - slot));
        worst = std::max(worst, std::abs(r - dist.characteristic(x - y)));
      }
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("local spin state is independent of zeta") {
  const WalkParameters w(kPi / 2, 25, 25);
  const auto init = InitialState::localized({complex{0.8, 0.0}, complex{0.0, 0.6}});
  const auto ref = evolve_zeta_walk(make_initial_state(init, w), w, 0.0);
  double worst = 0.0;
  for (double zeta : {0.4, 1.9, -2.7}) {
    const auto a = evolve_zeta_walk(make_initial_state(init, w), w, zeta);
    for (int x = -25; x <= 25; ++x) {
      for (Spin s : kSpins) {
        for (Spin t : kSpins) {
          const complex r0 = ref.amplitude(s, x) * std::conj(ref.amplitude(t, x));
          const complex r1 = a.amplitude(s, x) * std::conj(a.amplitude(t, x));
          worst = std::max(worst, std::abs(r1 - r0));
        }
      }
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("Monte-Carlo average agrees with the closed form within three standard errors") {
  // Thermal width for l = T2 / tau = 20.
  const double dz = 2.0 / 20.0;
  const WalkParameters w(kPi / 2, 40, 40);
  const auto init = InitialState::symmetric();
  const auto dist = DephasingDistribution::thermal(dz);
  const auto analytic = dephased_correlation(w, init, dist);
  const auto mc = monte_carlo_dephasing(w, init, dist, {10000, 2024, 1});
  int outside = 0;
  for (int x = -40; x <= 40; ++x) {
    const double diff = std::abs(mc.correlation(x, -x) - analytic(x, -x));
    if (diff > 3.0 * mc.correlation_se(x + 40, -x + 40) + 1e-12) ++outside;
  }
  MESSAGE("antidiagonal entries outside 3 SE: " << outside);
  CHECK(outside == 0);
  const auto coherent = evolve_pure(make_initial_state(init, w), w).position_distribution();
  CHECK(max_abs_diff(mc.position, coherent) < 1e-12);
}

TEST_CASE("Monte-Carlo is reproducible and independent of the thread count") {
  const WalkParameters w(kPi / 2, 12, 12);
  const auto dist = DephasingDistribution::gaussian(0.4);
  const auto a = monte_carlo_dephasing(w, InitialState::up(), dist, {700, 9, 1});
  const auto b = monte_carlo_dephasing(w, InitialState::up(), dist, {700, 9, 3});
  const auto c = monte_carlo_dephasing(w, InitialState::up(), dist, {700, 10, 1});
  CHECK((a.density - b.density).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.density - c.density).cwiseAbs().maxCoeff() > 0.0);
  CHECK_THROWS_AS(monte_carlo_dephasing(w, InitialState::up(), dist, {1, 9, 1}), InvalidArgument);
  CHECK_THROWS_AS(monte_carlo_dephasing(w, InitialState::up(), dist, {10, 9, 0}), InvalidArgument);
}

TEST_CASE("samplers reproduce the first two moments") {
  Rng rng(77);
  const int n = 200000;
  for (const auto& dist : {DephasingDistribution::gaussian(0.3), DephasingDistribution::thermal(0.3)}) {
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double z = dist.sample(rng);
      s1 += z;
      s2 += z * z;
    }
    const double mean = s1 / n;
    const double var = s2 / n - mean * mean;
    const bool thermal = dist.family() == DephasingFamily::thermal_exponential;
    CHECK(mean == doctest::Approx(thermal ? 0.3 : 0.0).epsilon(0.01).scale(1.0));
    CHECK(var == doctest::Approx(0.09).epsilon(0.02));
  }
}

TEST_CASE("coherence length from T2") {
  CHECK(coherence_length_from_T2(600e-6, 33.3e-6) == doctest::Approx(18.02).epsilon(1e-3));
  CHECK(coherence_length_from_T2(1e-3, 1e-3) == 1.0);
  // Thermal identification: dz = 2 tau / T2 gives the same length as 2 / dz.
  const double t2 = 450e-6, tau = 25e-6;
  CHECK(2.0 / (2.0 * tau / t2) == doctest::Approx(coherence_length_from_T2(t2, tau)).epsilon(1e-14));
  CHECK_THROWS_AS(coherence_length_from_T2(0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(coherence_length_from_T2(1.0, -1.0), InvalidArgument);
}

TEST_CASE("packet split without dephasing is a single peak at vg n") {
  const WalkParameters w(kPi / 2, 40, 80);
  const double k = 0.6;
  const auto p = zeta_wavepacket_split(w, k, Band::plus, 4.0, DephasingDistribution::gaussian(0.0));
  double mass = 0.0, mean = 0.0;
  for (int x = -80; x <= 80; ++x) {
    mass += p[static_cast<std::size_t>(x + 80)];
    mean += x * p[static_cast<std::size_t>(x + 80)];
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mean == doctest::Approx(group_velocity(kPi / 2, k, Band::plus) * 40).epsilon(1e-3));
}

TEST_CASE("fixed zeta splits a packet like direct evolution with the shifted walk") {
  const double theta = kPi / 2, zeta = kPi / 2, width = 4.0;
  const int n = 40, L = 80;
  const WalkParameters w(theta, n, L);
  const auto semiclassical =
      zeta_wavepacket_split(w, 0.0, Band::plus, width, DephasingDistribution::point_mass(zeta));
  const auto direct =
      evolve_zeta_walk(make_initial_state(InitialState::packet(0.0, width, Band::plus), w), w, zeta)
          .position_distribution();

  const double kz = -zeta / 2;
  const double c_plus = group_velocity(theta, kz, Band::plus) * n;
  const double c_minus = group_velocity(theta, kz, Band::minus) * n;
  REQUIRE(std::abs(c_plus - c_minus) > 20.0);
  const double split = 0.5 * (c_plus + c_minus);
  auto summarize = [&](const std::vector<double>& p, bool plus_side) {
    double mass = 0.0, first = 0.0;
    for (int x = -L; x <= L; ++x) {
      const bool on_plus_peak = (x > split) == (c_plus > split);
      if (on_plus_peak != plus_side) continue;
      mass += p[static_cast<std::size_t>(x + L)];
      first += x * p[static_cast<std::size_t>(x + L)];
    }
    return std::pair{mass, first / mass};
  };
  for (bool side : {true, false}) {
    const auto [ms, cs] = summarize(semiclassical, side);
    const auto [md, cd] = summarize(direct, side);
    MESSAGE("peak weight " << ms << " vs direct " << md << ", center " << cs << " vs " << cd);
    CHECK(ms == doctest::Approx(md).epsilon(0.03).scale(1.0));
    CHECK(std::abs(cs - cd) < 1.0);
  }
}

TEST_CASE("symmetric dephasing keeps a k = 0 packet symmetric") {
  const WalkParameters w(kPi / 2, 30, 60);
  // Pairing zeta with -zeta gives a mirror-symmetric distribution.
  const auto plus = zeta_wavepacket_split(w, 0.0, Band::plus, 3.0, DephasingDistribution::point_mass(0.7));
  const auto minus = zeta_wavepacket_split(w, 0.0, Band::plus, 3.0, DephasingDistribution::point_mass(-0.7));
  double worst = 0.0;
  for (int x = -60; x <= 60; ++x) {
    const double a = plus[static_cast<std::size_t>(x + 60)] + minus[static_cast<std::size_t>(x + 60)];
    const double b = plus[static_cast<std::size_t>(-x + 60)] + minus[static_cast<std::size_t>(-x + 60)];
    worst = std::max(worst, std::abs(a - b));
  }
  CHECK(worst < 1e-12);
  const auto gauss = zeta_wavepacket_split(w, 0.0, Band::plus, 3.0, DephasingDistribution::gaussian(0.5),
                                           {40000, 3});
  double mean = 0.0;
  for (int x = -60; x <= 60; ++x) mean += x * gauss[static_cast<std::size_t>(x + 60)];
  CHECK(std::abs(mean) < 0.2);
}
