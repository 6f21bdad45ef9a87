#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "oracles.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/walk_core.hpp"

using namespace qwalk;

namespace {

SpinorLatticeState localized(const WalkParameters& w, complex up, complex down) {
  return make_initial_state(InitialState::localized({up, down}), w);
}

double angle_distance(double a, double b) {
  return std::abs(std::remainder(a - b, kTwoPi));
}

}  // namespace

TEST_CASE("coin matrix examples") {
  CHECK((coin_matrix(0.0) - Eigen::Matrix2cd::Identity()).norm() < 1e-15);

  const Eigen::Vector2cd up(1.0, 0.0);
  const Eigen::Vector2cd half = coin_matrix(kPi / 2) * up;
  CHECK(std::abs(half(0) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(half(1) - 1.0 / std::sqrt(2.0)) < 1e-15);

  const Eigen::Vector2cd flip = coin_matrix(kPi) * up;
  CHECK(std::abs(flip(0)) < 1e-15);
  CHECK(std::abs(flip(1) - 1.0) < 1e-15);

  for (double theta : {0.3, 1.1, 2.9, 4.4, 6.0}) {
    const Eigen::Matrix2cd c = coin_matrix(theta);
    CHECK((c.adjoint() * c - Eigen::Matrix2cd::Identity()).norm() < 1e-14);
  }
  CHECK_THROWS_AS(coin_matrix(std::nan("")), InvalidArgument);
  CHECK_THROWS_AS(coin_matrix(INFINITY), InvalidArgument);
}

TEST_CASE("theta is normalized to [0, 2 pi)") {
  CHECK(WalkParameters(-kPi / 2, 1, 1).theta() == doctest::Approx(1.5 * kPi));
  CHECK(WalkParameters(kTwoPi + 0.25, 1, 1).theta() == doctest::Approx(0.25));
  CHECK_THROWS_AS(WalkParameters(0.1, 5, 4), InvalidArgument);
}

TEST_CASE("single steps at theta = 0") {
  const WalkParameters w(0.0, 1, 1);
  const auto up = apply_step(localized(w, 1.0, 0.0), w, 0);
  CHECK(std::abs(up.amplitude(Spin::up, 1) - 1.0) < 1e-15);
  const auto down = apply_step(localized(w, 0.0, 1.0), w, 0);
  CHECK(std::abs(down.amplitude(Spin::down, -1) - 1.0) < 1e-15);
}

TEST_CASE("evolution matches the brute-force path sum") {
  for (int n : {3, 8, 11}) {
    for (double theta : {kPi / 2, 0.7, 4.0}) {
      for (bool alt : {false, true}) {
        const WalkParameters w(theta, n, n, alt);
        const complex up0{0.6, 0.0}, down0{0.0, 0.8};
        const auto psi = evolve_pure(localized(w, up0, down0), w);
        const auto ref = oracle::path_sum(theta, n, up0, down0, alt);
        double err = 0.0;
        for (int x = -n; x <= n; ++x) {
          for (int s = 0; s < 2; ++s) {
            const auto it = ref.find({s, x});
            const complex expected = it == ref.end() ? complex{} : it->second;
            err = std::max(err, std::abs(psi.amplitude(static_cast<Spin>(s), x) - expected));
          }
        }
        CHECK(err < 1e-12);
      }
    }
  }
  // Three Hadamard steps from up occupy exactly {-3, -1, 1, 3}.
  const WalkParameters w(kPi / 2, 3, 3);
  const auto p = evolve_pure(localized(w, 1.0, 0.0), w).position_distribution();
  for (int x = -3; x <= 3; ++x) {
    if (x % 2 == 0) {
      CHECK(p[static_cast<std::size_t>(x + 3)] == 0.0);
    } else {
      CHECK(p[static_cast<std::size_t>(x + 3)] > 0.0);
    }
  }
}

TEST_CASE("unitarity on random states") {
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  const WalkParameters base(0.0, 1, 12);
  for (int trial = 0; trial < 120; ++trial) {
    const WalkParameters w(angle(rng), 1, 12, trial % 2 == 1);
    SpinorLatticeState s(w.lattice());
    for (int x = -11; x <= 11; ++x) {
      s.amplitude(Spin::up, x) = {n01(rng), n01(rng)};
      s.amplitude(Spin::down, x) = {n01(rng), n01(rng)};
    }
    s.normalize();
    const auto t = apply_step(s, w, trial);
    CHECK(std::abs(t.norm_squared() - 1.0) < 1e-12);
  }
}

TEST_CASE("parity of the occupied sites") {
  for (int n : {1, 6, 13}) {
    const WalkParameters w(1.3, n, n);
    const auto p = evolve_pure(make_initial_state(InitialState::symmetric(), w), w).position_distribution();
    for (int x = -n; x <= n; ++x) {
      if ((x + n) % 2 != 0) CHECK(p[static_cast<std::size_t>(x + n)] == 0.0);
    }
  }
}

TEST_CASE("truncation is reported instead of dropping amplitude") {
  const WalkParameters w(0.5, 1, 2);
  SpinorLatticeState s(w.lattice());
  s.amplitude(Spin::up, 2) = 1.0;
  CHECK_THROWS_AS(apply_step(s, w, 0), TruncationError);
}

TEST_CASE("band structure matches numerical diagonalization") {
  const auto grid = uniform_k_grid(1024);
  CHECK(grid.size() == 1024);
  CHECK(grid.back() == doctest::Approx(kPi));
  for (double theta : {kPi / 2, 0.4, 2.5, 3.9, 5.5}) {
    const auto bands = band_structure(theta, grid);
    for (const BandPoint& b : bands) {
      const Eigen::Matrix2cd W = reduced_walk_operator(theta, b.k);
      Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(W);
      // Numerical quasi energies, sorted.
      double w0 = -std::arg(es.eigenvalues()(0));
      double w1 = -std::arg(es.eigenvalues()(1));
      const double hi = std::max(w0, w1);
      CHECK(std::abs(hi - b.omega_plus) < 1e-10);
      CHECK(std::abs(b.omega_minus + b.omega_plus) < 1e-15);
      CHECK(b.omega_plus == doctest::Approx(std::acos(std::cos(theta / 2) * std::cos(b.k))).epsilon(1e-12));

      for (Band band : kBands) {
        const Spinor s = eigenspinor(theta, b.k, band);
        const Eigen::Vector2cd v(s[0], s[1]);
        const double omega = band == Band::plus ? b.omega_plus : b.omega_minus;
        const Eigen::Vector2cd r = W * v - std::exp(complex{0.0, -omega}) * v;
        CHECK(r.norm() < 1e-10);
        CHECK(std::abs(v.norm() - 1.0) < 1e-12);
      }
      CHECK(std::abs(b.eigenspinor_minus.polar - (kPi - b.eigenspinor_plus.polar)) < 1e-10);
      // The azimuth is undefined at the poles.
      if (std::sin(b.eigenspinor_plus.polar) > 1e-6) {
        CHECK(angle_distance(b.eigenspinor_minus.azimuth, b.eigenspinor_plus.azimuth + kPi) < 1e-10);
      }
      CHECK(std::abs(b.vg_plus) <= std::abs(std::cos(theta / 2)) + 1e-12);
      CHECK(b.vg_minus == doctest::Approx(-b.vg_plus));
    }
  }
  CHECK_THROWS_AS(band_structure(1.0, std::vector<double>{-kPi}), InvalidArgument);
  CHECK_THROWS_AS(band_structure(1.0, std::vector<double>{3.5}), InvalidArgument);
}

TEST_CASE("band structure examples") {
  CHECK(quasi_energy(kPi / 2, 0.0, Band::plus) == doctest::Approx(kPi / 4));
  CHECK(quasi_energy(kPi / 2, 0.0, Band::minus) == doctest::Approx(-kPi / 4));
  for (double theta : {0.3, 1.7, 2.8}) {
    CHECK(quasi_energy(theta, kPi / 2, Band::plus) == doctest::Approx(kPi / 2));
    // Gap at k = 0 equals theta for theta in [0, pi].
    CHECK(quasi_energy(theta, 0.0, Band::plus) - quasi_energy(theta, 0.0, Band::minus) ==
          doctest::Approx(theta));
  }
  CHECK(group_velocity(kPi / 2, kPi / 2, Band::plus) == doctest::Approx(std::sqrt(2.0) / 2));
  CHECK(group_velocity(kPi / 2, 0.0, Band::plus) == 0.0);
}

TEST_CASE("group velocity and curvature agree with finite differences of the dispersion") {
  const double h = 1e-5;
  for (double theta : {0.9, kPi / 2, 2.2}) {
    for (double k : {-2.5, -1.0, 0.3, 1.4, 2.9}) {
      const auto omega = [&](double q) { return std::acos(std::cos(theta / 2) * std::cos(q)); };
      const double fd1 = (omega(k + h) - omega(k - h)) / (2 * h);
      const double fd2 = (omega(k + h) - 2 * omega(k) + omega(k - h)) / (h * h);
      CHECK(group_velocity(theta, k, Band::plus) == doctest::Approx(fd1).epsilon(1e-7));
      CHECK(group_velocity_derivative(theta, k, Band::plus) == doctest::Approx(fd2).epsilon(1e-3));
    }
  }
}

TEST_CASE("ballistic variance") {
  CHECK(ballistic_variance(kPi / 2, 10) == doctest::Approx(100.0 * (1.0 - std::sqrt(2.0) / 2)));
  CHECK(ballistic_variance(kPi / 2, 10) == doctest::Approx(29.289).epsilon(1e-4));
  CHECK(ballistic_variance(kPi, 7) == doctest::Approx(0.0));
  CHECK(ballistic_variance(0.0, 5) == doctest::Approx(25.0));
}

TEST_CASE("effective mass") {
  CHECK(effective_mass(kPi / 2, Band::plus) == doctest::Approx(1.0));
  CHECK(effective_mass(kPi / 2, Band::minus) == doctest::Approx(-1.0));
  CHECK(effective_mass(kPi / 3, Band::plus) == doctest::Approx(std::tan(kPi / 6)));
  CHECK_THROWS_AS(effective_mass(kPi, Band::plus), SingularityError);
  // Curvature of the closed-form dispersion at k = 0 on a fine grid.
  const double h = 1e-4;
  for (double theta : {0.5, kPi / 3, 2.0, 4.0, 5.5}) {
    for (Band band : kBands) {
      const double sign = sign_of(band);
      const auto omega = [&](double q) { return sign * std::acos(std::cos(theta / 2) * std::cos(q)); };
      const double curvature = (omega(h) - 2 * omega(0.0) + omega(-h)) / (h * h);
      CHECK(effective_mass(theta, band) == doctest::Approx(1.0 / curvature).epsilon(0.01));
    }
  }
}

TEST_CASE("alternating shift equals a plain walk at theta + pi with the spin flipped") {
  for (double theta : {kPi / 2, 0.8, 1.38 * kPi}) {
    for (int n = 1; n <= 20; ++n) {
      const WalkParameters alt(theta, n, n, true);
      const WalkParameters plain(theta + kPi, n, n, false);
      const complex a{1.0 / std::sqrt(2.0), 0.0}, b{0.0, 1.0 / std::sqrt(2.0)};
      const auto pa = evolve_pure(localized(alt, a, b), alt).position_distribution();
      const auto pp = evolve_pure(localized(plain, b, a), plain).position_distribution();
      double err = 0.0;
      for (std::size_t i = 0; i < pa.size(); ++i) err = std::max(err, std::abs(pa[i] - pp[i]));
      CHECK(err < 1e-12);
    }
  }
}

TEST_CASE("initial states") {
  const WalkParameters w(kPi / 2, 2, 2);
  const auto sym = make_initial_state(InitialState::symmetric(), w);
  CHECK(std::abs(sym.amplitude(Spin::up, 0) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(sym.amplitude(Spin::down, 0) - complex{0.0, 1.0 / std::sqrt(2.0)}) < 1e-15);
  CHECK(sym.norm_squared() == doctest::Approx(1.0));

  const auto up = make_initial_state(InitialState::up(), w);
  int nonzero = 0;
  for (complex a : up.data()) nonzero += a != 0.0;
  CHECK(nonzero == 1);
  CHECK(up.norm_squared() == doctest::Approx(1.0));

  const double width = 8.0 / std::sqrt(2.0);
  const int L = required_halfwidth(InitialState::packet(0.0, width, Band::plus), 0);
  const WalkParameters wp(kPi / 2, 0, L);
  const auto packet = make_initial_state(InitialState::packet(0.0, width, Band::plus), wp);
  CHECK(packet.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
  const auto p = packet.position_distribution();
  double m2 = 0.0;
  for (int x = -L; x <= L; ++x) m2 += x * x * p[static_cast<std::size_t>(x + L)];
  CHECK(std::sqrt(m2) == doctest::Approx(width).epsilon(1e-6));
  // The packet spinor is the band eigenspinor at k0.
  const Spinor s = eigenspinor(kPi / 2, 0.0, Band::plus);
  const complex a0 = packet.amplitude(Spin::up, 0), b0 = packet.amplitude(Spin::down, 0);
  CHECK(std::abs(std::conj(s[0]) * a0 + std::conj(s[1]) * b0) ==
        doctest::Approx(std::sqrt(std::norm(a0) + std::norm(b0))));

  CHECK_THROWS_AS(make_initial_state(InitialState::packet(0.0, 0.0, Band::plus), wp), InvalidArgument);
  CHECK_THROWS_AS(make_initial_state(InitialState::cat(-1.0, Band::plus), wp), InvalidArgument);
}
