// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file walk_core.hpp
 * @brief Unitary discrete-time walk of a spin-1/2 particle on a 1D lattice.
 *
 * Basis convention (used by every module): the Hilbert space is
 * (up, down) x (x = -L..+L), row-major by spin, so the flat index of
 * |s, x> is s * (2L + 1) + (x + L) with up = 0, down = 1.
 *
 * The coin is the real rotation exp(-i sigma_y theta / 2)
 *   [[cos(theta/2), -sin(theta/2)],
 *    [sin(theta/2),  cos(theta/2)]]
 * and the shift moves up one site right and down one site left. In the
 * reduced (quasi-momentum) picture W(k) = exp(-i sigma_z k) C(theta), with
 * <x|k> = exp(ikx) / sqrt(2 pi).
 */

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace qwalk {

using complex = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class Spin : int { up = 0, down = 1 };
enum class Band : int { plus = 0, minus = 1 };

inline constexpr std::array<Spin, 2> kSpins{Spin::up, Spin::down};
inline constexpr std::array<Band, 2> kBands{Band::plus, Band::minus};

inline constexpr int index_of(Spin s) noexcept { return static_cast<int>(s); }
inline constexpr int index_of(Band b) noexcept { return static_cast<int>(b); }
inline constexpr double sign_of(Band b) noexcept { return b == Band::plus ? 1.0 : -1.0; }

/// Two-component spinor in the (up, down) basis.
using Spinor = std::array<complex, 2>;

/// Finite lattice of sites -L..+L.
struct Lattice {
  int halfwidth = 1;

  constexpr int sites() const noexcept { return 2 * halfwidth + 1; }
  constexpr int dim() const noexcept { return 2 * sites(); }
  constexpr bool contains(int x) const noexcept { return x >= -halfwidth && x <= halfwidth; }
  constexpr int site_index(int x) const noexcept { return x + halfwidth; }
  constexpr int index(Spin s, int x) const noexcept {
    return index_of(s) * sites() + site_index(x);
  }
  constexpr bool operator==(const Lattice&) const = default;
};

/// Coin angle, step count and lattice size defining a walk.
class WalkParameters {
 public:
  /// theta is normalized to [0, 2 pi). Requires lattice_halfwidth >= max(steps, 1).
  WalkParameters(double theta, int steps, int lattice_halfwidth, bool alternating_shift = false);

  /// Smallest lattice that holds a walk started on a single site at x = 0.
  static WalkParameters localized(double theta, int steps, bool alternating_shift = false);

  double theta() const noexcept { return theta_; }
  int steps() const noexcept { return steps_; }
  int lattice_halfwidth() const noexcept { return halfwidth_; }
  bool alternating_shift() const noexcept { return alternating_; }
  Lattice lattice() const noexcept { return Lattice{halfwidth_}; }

  WalkParameters with_theta(double theta) const;
  WalkParameters with_steps(int steps) const;

 private:
  double theta_;
  int steps_;
  int halfwidth_;
  bool alternating_;
};

/// Wraps an angle into [0, 2 pi).
double normalize_angle(double theta);

/// Wraps a quasi momentum into the Brillouin zone (-pi, pi].
double wrap_to_zone(double k);

/// exp(-i sigma_y theta/2) in the (up, down) basis. Throws on non-finite theta.
Eigen::Matrix2cd coin_matrix(double theta);

/// Reduced walk operator exp(-i sigma_z k) C(theta).
Eigen::Matrix2cd reduced_walk_operator(double theta, double k);

/// +1 when step `step_index` applies S, -1 when it applies S^dagger.
int shift_direction(const WalkParameters& params, int step_index) noexcept;

/// Pure state on the spin x lattice space.
class SpinorLatticeState {
 public:
  explicit SpinorLatticeState(Lattice lattice);

  const Lattice& lattice() const noexcept { return lattice_; }
  complex amplitude(Spin s, int x) const { return amps_[lattice_.index(s, x)]; }
  complex& amplitude(Spin s, int x) { return amps_[lattice_.index(s, x)]; }

  std::span<const complex> data() const noexcept { return amps_; }
  std::span<complex> data() noexcept { return amps_; }

  double norm_squared() const;
  void normalize();

  /// P(x) = sum_s |a(s, x)|^2 indexed by site_index(x).
  std::vector<double> position_distribution() const;

 private:
  Lattice lattice_;
  std::vector<complex> amps_;
};

/// One application of S C (or S^dagger C on odd steps of an alternating walk).
/// Throws TruncationError when nonzero amplitude would leave the lattice.
SpinorLatticeState apply_step(const SpinorLatticeState& state, const WalkParameters& params,
                              int step_index);

/// Runs params.steps() steps.
SpinorLatticeState evolve_pure(SpinorLatticeState state, const WalkParameters& params);

struct BlochAngles {
  double polar = 0.0;    // in [0, pi]
  double azimuth = 0.0;  // in (-pi, pi]
};

Spinor spinor_from_bloch(const BlochAngles& angles);

struct BandPoint {
  double k = 0.0;
  double omega_plus = 0.0;
  double omega_minus = 0.0;
  BlochAngles eigenspinor_plus;
  BlochAngles eigenspinor_minus;
  double vg_plus = 0.0;
  double vg_minus = 0.0;
};

double quasi_energy(double theta, double k, Band band);
BlochAngles eigenspinor_angles(double theta, double k, Band band);
Spinor eigenspinor(double theta, double k, Band band);

/// d omega / dk, evaluated analytically; zero at the cusp k = 0 of theta = 0.
double group_velocity(double theta, double k, Band band);

/// d^2 omega / dk^2 (inverse effective mass away from k = 0 as well).
double group_velocity_derivative(double theta, double k, Band band);

/// Throws InvalidArgument when any k lies outside (-pi, pi].
std::vector<BandPoint> band_structure(double theta, std::span<const double> k_grid);

/// M uniform points k_a = -pi + 2 pi (a + 1) / M, a = 0..M-1, so the grid
/// ends exactly on pi.
std::vector<double> uniform_k_grid(int points = 1024);

/// n^2 (1 - |sin(theta/2)|). The experiment's alternating-shift walk at
/// angle theta spreads like the plain walk at theta + pi.
double ballistic_variance(double theta, int steps);

/// Band curvature mass 1 / omega''(0). Equals +-|tan(theta/2)| for
/// theta in [0, pi); the sign follows the curvature for theta in (pi, 2 pi).
/// Throws SingularityError at theta = pi.
double effective_mass(double theta, Band band);

enum class InitialKind { localized_up, localized_symmetric, localized_spinor, gaussian_packet, k_cat };

/// Initial-state recipe. Packets are centered on x = 0 and cut at
/// packet_support_halfwidth(width) sites, so their support is exact.
struct InitialState {
  InitialKind kind = InitialKind::localized_up;
  Spinor spin{complex{1.0, 0.0}, complex{0.0, 0.0}};  // localized_spinor only
  int site = 0;                                        // localized kinds only
  double k0 = 0.0;                                     // gaussian_packet only
  double width = 1.0;                                  // RMS width Delta x_0 (packets)
  Band band = Band::plus;

  static InitialState up() { return {}; }
  static InitialState symmetric();
  static InitialState localized(Spinor spin, int site = 0);
  static InitialState packet(double k0, double width, Band band);
  static InitialState cat(double width, Band band);
};

int packet_support_halfwidth(double width);

/// Lattice halfwidth that holds `steps` steps of the given initial state.
int required_halfwidth(const InitialState& init, int steps);

SpinorLatticeState make_initial_state(const InitialState& init, const WalkParameters& params);

}  // namespace qwalk
