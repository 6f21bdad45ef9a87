// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

#include "qwalk/walk_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qwalk/errors.hpp"

namespace qwalk {

namespace {

struct CoinEntries {
  double c;
  double s;
};

CoinEntries coin_entries(double theta) { return {std::cos(0.5 * theta), std::sin(0.5 * theta)}; }

double wrap_azimuth(double phi) {
  phi = std::remainder(phi, kTwoPi);  // [-pi, pi]
  if (phi <= -kPi) phi += kTwoPi;
  return phi;
}

// Bloch angles of the eigenspinor with eigenvalue exp(-i omega_+) for
// cos(theta/2) >= 0. The two branches are algebraically identical; each is
// used where its denominator cannot vanish.
BlochAngles closed_form_angles(double theta, double k) {
  const double t = std::tan(0.5 * theta);
  const double s = std::sin(k);
  const double r = std::hypot(t, s);
  double polar;
  if (s >= 0.0) {
    const double denom = r + s;
    polar = denom == 0.0 ? 0.0 : 2.0 * std::atan(t / denom);
  } else {
    polar = t == 0.0 ? kPi : 2.0 * std::atan((r - s) / t);
  }
  double azimuth = 0.5 * kPi + k;
  if (polar < 0.0) {
    polar = -polar;
    azimuth += kPi;
  }
  return {polar, wrap_azimuth(azimuth)};
}

}  // namespace

double normalize_angle(double theta) {
  if (!std::isfinite(theta)) throw InvalidArgument("coin angle must be finite");
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return t;
}

double wrap_to_zone(double k) {
  double w = std::remainder(k, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

WalkParameters::WalkParameters(double theta, int steps, int lattice_halfwidth, bool alternating_shift)
    : theta_(normalize_angle(theta)),
      steps_(steps),
      halfwidth_(lattice_halfwidth),
      alternating_(alternating_shift) {
  if (steps < 0) throw InvalidArgument("step count must be nonnegative");
  if (lattice_halfwidth < 1) throw InvalidArgument("lattice halfwidth must be positive");
  if (lattice_halfwidth < steps) {
    throw InvalidArgument("lattice halfwidth " + std::to_string(lattice_halfwidth) +
                          " is smaller than the step count " + std::to_string(steps));
  }
}

WalkParameters WalkParameters::localized(double theta, int steps, bool alternating_shift) {
  return WalkParameters(theta, steps, std::max(steps, 1), alternating_shift);
}

WalkParameters WalkParameters::with_theta(double theta) const {
  return WalkParameters(theta, steps_, halfwidth_, alternating_);
}

WalkParameters WalkParameters::with_steps(int steps) const {
  return WalkParameters(theta_, steps, std::max(halfwidth_, steps), alternating_);
}

Eigen::Matrix2cd coin_matrix(double theta) {
  if (!std::isfinite(theta)) throw InvalidArgument("coin angle must be finite");
  const auto [c, s] = coin_entries(theta);
  Eigen::Matrix2cd m;
  m << c, -s, s, c;
  return m;
}

Eigen::Matrix2cd reduced_walk_operator(double theta, double k) {
  Eigen::Matrix2cd phase = Eigen::Matrix2cd::Zero();
  phase(0, 0) = std::polar(1.0, -k);
  phase(1, 1) = std::polar(1.0, k);
  return phase * coin_matrix(theta);
}

int shift_direction(const WalkParameters& params, int step_index) noexcept {
  return (params.alternating_shift() && (step_index % 2 != 0)) ? -1 : 1;
}

// --- SpinorLatticeState ------------------------------------------------------

SpinorLatticeState::SpinorLatticeState(Lattice lattice)
    : lattice_(lattice), amps_(static_cast<std::size_t>(lattice.dim()), complex{}) {
  if (lattice.halfwidth < 1) throw InvalidArgument("lattice halfwidth must be positive");
}

double SpinorLatticeState::norm_squared() const {
  double acc = 0.0;
  for (const auto& a : amps_) acc += std::norm(a);
  return acc;
}

void SpinorLatticeState::normalize() {
  const double n = std::sqrt(norm_squared());
  if (n == 0.0) throw InvalidArgument("cannot normalize the zero state");
  for (auto& a : amps_) a /= n;
}

std::vector<double> SpinorLatticeState::position_distribution() const {
  std::vector<double> p(static_cast<std::size_t>(lattice_.sites()), 0.0);
  for (int x = -lattice_.halfwidth; x <= lattice_.halfwidth; ++x) {
    p[lattice_.site_index(x)] = std::norm(amplitude(Spin::up, x)) + std::norm(amplitude(Spin::down, x));
  }
  return p;
}

SpinorLatticeState apply_step(const SpinorLatticeState& state, const WalkParameters& params,
                              int step_index) {
  const Lattice lat = state.lattice();
  if (lat.halfwidth != params.lattice_halfwidth()) {
    throw InvalidArgument("state lattice does not match the walk parameters");
  }
  const auto [c, s] = coin_entries(params.theta());
  const int dir = shift_direction(params, step_index);
  SpinorLatticeState out(lat);
  for (int x = -lat.halfwidth; x <= lat.halfwidth; ++x) {
    const complex up = state.amplitude(Spin::up, x);
    const complex dn = state.amplitude(Spin::down, x);
    const complex new_up = c * up - s * dn;
    const complex new_dn = s * up + c * dn;
    const int x_up = x + dir;
    const int x_dn = x - dir;
    if (lat.contains(x_up)) {
      out.amplitude(Spin::up, x_up) = new_up;
    } else if (new_up != complex{}) {
      throw TruncationError("spin-up amplitude leaves the lattice at x = " + std::to_string(x_up));
    }
    if (lat.contains(x_dn)) {
      out.amplitude(Spin::down, x_dn) = new_dn;
    } else if (new_dn != complex{}) {
      throw TruncationError("spin-down amplitude leaves the lattice at x = " + std::to_string(x_dn));
    }
  }
  return out;
}

SpinorLatticeState evolve_pure(SpinorLatticeState state, const WalkParameters& params) {
  for (int n = 0; n < params.steps(); ++n) state = apply_step(state, params, n);
  return state;
}

// --- Spectrum ------------------------------------------------------------------

Spinor spinor_from_bloch(const BlochAngles& angles) {
  return {complex{std::cos(0.5 * angles.polar), 0.0},
          std::polar(std::sin(0.5 * angles.polar), angles.azimuth)};
}

double quasi_energy(double theta, double k, Band band) {
  const double c = std::cos(0.5 * theta);
  const double arg = std::clamp(c * std::cos(k), -1.0, 1.0);
  return sign_of(band) * std::acos(arg);
}

BlochAngles eigenspinor_angles(double theta, double k, Band band) {
  theta = normalize_angle(theta);
  BlochAngles upper = closed_form_angles(theta, k);
  // For cos(theta/2) < 0 the closed form lands on the lower band.
  if (std::cos(0.5 * theta) < 0.0) {
    upper = {kPi - upper.polar, wrap_azimuth(upper.azimuth + kPi)};
  }
  if (band == Band::plus) return upper;
  return {kPi - upper.polar, wrap_azimuth(upper.azimuth + kPi)};
}

Spinor eigenspinor(double theta, double k, Band band) {
  return spinor_from_bloch(eigenspinor_angles(theta, k, band));
}

double group_velocity(double theta, double k, Band band) {
  const double c = std::cos(0.5 * theta);
  const double cosk = std::cos(k);
  const double denom2 = 1.0 - c * c * cosk * cosk;
  if (denom2 <= 0.0) return 0.0;
  return sign_of(band) * c * std::sin(k) / std::sqrt(denom2);
}

double group_velocity_derivative(double theta, double k, Band band) {
  const double c = std::cos(0.5 * theta);
  const double one_minus_c2 = 1.0 - c * c;
  if (one_minus_c2 <= 0.0) return 0.0;
  const double cosk = std::cos(k);
  const double denom = 1.0 - c * c * cosk * cosk;
  return sign_of(band) * c * cosk * one_minus_c2 / (denom * std::sqrt(denom));
}

std::vector<BandPoint> band_structure(double theta, std::span<const double> k_grid) {
  theta = normalize_angle(theta);
  std::vector<BandPoint> out;
  out.reserve(k_grid.size());
  for (const double k : k_grid) {
    if (!(k > -kPi && k <= kPi)) {
      throw InvalidArgument("quasi momentum " + std::to_string(k) + " outside (-pi, pi]");
    }
    BandPoint p;
    p.k = k;
    p.omega_plus = quasi_energy(theta, k, Band::plus);
    p.omega_minus = -p.omega_plus;
    p.eigenspinor_plus = eigenspinor_angles(theta, k, Band::plus);
    p.eigenspinor_minus = eigenspinor_angles(theta, k, Band::minus);
    p.vg_plus = group_velocity(theta, k, Band::plus);
    p.vg_minus = -p.vg_plus;
    out.push_back(p);
  }
  return out;
}

std::vector<double> uniform_k_grid(int points) {
  if (points < 1) throw InvalidArgument("k grid needs at least one point");
  std::vector<double> k(static_cast<std::size_t>(points));
  for (int a = 0; a < points; ++a) {
    k[a] = kPi * (2.0 * (a + 1) - points) / points;
  }
  return k;
}

double ballistic_variance(double theta, int steps) {
  if (steps < 0) throw InvalidArgument("step count must be nonnegative");
  const double n = static_cast<double>(steps);
  return n * n * (1.0 - std::abs(std::sin(0.5 * theta)));
}

double effective_mass(double theta, Band band) {
  theta = normalize_angle(theta);
  const double c = std::cos(0.5 * theta);
  if (std::abs(c) < 1e-12) throw SingularityError("effective mass is singular at theta = pi");
  return sign_of(band) * std::abs(std::sin(0.5 * theta)) / c;
}

// --- Initial states -------------------------------------------------------------

InitialState InitialState::symmetric() {
  InitialState s;
  s.kind = InitialKind::localized_symmetric;
  return s;
}

InitialState InitialState::localized(Spinor spin, int site) {
  InitialState s;
  s.kind = InitialKind::localized_spinor;
  s.spin = spin;
  s.site = site;
  return s;
}

InitialState InitialState::packet(double k0, double width, Band band) {
  InitialState s;
  s.kind = InitialKind::gaussian_packet;
  s.k0 = k0;
  s.width = width;
  s.band = band;
  return s;
}

InitialState InitialState::cat(double width, Band band) {
  InitialState s;
  s.kind = InitialKind::k_cat;
  s.width = width;
  s.band = band;
  return s;
}

int packet_support_halfwidth(double width) {
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw InvalidArgument("packet width must be positive");
  }
  // Amplitude at the cut is exp(-16) of the peak.
  return static_cast<int>(std::ceil(8.0 * width));
}

int required_halfwidth(const InitialState& init, int steps) {
  switch (init.kind) {
    case InitialKind::localized_up:
    case InitialKind::localized_symmetric:
    case InitialKind::localized_spinor:
      return std::max(std::abs(init.site) + steps, 1);
    case InitialKind::gaussian_packet:
    case InitialKind::k_cat:
      return packet_support_halfwidth(init.width) + std::max(steps, 1);
  }
  return std::max(steps, 1);
}

namespace {

void place_localized(SpinorLatticeState& state, const Spinor& spin, int site) {
  if (!state.lattice().contains(site)) {
    throw InvalidArgument("initial site " + std::to_string(site) + " outside the lattice");
  }
  state.amplitude(Spin::up, site) = spin[0];
  state.amplitude(Spin::down, site) = spin[1];
  state.normalize();
}

template <typename SpinorAt>
void place_packet(SpinorLatticeState& state, double width, SpinorAt&& spinor_at) {
  const int cut = packet_support_halfwidth(width);
  if (cut > state.lattice().halfwidth) {
    throw InvalidArgument("lattice too small for a packet of width " + std::to_string(width));
  }
  for (int x = -cut; x <= cut; ++x) {
    const double envelope = std::exp(-static_cast<double>(x) * x / (4.0 * width * width));
    const Spinor u = spinor_at(x);
    state.amplitude(Spin::up, x) = envelope * u[0];
    state.amplitude(Spin::down, x) = envelope * u[1];
  }
  state.normalize();
}

}  // namespace

SpinorLatticeState make_initial_state(const InitialState& init, const WalkParameters& params) {
  SpinorLatticeState state(params.lattice());
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  switch (init.kind) {
    case InitialKind::localized_up:
      place_localized(state, {complex{1.0, 0.0}, complex{}}, init.site);
      break;
    case InitialKind::localized_symmetric:
      place_localized(state, {complex{inv_sqrt2, 0.0}, complex{0.0, inv_sqrt2}}, init.site);
      break;
    case InitialKind::localized_spinor:
      if (std::norm(init.spin[0]) + std::norm(init.spin[1]) == 0.0) {
        throw InvalidArgument("initial spinor is zero");
      }
      place_localized(state, init.spin, init.site);
      break;
    case InitialKind::gaussian_packet: {
      const double k0 = wrap_to_zone(init.k0);
      const Spinor u = eigenspinor(params.theta(), k0, init.band);
      place_packet(state, init.width, [&](int x) {
        const complex phase = std::polar(1.0, k0 * x);
        return Spinor{u[0] * phase, u[1] * phase};
      });
      break;
    }
    case InitialKind::k_cat: {
      const Spinor right = eigenspinor(params.theta(), 0.5 * kPi, init.band);
      const Spinor left = eigenspinor(params.theta(), -0.5 * kPi, init.band);
      place_packet(state, init.width, [&](int x) {
        const complex pr = std::polar(1.0, 0.5 * kPi * x);
        const complex pl = std::polar(1.0, -0.5 * kPi * x);
        return Spinor{right[0] * pr + left[0] * pl, right[1] * pr + left[1] * pl};
      });
      break;
    }
  }
  return state;
}

}  // namespace qwalk
