// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file physical_rates.hpp
 * @brief Differential light shifts, noise-driven phase variances and photon
 *        scattering rates for a spin-dependent optical lattice.
 *
 * Units: SI throughout, frequencies as angular frequencies (rad/s), noise
 * spectral densities one-sided over omega >= 0 and per rad/s.
 */

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace qwalk {

namespace constants {
inline constexpr double kHbar = 1.054571817e-34;           // J s
inline constexpr double kBoltzmann = 1.380649e-23;         // J / K
inline constexpr double kSpeedOfLight = 299792458.0;       // m / s
inline constexpr double kBohrMagneton = 9.2740100783e-24;  // J / T
/// mu_B / hbar in rad / (s G).
inline constexpr double kBohrMagnetonOverHbar = kBohrMagneton / kHbar * 1e-4;
}  // namespace constants

/// Power spectral density S(omega), either flat or piecewise linear
/// through tabulated points (zero outside the table).
class NoiseSpectrum {
 public:
  static NoiseSpectrum white(double density);
  static NoiseSpectrum tabulated(std::vector<double> omega, std::vector<double> density);

  bool is_white() const noexcept { return omega_.empty(); }
  double white_density() const noexcept { return white_; }
  const std::vector<double>& omega() const noexcept { return omega_; }
  const std::vector<double>& density() const noexcept { return density_; }
  double operator()(double omega) const;

 private:
  double white_ = 0.0;
  std::vector<double> omega_;
  std::vector<double> density_;
};

struct AtomPhysicalParameters {
  std::string species;
  double hyperfine_splitting = 0.0;  // rad/s
  double d1_frequency = 0.0;         // rad/s
  double d1_linewidth = 0.0;         // rad/s
  double d2_frequency = 0.0;         // rad/s
  double d2_linewidth = 0.0;         // rad/s
  double lattice_wavelength = 0.0;   // m
  double trap_depth = 0.0;           // J
  double step_duration = 0.0;        // s
  double nuclear_spin = 0.0;
  double mf_up = 0.0;
  double gf_up = 0.0;
  double mf_down = 0.0;
  double gf_down = 0.0;
  double transverse_temperature = 0.0;  // K
  double ellipticity = 0.0;
  double rabi_frequency = 0.0;  // rad/s
  double total_duration = 0.0;  // s, sets the low-frequency cutoff 1 / t_tot
  std::optional<NoiseSpectrum> magnetic_noise;   // G^2 / (rad/s)
  std::optional<NoiseSpectrum> intensity_noise;  // RIN, 1 / (rad/s)
  std::optional<NoiseSpectrum> ellipticity_noise;

  double lattice_frequency() const;
  double detuning_d1() const { return lattice_frequency() - d1_frequency; }
  double detuning_d2() const { return lattice_frequency() - d2_frequency; }

  /// Throws InvalidArgument on nonpositive frequencies, energies, times or |epsilon| > 1.
  void validate() const;

  /// Shipped cesium defaults.
  static AtomPhysicalParameters cesium();

  /// Reads the file format of data/cesium.json. With "extends": "cesium"
  /// missing keys fall back to the cesium defaults; otherwise every key is
  /// required and MissingFieldsError lists the absent ones.
  static AtomPhysicalParameters from_json(const nlohmann::json& j);
};

double scalar_light_shift_eta(const AtomPhysicalParameters& p);

struct VectorLightShift {
  double eta_v = 0.0;     // eta_v'
  double eta_perp = 0.0;  // lin-perp-lin transport configuration
};

VectorLightShift vector_light_shift_eta(const AtomPhysicalParameters& p);

struct CoherenceEstimate {
  double t2 = 0.0;      // s, +infinity for eta = 0
  double length = 0.0;  // sites
};

/// T2 = 2 hbar / (|eta| k_B T), l = T2 / tau.
CoherenceEstimate inhomogeneous_T2_and_length(double eta, const AtomPhysicalParameters& p);

struct PhaseVariance {
  double delta_phi2 = 0.0;
  double p_spin = 0.0;
};

/// Si(x) = int_0^x sin(t)/t dt.
double sine_integral(double x);

/// int_{omega_min}^inf sinc^2(omega tau / 2) d omega in closed form.
double white_sinc2_integral(double tau, double omega_min);

/// The same integral by adaptive quadrature, used to cross-check.
double white_sinc2_integral_numeric(double tau, double omega_min);

/// Delta Phi^2 = prefactor int_{omega_min}^inf sinc^2(omega tau/2) S(omega) d omega,
/// p_C = 1 - exp(-Delta Phi^2 / 2).
PhaseVariance phase_variance(const NoiseSpectrum& noise, double prefactor, double tau,
                             double omega_min);

/// tau^2 eta^2 U0^2 / hbar^2 (intensity noise, use eta = eta_s; ellipticity noise, eta_v').
double light_shift_noise_prefactor(double eta, const AtomPhysicalParameters& p);

/// tau^2 (mu_B/hbar)^2 [m_F g_F(up) - m_F g_F(down)]^2 with B in gauss.
double magnetic_noise_prefactor(const AtomPhysicalParameters& p);

struct ScatteringRates {
  double total = 0.0;           // 1/s
  double inelastic_up = 0.0;    // 1/s
  double inelastic_down = 0.0;  // 1/s
  double inelastic_qubit = 0.0; // 1/s
  double elastic_dephasing = 0.0;
  double raman_fraction = 0.0;  // I / (I + 1/2)
  double p_space = 0.0;
  double p_spin = 0.0;
};

ScatteringRates scattering_rates(const AtomPhysicalParameters& p);

/// Rabi frequency that makes the total scattering rate equal `total_rate`.
double rabi_frequency_for_total_rate(const AtomPhysicalParameters& p, double total_rate);

struct RateReport {
  double detuning_d1 = 0.0;
  double detuning_d2 = 0.0;
  double eta_s = 0.0;
  VectorLightShift vector;
  CoherenceEstimate scalar;
  CoherenceEstimate vectorial;
  CoherenceEstimate wobbling;  // eta_perp / 2 during transport
  std::optional<PhaseVariance> magnetic;
  std::optional<PhaseVariance> intensity;
  std::optional<PhaseVariance> ellipticity;
  ScatteringRates scattering;
};

RateReport compute_rate_report(const AtomPhysicalParameters& p);

enum class Mark { none, cross, circled, boxed };

struct MechanismRow {
  std::string mechanism;
  Mark spin_environment = Mark::none;
  Mark spin_coin = Mark::none;
  Mark spin_shift = Mark::none;
  Mark spatial_environment = Mark::none;
  std::string annotation;
};

/// Rows of the mechanism classification, annotated with the report's numbers.
std::vector<MechanismRow> mechanism_table(const RateReport& report);

std::string render_mechanism_table(const std::vector<MechanismRow>& rows);

}  // namespace qwalk
