// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

#include "qwalk/physical_rates.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qwalk/cesium_data.hpp"
#include "qwalk/errors.hpp"

namespace qwalk {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kHalfPi = 0.5 * std::numbers::pi;

// Detunings are differences of optical frequencies, so "zero" means zero
// to within roundoff of `scale`.
void require_nonzero(double v, double scale, const char* what) {
  if (!std::isfinite(v) || std::abs(v) <= 64.0 * std::numeric_limits<double>::epsilon() * scale) {
    throw SingularityError(std::string(what) + " is zero or non-finite");
  }
}

double spin_moment_difference(const AtomPhysicalParameters& p) {
  return p.mf_up * p.gf_up - p.mf_down * p.gf_down;
}

}  // namespace

// --- noise spectra -----------------------------------------------------------

NoiseSpectrum NoiseSpectrum::white(double density) {
  if (!std::isfinite(density) || density < 0.0) {
    throw InvalidArgument("spectral density must be finite and nonnegative");
  }
  NoiseSpectrum s;
  s.white_ = density;
  return s;
}

NoiseSpectrum NoiseSpectrum::tabulated(std::vector<double> omega, std::vector<double> density) {
  if (omega.size() != density.size() || omega.size() < 2) {
    throw InvalidArgument("tabulated spectrum needs at least two matching (omega, S) points");
  }
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (!std::isfinite(density[i]) || density[i] < 0.0) {
      throw InvalidArgument("spectral density must be finite and nonnegative");
    }
    if (!std::isfinite(omega[i]) || omega[i] < 0.0 || (i > 0 && omega[i] <= omega[i - 1])) {
      throw InvalidArgument("spectrum frequencies must be nonnegative and increasing");
    }
  }
  NoiseSpectrum s;
  s.omega_ = std::move(omega);
  s.density_ = std::move(density);
  return s;
}

double NoiseSpectrum::operator()(double omega) const {
  if (is_white()) return white_;
  if (omega < omega_.front() || omega > omega_.back()) return 0.0;
  const auto it = std::upper_bound(omega_.begin(), omega_.end(), omega);
  if (it == omega_.end()) return density_.back();
  const auto i = static_cast<std::size_t>(it - omega_.begin());
  const double t = (omega - omega_[i - 1]) / (omega_[i] - omega_[i - 1]);
  return density_[i - 1] + t * (density_[i] - density_[i - 1]);
}

// --- parameters ----------------------------------------------------------------

double AtomPhysicalParameters::lattice_frequency() const {
  return kTwoPi * constants::kSpeedOfLight / lattice_wavelength;
}

void AtomPhysicalParameters::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgument(std::string(name) + " must be positive");
    }
  };
  positive(hyperfine_splitting, "hyperfine splitting");
  positive(d1_frequency, "D1 frequency");
  positive(d1_linewidth, "D1 linewidth");
  positive(d2_frequency, "D2 frequency");
  positive(d2_linewidth, "D2 linewidth");
  positive(lattice_wavelength, "lattice wavelength");
  positive(trap_depth, "trap depth");
  positive(step_duration, "step duration");
  positive(transverse_temperature, "transverse temperature");
  positive(rabi_frequency, "Rabi frequency");
  positive(total_duration, "total duration");
  if (!(nuclear_spin >= 0.0)) throw InvalidArgument("nuclear spin must be nonnegative");
  if (!std::isfinite(ellipticity) || std::abs(ellipticity) > 1.0) {
    throw InvalidArgument("ellipticity must satisfy |epsilon| <= 1");
  }
}

AtomPhysicalParameters AtomPhysicalParameters::cesium() {
  return from_json(nlohmann::json::parse(detail::kCesiumJson));
}

AtomPhysicalParameters AtomPhysicalParameters::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("rate parameters must be a JSON object");
  nlohmann::json merged = j;
  if (j.contains("extends")) {
    const auto base = j.at("extends").get<std::string>();
    if (base != "cesium") throw InvalidArgument("unknown parameter base '" + base + "'");
    merged = nlohmann::json::parse(detail::kCesiumJson);
    for (const auto& [key, value] : j.items()) {
      if (key != "extends") merged[key] = value;
    }
  }
  if (merged.contains("schema_version") && merged.at("schema_version").get<int>() != 1) {
    throw InvalidArgument("unsupported schema_version");
  }

  static const char* const required[] = {
      "hyperfine_splitting_hz", "d1_wavelength_nm", "d1_linewidth_mhz", "d2_wavelength_nm",
      "d2_linewidth_mhz",       "lattice_wavelength_nm", "trap_depth_uk", "step_duration_us",
      "nuclear_spin",           "mf_up", "gf_up", "mf_down", "gf_down",
      "transverse_temperature_uk", "ellipticity", "rabi_frequency_rad_per_s"};
  std::vector<std::string> missing;
  for (const char* key : required) {
    if (!merged.contains(key) || merged.at(key).is_null()) missing.emplace_back(key);
  }
  if (!merged.contains("total_duration_us") && !merged.contains("walk_steps")) {
    missing.emplace_back("total_duration_us|walk_steps");
  }
  if (!missing.empty()) throw MissingFieldsError(std::move(missing));

  auto num = [&](const char* key) {
    const auto& v = merged.at(key);
    if (!v.is_number()) throw InvalidArgument(std::string("field ") + key + " must be a number");
    return v.get<double>();
  };
  auto line_frequency = [&](const char* key) { return kTwoPi * constants::kSpeedOfLight / (num(key) * 1e-9); };

  AtomPhysicalParameters p;
  p.species = merged.value("species", std::string{});
  p.hyperfine_splitting = kTwoPi * num("hyperfine_splitting_hz");
  p.d1_frequency = line_frequency("d1_wavelength_nm");
  p.d1_linewidth = kTwoPi * 1e6 * num("d1_linewidth_mhz");
  p.d2_frequency = line_frequency("d2_wavelength_nm");
  p.d2_linewidth = kTwoPi * 1e6 * num("d2_linewidth_mhz");
  p.lattice_wavelength = num("lattice_wavelength_nm") * 1e-9;
  p.trap_depth = num("trap_depth_uk") * 1e-6 * constants::kBoltzmann;
  p.step_duration = num("step_duration_us") * 1e-6;
  p.nuclear_spin = num("nuclear_spin");
  p.mf_up = num("mf_up");
  p.gf_up = num("gf_up");
  p.mf_down = num("mf_down");
  p.gf_down = num("gf_down");
  p.transverse_temperature = num("transverse_temperature_uk") * 1e-6;
  p.ellipticity = num("ellipticity");
  p.rabi_frequency = num("rabi_frequency_rad_per_s");
  p.total_duration = merged.contains("total_duration_us") ? num("total_duration_us") * 1e-6
                                                          : num("walk_steps") * p.step_duration;
  if (merged.contains("magnetic_noise_gauss_per_sqrt_hz")) {
    // (G/sqrt(Hz))^2 per Hz becomes per rad/s.
    const double a = num("magnetic_noise_gauss_per_sqrt_hz");
    p.magnetic_noise = NoiseSpectrum::white(a * a / kTwoPi);
  }
  auto spectrum = [&](const char* key) -> std::optional<NoiseSpectrum> {
    if (!merged.contains(key)) return std::nullopt;
    const auto& s = merged.at(key);
    if (s.contains("white")) return NoiseSpectrum::white(s.at("white").get<double>());
    return NoiseSpectrum::tabulated(s.at("omega_rad_per_s").get<std::vector<double>>(),
                                    s.at("density").get<std::vector<double>>());
  };
  p.intensity_noise = spectrum("intensity_noise");
  p.ellipticity_noise = spectrum("ellipticity_noise");
  p.validate();
  return p;
}

// --- light shifts ----------------------------------------------------------------

double scalar_light_shift_eta(const AtomPhysicalParameters& p) {
  const double d1 = p.detuning_d1();
  const double d2 = p.detuning_d2();
  const double w = p.lattice_frequency();
  require_nonzero(d1, w, "D1 detuning");
  require_nonzero(d2, w, "D2 detuning");
  require_nonzero(2.0 * d1 + d2, w, "2 Delta_D1 + Delta_D2");
  return p.hyperfine_splitting * (3.0 / (2.0 * d1 + d2) - 1.0 / d1 - 1.0 / d2);
}

VectorLightShift vector_light_shift_eta(const AtomPhysicalParameters& p) {
  const double d1 = p.detuning_d1();
  const double d2 = p.detuning_d2();
  require_nonzero(2.0 * d1 + d2, p.lattice_frequency(), "2 Delta_D1 + Delta_D2");
  const double ratio = (d1 - d2) / (2.0 * d1 + d2);
  VectorLightShift v;
  v.eta_v = spin_moment_difference(p) * ratio;
  v.eta_perp = 0.5 * (std::abs(p.mf_up) * p.gf_up + std::abs(p.mf_down) * p.gf_down) * ratio;
  return v;
}

CoherenceEstimate inhomogeneous_T2_and_length(double eta, const AtomPhysicalParameters& p) {
  if (!(p.transverse_temperature > 0.0)) throw InvalidArgument("temperature must be positive");
  if (!(p.step_duration > 0.0)) throw InvalidArgument("step duration must be positive");
  if (eta == 0.0) {
    const double inf = std::numeric_limits<double>::infinity();
    return {inf, inf};
  }
  const double t2 = 2.0 * constants::kHbar / (std::abs(eta) * constants::kBoltzmann * p.transverse_temperature);
  return {t2, t2 / p.step_duration};
}

// --- phase noise -------------------------------------------------------------------

double sine_integral(double x) {
  if (x < 0.0) return -sine_integral(-x);
  if (x == 0.0) return 0.0;
  if (x <= 2.0) {
    // Power series sum (-1)^n x^(2n+1) / ((2n+1) (2n+1)!).
    double term = x;
    double sum = x;
    for (int n = 1; n < 40; ++n) {
      term *= -x * x / ((2.0 * n) * (2.0 * n + 1.0));
      const double add = term / (2.0 * n + 1.0);
      sum += add;
      if (std::abs(add) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
  }
  // Si(x) = pi/2 + Im E1(ix), with E1 from its continued fraction (modified Lentz).
  using cd = std::complex<double>;
  const cd z{0.0, x};
  const double tiny = 1e-300;
  cd b = z + 1.0;
  cd c = 1.0 / tiny;
  cd d = 1.0 / b;
  cd h = d;
  for (int i = 1; i < 1000; ++i) {
    const double a = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const cd del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  const cd e1 = h * std::exp(-z);
  return kHalfPi + e1.imag();
}

double white_sinc2_integral(double tau, double omega_min) {
  if (!(tau > 0.0)) throw InvalidArgument("step duration must be positive");
  if (!(omega_min >= 0.0)) throw InvalidArgument("low-frequency cutoff must be nonnegative");
  const double a = 0.5 * omega_min * tau;
  if (a == 0.0) return std::numbers::pi / tau;
  const double s = std::sin(a);
  return (2.0 / tau) * (kHalfPi - sine_integral(2.0 * a) + s * s / a);
}

namespace {

double sinc2(double u) {
  if (u == 0.0) return 1.0;
  const double s = std::sin(u) / u;
  return s * s;
}

// int_{u0}^{u1} g(u) sinc^2(u) du on pi-wide Gauss-Kronrod panels.
template <typename F>
double panel_integral(F&& g, double u0, double u1) {
  using boost::math::quadrature::gauss_kronrod;
  double acc = 0.0;
  const double width = std::numbers::pi;
  for (double a = u0; a < u1; a += width) {
    const double b = std::min(a + width, u1);
    acc += gauss_kronrod<double, 61>::integrate([&](double u) { return g(u) * sinc2(u); }, a, b, 5, 1e-13);
  }
  return acc;
}

}  // namespace

double white_sinc2_integral_numeric(double tau, double omega_min) {
  if (!(tau > 0.0)) throw InvalidArgument("step duration must be positive");
  const double u0 = 0.5 * omega_min * tau;
  // The cutoff sits on a multiple of pi, where the tail is 1/(2U) - 1/(4U^3) + ...
  const double upper = std::max(4000.0, std::ceil(u0 / std::numbers::pi) + 4000.0) * std::numbers::pi;
  const double body = panel_integral([](double) { return 1.0; }, u0, upper);
  const double tail = 0.5 / upper - 0.25 / (upper * upper * upper);
  return (2.0 / tau) * (body + tail);
}

PhaseVariance phase_variance(const NoiseSpectrum& noise, double prefactor, double tau,
                             double omega_min) {
  if (!(prefactor >= 0.0)) throw InvalidArgument("prefactor must be nonnegative");
  double integral;
  if (noise.is_white()) {
    integral = noise.white_density() * white_sinc2_integral(tau, omega_min);
  } else {
    const double lo = std::max(omega_min, noise.omega().front());
    const double hi = noise.omega().back();
    integral = lo >= hi ? 0.0
                        : (2.0 / tau) * panel_integral([&](double u) { return noise(2.0 * u / tau); },
                                                       0.5 * lo * tau, 0.5 * hi * tau);
  }
  PhaseVariance out;
  out.delta_phi2 = prefactor * integral;
  out.p_spin = -std::expm1(-0.5 * out.delta_phi2);
  return out;
}

double light_shift_noise_prefactor(double eta, const AtomPhysicalParameters& p) {
  const double a = p.step_duration * eta * p.trap_depth / constants::kHbar;
  return a * a;
}

double magnetic_noise_prefactor(const AtomPhysicalParameters& p) {
  const double a = p.step_duration * constants::kBohrMagnetonOverHbar * spin_moment_difference(p);
  return a * a;
}

// --- scattering --------------------------------------------------------------------

namespace {

double scattering_alpha(const AtomPhysicalParameters& p) {
  const double r = p.lattice_frequency() / p.d1_frequency;
  return r * r * r * p.d1_linewidth * p.rabi_frequency * p.rabi_frequency / 12.0;
}

double total_rate_per_alpha(const AtomPhysicalParameters& p) {
  const double d1 = p.detuning_d1();
  const double d2 = p.detuning_d2();
  require_nonzero(d1, p.lattice_frequency(), "D1 detuning");
  require_nonzero(d2, p.lattice_frequency(), "D2 detuning");
  return 2.0 / (d2 * d2) + 1.0 / (d1 * d1);
}

}  // namespace

ScatteringRates scattering_rates(const AtomPhysicalParameters& p) {
  const double alpha = scattering_alpha(p);
  const double d1 = p.detuning_d1();
  const double d2 = p.detuning_d2();
  const double per_alpha = total_rate_per_alpha(p);
  const double diff = 1.0 / d2 - 1.0 / d1;
  const double diff2 = diff * diff;
  const double gm_up = p.gf_up * p.mf_up;
  const double gm_down = p.gf_down * p.mf_down;

  ScatteringRates r;
  r.total = alpha * per_alpha;
  r.inelastic_up = alpha * (2.0 - gm_up * gm_up) / 3.0 * diff2;
  r.inelastic_down = alpha * (2.0 - gm_down * gm_down) / 3.0 * diff2;
  r.raman_fraction = p.nuclear_spin / (p.nuclear_spin + 0.5);
  r.inelastic_qubit = r.raman_fraction * r.inelastic_up;
  r.elastic_dephasing = alpha * (gm_up - gm_down) * (gm_up - gm_down) / 6.0 * diff2;
  r.p_space = r.total * p.step_duration;
  r.p_spin = r.elastic_dephasing * p.step_duration;
  return r;
}

double rabi_frequency_for_total_rate(const AtomPhysicalParameters& p, double total_rate) {
  if (!(total_rate > 0.0)) throw InvalidArgument("total scattering rate must be positive");
  const double r = p.lattice_frequency() / p.d1_frequency;
  const double alpha = total_rate / total_rate_per_alpha(p);
  return std::sqrt(12.0 * alpha / (r * r * r * p.d1_linewidth));
}

RateReport compute_rate_report(const AtomPhysicalParameters& p) {
  p.validate();
  RateReport r;
  r.detuning_d1 = p.detuning_d1();
  r.detuning_d2 = p.detuning_d2();
  r.eta_s = scalar_light_shift_eta(p);
  r.vector = vector_light_shift_eta(p);
  r.scalar = inhomogeneous_T2_and_length(r.eta_s, p);
  r.vectorial = inhomogeneous_T2_and_length(r.vector.eta_v * p.ellipticity, p);
  r.wobbling = inhomogeneous_T2_and_length(0.5 * r.vector.eta_perp, p);
  const double omega_min = 1.0 / p.total_duration;
  if (p.magnetic_noise) {
    r.magnetic = phase_variance(*p.magnetic_noise, magnetic_noise_prefactor(p), p.step_duration, omega_min);
  }
  if (p.intensity_noise) {
    r.intensity = phase_variance(*p.intensity_noise, light_shift_noise_prefactor(r.eta_s, p),
                                 p.step_duration, omega_min);
  }
  if (p.ellipticity_noise) {
    r.ellipticity = phase_variance(*p.ellipticity_noise, light_shift_noise_prefactor(r.vector.eta_v, p),
                                   p.step_duration, omega_min);
  }
  r.scattering = scattering_rates(p);
  return r;
}

// --- classification -----------------------------------------------------------------

namespace {

std::string fmt(double v, int digits = 3) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

std::string length_note(const CoherenceEstimate& c) {
  if (!std::isfinite(c.length)) return "no inhomogeneous dephasing";
  return "T2 = " + fmt(c.t2 * 1e6) + " us, l = " + fmt(c.length) + " sites";
}

const char* mark_symbol(Mark m) {
  switch (m) {
    case Mark::none:
      return "";
    case Mark::cross:
      return "x";
    case Mark::circled:
      return "(x)";
    case Mark::boxed:
      return "[x]";
  }
  return "";
}

}  // namespace

std::vector<MechanismRow> mechanism_table(const RateReport& report) {
  std::vector<MechanismRow> rows;
  rows.push_back({"Differential scalar light shift", Mark::boxed, Mark::cross, Mark::none, Mark::none,
                  "quasi-stationary; " + length_note(report.scalar) + "; vectorial part: " +
                      length_note(report.vectorial)});
  std::string depth_note = "qualitative (needs an intensity or ellipticity noise spectrum)";
  if (report.intensity || report.ellipticity) {
    depth_note.clear();
    if (report.intensity) depth_note += "intensity p_C = " + fmt(report.intensity->p_spin);
    if (report.ellipticity) {
      if (!depth_note.empty()) depth_note += "; ";
      depth_note += "ellipticity p_C = " + fmt(report.ellipticity->p_spin);
    }
  }
  rows.push_back({"Lattice depth fluctuations", Mark::circled, Mark::cross, Mark::none, Mark::none, depth_note});
  rows.push_back({"Uniform magnetic field fluctuations", Mark::circled, Mark::cross, Mark::none, Mark::none,
                  report.magnetic ? "DeltaPhi^2 = " + fmt(report.magnetic->delta_phi2) +
                                        ", p_C = " + fmt(report.magnetic->p_spin)
                                  : "qualitative (no magnetic noise spectrum)"});
  rows.push_back({"Magnetic field gradient fluctuations", Mark::cross, Mark::cross, Mark::none, Mark::cross,
                  "qualitative"});
  rows.push_back({"Jitter of lattice laser polarization", Mark::cross, Mark::cross, Mark::none, Mark::none,
                  "qualitative; differential potential wobbling during transport: " +
                      length_note(report.wobbling)});
  rows.push_back({"Jitter of lattice position", Mark::none, Mark::none, Mark::cross, Mark::cross,
                  "qualitative; motional excitations bounded by p_C < 2%"});
  rows.push_back({"Rayleigh scattering of lattice photons", Mark::none, Mark::none, Mark::none, Mark::circled,
                  "Gamma_tot = " + fmt(report.scattering.total) + " /s, p_S = " +
                      fmt(report.scattering.p_space)});
  rows.push_back({"Raman scattering of lattice photons", Mark::cross, Mark::cross, Mark::none, Mark::circled,
                  "Gamma_inel(up) = " + fmt(report.scattering.inelastic_up) + " /s, Gamma_inel(down) = " +
                      fmt(report.scattering.inelastic_down) + " /s, qubit = " +
                      fmt(report.scattering.inelastic_qubit) + " /s, Gamma_el.deph = " +
                      fmt(report.scattering.elastic_dephasing) + " /s, p_C = " +
                      fmt(report.scattering.p_spin) +
                      "; repumping out of the coin space is not modeled"});
  return rows;
}

std::string render_mechanism_table(const std::vector<MechanismRow>& rows) {
  std::size_t name_width = std::string("Decoherence source").size();
  for (const auto& r : rows) name_width = std::max(name_width, r.mechanism.size());
  std::ostringstream os;
  auto cell = [&](const std::string& s) {
    std::string out = s;
    out.resize(6, ' ');
    return out;
  };
  std::string header = "Decoherence source";
  header.resize(name_width, ' ');
  os << std::string(name_width, ' ') << " | spin              | spatial | notes\n";
  os << header << " | E     C     S     | E       |\n";
  os << std::string(name_width, '-') << "-+-------------------+---------+------\n";
  for (const auto& r : rows) {
    std::string name = r.mechanism;
    name.resize(name_width, ' ');
    os << name << " | " << cell(mark_symbol(r.spin_environment)) << cell(mark_symbol(r.spin_coin))
       << cell(mark_symbol(r.spin_shift)) << "| " << cell(mark_symbol(r.spatial_environment)) << "  | "
       << r.annotation << "\n";
  }
  os << "x: cross, (x): circled (Markovian, modeled by the Kraus channel), [x]: boxed (quasi-stationary)\n";
  os << "E: environment-induced, C: coin-mediated, S: shift-mediated\n";
  return os.str();
}

}  // namespace qwalk
