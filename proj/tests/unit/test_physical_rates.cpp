#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "json.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/physical_rates.hpp"

using namespace qwalk;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Places the D lines so that the lattice sees the requested detunings.
AtomPhysicalParameters with_detunings(AtomPhysicalParameters p, double d1, double d2) {
  const double wl = p.lattice_frequency();
  p.d1_frequency = wl - d1;
  p.d2_frequency = wl - d2;
  return p;
}

// Detuning ratio Delta_D1 = -2 Delta_D2, where (D1 - D2) / (2 D1 + D2) = 1.
AtomPhysicalParameters unit_ratio_cesium() {
  return with_detunings(AtomPhysicalParameters::cesium(), kTwoPi * 10e12, -kTwoPi * 5e12);
}

double si_by_quadrature(double x) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(
      [](double t) { return t == 0.0 ? 1.0 : std::sin(t) / t; }, 0.0, x, 20, 1e-14);
}

json cesium_json() {
  return json{{"hyperfine_splitting_hz", 9192631770.0},
              {"d1_wavelength_nm", 894.592959},
              {"d1_linewidth_mhz", 4.575},
              {"d2_wavelength_nm", 852.347275},
              {"d2_linewidth_mhz", 5.234},
              {"lattice_wavelength_nm", 866.0},
              {"trap_depth_uk", 80.0},
              {"step_duration_us", 33.3},
              {"walk_steps", 40},
              {"nuclear_spin", 3.5},
              {"mf_up", 4},
              {"gf_up", 0.25},
              {"mf_down", 3},
              {"gf_down", -0.25},
              {"transverse_temperature_uk", 10.0},
              {"ellipticity", 0.01},
              {"rabi_frequency_rad_per_s", 5e10}};
}

}  // namespace

TEST_CASE("shipped cesium parameters") {
  const auto p = AtomPhysicalParameters::cesium();
  CHECK(p.species == "cesium-133");
  CHECK(p.nuclear_spin == 3.5);
  CHECK(p.lattice_wavelength == doctest::Approx(866e-9));
  CHECK(p.detuning_d1() > 0.0);  // blue of D1
  CHECK(p.detuning_d2() < 0.0);  // red of D2
  CHECK(p.total_duration == doctest::Approx(40 * p.step_duration));
  CHECK(p.magnetic_noise.has_value());
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("scalar light shift coefficient") {
  const auto p = AtomPhysicalParameters::cesium();
  const double eta = scalar_light_shift_eta(p);
  MESSAGE("eta_s = " << eta);
  CHECK(eta == doctest::Approx(2.5e-3).epsilon(0.10));

  const double d1 = p.detuning_d1(), d2 = p.detuning_d2();
  CHECK(eta == doctest::Approx(p.hyperfine_splitting * (3.0 / (2.0 * d1 + d2) - 1.0 / d1 - 1.0 / d2)).epsilon(1e-14));

  auto no_hf = p;
  no_hf.hyperfine_splitting = 0.0;
  CHECK(scalar_light_shift_eta(no_hf) == 0.0);

  // Equal detunings do not cancel the scalar shift.
  const double delta = -kTwoPi * 3e12;
  const auto equal = with_detunings(p, delta, delta);
  CHECK(scalar_light_shift_eta(equal) == doctest::Approx(-p.hyperfine_splitting / delta).epsilon(1e-12));

  auto on_resonance = p;
  on_resonance.d1_frequency = p.lattice_frequency();
  CHECK_THROWS_AS(scalar_light_shift_eta(on_resonance), SingularityError);
}

TEST_CASE("vector light shift coefficients") {
  const auto v = vector_light_shift_eta(unit_ratio_cesium());
  CHECK(v.eta_v == doctest::Approx(7.0 / 4.0).epsilon(1e-12));
  CHECK(v.eta_perp == doctest::Approx(1.0 / 8.0).epsilon(1e-12));

  // At the shipped 866 nm lattice the detuning ratio is close to one.
  const auto shipped = vector_light_shift_eta(AtomPhysicalParameters::cesium());
  CHECK(shipped.eta_v == doctest::Approx(7.0 / 4.0).epsilon(0.01));
  CHECK(shipped.eta_perp == doctest::Approx(1.0 / 8.0).epsilon(0.01));

  auto same_mf = unit_ratio_cesium();
  same_mf.mf_up = 3;
  same_mf.gf_up = 0.25;
  same_mf.mf_down = 3;
  same_mf.gf_down = -0.25;
  CHECK(vector_light_shift_eta(same_mf).eta_perp == 0.0);
  CHECK(vector_light_shift_eta(same_mf).eta_v == doctest::Approx(1.5).epsilon(1e-12));

  const double d2 = -kTwoPi * 4e12;
  CHECK_THROWS_AS(vector_light_shift_eta(with_detunings(unit_ratio_cesium(), -0.5 * d2, d2)), SingularityError);
}

TEST_CASE("inhomogeneous coherence times and lengths") {
  const auto p = AtomPhysicalParameters::cesium();
  const auto report = compute_rate_report(p);
  MESSAGE("scalar T2 " << report.scalar.t2 * 1e6 << " us, l " << report.scalar.length << "; vectorial T2 "
                       << report.vectorial.t2 * 1e6 << " us, l " << report.vectorial.length << "; wobbling l "
                       << report.wobbling.length);
  CHECK(report.scalar.t2 == doctest::Approx(600e-6).epsilon(0.20));
  CHECK(report.scalar.length == doctest::Approx(20.0).epsilon(0.20));
  CHECK(report.vectorial.t2 == doctest::Approx(1e-6 / 0.01).epsilon(0.20));
  CHECK(report.vectorial.length == doctest::Approx(3.0).epsilon(0.20));
  CHECK(report.wobbling.length == doctest::Approx(0.8).epsilon(0.20));

  const auto direct = inhomogeneous_T2_and_length(2e-3, p);
  CHECK(direct.t2 == doctest::Approx(2.0 * constants::kHbar / (2e-3 * constants::kBoltzmann * 10e-6)).epsilon(1e-14));
  CHECK(direct.length == doctest::Approx(direct.t2 / p.step_duration).epsilon(1e-14));
  CHECK(inhomogeneous_T2_and_length(-2e-3, p).t2 == direct.t2);
  CHECK(std::isinf(inhomogeneous_T2_and_length(0.0, p).t2));
  CHECK(std::isinf(inhomogeneous_T2_and_length(0.0, p).length));

  auto hotter = p;
  hotter.transverse_temperature *= 2.0;
  CHECK(inhomogeneous_T2_and_length(2e-3, hotter).t2 == doctest::Approx(0.5 * direct.t2).epsilon(1e-14));
}

TEST_CASE("sine integral") {
  for (double x : {1e-3, 0.5, 1.0, 1.99, 2.0, 2.01, 5.0, 17.3, 60.0}) {
    CHECK(sine_integral(x) == doctest::Approx(si_by_quadrature(x)).epsilon(1e-12));
  }
  CHECK(sine_integral(1.0) == doctest::Approx(0.946083070367183).epsilon(1e-14));
  CHECK(sine_integral(-3.0) == doctest::Approx(-sine_integral(3.0)).epsilon(1e-15));
  CHECK(sine_integral(1e6) == doctest::Approx(kPi / 2).epsilon(1e-6));
}

TEST_CASE("white-noise sinc^2 integral") {
  const double tau = 33.3e-6;
  CHECK(white_sinc2_integral(tau, 0.0) == doctest::Approx(kPi / tau).epsilon(1e-15));
  for (double omega_min : {0.0, 1.0 / (40 * tau), 0.3 / tau, 2.0 / tau, 50.0 / tau}) {
    const double closed = white_sinc2_integral(tau, omega_min);
    const double numeric = white_sinc2_integral_numeric(tau, omega_min);
    CHECK(closed == doctest::Approx(numeric).epsilon(1e-6));
  }
  CHECK_THROWS_AS(white_sinc2_integral(0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(white_sinc2_integral(tau, -1.0), InvalidArgument);
}

TEST_CASE("phase variance and the resulting p_C") {
  const double tau = 20e-6;
  const double s0 = 3e-9;
  const double prefactor = 4e6;
  const auto white = phase_variance(NoiseSpectrum::white(s0), prefactor, tau, 0.0);
  CHECK(white.delta_phi2 == doctest::Approx(prefactor * s0 * kPi / tau).epsilon(1e-14));
  CHECK(white.p_spin == doctest::Approx(1.0 - std::exp(-0.5 * white.delta_phi2)).epsilon(1e-14));

  const auto silent = phase_variance(NoiseSpectrum::white(0.0), prefactor, tau, 0.0);
  CHECK(silent.delta_phi2 == 0.0);
  CHECK(silent.p_spin == 0.0);

  // A flat table over a wide band approaches the white result with the same cutoff.
  const double lo = 1e3, hi = 2e9;
  const auto table = phase_variance(NoiseSpectrum::tabulated({lo, hi}, {s0, s0}), prefactor, tau, lo);
  const auto cut = phase_variance(NoiseSpectrum::white(s0), prefactor, tau, lo);
  CHECK(table.delta_phi2 == doctest::Approx(cut.delta_phi2).epsilon(1e-4));

  CHECK_THROWS_AS(NoiseSpectrum::white(-1.0), InvalidArgument);
  CHECK_THROWS_AS(NoiseSpectrum::tabulated({1.0, 2.0}, {1.0, -1.0}), InvalidArgument);
  CHECK_THROWS_AS(NoiseSpectrum::tabulated({2.0, 1.0}, {1.0, 1.0}), InvalidArgument);
  const auto ramp = NoiseSpectrum::tabulated({1.0, 3.0}, {2.0, 6.0});
  CHECK(ramp(2.0) == doctest::Approx(4.0));
  CHECK(ramp(0.5) == 0.0);
  CHECK(ramp(4.0) == 0.0);
}

TEST_CASE("magnetic white noise through the formula chain") {
  const auto p = AtomPhysicalParameters::cesium();
  const auto report = compute_rate_report(p);
  REQUIRE(report.magnetic);
  const double s_b = 4.5e-6 * 4.5e-6 / kTwoPi;
  const double coupling = p.step_duration * constants::kBohrMagnetonOverHbar * (4 * 0.25 - 3 * -0.25);
  const double expected = coupling * coupling * s_b * white_sinc2_integral(p.step_duration, 1.0 / p.total_duration);
  CHECK(report.magnetic->delta_phi2 == doctest::Approx(expected).epsilon(1e-12));
  MESSAGE("magnetic DeltaPhi^2 " << report.magnetic->delta_phi2 << ", p_C " << report.magnetic->p_spin);
  CHECK(report.magnetic->p_spin > 0.03);
  CHECK(report.magnetic->p_spin < 0.04);
}

TEST_CASE("scattering rates") {
  auto p = AtomPhysicalParameters::cesium();
  const auto r = scattering_rates(p);
  CHECK(r.raman_fraction == doctest::Approx(7.0 / 8.0).epsilon(1e-15));
  CHECK(r.total == doctest::Approx(14.0).epsilon(1e-6));
  CHECK(r.inelastic_up == doctest::Approx(5.0).epsilon(0.20));
  CHECK(r.inelastic_down == doctest::Approx(7.0).epsilon(0.20));
  CHECK(r.elastic_dephasing == doctest::Approx(7.0).epsilon(0.20));
  CHECK(r.p_space == doctest::Approx(4e-4).epsilon(0.20));
  CHECK(r.p_spin == doctest::Approx(2e-4).epsilon(0.20));
  CHECK(r.inelastic_qubit == doctest::Approx(7.0 / 8.0 * r.inelastic_up).epsilon(1e-15));
  CHECK(r.p_space == doctest::Approx(r.total * p.step_duration).epsilon(1e-15));

  // Equal detunings remove every spin-changing and dephasing channel.
  const double delta = -kTwoPi * 2e12;
  const auto eq = with_detunings(p, delta, delta);
  const auto re = scattering_rates(eq);
  const double r3 = eq.lattice_frequency() / eq.d1_frequency;
  const double alpha = r3 * r3 * r3 * eq.d1_linewidth * eq.rabi_frequency * eq.rabi_frequency / 12.0;
  CHECK(re.inelastic_up == 0.0);
  CHECK(re.inelastic_down == 0.0);
  CHECK(re.elastic_dephasing == 0.0);
  CHECK(re.total == doctest::Approx(3.0 * alpha / (delta * delta)).epsilon(1e-12));
}

TEST_CASE("back-solving the Rabi frequency from a total rate") {
  auto p = AtomPhysicalParameters::cesium();
  p.rabi_frequency = rabi_frequency_for_total_rate(p, 20.0);
  CHECK(scattering_rates(p).total == doctest::Approx(20.0).epsilon(1e-12));
  CHECK_THROWS_AS(rabi_frequency_for_total_rate(p, 0.0), InvalidArgument);
}

TEST_CASE("Raman fraction of the total rate vanishes far from resonance") {
  auto p = AtomPhysicalParameters::cesium();
  double previous = 1.0;
  for (double nm : {900.0, 1064.0, 1550.0, 3000.0, 10600.0}) {
    p.lattice_wavelength = nm * 1e-9;
    const auto r = scattering_rates(p);
    const double fraction = r.inelastic_up / r.total;
    CHECK(fraction < previous);
    previous = fraction;
  }
  CHECK(previous < 1e-3);
}

TEST_CASE("rates scale with their inputs") {
  const auto p = AtomPhysicalParameters::cesium();
  const auto base = scattering_rates(p);
  auto brighter = p;
  brighter.rabi_frequency *= 3.0;
  CHECK(scattering_rates(brighter).total == doctest::Approx(9.0 * base.total).epsilon(1e-12));
  CHECK(scattering_rates(brighter).elastic_dephasing == doctest::Approx(9.0 * base.elastic_dephasing).epsilon(1e-12));
  auto slower = p;
  slower.step_duration *= 2.0;
  CHECK(scattering_rates(slower).p_space == doctest::Approx(2.0 * base.p_space).epsilon(1e-12));
  CHECK(inhomogeneous_T2_and_length(1e-3, slower).length ==
        doctest::Approx(0.5 * inhomogeneous_T2_and_length(1e-3, p).length).epsilon(1e-12));
  // White noise without a cutoff: tau^2 prefactor times pi / tau.
  const auto n = NoiseSpectrum::white(1e-10);
  const double a = phase_variance(n, light_shift_noise_prefactor(1e-3, p), p.step_duration, 0.0).delta_phi2;
  const double b = phase_variance(n, light_shift_noise_prefactor(1e-3, slower), slower.step_duration, 0.0).delta_phi2;
  CHECK(b == doctest::Approx(2.0 * a).epsilon(1e-12));
  auto deeper = p;
  deeper.trap_depth *= 2.0;
  CHECK(light_shift_noise_prefactor(1e-3, deeper) == doctest::Approx(4.0 * light_shift_noise_prefactor(1e-3, p)).epsilon(1e-12));
}

TEST_CASE("parameter files") {
  const auto full = AtomPhysicalParameters::from_json(cesium_json());
  CHECK(full.step_duration == doctest::Approx(33.3e-6));
  CHECK(full.total_duration == doctest::Approx(40 * 33.3e-6));
  CHECK_FALSE(full.magnetic_noise.has_value());

  json partial = cesium_json();
  partial.erase("gf_up");
  partial.erase("walk_steps");
  try {
    AtomPhysicalParameters::from_json(partial);
    FAIL("missing fields were accepted");
  } catch (const MissingFieldsError& e) {
    const std::string what = e.what();
    CHECK(what.find("gf_up") != std::string::npos);
    CHECK(what.find("walk_steps") != std::string::npos);
  }

  const auto derived = AtomPhysicalParameters::from_json(json{{"extends", "cesium"}, {"lattice_wavelength_nm", 870.0}});
  CHECK(derived.lattice_wavelength == doctest::Approx(870e-9));
  CHECK(derived.nuclear_spin == 3.5);
  CHECK_THROWS_AS(AtomPhysicalParameters::from_json(json{{"extends", "rubidium"}}), InvalidArgument);

  CHECK_THROWS_AS(AtomPhysicalParameters::from_json(json{{"extends", "cesium"}, {"ellipticity", 2.0}}),
                  InvalidArgument);
  CHECK_THROWS_AS(AtomPhysicalParameters::from_json(json{{"extends", "cesium"}, {"trap_depth_uk", -1.0}}),
                  InvalidArgument);
  CHECK_THROWS_AS(AtomPhysicalParameters::from_json(json{{"extends", "cesium"}, {"schema_version", 2}}),
                  InvalidArgument);
  CHECK_THROWS_AS(AtomPhysicalParameters::from_json(json{{"extends", "cesium"}, {"mf_up", "four"}}),
                  InvalidArgument);
  CHECK_THROWS_AS(AtomPhysicalParameters::from_json(json::array()), InvalidArgument);

  json noisy = cesium_json();
  noisy["intensity_noise"] = {{"white", 1e-12}};
  noisy["ellipticity_noise"] = {{"omega_rad_per_s", {1.0, 1e6}}, {"density", {1e-10, 1e-10}}};
  const auto withnoise = AtomPhysicalParameters::from_json(noisy);
  const auto report = compute_rate_report(withnoise);
  CHECK(report.intensity.has_value());
  CHECK(report.ellipticity.has_value());
  CHECK(report.intensity->p_spin > 0.0);
}

TEST_CASE("mechanism classification") {
  const auto rows = mechanism_table(compute_rate_report(AtomPhysicalParameters::cesium()));
  REQUIRE(rows.size() == 8);
  auto find = [&](const std::string& name) -> const MechanismRow& {
    for (const auto& r : rows) {
      if (r.mechanism == name) return r;
    }
    FAIL("missing row " << name);
    return rows.front();
  };
  const auto& raman = find("Raman scattering of lattice photons");
  CHECK(raman.spin_environment == Mark::cross);
  CHECK(raman.spin_coin == Mark::cross);
  CHECK(raman.spin_shift == Mark::none);
  CHECK(raman.spatial_environment == Mark::circled);

  const auto& scalar = find("Differential scalar light shift");
  CHECK(scalar.spin_environment == Mark::boxed);
  CHECK(scalar.annotation.find("quasi-stationary") != std::string::npos);

  const auto& position = find("Jitter of lattice position");
  CHECK(position.spin_shift == Mark::cross);
  CHECK(position.spatial_environment == Mark::cross);
  CHECK(position.annotation.find("p_C < 2%") != std::string::npos);

  const auto& rayleigh = find("Rayleigh scattering of lattice photons");
  CHECK(rayleigh.spatial_environment == Mark::circled);
  CHECK(rayleigh.spin_environment == Mark::none);

  CHECK(find("Magnetic field gradient fluctuations").spatial_environment == Mark::cross);
  CHECK(find("Lattice depth fluctuations").annotation.find("qualitative") != std::string::npos);

  const std::string text = render_mechanism_table(rows);
  for (const auto& r : rows) CHECK(text.find(r.mechanism) != std::string::npos);
  CHECK(text.find("[x]") != std::string::npos);
}
