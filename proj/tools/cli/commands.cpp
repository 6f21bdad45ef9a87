// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/experiment_fit.hpp"
#include "qwalk/io.hpp"
#include "qwalk/memory_dephasing.hpp"
#include "qwalk/physical_rates.hpp"
#include "qwalk/simulation.hpp"
#include "qwalk/wigner.hpp"

namespace qwalk::cli {

namespace fs = std::filesystem;

double parse_angle(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  auto number = [&](const std::string& part, double empty_value) {
    if (part.empty()) return empty_value;
    if (part == "-") return -empty_value;
    if (part == "+") return empty_value;
    char* end = nullptr;
    const double v = std::strtod(part.c_str(), &end);
    if (end != part.c_str() + part.size()) throw InvalidArgument("cannot parse angle '" + text + "'");
    return v;
  };
  double value = 0.0;
  const auto pi = s.find("pi");
  if (pi == std::string::npos) {
    value = number(s, std::nan(""));
  } else {
    std::string coeff = s.substr(0, pi);
    if (!coeff.empty() && coeff.back() == '*') coeff.pop_back();
    const std::string rest = s.substr(pi + 2);
    value = number(coeff, 1.0) * kPi;
    if (!rest.empty()) {
      if (rest[0] != '/') throw InvalidArgument("cannot parse angle '" + text + "'");
      const double den = number(rest.substr(1), std::nan(""));
      if (den == 0.0) throw InvalidArgument("angle '" + text + "' divides by zero");
      value /= den;
    }
  }
  if (!std::isfinite(value)) throw InvalidArgument("cannot parse angle '" + text + "'");
  return value;
}

namespace {

/// Reads `--config` files as JSON objects. Top-level keys apply to the
/// subcommand being run, nested objects name a subcommand explicitly and
/// arrays become multi-value inputs.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    nlohmann::json j = nlohmann::json::object();
    for (const CLI::Option* opt : app->get_options()) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string& name = opt->get_lnames().front();
      if (opt->count() > 0) {
        const auto& results = opt->results();
        if (results.size() == 1) {
          j[name] = results.front();
        } else {
          j[name] = results;
        }
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    return j.dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(input);
    } catch (const nlohmann::json::parse_error& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    std::vector<std::string> parents;
    const auto active = root_->get_subcommands();
    if (!active.empty()) parents.push_back(active.front()->get_name());
    collect(j, parents, items);
    return items;
  }

 private:
  const CLI::App* root_;

  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_float()) return format_number(v.get<double>());
    return v.dump();
  }

  static void collect(const nlohmann::json& j, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        std::vector<std::string> nested;
        if (parents.empty() || key != parents.front()) nested = parents;
        nested.push_back(key);
        collect(value, nested, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

struct WalkOptions {
  int steps = 0;
  std::string theta = "0.5pi";
  double pc = 0.0;
  double ps = 0.0;
  std::string init = "symmetric";
  std::string k0 = "0";
  double width = 1.0;
  std::string band = "plus";
  bool alternating = false;
};

void add_walk_options(CLI::App* app, WalkOptions& w, bool decoherence) {
  app->add_option("--steps", w.steps, "Number of walk steps")->required()->check(CLI::NonNegativeNumber);
  app->add_option("--theta", w.theta, "Coin angle, radians or a multiple of pi such as 0.5pi")
      ->capture_default_str();
  if (decoherence) {
    app->add_option("--pc", w.pc, "Spin decoherence rate per step")->capture_default_str();
    app->add_option("--ps", w.ps, "Spatial decoherence rate per step")->capture_default_str();
  }
  app->add_option("--init", w.init, "Initial state: up, symmetric, packet or cat")->capture_default_str();
  app->add_option("--k0", w.k0, "Packet quasi momentum, radians or a multiple of pi")->capture_default_str();
  app->add_option("--width", w.width, "Packet RMS width in sites")->capture_default_str();
  app->add_option("--band", w.band, "Packet band: plus or minus")->check(CLI::IsMember({"plus", "minus"}));
  app->add_flag("--alternating", w.alternating, "Use S on even steps and S^dagger on odd steps");
}

InitialState initial_state(const WalkOptions& w) {
  return initial_state_from_name(w.init, parse_angle(w.k0), w.width,
                                 w.band == "minus" ? Band::minus : Band::plus);
}

WalkParameters walk_parameters(const WalkOptions& w, const InitialState& init) {
  return fit_lattice(WalkParameters::localized(parse_angle(w.theta), w.steps, w.alternating), init);
}

std::ofstream open_output(const std::string& dir, const std::string& name, std::ostream& out) {
  fs::create_directories(dir);
  const fs::path path = fs::path(dir) / name;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  out << "wrote " << path.string() << "\n";
  return f;
}

std::vector<int> steps_or_default(std::vector<int> requested, int steps) {
  for (int s : requested) {
    if (s < 0 || s > steps) throw InvalidArgument("record step " + std::to_string(s) + " is outside 0.." + std::to_string(steps));
  }
  std::sort(requested.begin(), requested.end());
  requested.erase(std::unique(requested.begin(), requested.end()), requested.end());
  return requested;
}

// --- simulate ------------------------------------------------------------------------

struct SimulateOptions {
  WalkOptions walk;
  std::string observables = "prob,variance";
  std::string out_dir = ".";
  int momentum_points = 1024;
  int wigner_points = 0;
  std::vector<int> record_steps;
};

void cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  const InitialState init = initial_state(o.walk);
  SimulationConfig config(walk_parameters(o.walk, init), DecoherenceParameters(o.walk.pc, o.walk.ps), init);
  config.observables.clear();
  std::stringstream list(o.observables);
  std::string name;
  while (std::getline(list, name, ',')) {
    if (name.empty()) continue;
    const Observable obs = parse_observable(name);
    if (obs == Observable::density_matrix_snapshot) {
      throw InvalidArgument("density snapshots are available from the library only");
    }
    config.observables.insert(obs);
  }
  if (config.observables.empty()) throw InvalidArgument("no observables requested");
  config.record_steps = steps_or_default(o.record_steps, o.walk.steps);
  config.momentum_points = o.momentum_points;
  config.wigner_points = o.wigner_points;

  const auto records = run_simulation(config);
  const int L = config.walk.lattice_halfwidth();
  const auto& obs = config.observables;
  if (obs.count(Observable::position_distribution)) {
    auto f = open_output(o.out_dir, "probability.csv", out);
    write_probability_csv(f, probability_series(records, L));
  }
  if (obs.count(Observable::moments)) {
    std::vector<WalkMoments> m;
    for (const auto& r : records) m.push_back(*r.moments);
    auto f = open_output(o.out_dir, "moments.csv", out);
    write_moments_csv(f, m);
  }
  if (obs.count(Observable::momentum_distribution)) {
    MomentumSeries s;
    for (const auto& r : records) {
      s.steps.push_back(r.step);
      s.distributions.push_back(*r.momentum);
    }
    auto f = open_output(o.out_dir, "momentum.csv", out);
    write_momentum_csv(f, s);
  }
  if (obs.count(Observable::correlation_profile)) {
    CorrelationSeries s;
    for (const auto& r : records) {
      s.steps.push_back(r.step);
      s.profiles.push_back(*r.correlation);
    }
    auto f = open_output(o.out_dir, "correlation.csv", out);
    write_correlation_csv(f, s);
    auto g = open_output(o.out_dir, "antidiagonal.csv", out);
    write_antidiagonal_csv(g, s);
  }
  if (obs.count(Observable::wigner)) {
    WignerSeries s;
    for (const auto& r : records) {
      s.steps.push_back(r.step);
      s.grids.push_back(*r.wigner);
    }
    auto f = open_output(o.out_dir, "wigner.csv", out);
    write_wigner_csv(f, s);
  }
}

// --- wigner --------------------------------------------------------------------------

struct WignerOptions {
  WalkOptions walk;
  std::string out_dir = ".";
  int k_points = 0;
  std::vector<int> record_steps;
};

void cmd_wigner(const WignerOptions& o, std::ostream& out) {
  const InitialState init = initial_state(o.walk);
  SimulationConfig config(walk_parameters(o.walk, init), DecoherenceParameters(o.walk.pc, o.walk.ps), init);
  config.observables = {Observable::wigner};
  config.record_steps = o.record_steps.empty() ? std::vector<int>{o.walk.steps}
                                               : steps_or_default(o.record_steps, o.walk.steps);
  config.wigner_points = o.k_points;
  const auto records = run_simulation(config);
  WignerSeries s;
  for (const auto& r : records) {
    const auto m = marginals(*r.wigner);
    out << "step " << r.step << ": min W = " << format_number(r.wigner->minimum())
        << ", band-position negativity = " << format_number(m.band_position_negative) << "\n";
    s.steps.push_back(r.step);
    s.grids.push_back(*r.wigner);
  }
  auto f = open_output(o.out_dir, "wigner.csv", out);
  write_wigner_csv(f, s);
}

// --- memory --------------------------------------------------------------------------

struct MemoryOptions {
  int steps = 0;
  std::string theta = "0.5pi";
  std::string init = "symmetric";
  std::string dist = "gaussian";
  double delta_zeta = 0.0;
  double offset = 0.0;
  int mc_samples = 0;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out_dir = ".";
};

DephasingDistribution make_distribution(const MemoryOptions& o) {
  if (o.dist == "gaussian") return DephasingDistribution::gaussian(o.delta_zeta);
  if (o.dist == "thermal") return DephasingDistribution::thermal(o.delta_zeta);
  return DephasingDistribution::point_mass(o.offset);
}

void cmd_memory(const MemoryOptions& o, std::ostream& out) {
  if (o.init != "up" && o.init != "symmetric") {
    throw InvalidArgument("memory needs a localized initial state (up or symmetric)");
  }
  if (o.mc_samples > 0 && !o.seed) throw InvalidArgument("--seed is required with --mc-samples");
  const InitialState init = initial_state_from_name(o.init);
  const WalkParameters walk = WalkParameters::localized(parse_angle(o.theta), o.steps);
  const DephasingDistribution dist = make_distribution(o);

  const CorrelationProfile analytic = dephased_correlation(walk, init, dist);
  const int L = walk.lattice_halfwidth();
  AntidiagonalComparison cmp;
  cmp.analytic = analytic.antidiagonal();
  for (int x = -L; x <= L; ++x) cmp.x.push_back(x);
  if (o.mc_samples > 0) {
    const auto mc = monte_carlo_dephasing(walk, init, dist, {o.mc_samples, *o.seed, o.threads});
    cmp.monte_carlo = mc.correlation.antidiagonal();
    for (int x = -L; x <= L; ++x) cmp.standard_error.push_back(mc.correlation_se(x + L, -x + L));
  }
  auto f = open_output(o.out_dir, "memory.csv", out);
  write_memory_csv(f, cmp);
}

// --- fit -----------------------------------------------------------------------------

struct FitOptions {
  std::string histogram;
  std::string meta;
  std::optional<int> steps;
  std::optional<std::string> init;
  std::string free = "theta,pc";
  std::string theta = "0.5pi";
  double pc = 0.0;
  double ps = 0.0;
  double confidence = 0.68;
  std::optional<double> efficiency;
  bool alternating = false;
  std::string out_file;
};

int cmd_fit(const FitOptions& o, std::ostream& out, std::ostream& err) {
  std::ifstream in(o.histogram);
  if (!in) throw std::runtime_error("cannot read " + o.histogram);
  PositionHistogram hist = read_histogram_csv(in);

  FitSpec spec;
  std::string meta_path = o.meta;
  if (meta_path.empty()) {
    for (const fs::path& candidate : {fs::path(o.histogram).replace_extension(".json"), fs::path(o.histogram + ".json")}) {
      if (fs::exists(candidate)) {
        meta_path = candidate.string();
        break;
      }
    }
  }
  bool have_steps = false;
  if (!meta_path.empty()) {
    std::ifstream mf(meta_path);
    if (!mf) throw std::runtime_error("cannot read " + meta_path);
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(mf);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(meta_path + ": " + e.what(), 0);
    }
    if (meta.contains("steps") || !o.steps) {
      apply_histogram_metadata(meta, hist, spec.detection);
      have_steps = true;
    }
  }
  if (o.steps) {
    hist.steps = *o.steps;
    have_steps = true;
  }
  if (!have_steps) throw MissingFieldsError({"steps"});
  if (o.init) hist.initial_state = *o.init;
  if (o.efficiency) spec.detection.efficiency = *o.efficiency;
  spec.detection.validate();

  spec.steps = hist.steps;
  spec.init = initial_state_from_name(hist.initial_state);
  spec.alternating_shift = o.alternating;
  spec.free_theta = spec.free_spin = spec.free_space = false;
  std::stringstream list(o.free);
  std::string name;
  while (std::getline(list, name, ',')) {
    if (name == "theta") {
      spec.free_theta = true;
    } else if (name == "pc") {
      spec.free_spin = true;
    } else if (name == "ps") {
      spec.free_space = true;
    } else if (!name.empty()) {
      throw InvalidArgument("unknown fit parameter '" + name + "' (expected theta, pc or ps)");
    }
  }
  spec.theta = parse_angle(o.theta);
  spec.p_spin = o.pc;
  spec.p_space = o.ps;
  spec.confidence = o.confidence;

  int code = 0;
  FitResult result;
  try {
    result = fit(hist, spec);
  } catch (const FitConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    result = e.best();
    code = 3;
  }
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";
  const std::string text = to_json(result).dump(2) + "\n";
  if (o.out_file.empty()) {
    out << text;
  } else {
    std::ofstream f(o.out_file);
    if (!f) throw std::runtime_error("cannot write " + o.out_file);
    f << text;
    out << "wrote " << o.out_file << "\n";
  }
  if (code == 0) {
    auto show = [&](const char* label, double v, const std::optional<Interval>& ci) {
      if (!ci) return;
      err << label << " = " << format_number(v) << " [" << format_number(ci->lower) << ", "
          << format_number(ci->upper) << "]\n";
    };
    show("theta", result.theta, result.theta_ci);
    show("p_C", result.p_spin, result.p_spin_ci);
    show("p_S", result.p_space, result.p_space_ci);
  }
  return code;
}

// --- rates ---------------------------------------------------------------------------

struct RatesOptions {
  std::string params;
  std::string format = "text";
  std::optional<double> total_rate;
};

void cmd_rates(const RatesOptions& o, std::ostream& out) {
  AtomPhysicalParameters p = AtomPhysicalParameters::cesium();
  if (!o.params.empty()) {
    std::ifstream in(o.params);
    if (!in) throw std::runtime_error("cannot read " + o.params);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(o.params + ": " + e.what(), 0);
    }
    p = AtomPhysicalParameters::from_json(j);
  }
  if (o.total_rate) p.rabi_frequency = rabi_frequency_for_total_rate(p, *o.total_rate);
  p.validate();
  const RateReport report = compute_rate_report(p);
  const auto rows = mechanism_table(report);
  if (o.format == "json") {
    nlohmann::json j = to_json(report);
    j["mechanisms"] = to_json(rows);
    out << j.dump(2) << "\n";
    return;
  }
  const auto& s = report.scattering;
  auto line = [&](const std::string& label, double v) { out << label << " = " << format_number(v) << "\n"; };
  line("eta_s", report.eta_s);
  line("eta_v'", report.vector.eta_v);
  line("eta_perp", report.vector.eta_perp);
  line("T2 scalar [s]", report.scalar.t2);
  line("l scalar [sites]", report.scalar.length);
  line("T2 vectorial [s]", report.vectorial.t2);
  line("l vectorial [sites]", report.vectorial.length);
  line("l wobbling [sites]", report.wobbling.length);
  if (report.magnetic) {
    line("magnetic Delta Phi^2", report.magnetic->delta_phi2);
    line("magnetic p_C", report.magnetic->p_spin);
  }
  if (report.intensity) line("intensity-noise p_C", report.intensity->p_spin);
  if (report.ellipticity) line("ellipticity-noise p_C", report.ellipticity->p_spin);
  line("Gamma_tot [1/s]", s.total);
  line("Gamma_inel up [1/s]", s.inelastic_up);
  line("Gamma_inel down [1/s]", s.inelastic_down);
  line("Gamma_el.deph [1/s]", s.elastic_dephasing);
  line("Raman fraction", s.raman_fraction);
  line("p_S per step", s.p_space);
  line("p_C per step", s.p_spin);
  out << "\n" << render_mechanism_table(rows);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decohered discrete-time quantum walks: simulation, fitting and decoherence rates", "qwalk"};
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.config_formatter(std::make_shared<JsonConfig>(&app));
  app.set_config("--config", "", "JSON file with option values keyed by long option name");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Evolve a walk and write per-step observables as CSV");
  add_walk_options(simulate, sim.walk, true);
  simulate->add_option("--observables", sim.observables, "Comma list of prob, variance, momentum, corr, wigner")
      ->capture_default_str();
  simulate->add_option("--out", sim.out_dir, "Output directory")->capture_default_str();
  simulate->add_option("--momentum-points", sim.momentum_points, "Momentum grid size")->capture_default_str();
  simulate->add_option("--wigner-points", sim.wigner_points, "Wigner momentum grid size, 0 for the default");
  simulate->add_option("--record-steps", sim.record_steps, "Steps to record (default: all)")->delimiter(',');

  WignerOptions wig;
  auto* wigner_cmd = app.add_subcommand("wigner", "Write the discrete Wigner function of the walk");
  add_walk_options(wigner_cmd, wig.walk, true);
  wigner_cmd->add_option("--k-points", wig.k_points, "Momentum grid size, 0 for the default");
  wigner_cmd->add_option("--record-steps", wig.record_steps, "Steps to record (default: final step)")
      ->delimiter(',');
  wigner_cmd->add_option("--out", wig.out_dir, "Output directory")->capture_default_str();

  MemoryOptions mem;
  auto* memory = app.add_subcommand("memory", "Long-memory dephasing: analytic and Monte-Carlo |G(x,-x)|");
  memory->add_option("--steps", mem.steps, "Number of walk steps")->required()->check(CLI::NonNegativeNumber);
  memory->add_option("--theta", mem.theta, "Coin angle")->capture_default_str();
  memory->add_option("--init", mem.init, "Localized initial state: up or symmetric")->capture_default_str();
  memory->add_option("--dist", mem.dist, "Distribution of zeta")
      ->check(CLI::IsMember({"gaussian", "thermal", "point"}))
      ->capture_default_str();
  memory->add_option("--delta-zeta", mem.delta_zeta, "Width of the zeta distribution")->capture_default_str();
  memory->add_option("--offset", mem.offset, "zeta of the point-mass distribution");
  memory->add_option("--mc-samples", mem.mc_samples, "Monte-Carlo realizations, 0 to skip")
      ->check(CLI::NonNegativeNumber);
  memory->add_option("--seed", mem.seed, "Random seed (required with --mc-samples)");
  memory->add_option("--threads", mem.threads, "Worker threads for the Monte-Carlo average")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  memory->add_option("--out", mem.out_dir, "Output directory")->capture_default_str();

  FitOptions fo;
  auto* fit_cmd = app.add_subcommand("fit", "Maximum-likelihood fit of a site histogram (JSON to stdout)");
  fit_cmd->add_option("histogram", fo.histogram, "CSV with site,count rows")->required();
  fit_cmd->add_option("--meta", fo.meta, "JSON sidecar (default: histogram path with .json)");
  fit_cmd->add_option("--steps", fo.steps, "Step count, overrides the sidecar");
  fit_cmd->add_option("--init", fo.init, "Initial state, overrides the sidecar");
  fit_cmd->add_option("--free", fo.free, "Comma list of free parameters among theta, pc, ps")
      ->capture_default_str();
  fit_cmd->add_option("--theta", fo.theta, "Coin angle when held fixed")->capture_default_str();
  fit_cmd->add_option("--pc", fo.pc, "p_C when held fixed")->capture_default_str();
  fit_cmd->add_option("--ps", fo.ps, "p_S when held fixed")->capture_default_str();
  fit_cmd->add_option("--confidence", fo.confidence, "Confidence level of the intervals")->capture_default_str();
  fit_cmd->add_option("--efficiency", fo.efficiency, "Detection efficiency, overrides the sidecar");
  fit_cmd->add_flag("--alternating", fo.alternating, "Walk alternates S and S^dagger");
  fit_cmd->add_option("--output", fo.out_file, "Write the JSON result here instead of stdout");

  RatesOptions ro;
  auto* rates = app.add_subcommand("rates", "Decoherence rates and mechanism table for an atom species");
  rates->add_option("--params", ro.params, "Parameter JSON (default: built-in cesium)");
  rates->add_flag_callback("--cesium", [&ro] { ro.params.clear(); }, "Use the built-in cesium parameters");
  rates->add_option("--format", ro.format, "text or json")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
  rates->add_option("--total-rate", ro.total_rate, "Rescale the lattice intensity to this total scattering rate [1/s]");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*simulate) cmd_simulate(sim, out);
    if (*wigner_cmd) cmd_wigner(wig, out);
    if (*memory) cmd_memory(mem, out);
    if (*fit_cmd) return cmd_fit(fo, out, err);
    if (*rates) cmd_rates(ro, out);
  } catch (const MissingFieldsError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace qwalk::cli
