// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

#include "qwalk/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "qwalk/errors.hpp"

namespace qwalk {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void write_schema(std::ostream& out, const std::string& kind) {
  out << "# qwalk-" << kind << " schema=" << kCsvSchemaVersion << "\n";
}

double parse_double(const std::string& s, std::size_t line) {
  if (s.empty()) throw ParseError("empty numeric field", line);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) {
    throw ParseError("'" + s + "' is not a number", line);
  }
  return v;
}

long long parse_integer(const std::string& s, std::size_t line) {
  if (s.empty()) throw ParseError("empty integer field", line);
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size() || errno == ERANGE) {
    throw ParseError("'" + s + "' is not an integer", line);
  }
  return v;
}

int parse_int(const std::string& s, std::size_t line) {
  const long long v = parse_integer(s, line);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ParseError("'" + s + "' is out of range", line);
  }
  return static_cast<int>(v);
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

}  // namespace

CsvTable read_csv(std::istream& in, const std::string& expected_kind,
                  const std::vector<std::string>& expected_header, bool require_schema) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty()) continue;
    if (s[0] == '#') {
      if (!have_header && t.kind.empty()) {
        const auto pos = s.find("qwalk-");
        if (pos == std::string::npos) throw ParseError("unrecognized comment line", lineno);
        const auto space = s.find(' ', pos);
        t.kind = s.substr(pos + 6, space == std::string::npos ? std::string::npos : space - pos - 6);
        const auto schema = s.find("schema=");
        if (schema == std::string::npos) throw ParseError("missing schema version", lineno);
        if (parse_int(trim(s.substr(schema + 7)), lineno) != kCsvSchemaVersion) {
          throw ParseError("unsupported schema version", lineno);
        }
        if (!expected_kind.empty() && t.kind != expected_kind) {
          throw ParseError("expected a qwalk-" + expected_kind + " file, found qwalk-" + t.kind, lineno);
        }
      }
      continue;
    }
    if (!have_header) {
      if (t.kind.empty() && require_schema) throw ParseError("missing '# qwalk-<kind> schema=1' line", lineno);
      t.header = split(s);
      if (!expected_header.empty() && t.header != expected_header) {
        throw ParseError("expected header '" + join(expected_header) + "', found '" + s + "'", lineno);
      }
      have_header = true;
      continue;
    }
    auto cells = split(s);
    if (cells.size() != t.header.size()) {
      throw ParseError("expected " + std::to_string(t.header.size()) + " fields, found " +
                           std::to_string(cells.size()),
                       lineno);
    }
    t.rows.push_back(std::move(cells));
    t.row_lines.push_back(lineno);
  }
  if (!have_header) throw ParseError("file has no header row", lineno == 0 ? 1 : lineno);
  return t;
}

// --- probability -------------------------------------------------------------

ProbabilitySeries probability_series(const std::vector<StepRecord>& records, int halfwidth) {
  ProbabilitySeries s;
  s.halfwidth = halfwidth;
  for (const auto& r : records) {
    if (!r.probability) continue;
    s.steps.push_back(r.step);
    s.probability.push_back(*r.probability);
  }
  return s;
}

void write_probability_csv(std::ostream& out, const ProbabilitySeries& series) {
  write_schema(out, "probability");
  out << "step,x,probability\n";
  for (std::size_t i = 0; i < series.steps.size(); ++i) {
    for (int x = -series.halfwidth; x <= series.halfwidth; ++x) {
      out << series.steps[i] << ',' << x << ','
          << format_number(series.probability[i][static_cast<std::size_t>(x + series.halfwidth)]) << '\n';
    }
  }
}

ProbabilitySeries read_probability_csv(std::istream& in) {
  const CsvTable t = read_csv(in, "probability", {"step", "x", "probability"});
  ProbabilitySeries s;
  std::map<int, std::map<int, double>> by_step;
  std::vector<int> order;
  int max_abs = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t ln = t.row_lines[r];
    const int step = parse_int(t.rows[r][0], ln);
    const int x = parse_int(t.rows[r][1], ln);
    if (!by_step.count(step)) order.push_back(step);
    by_step[step][x] = parse_double(t.rows[r][2], ln);
    max_abs = std::max(max_abs, std::abs(x));
  }
  s.halfwidth = max_abs;
  for (int step : order) {
    std::vector<double> p(static_cast<std::size_t>(2 * max_abs + 1), 0.0);
    for (const auto& [x, v] : by_step[step]) p[static_cast<std::size_t>(x + max_abs)] = v;
    s.steps.push_back(step);
    s.probability.push_back(std::move(p));
  }
  return s;
}

// --- moments ---------------------------------------------------------------------

void write_moments_csv(std::ostream& out, const std::vector<WalkMoments>& moments) {
  write_schema(out, "moments");
  out << "step,mean,variance\n";
  for (const auto& m : moments) {
    out << m.step << ',' << format_number(m.mean) << ',' << format_number(m.variance) << '\n';
  }
}

std::vector<WalkMoments> read_moments_csv(std::istream& in) {
  const CsvTable t = read_csv(in, "moments", {"step", "mean", "variance"});
  std::vector<WalkMoments> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t ln = t.row_lines[r];
    WalkMoments m;
    m.step = parse_int(t.rows[r][0], ln);
    m.mean = parse_double(t.rows[r][1], ln);
    m.variance = parse_double(t.rows[r][2], ln);
    out.push_back(m);
  }
  return out;
}

// --- momentum --------------------------------------------------------------------

void write_momentum_csv(std::ostream& out, const MomentumSeries& series) {
  write_schema(out, "momentum");
  out << "step,k,up,down\n";
  for (std::size_t i = 0; i < series.steps.size(); ++i) {
    const auto& d = series.distributions[i];
    for (std::size_t a = 0; a < d.k.size(); ++a) {
      out << series.steps[i] << ',' << format_number(d.k[a]) << ',' << format_number(d.density[0][a]) << ','
          << format_number(d.density[1][a]) << '\n';
    }
  }
}

MomentumSeries read_momentum_csv(std::istream& in) {
  const CsvTable t = read_csv(in, "momentum", {"step", "k", "up", "down"});
  MomentumSeries s;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t ln = t.row_lines[r];
    const int step = parse_int(t.rows[r][0], ln);
    if (s.steps.empty() || s.steps.back() != step) {
      s.steps.push_back(step);
      s.distributions.emplace_back();
    }
    auto& d = s.distributions.back();
    d.k.push_back(parse_double(t.rows[r][1], ln));
    d.density[0].push_back(parse_double(t.rows[r][2], ln));
    d.density[1].push_back(parse_double(t.rows[r][3], ln));
  }
  return s;
}

// --- correlation -----------------------------------------------------------------

void write_correlation_csv(std::ostream& out, const CorrelationSeries& series) {
  write_schema(out, "correlation");
  out << "step,x,y,re,im\n";
  for (std::size_t i = 0; i < series.steps.size(); ++i) {
    const auto& g = series.profiles[i];
    for (int x = -g.halfwidth; x <= g.halfwidth; ++x) {
      for (int y = -g.halfwidth; y <= g.halfwidth; ++y) {
        const complex v = g(x, y);
        out << series.steps[i] << ',' << x << ',' << y << ',' << format_number(v.real()) << ','
            << format_number(v.imag()) << '\n';
      }
    }
  }
}

CorrelationSeries read_correlation_csv(std::istream& in) {
  const CsvTable t = read_csv(in, "correlation", {"step", "x", "y", "re", "im"});
  CorrelationSeries s;
  std::vector<std::vector<std::size_t>> rows_of;
  std::vector<int> max_abs;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t ln = t.row_lines[r];
    const int step = parse_int(t.rows[r][0], ln);
    if (s.steps.empty() || s.steps.back() != step) {
      s.steps.push_back(step);
      rows_of.emplace_back();
      max_abs.push_back(0);
    }
    rows_of.back().push_back(r);
    max_abs.back() = std::max({max_abs.back(), std::abs(parse_int(t.rows[r][1], ln)),
                               std::abs(parse_int(t.rows[r][2], ln))});
  }
  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    CorrelationProfile g;
    g.halfwidth = max_abs[i];
    const int n = 2 * g.halfwidth + 1;
    g.values = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t r : rows_of[i]) {
      const std::size_t ln = t.row_lines[r];
      const int x = parse_int(t.rows[r][1], ln);
      const int y = parse_int(t.rows[r][2], ln);
      g.values(x + g.halfwidth, y + g.halfwidth) =
          complex{parse_double(t.rows[r][3], ln), parse_double(t.rows[r][4], ln)};
    }
    s.profiles.push_back(std::move(g));
  }
  return s;
}

void write_antidiagonal_csv(std::ostream& out, const CorrelationSeries& series) {
  write_schema(out, "antidiagonal");
  out << "step,x,abs\n";
  for (std::size_t i = 0; i < series.steps.size(); ++i) {
    const auto a = series.profiles[i].antidiagonal();
    const int L = series.profiles[i].halfwidth;
    for (int x = -L; x <= L; ++x) {
      out << series.steps[i] << ',' << x << ',' << format_number(a[static_cast<std::size_t>(x + L)]) << '\n';
    }
  }
}

void write_memory_csv(std::ostream& out, const AntidiagonalComparison& cmp) {
  write_schema(out, "memory");
  out << "x,analytic,monte_carlo,standard_error,difference\n";
  const bool mc = !cmp.monte_carlo.empty();
  for (std::size_t i = 0; i < cmp.x.size(); ++i) {
    out << cmp.x[i] << ',' << format_number(cmp.analytic[i]) << ',';
    if (mc) {
      out << format_number(cmp.monte_carlo[i]) << ',' << format_number(cmp.standard_error[i]) << ','
          << format_number(cmp.monte_carlo[i] - cmp.analytic[i]);
    } else {
      out << ",,";
    }
    out << '\n';
  }
}

AntidiagonalComparison read_memory_csv(std::istream& in) {
  const CsvTable t = read_csv(in, "memory", {"x", "analytic", "monte_carlo", "standard_error", "difference"});
  AntidiagonalComparison c;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t ln = t.row_lines[r];
    c.x.push_back(parse_int(t.rows[r][0], ln));
    c.analytic.push_back(parse_double(t.rows[r][1], ln));
    if (!t.rows[r][2].empty()) {
      c.monte_carlo.push_back(parse_double(t.rows[r][2], ln));
      c.standard_error.push_back(parse_double(t.rows[r][3], ln));
    }
  }
  return c;
}

// --- wigner ------------------------------------------------------------------------

namespace {

const char* const kWignerComponents[] = {"up_up", "up_down", "down_up", "down_down", "band_plus", "band_minus"};

}  // namespace

void write_wigner_csv(std::ostream& out, const WignerSeries& series) {
  write_schema(out, "wigner");
  out << "step,x,k,component,re,im\n";
  for (std::size_t g = 0; g < series.steps.size(); ++g) {
    const auto& w = series.grids[g];
    for (std::size_t i = 0; i < w.x_values.size(); ++i) {
      for (std::size_t a = 0; a < w.k_values.size(); ++a) {
        const auto ii = static_cast<Eigen::Index>(i);
        const auto aa = static_cast<Eigen::Index>(a);
        const std::string prefix = std::to_string(series.steps[g]) + ',' + std::to_string(w.x_values[i]) + ',' +
                                   format_number(w.k_values[a]) + ',';
        for (int c = 0; c < 4; ++c) {
          const complex v = w.spin[c / 2][c % 2](ii, aa);
          out << prefix << kWignerComponents[c] << ',' << format_number(v.real()) << ','
              << format_number(v.imag()) << '\n';
        }
        for (int b = 0; b < 2; ++b) {
          out << prefix << kWignerComponents[4 + b] << ',' << format_number(w.band[b](ii, aa)) << ",0\n";
        }
      }
    }
  }
}

WignerSeries read_wigner_csv(std::istream& in) {
  const CsvTable t = read_csv(in, "wigner", {"step", "x", "k", "component", "re", "im"});
  WignerSeries s;
  struct Pending {
    std::vector<int> xs;
    std::vector<double> ks;
    std::map<std::pair<int, int>, std::array<complex, 6>> values;  // (x index, k index)
  };
  std::vector<Pending> pending;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t ln = t.row_lines[r];
    const int step = parse_int(t.rows[r][0], ln);
    if (s.steps.empty() || s.steps.back() != step) {
      s.steps.push_back(step);
      pending.emplace_back();
    }
    auto& p = pending.back();
    const int x = parse_int(t.rows[r][1], ln);
    const double k = parse_double(t.rows[r][2], ln);
    int c = -1;
    for (int i = 0; i < 6; ++i) {
      if (t.rows[r][3] == kWignerComponents[i]) c = i;
    }
    if (c < 0) throw ParseError("unknown Wigner component '" + t.rows[r][3] + "'", ln);
    if (p.xs.empty() || p.xs.back() != x) {
      if (std::find(p.xs.begin(), p.xs.end(), x) == p.xs.end()) p.xs.push_back(x);
    }
    auto kit = std::find(p.ks.begin(), p.ks.end(), k);
    if (kit == p.ks.end()) {
      p.ks.push_back(k);
      kit = p.ks.end() - 1;
    }
    const int xi = static_cast<int>(std::find(p.xs.begin(), p.xs.end(), x) - p.xs.begin());
    const int ki = static_cast<int>(kit - p.ks.begin());
    p.values[{xi, ki}][static_cast<std::size_t>(c)] =
        complex{parse_double(t.rows[r][4], ln), parse_double(t.rows[r][5], ln)};
  }
  for (auto& p : pending) {
    WignerGrid g;
    g.x_values = p.xs;
    g.k_values = p.ks;
    const auto nx = static_cast<Eigen::Index>(p.xs.size());
    const auto nk = static_cast<Eigen::Index>(p.ks.size());
    for (auto& row : g.spin) {
      for (auto& m : row) m = Eigen::MatrixXcd::Zero(nx, nk);
    }
    for (auto& m : g.band) m = Eigen::MatrixXd::Zero(nx, nk);
    for (const auto& [key, vals] : p.values) {
      for (int c = 0; c < 4; ++c) g.spin[c / 2][c % 2](key.first, key.second) = vals[static_cast<std::size_t>(c)];
      for (int b = 0; b < 2; ++b) g.band[b](key.first, key.second) = vals[static_cast<std::size_t>(4 + b)].real();
    }
    s.grids.push_back(std::move(g));
  }
  return s;
}

// --- histograms --------------------------------------------------------------------

void write_histogram_csv(std::ostream& out, const PositionHistogram& hist) {
  write_schema(out, "histogram");
  out << "site,count\n";
  for (const auto& [site, count] : hist.counts) out << site << ',' << count << '\n';
}

PositionHistogram read_histogram_csv(std::istream& in) {
  const CsvTable t = read_csv(in, "histogram", {"site", "count"}, false);
  PositionHistogram h;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t ln = t.row_lines[r];
    const int site = parse_int(t.rows[r][0], ln);
    const long long count = parse_integer(t.rows[r][1], ln);
    if (count < 0) throw ParseError("negative count", ln);
    if (h.counts.count(site)) throw ParseError("duplicate site " + std::to_string(site), ln);
    h.counts[site] = count;
  }
  if (h.counts.empty()) throw ParseError("histogram has no data rows", 0);
  return h;
}

std::string initial_state_name(const InitialState& init) {
  switch (init.kind) {
    case InitialKind::localized_up:
      return "up";
    case InitialKind::localized_symmetric:
      return "symmetric";
    case InitialKind::localized_spinor:
      return "spinor";
    case InitialKind::gaussian_packet:
      return "packet";
    case InitialKind::k_cat:
      return "cat";
  }
  return "";
}

InitialState initial_state_from_name(const std::string& name, double k0, double width, Band band) {
  if (name == "up") return InitialState::up();
  if (name == "symmetric") return InitialState::symmetric();
  if (name == "packet") return InitialState::packet(k0, width, band);
  if (name == "cat") return InitialState::cat(width, band);
  throw InvalidArgument("unknown initial state '" + name + "' (expected up, symmetric, packet or cat)");
}

nlohmann::json histogram_metadata(const PositionHistogram& hist, const DetectionModel& detection) {
  nlohmann::json kernel = nlohmann::json::array();
  for (const auto& [offset, weight] : detection.kernel) kernel.push_back({{"offset", offset}, {"weight", weight}});
  return {{"schema_version", 1},
          {"steps", hist.steps},
          {"initial_state", hist.initial_state},
          {"efficiency", detection.efficiency},
          {"kernel", kernel},
          {"notes", hist.notes}};
}

void apply_histogram_metadata(const nlohmann::json& meta, PositionHistogram& hist, DetectionModel& detection) {
  if (!meta.contains("steps")) throw MissingFieldsError({"steps"});
  hist.steps = meta.at("steps").get<int>();
  hist.initial_state = meta.value("initial_state", std::string{"symmetric"});
  hist.notes = meta.value("notes", std::string{});
  if (meta.contains("efficiency")) detection.efficiency = meta.at("efficiency").get<double>();
  if (meta.contains("kernel")) {
    detection.kernel.clear();
    for (const auto& k : meta.at("kernel")) {
      detection.kernel.emplace_back(k.at("offset").get<int>(), k.at("weight").get<double>());
    }
  }
  detection.validate();
}

// --- reports -------------------------------------------------------------------------

namespace {

nlohmann::json interval_json(const std::optional<Interval>& i) {
  if (!i) return nullptr;
  return {{"lower", i->lower}, {"upper", i->upper}};
}

nlohmann::json finite_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

nlohmann::json coherence_json(const CoherenceEstimate& c) {
  return {{"t2_s", finite_or_null(c.t2)}, {"length_sites", finite_or_null(c.length)}};
}

nlohmann::json phase_json(const std::optional<PhaseVariance>& p) {
  if (!p) return nullptr;
  return {{"delta_phi2", p->delta_phi2}, {"p_c", p->p_spin}};
}

const char* mark_name(Mark m) {
  switch (m) {
    case Mark::none:
      return "";
    case Mark::cross:
      return "cross";
    case Mark::circled:
      return "circled";
    case Mark::boxed:
      return "boxed";
  }
  return "";
}

}  // namespace

nlohmann::json to_json(const FitResult& result) {
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : result.bins) {
    bins.push_back({{"site", b.site},
                    {"count", b.count},
                    {"probability", b.probability},
                    {"log_likelihood", b.log_likelihood}});
  }
  return {{"schema_version", 1},
          {"theta", result.theta},
          {"theta_over_pi", result.theta / kPi},
          {"p_c", result.p_spin},
          {"p_s", result.p_space},
          {"log_likelihood", result.log_likelihood},
          {"theta_ci", interval_json(result.theta_ci)},
          {"p_c_ci", interval_json(result.p_spin_ci)},
          {"p_s_ci", interval_json(result.p_space_ci)},
          {"converged", result.converged},
          {"evaluations", result.evaluations},
          {"excluded_sites", result.excluded_sites},
          {"warnings", result.warnings},
          {"bins", bins}};
}

nlohmann::json to_json(const RateReport& r) {
  const auto& s = r.scattering;
  return {{"schema_version", 1},
          {"detuning_d1_rad_per_s", r.detuning_d1},
          {"detuning_d2_rad_per_s", r.detuning_d2},
          {"eta_s", r.eta_s},
          {"eta_v_prime", r.vector.eta_v},
          {"eta_perp", r.vector.eta_perp},
          {"scalar", coherence_json(r.scalar)},
          {"vectorial", coherence_json(r.vectorial)},
          {"potential_wobbling", coherence_json(r.wobbling)},
          {"magnetic_noise", phase_json(r.magnetic)},
          {"intensity_noise", phase_json(r.intensity)},
          {"ellipticity_noise", phase_json(r.ellipticity)},
          {"scattering",
           {{"gamma_tot_per_s", s.total},
            {"gamma_inel_up_per_s", s.inelastic_up},
            {"gamma_inel_down_per_s", s.inelastic_down},
            {"gamma_inel_qubit_per_s", s.inelastic_qubit},
            {"gamma_el_deph_per_s", s.elastic_dephasing},
            {"raman_fraction", s.raman_fraction},
            {"p_s", s.p_space},
            {"p_c", s.p_spin}}}};
}

nlohmann::json to_json(const std::vector<MechanismRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"mechanism", r.mechanism},
                   {"spin_E", mark_name(r.spin_environment)},
                   {"spin_C", mark_name(r.spin_coin)},
                   {"spin_S", mark_name(r.spin_shift)},
                   {"spatial_E", mark_name(r.spatial_environment)},
                   {"annotation", r.annotation}});
  }
  return out;
}

}  // namespace qwalk
