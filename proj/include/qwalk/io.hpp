// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file io.hpp
 * @brief CSV and JSON serialization of observables, histograms and reports.
 *
 * Every CSV starts with a `# qwalk-<kind> schema=1` comment line followed
 * by a header row. Numbers are written with 17 significant digits, so each
 * reader recovers the written doubles exactly.
 */

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "qwalk/coherence.hpp"
#include "qwalk/experiment_fit.hpp"
#include "qwalk/physical_rates.hpp"
#include "qwalk/simulation.hpp"
#include "qwalk/wigner.hpp"

namespace qwalk {

inline constexpr int kCsvSchemaVersion = 1;

/// Shortest round-trip-safe text, "%.17g".
std::string format_number(double v);

struct CsvTable {
  std::string kind;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;  // 1-based source line of each row
};

/// Parses a qwalk CSV. `expected_kind` empty accepts any kind; files
/// without the schema comment are accepted when `require_schema` is false.
CsvTable read_csv(std::istream& in, const std::string& expected_kind,
                  const std::vector<std::string>& expected_header, bool require_schema = true);

struct ProbabilitySeries {
  int halfwidth = 0;
  std::vector<int> steps;
  std::vector<std::vector<double>> probability;  // [record][site_index]
};

ProbabilitySeries probability_series(const std::vector<StepRecord>& records, int halfwidth);
void write_probability_csv(std::ostream& out, const ProbabilitySeries& series);
ProbabilitySeries read_probability_csv(std::istream& in);

void write_moments_csv(std::ostream& out, const std::vector<WalkMoments>& moments);
std::vector<WalkMoments> read_moments_csv(std::istream& in);

struct MomentumSeries {
  std::vector<int> steps;
  std::vector<MomentumDistribution> distributions;
};

void write_momentum_csv(std::ostream& out, const MomentumSeries& series);
MomentumSeries read_momentum_csv(std::istream& in);

struct CorrelationSeries {
  std::vector<int> steps;
  std::vector<CorrelationProfile> profiles;
};

void write_correlation_csv(std::ostream& out, const CorrelationSeries& series);
CorrelationSeries read_correlation_csv(std::istream& in);

/// Columns step, x, abs (|G(x, -x)|).
void write_antidiagonal_csv(std::ostream& out, const CorrelationSeries& series);

struct AntidiagonalComparison {
  std::vector<int> x;
  std::vector<double> analytic;
  std::vector<double> monte_carlo;  // empty when not computed
  std::vector<double> standard_error;
};

void write_memory_csv(std::ostream& out, const AntidiagonalComparison& cmp);
AntidiagonalComparison read_memory_csv(std::istream& in);

struct WignerSeries {
  std::vector<int> steps;
  std::vector<WignerGrid> grids;
};

/// Long format: step, x, k, component, re, im with components
/// up_up, up_down, down_up, down_down, band_plus, band_minus.
void write_wigner_csv(std::ostream& out, const WignerSeries& series);
WignerSeries read_wigner_csv(std::istream& in);

/// `site,count` rows; the schema comment is optional on input.
void write_histogram_csv(std::ostream& out, const PositionHistogram& hist);
PositionHistogram read_histogram_csv(std::istream& in);

/// Sidecar with steps, initial_state, efficiency, kernel and notes.
nlohmann::json histogram_metadata(const PositionHistogram& hist, const DetectionModel& detection);
void apply_histogram_metadata(const nlohmann::json& meta, PositionHistogram& hist, DetectionModel& detection);

nlohmann::json to_json(const FitResult& result);
nlohmann::json to_json(const RateReport& report);
nlohmann::json to_json(const std::vector<MechanismRow>& rows);

/// Label used in sidecars: up, symmetric, spinor, packet or cat.
std::string initial_state_name(const InitialState& init);

/// Inverse of initial_state_name for the kinds that need no spinor:
/// up, symmetric, packet (k0, width, band) and cat (width, band).
InitialState initial_state_from_name(const std::string& name, double k0 = 0.0, double width = 1.0,
                                     Band band = Band::plus);

}  // namespace qwalk
