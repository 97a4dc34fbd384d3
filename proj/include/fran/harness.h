#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fran/orchestrator.h"
#include "fran/types.h"

namespace fran {

enum class SweepKind { kNone, kFronthaul, kRbs, kInitialSplit };

SweepKind parse_sweep_kind(const std::string& name);
std::string sweep_kind_name(SweepKind kind);

struct ExperimentSpec {
  NetworkConfig network;
  std::vector<SchemeSpec> schemes;
  int num_realizations = 500;
  double tau = 50.0;
  SweepKind sweep = SweepKind::kNone;
  std::vector<double> sweep_values;  // ignored for kNone
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  // Off keeps one topology for the whole run and redraws fading only.
  bool redraw_positions = false;
  // Index into schemes whose rates drive the shared PF weights.
  int pf_reference = 0;
  int threads = 0;  // 0 picks the hardware concurrency
  OrchestratorConfig orch;

  void validate() const;
  // Network configuration at one sweep point.
  NetworkConfig network_at(double sweep_value) const;
  // One-element {0} list for kNone.
  std::vector<double> sweep_points() const;
};

// Independent streams derived from (seed, realization, stream id).
enum class Stream : std::uint32_t { kTopology = 1, kChannels = 2, kVoronoi = 3 };
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t realization, Stream stream);

struct RealizationRow {
  std::string scheme;
  double sweep_value = 0.0;
  int realization = 0;
  double utility = 0.0;
  double sum_rate = 0.0;
  double jain = 0.0;
  int iters_outer = 0;
  double max_fronthaul_violation = 0.0;
  int auction_fallbacks = 0;
  std::vector<double> split_values;  // a_fr of every FAP and RB (NOMA only)
};

struct SchemeSummary {
  std::string scheme;
  std::string utility_kind;
  double sweep_value = 0.0;
  int successes = 0;
  int failures = 0;
  double mean_utility = 0.0;
  double mean_sum_rate = 0.0;
  double mean_user_rate = 0.0;
  double mean_jain = 0.0;
  double mean_outer_iters = 0.0;
  double max_outer_iters = 0.0;
  double frac_outer_iters_le_10 = 0.0;
  double max_fronthaul_violation = 0.0;
  int auction_fallbacks = 0;
  double frac_split_at_one = 0.0;  // share of a values within 1e-3 of 1
};

struct ExperimentResult {
  std::vector<RealizationRow> rows;  // ordered by sweep, scheme, realization
  std::vector<SchemeSummary> summaries;
  std::vector<std::string> failure_log;
  double wall_seconds = 0.0;
  bool too_many_failures = false;  // some (scheme, sweep) excluded > 1%
};

// Runs every (sweep point, scheme, realization); deterministic for a given
// spec regardless of the thread count.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// realizations.csv, cdf.csv, split_cdf.csv and summary.json under out_dir.
void write_experiment(const ExperimentSpec& spec, const ExperimentResult& result);

// Sorted (value, P[X <= value]) steps, one per sample.
std::vector<std::pair<double, double>> empirical_cdf(std::span<const double> samples);

// Pooled split ratios of the given rows as an empirical CDF.
std::vector<std::pair<double, double>> split_ratio_histogram(std::span<const RealizationRow> rows);

std::string version_string();

}  // namespace fran
