#include "fran/harness.h"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "fran/netmodel.h"

#ifndef FRAN_VERSION
#define FRAN_VERSION "unknown"
#endif

namespace fran {

std::string version_string() { return FRAN_VERSION; }

SweepKind parse_sweep_kind(const std::string& name) {
  if (name == "none") return SweepKind::kNone;
  if (name == "fronthaul") return SweepKind::kFronthaul;
  if (name == "rbs") return SweepKind::kRbs;
  if (name == "split") return SweepKind::kInitialSplit;
  throw std::invalid_argument("unknown sweep '" + name + "' (none|fronthaul|rbs|split)");
}

std::string sweep_kind_name(SweepKind kind) {
  switch (kind) {
    case SweepKind::kNone: return "none";
    case SweepKind::kFronthaul: return "fronthaul";
    case SweepKind::kRbs: return "rbs";
    case SweepKind::kInitialSplit: return "split";
  }
  return "none";
}

void ExperimentSpec::validate() const {
  network.validate();
  if (schemes.empty()) throw std::invalid_argument("ExperimentSpec: no schemes");
  for (const SchemeSpec& s : schemes) s.validate();
  if (num_realizations < 1) throw std::invalid_argument("ExperimentSpec: realizations must be >= 1");
  if (!(tau >= 1.0)) throw std::invalid_argument("ExperimentSpec: tau must be >= 1");
  if (sweep != SweepKind::kNone && sweep_values.empty()) {
    throw std::invalid_argument("ExperimentSpec: sweep values required");
  }
  if (pf_reference < 0 || pf_reference >= static_cast<int>(schemes.size())) {
    throw std::invalid_argument("ExperimentSpec: pf_reference out of range");
  }
  if (threads < 0) throw std::invalid_argument("ExperimentSpec: threads must be >= 0");
  for (double v : sweep_points()) network_at(v).validate();
}

NetworkConfig ExperimentSpec::network_at(double v) const {
  NetworkConfig c = network;
  switch (sweep) {
    case SweepKind::kFronthaul:
      c.fronthaul_capacity_bps = {v};
      break;
    case SweepKind::kRbs:
      if (v < 1.0 || v != std::floor(v)) throw std::invalid_argument("rbs sweep needs integers");
      c.num_rbs = static_cast<int>(v);
      break;
    case SweepKind::kNone:
    case SweepKind::kInitialSplit:
      break;
  }
  return c;
}

std::vector<double> ExperimentSpec::sweep_points() const {
  if (sweep == SweepKind::kNone) return {0.0};
  return sweep_values;
}

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t realization, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(realization),
                    static_cast<std::uint32_t>(realization >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

std::vector<std::pair<double, double>> empirical_cdf(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("empirical_cdf: no samples");
  std::vector<double> v(samples.begin(), samples.end());
  std::sort(v.begin(), v.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(v.size());
  const double n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(v[i], (i + 1) / n);
  return out;
}

std::vector<std::pair<double, double>> split_ratio_histogram(std::span<const RealizationRow> rows) {
  std::vector<double> pooled;
  for (const RealizationRow& r : rows) {
    pooled.insert(pooled.end(), r.split_values.begin(), r.split_values.end());
  }
  if (pooled.empty()) return {};
  return empirical_cdf(pooled);
}

namespace {

struct SweepContext {
  double value = 0.0;
  NetworkConfig config;
  NetworkScenario topology;                  // used when positions stay fixed
  std::vector<std::vector<double>> weights;  // PF weights before each realization
};

NetworkScenario realization_scenario(const ExperimentSpec& spec, const SweepContext& sw, int i) {
  NetworkScenario sc;
  if (spec.redraw_positions) {
    auto topo_rng = stream_rng(spec.seed, static_cast<std::uint64_t>(i), Stream::kTopology);
    sc = build_topology(sw.config, topo_rng);
  } else {
    sc = sw.topology;
  }
  auto ch_rng = stream_rng(spec.seed, static_cast<std::uint64_t>(i), Stream::kChannels);
  sc.channels = draw_channels(sc, sw.config, ch_rng);
  return sc;
}

SchemeSpec scheme_at(const ExperimentSpec& spec, int s, double sweep_value) {
  SchemeSpec scheme = spec.schemes[s];
  if (spec.sweep == SweepKind::kInitialSplit) scheme.initial_split = sweep_value;
  return scheme;
}

struct Outcome {
  bool ok = false;
  RealizationRow row;
  std::vector<double> user_rates;
  std::string error;
};

Outcome run_one(const ExperimentSpec& spec, const SweepContext& sw, int s, int i) {
  Outcome out;
  const SchemeSpec scheme = scheme_at(spec, s, sw.value);
  try {
    const NetworkScenario sc = realization_scenario(spec, sw, i);
    auto rng = stream_rng(spec.seed, static_cast<std::uint64_t>(i), Stream::kVoronoi);
    const AllocationResult res = run_joint(sc, scheme, sw.weights[i], sw.config, spec.orch, rng);
    out.row.scheme = scheme.name();
    out.row.sweep_value = sw.value;
    out.row.realization = i;
    out.row.utility = res.utility;
    out.row.sum_rate = res.sum_rate;
    out.row.jain = res.jain;
    out.row.iters_outer = res.outer_iters;
    out.row.max_fronthaul_violation = res.max_fronthaul_violation;
    out.row.auction_fallbacks = res.auction_fallbacks;
    if (scheme.access == Access::kNoma) {
      out.row.split_values.assign(res.split.values().begin(), res.split.values().end());
    }
    out.user_rates = res.user_rates;
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = fmt::format("{} sweep={} realization={}: {}", scheme.name(), sw.value, i, e.what());
  }
  return out;
}

// Runs fn(k) for k in [0, n) on a pool of workers.
template <typename Fn>
void parallel_for(int n, int threads, Fn fn) {
  const int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    for (int k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (int k = next++; k < n; k = next++) fn(k);
    });
  }
  for (auto& th : pool) th.join();
}

SchemeSummary summarize(const ExperimentSpec& spec, int s, double sweep_value,
                        std::span<const Outcome> outcomes) {
  SchemeSummary sum;
  const SchemeSpec scheme = scheme_at(spec, s, sweep_value);
  sum.scheme = scheme.name();
  sum.utility_kind = scheme.utility == UtilityKind::kSumRate ? "sum_rate" : "wsr";
  sum.sweep_value = sweep_value;
  int iters_le_10 = 0;
  std::size_t split_total = 0, split_one = 0;
  for (const Outcome& o : outcomes) {
    if (!o.ok) {
      ++sum.failures;
      continue;
    }
    ++sum.successes;
    sum.mean_utility += o.row.utility;
    sum.mean_sum_rate += o.row.sum_rate;
    sum.mean_jain += o.row.jain;
    sum.mean_outer_iters += o.row.iters_outer;
    sum.max_outer_iters = std::max(sum.max_outer_iters, static_cast<double>(o.row.iters_outer));
    if (o.row.iters_outer <= 10) ++iters_le_10;
    sum.max_fronthaul_violation = std::max(sum.max_fronthaul_violation, o.row.max_fronthaul_violation);
    sum.auction_fallbacks += o.row.auction_fallbacks;
    for (double a : o.row.split_values) {
      ++split_total;
      if (a >= 1.0 - 1e-3) ++split_one;
    }
  }
  if (sum.successes > 0) {
    const double n = sum.successes;
    sum.mean_utility /= n;
    sum.mean_sum_rate /= n;
    sum.mean_jain /= n;
    sum.mean_outer_iters /= n;
    sum.frac_outer_iters_le_10 = iters_le_10 / n;
    sum.mean_user_rate = sum.mean_sum_rate / spec.network_at(sweep_value).num_users();
  }
  if (split_total > 0) sum.frac_split_at_one = static_cast<double>(split_one) / split_total;
  return sum;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  const int threads = spec.threads > 0
                          ? spec.threads
                          : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const std::vector<double> points = spec.sweep_points();
  const int n = spec.num_realizations;
  const int num_schemes = static_cast<int>(spec.schemes.size());
  const int ref = spec.pf_reference;

  std::vector<SweepContext> sweeps(points.size());
  // outcomes[sweep][scheme][realization]
  std::vector<std::vector<std::vector<Outcome>>> outcomes(
      points.size(), std::vector<std::vector<Outcome>>(num_schemes, std::vector<Outcome>(n)));

  // The reference scheme runs in realization order because its rates feed
  // the PF weights every scheme uses; sweep points are independent.
  parallel_for(static_cast<int>(points.size()), threads, [&](int p) {
    SweepContext& sw = sweeps[p];
    sw.value = points[p];
    sw.config = spec.network_at(sw.value);
    auto topo_rng = stream_rng(spec.seed, 0, Stream::kTopology);
    sw.topology = build_topology(sw.config, topo_rng);
    PfState pf = init_pf_state(realization_scenario(spec, sw, 0), sw.config, spec.tau);
    sw.weights.assign(n, {});
    for (int i = 0; i < n; ++i) {
      sw.weights[i] = pf_weights(pf);
      outcomes[p][ref][i] = run_one(spec, sw, ref, i);
      if (outcomes[p][ref][i].ok) update_pf_weights(pf, outcomes[p][ref][i].user_rates);
    }
  });

  std::vector<std::tuple<int, int, int>> tasks;
  for (int p = 0; p < static_cast<int>(points.size()); ++p) {
    for (int s = 0; s < num_schemes; ++s) {
      if (s == ref) continue;
      for (int i = 0; i < n; ++i) tasks.emplace_back(p, s, i);
    }
  }
  parallel_for(static_cast<int>(tasks.size()), threads, [&](int k) {
    const auto [p, s, i] = tasks[k];
    outcomes[p][s][i] = run_one(spec, sweeps[p], s, i);
  });

  ExperimentResult result;
  for (int p = 0; p < static_cast<int>(points.size()); ++p) {
    for (int s = 0; s < num_schemes; ++s) {
      for (const Outcome& o : outcomes[p][s]) {
        if (o.ok) {
          result.rows.push_back(o.row);
        } else {
          result.failure_log.push_back(o.error);
        }
      }
      SchemeSummary sum = summarize(spec, s, points[p], outcomes[p][s]);
      if (sum.failures > 0.01 * n) result.too_many_failures = true;
      result.summaries.push_back(std::move(sum));
    }
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

void check_cdf(const std::vector<std::pair<double, double>>& cdf) {
  for (std::size_t i = 1; i < cdf.size(); ++i) {
    if (cdf[i].first < cdf[i - 1].first || cdf[i].second < cdf[i - 1].second) {
      throw std::logic_error("write_experiment: CDF not monotone");
    }
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

}  // namespace

void write_experiment(const ExperimentSpec& spec, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  const fs::path dir(spec.out_dir);
  fs::create_directories(dir);

  // Row counts are checked against the per-scheme success counts first.
  std::size_t expected = 0;
  for (const SchemeSummary& s : result.summaries) expected += s.successes;
  if (expected != result.rows.size()) throw std::logic_error("write_experiment: row count mismatch");

  {
    auto f = open_out(dir / "realizations.csv");
    f << "scheme,sweep_value,realization,utility,sum_rate,jain,iters_outer,"
         "max_fronthaul_violation\n";
    for (const RealizationRow& r : result.rows) {
      f << r.scheme << ',' << num(r.sweep_value) << ',' << r.realization << ',' << num(r.utility)
        << ',' << num(r.sum_rate) << ',' << num(r.jain) << ',' << r.iters_outer << ','
        << num(r.max_fronthaul_violation) << '\n';
    }
  }

  auto rows_of = [&](const SchemeSummary& s) {
    std::vector<RealizationRow> out;
    for (const RealizationRow& r : result.rows) {
      if (r.scheme == s.scheme && r.sweep_value == s.sweep_value) out.push_back(r);
    }
    return out;
  };

  {
    auto f = open_out(dir / "cdf.csv");
    f << "scheme,sweep_value,utility,probability\n";
    for (const SchemeSummary& s : result.summaries) {
      const auto rows = rows_of(s);
      if (rows.empty()) continue;
      std::vector<double> u;
      for (const auto& r : rows) u.push_back(r.utility);
      const auto cdf = empirical_cdf(u);
      check_cdf(cdf);
      for (const auto& [v, p] : cdf) f << s.scheme << ',' << num(s.sweep_value) << ',' << num(v) << ',' << num(p) << '\n';
    }
  }

  {
    auto f = open_out(dir / "split_cdf.csv");
    f << "scheme,sweep_value,a,probability\n";
    for (const SchemeSummary& s : result.summaries) {
      const auto rows = rows_of(s);
      const auto cdf = split_ratio_histogram(rows);
      check_cdf(cdf);
      for (const auto& [v, p] : cdf) {
        if (v < 0.0 || v > 1.0) throw std::logic_error("write_experiment: split ratio outside [0, 1]");
        f << s.scheme << ',' << num(s.sweep_value) << ',' << num(v) << ',' << num(p) << '\n';
      }
    }
  }

  nlohmann::ordered_json j;
  j["version"] = version_string();
  j["wall_seconds"] = result.wall_seconds;
  auto& cfg = j["config"];
  cfg["seed"] = spec.seed;
  cfg["realizations"] = spec.num_realizations;
  cfg["tau"] = spec.tau;
  cfg["sweep"] = sweep_kind_name(spec.sweep);
  cfg["sweep_values"] = spec.sweep_values;
  cfg["num_faps"] = spec.network.num_faps;
  cfg["users_per_fap"] = spec.network.users_per_fap;
  cfg["rbs"] = spec.network.num_rbs;
  cfg["power_budget_dbm"] = spec.network.power_budget_dbm;
  cfg["fronthaul_bps"] = spec.network.fronthaul_capacity_bps;
  cfg["inter_fap_distance_m"] = spec.network.inter_fap_distance_m;
  cfg["sic_imperfection"] = spec.network.sic_imperfection;
  cfg["redraw_positions"] = spec.redraw_positions;
  cfg["pf_reference"] = spec.schemes[spec.pf_reference].name();
  std::vector<std::string> names;
  for (const SchemeSpec& s : spec.schemes) names.push_back(s.name());
  cfg["schemes"] = names;
  auto& rows = j["schemes"];
  rows = nlohmann::json::array();
  for (const SchemeSummary& s : result.summaries) {
    nlohmann::ordered_json r;
    r["scheme"] = s.scheme;
    r["utility_kind"] = s.utility_kind;
    r["sweep_value"] = s.sweep_value;
    r["successes"] = s.successes;
    r["failures"] = s.failures;
    r["mean_utility"] = s.mean_utility;
    r["mean_sum_rate"] = s.mean_sum_rate;
    r["mean_user_rate"] = s.mean_user_rate;
    r["mean_jain"] = s.mean_jain;
    r["mean_outer_iters"] = s.mean_outer_iters;
    r["frac_outer_iters_le_10"] = s.frac_outer_iters_le_10;
    r["max_fronthaul_violation"] = s.max_fronthaul_violation;
    r["auction_fallbacks"] = s.auction_fallbacks;
    r["frac_split_at_one"] = s.frac_split_at_one;
    rows.push_back(r);
  }
  j["failures"] = result.failure_log;
  j["too_many_failures"] = result.too_many_failures;
  auto f = open_out(dir / "summary.json");
  f << j.dump(2) << '\n';
}

}  // namespace fran
