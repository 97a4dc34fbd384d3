#include "fran/orchestrator.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fran/assign_hungarian.h"
#include "fran/split_admm.h"

namespace fran {

void SchemeSpec::validate() const {
  if (access == Access::kOma) {
    if (split != SplitMethod::kFixed) {
      throw std::invalid_argument("SchemeSpec: OMA has no split stage");
    }
    if (assign != AssignMethod::kHungarian) {
      throw std::invalid_argument("SchemeSpec: OMA uses the Hungarian assignment");
    }
  }
  if (!(initial_split >= 0.0 && initial_split <= 1.0)) {
    throw std::invalid_argument("SchemeSpec: initial split must lie in [0, 1]");
  }
}

std::string SchemeSpec::name() const {
  std::string a = assign == AssignMethod::kHungarian ? "H"
                  : assign == AssignMethod::kMckp    ? "K"
                                                     : "V";
  std::string p = power == PowerMethod::kAdmm ? "PA" : "PU";
  const std::string suffix = utility == UtilityKind::kSumRate ? "/SR" : "";
  if (access == Access::kOma) return "OMA-" + a + "-" + p + suffix;
  return a + "-" + p + "-" + (split == SplitMethod::kAdmm ? "PS" : "FPS") + suffix;
}

SchemeSpec SchemeSpec::parse(const std::string& label, UtilityKind utility) {
  SchemeSpec s;
  s.utility = utility;
  std::string rest = label;
  if (rest.size() > 3 && rest.compare(rest.size() - 3, 3, "/SR") == 0) {
    s.utility = UtilityKind::kSumRate;
    rest.resize(rest.size() - 3);
  }
  if (rest.rfind("OMA-", 0) == 0) {
    s.access = Access::kOma;
    s.split = SplitMethod::kFixed;
    rest = rest.substr(4);
  }
  auto bad = [&] { return std::invalid_argument("SchemeSpec: cannot parse '" + label + "'"); };
  if (rest.size() < 4 || rest[1] != '-') throw bad();
  switch (rest[0]) {
    case 'H': s.assign = AssignMethod::kHungarian; break;
    case 'K': s.assign = AssignMethod::kMckp; break;
    case 'V': s.assign = AssignMethod::kVoronoi; break;
    default: throw bad();
  }
  const std::string p = rest.substr(2, 2);
  if (p == "PA") {
    s.power = PowerMethod::kAdmm;
  } else if (p == "PU") {
    s.power = PowerMethod::kUniformScaleback;
  } else {
    throw bad();
  }
  const std::string tail = rest.substr(4);
  if (s.access == Access::kOma) {
    if (!tail.empty()) throw bad();
  } else if (tail == "-PS") {
    s.split = SplitMethod::kAdmm;
  } else if (tail == "-FPS") {
    s.split = SplitMethod::kFixed;
  } else {
    throw bad();
  }
  s.validate();
  return s;
}

JainResult jain_index(std::span<const double> rates) {
  if (rates.empty()) throw std::invalid_argument("jain_index: no rates");
  double sum = 0.0, sq = 0.0;
  for (double c : rates) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw std::invalid_argument("jain_index: rates must be finite and >= 0");
    }
    sum += c;
    sq += c * c;
  }
  const double n = static_cast<double>(rates.size());
  if (sq == 0.0) return {1.0 / n, true};
  return {std::clamp(sum * sum / (n * sq), 1.0 / n, 1.0), false};
}

std::vector<double> pf_weights(const PfState& state) {
  std::vector<double> w;
  w.reserve(state.avg_rates.size());
  for (double c : state.avg_rates) w.push_back(1.0 / std::max(c, kPfRateFloor));
  return w;
}

std::vector<double> update_pf_weights(PfState& state, std::span<const double> rates) {
  if (!(state.tau >= 1.0)) throw std::invalid_argument("update_pf_weights: tau must be >= 1");
  if (rates.size() != state.avg_rates.size()) {
    throw std::invalid_argument("update_pf_weights: rate count mismatch");
  }
  const double k = 1.0 / state.tau;
  for (std::size_t u = 0; u < rates.size(); ++u) {
    state.avg_rates[u] = (1.0 - k) * state.avg_rates[u] + k * rates[u];
  }
  return pf_weights(state);
}

PfState init_pf_state(const NetworkScenario& scenario, const NetworkConfig& config, double tau) {
  if (!(tau >= 1.0)) throw std::invalid_argument("init_pf_state: tau must be >= 1");
  NetworkConfig unit = config;
  unit.rayleigh_fading = false;
  std::mt19937_64 unused(0);
  const ChannelTensor h = draw_channels(scenario, unit, unused);
  const PowerMatrix p = uniform_powers(config);
  const LinkBudget link = LinkBudget::from(config);
  const int faps = scenario.num_faps();
  const int users = scenario.num_users();
  const int rbs = config.num_rbs;

  std::vector<int> home(users);
  std::vector<int> count(faps, 0);
  for (int u = 0; u < users; ++u) {
    home[u] = scenario.closest_fap(u);
    ++count[home[u]];
  }
  PfState state;
  state.tau = tau;
  state.avg_rates.resize(users);
  for (int u = 0; u < users; ++u) {
    const int f = home[u];
    double per_slot = 0.0;
    for (int r = 0; r < rbs; ++r) {
      const auto p_r = p.column(r);
      per_slot += 0.5 * (rate_strong(p_r, kInitialSplitRatio, f, r, u, h, link) +
                         rate_weak(p_r, kInitialSplitRatio, f, r, u, h, link));
    }
    per_slot /= rbs;
    // 2R slots shared by the count[f] users closest to f.
    const double slots = std::min(2.0 * rbs / count[f], static_cast<double>(rbs));
    state.avg_rates[u] = std::max(per_slot * slots, kPfRateFloor);
  }
  return state;
}

Assignment voronoi_assign(const NetworkScenario& scenario, std::mt19937_64& rng) {
  const ChannelTensor& h = scenario.channels;
  Assignment asg(h.faps(), h.rbs());
  for (int f = 0; f < h.faps(); ++f) {
    const std::vector<int> cell = scenario.cell_members(f);
    if (cell.size() < 2) throw std::invalid_argument("voronoi_assign: cell with fewer than 2 users");
    const int n = static_cast<int>(cell.size());
    for (int r = 0; r < h.rbs(); ++r) {
      std::uniform_int_distribution<int> first(0, n - 1);
      std::uniform_int_distribution<int> second(0, n - 2);
      const int i = first(rng);
      int j = second(rng);
      if (j >= i) ++j;
      int s = cell[i], w = cell[j];
      if (h(f, r, s) < h(f, r, w)) std::swap(s, w);
      asg.set_pair(f, r, s, w);
    }
  }
  return asg;
}

namespace {

// Factor in [0, 1] for FAP f's row bringing its load into
// [target (1 - window), target]. Load is increasing in the FAP's own power.
double fronthaul_scale(int f, PowerMatrix& powers, const Assignment& assignment,
                       const SplitMatrix& split, const ChannelTensor& channels,
                       const LinkBudget& link, double target, double window) {
  if (target <= 0.0) return 0.0;
  std::vector<double> row(powers.rbs());
  for (int r = 0; r < powers.rbs(); ++r) row[r] = powers(f, r);
  auto load_at = [&](double s) {
    for (int r = 0; r < powers.rbs(); ++r) powers(f, r) = s * row[r];
    return fap_load(f, assignment, powers, split, channels, link);
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double load = load_at(mid);
    if (load > target) {
      hi = mid;
    } else {
      lo = mid;
      if (load >= target * (1.0 - window)) break;
    }
  }
  for (int r = 0; r < powers.rbs(); ++r) powers(f, r) = row[r];
  return lo;
}

constexpr double kScalebackWindow = 1e-4;
constexpr int kMaxRestorePasses = 1000;

// Repeat passes aim below C with a margin that doubles each pass, so loads
// pushed back up by the other FAPs' cuts settle quickly.
double restore_margin(int pass) {
  return pass == 0 ? 0.0 : std::min(1e-2, kScalebackWindow * std::ldexp(1.0, pass - 1));
}

}  // namespace

int restore_feasibility(PowerMatrix& powers, const Assignment& assignment,
                        const SplitMatrix& split, const ChannelTensor& channels,
                        const NetworkConfig& config, double tol) {
  const LinkBudget link = LinkBudget::from(config);
  for (int pass = 0; pass < kMaxRestorePasses; ++pass) {
    bool changed = false;
    for (int f = 0; f < powers.faps(); ++f) {
      const double budget = config.power_budget_w(f);
      const double sum = powers.row_sum(f);
      if (sum > budget * (1.0 + tol)) {
        for (int r = 0; r < powers.rbs(); ++r) powers(f, r) *= budget / sum;
        changed = true;
      }
      const double cap = config.fronthaul_capacity(f);
      if (fap_load(f, assignment, powers, split, channels, link) > cap * (1.0 + tol)) {
        const double s = fronthaul_scale(f, powers, assignment, split, channels, link,
                                         cap * (1.0 - restore_margin(pass)), kScalebackWindow);
        for (int r = 0; r < powers.rbs(); ++r) powers(f, r) *= s;
        changed = true;
      }
    }
    if (!changed) return pass;
  }
  return kMaxRestorePasses;
}

PowerMatrix uniform_power_scaleback(const Assignment& assignment, const SplitMatrix& split,
                                    const ChannelTensor& channels, const NetworkConfig& config) {
  PowerMatrix p = uniform_powers(config);
  // The bisection stops inside the window below C, so a zero tolerance
  // only rescales FAPs that are actually overloaded.
  restore_feasibility(p, assignment, split, channels, config, 0.0);
  return p;
}

void evaluate_allocation(AllocationResult& result, const ChannelTensor& channels,
                         std::span<const double> weights, const NetworkConfig& config,
                         double tol) {
  const LinkBudget link = LinkBudget::from(config);
  result.user_rates = user_rates(result.assignment, result.powers, result.split, channels, link);
  result.sum_rate = 0.0;
  result.utility = 0.0;
  for (std::size_t u = 0; u < result.user_rates.size(); ++u) {
    result.sum_rate += result.user_rates[u];
    result.utility += weights[u] * result.user_rates[u];
  }
  const JainResult j = jain_index(result.user_rates);
  result.jain = j.value;
  result.jain_degenerate = j.degenerate;
  result.loads = fap_loads(result.assignment, result.powers, result.split, channels, link);
  result.power_feasible = true;
  result.max_fronthaul_violation = 0.0;
  for (int f = 0; f < channels.faps(); ++f) {
    const double budget = config.power_budget_w(f);
    if (result.powers.row_sum(f) > budget * (1.0 + tol)) result.power_feasible = false;
    const double cap = config.fronthaul_capacity(f);
    const double over = std::max(0.0, result.loads[f] - cap);
    result.max_fronthaul_violation =
        std::max(result.max_fronthaul_violation, cap > 0.0 ? over / cap : over);
  }
  result.fronthaul_feasible = result.max_fronthaul_violation <= tol;
}

namespace {

std::vector<double> scheme_weights(const SchemeSpec& scheme, std::span<const double> weights,
                                   int users) {
  if (scheme.utility == UtilityKind::kSumRate) return std::vector<double>(users, 1.0);
  if (static_cast<int>(weights.size()) != users) {
    throw std::invalid_argument("run_joint: one weight per user required");
  }
  return {weights.begin(), weights.end()};
}

}  // namespace

AllocationResult run_joint(const NetworkScenario& scenario, const SchemeSpec& scheme,
                           std::span<const double> weights, const NetworkConfig& config,
                           const OrchestratorConfig& orch, std::mt19937_64& rng) {
  scheme.validate();
  const ChannelTensor& h = scenario.channels;
  const int faps = h.faps();
  const int rbs = h.rbs();
  const std::vector<double> w = scheme_weights(scheme, weights, h.users());
  const LinkBudget link = LinkBudget::from(config);
  std::vector<double> caps(faps), budgets(faps);
  for (int f = 0; f < faps; ++f) {
    caps[f] = config.fronthaul_capacity(f);
    budgets[f] = config.power_budget_w(f);
  }

  const bool oma = scheme.access == Access::kOma;
  const double a0 = oma ? 1.0 : scheme.initial_split;
  PowerMatrix powers = uniform_powers(config);
  SplitMatrix split(faps, rbs, a0);
  Assignment voronoi;
  if (scheme.assign == AssignMethod::kVoronoi) voronoi = voronoi_assign(scenario, rng);

  AllocationResult best;
  bool have_best = false;
  int auction_rounds = 0;
  int auction_fallbacks = 0;
  for (int it = 1; it <= orch.max_outer_iters; ++it) {
    AllocationResult cur;
    switch (scheme.assign) {
      case AssignMethod::kHungarian:
        cur.assignment = oma ? assign_single_user(h, powers, w, link)
                             : assign_all_rbs(h, powers, split, w, link);
        break;
      case AssignMethod::kMckp:
        try {
          const AuctionResult ar = auction_assign(h, powers, split, w, caps, link, orch.auction);
          auction_rounds += static_cast<int>(ar.trace.size());
          cur.assignment = ar.assignment;
        } catch (const AuctionError& e) {
          // Hitting the round cap is reported through the fallback count.
          auction_rounds += static_cast<int>(e.trace().size());
          ++auction_fallbacks;
          cur.assignment = assign_all_rbs(h, powers, split, w, link);
        }
        break;
      case AssignMethod::kVoronoi:
        cur.assignment = voronoi;
        break;
    }

    if (scheme.power == PowerMethod::kAdmm) {
      const PowerContext ctx{cur.assignment, split, h, w, link, budgets, caps};
      cur.powers = admm_power(powers, ctx, orch.power_admm).powers;
    } else {
      cur.powers = uniform_power_scaleback(cur.assignment, split, h, config);
    }

    if (!oma && scheme.split == SplitMethod::kAdmm) {
      const SplitContext sctx{cur.assignment, cur.powers, h, w, link, caps};
      cur.split = admm_split_all(split, sctx, orch.split_admm).split;
    } else {
      cur.split = split;
    }

    evaluate_allocation(cur, h, w, config, orch.feasibility_tol);
    cur.outer_iters = it;
    const double prev = have_best ? best.utility : 0.0;
    std::vector<double> trace = have_best ? best.utility_trace : std::vector<double>{};
    trace.push_back(cur.utility);

    if (have_best && cur.utility < prev) {
      best.rolled_back = true;
      best.outer_iters = it;
      best.utility_trace = std::move(trace);
      break;
    }
    cur.utility_trace = std::move(trace);
    const bool small_gain = have_best && cur.utility - prev < orch.epsilon * std::abs(prev);
    best = std::move(cur);
    have_best = true;
    powers = best.powers;
    split = best.split;
    if (small_gain) break;
  }

  best.restore_passes =
      restore_feasibility(best.powers, best.assignment, best.split, h, config, orch.feasibility_tol);
  if (best.restore_passes > 0) {
    const std::vector<double> trace = best.utility_trace;
    evaluate_allocation(best, h, w, config, orch.feasibility_tol);
    best.utility_trace = trace;
  }
  best.auction_rounds = auction_rounds;
  best.auction_fallbacks = auction_fallbacks;
  return best;
}

AllocationResult oma_allocate(const NetworkScenario& scenario, std::span<const double> weights,
                              const NetworkConfig& config, const OrchestratorConfig& orch,
                              UtilityKind utility) {
  SchemeSpec s;
  s.assign = AssignMethod::kHungarian;
  s.power = PowerMethod::kAdmm;
  s.split = SplitMethod::kFixed;
  s.initial_split = 1.0;
  s.access = Access::kOma;
  s.utility = utility;
  std::mt19937_64 unused(0);
  return run_joint(scenario, s, weights, config, orch, unused);
}

}  // namespace fran
