// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fran/assign_hungarian.h"
#include "fran/assign_mckp.h"
#include "fran/harness.h"
#include "fran/orchestrator.h"
#include "fran/power_admm.h"
#include "fran/split_admm.h"
#include "oracles.h"
#include "properties.h"

namespace {

using namespace fran;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Verdict& v) {
  if (!v.pass) ++failures;
  fmt::print("{} {:>2} {}: {}\n", v.pass ? "PASS" : "FAIL", id, name, v.detail);
  std::fflush(stdout);
}

Verdict hungarian_oracle(std::uint64_t seed) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(seed);
  int exact = 0;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    const auto in = oracle::random_rate_instance(2, 4 + i % 3, 1, rng);
    const Assignment asg = assign_all_rbs(in.h, in.p, in.a, in.w, in.link, RoleRepair::kNone);
    const double got = oracle::rb_utility(in, asg, 0);
    const double best = oracle::exhaustive_rb_utility(in, 0);
    if (std::abs(got - best) <= 1e-12 * std::abs(best)) ++exact;
  }
  const double secs = seconds_since(t0);
  return {exact == n && secs < 10.0,
          fmt::format("{}/{} equal to exhaustive optimum (1e-12 rel), {:.2f} s", exact, n, secs)};
}

Verdict mckp_oracle(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int ok_feasible = 0, ok_lp = 0, ok_int = 0;
  double worst_lp = 0.0;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    const auto classes = oracle::random_classes(2, 3 + i % 4, rng);
    const double cap = oracle::random_capacity(classes, rng);
    const MckpSolution sol = mckp_greedy(classes, cap);
    const double lp = oracle::lp_optimum(oracle::prune(classes, cap), cap);
    const double opt = oracle::exhaustive_integer(classes, cap);
    const double rel = std::abs(sol.lp_bound - lp) / std::max(1.0, std::abs(lp));
    worst_lp = std::max(worst_lp, rel);
    if (sol.weight <= cap) ++ok_feasible;
    if (rel <= 1e-9) ++ok_lp;
    if (sol.profit >= opt - std::abs(sol.split_profit_gap) - 1e-9) ++ok_int;
  }
  return {ok_feasible == n && ok_lp == n && ok_int == n,
          fmt::format("feasible {}/{}, LP match {}/{} (worst {:.1e}), integer bound {}/{}",
                      ok_feasible, n, ok_lp, n, worst_lp, ok_int, n)};
}

Verdict admm_feasibility(std::uint64_t seed) {
  NetworkConfig cfg;
  const LinkBudget link = LinkBudget::from(cfg);
  const AdmmConfig admm;
  int feasible = 0, fast = 0;
  const int n = 100;
  for (int i = 0; i < n; ++i) {
    std::mt19937_64 rng(seed + i);
    const NetworkScenario sc = make_scenario(cfg, rng);
    const PowerMatrix p = uniform_powers(cfg);
    const SplitMatrix a(cfg.num_faps, cfg.num_rbs, kInitialSplitRatio);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    std::vector<double> w(cfg.num_users());
    for (double& x : w) x = 1e-7 * u(rng);
    const Assignment asg = assign_all_rbs(sc.channels, p, a, w, link);
    const PowerContext ctx = make_power_context(asg, a, sc.channels, w, cfg);
    const AdmmPowerResult res = admm_power(p, ctx, admm);
    if (max_relative_violation(res.powers, ctx) <= admm.constraint_tol) ++feasible;
    if (res.sweeps <= 15) ++fast;
  }
  return {feasible >= 95 && fast >= 90,
          fmt::format("feasible {}/{} (need 95), within 15 sweeps {}/{} (need 90)", feasible, n,
                      fast, n)};
}

Verdict gradient_checks(std::uint64_t seed) {
  NetworkConfig cfg;
  const LinkBudget link = LinkBudget::from(cfg);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int power_ok = 0, split_ok = 0;
  double power_worst = 0.0, split_worst = 0.0;
  const int n = 1000;
  NetworkScenario sc = make_scenario(cfg, rng);
  for (int i = 0; i < n; ++i) {
    if (i % 50 == 0) sc = make_scenario(cfg, rng);
    std::vector<double> w(cfg.num_users());
    for (double& x : w) x = 1e-7 * (0.5 + u01(rng));
    PowerMatrix p(cfg.num_faps, cfg.num_rbs);
    SplitMatrix a(cfg.num_faps, cfg.num_rbs);
    for (int f = 0; f < cfg.num_faps; ++f) {
      for (int r = 0; r < cfg.num_rbs; ++r) {
        p(f, r) = cfg.power_budget_w(f) * (0.05 + 0.9 * u01(rng)) / cfg.num_rbs;
        a(f, r) = 0.02 + 0.96 * u01(rng);
      }
    }
    const Assignment asg = assign_all_rbs(sc.channels, p, a, w, link);
    // Capacities around the current loads make some hinges active.
    const auto loads = fap_loads(asg, p, a, sc.channels, link);
    std::vector<double> caps(cfg.num_faps), budgets(cfg.num_faps);
    for (int f = 0; f < cfg.num_faps; ++f) {
      caps[f] = loads[f] * (0.7 + 0.6 * u01(rng));
      budgets[f] = p.row_sum(f) * (0.7 + 0.6 * u01(rng));
    }
    AdmmConfig admm;
    admm.form = i % 2 ? PenaltyForm::kLiteral : PenaltyForm::kHingeSquared;
    const double delta = 10.0 * (0.1 + u01(rng));

    const PowerContext pctx{asg, a, sc.channels, w, link, budgets, caps};
    DualState d(cfg.num_faps);
    for (int f = 0; f < cfg.num_faps; ++f) {
      d.mu1[f] = u01(rng);
      d.mu2[f] = u01(rng);
    }
    const double ts = utility(asg, p, a, sc.channels, w, link);
    const PowerMatrix g = augmented_lagrangian_L1_gradient(p, d, admm, pctx, delta, ts);
    double gmax = 0.0;
    for (double v : g.values()) gmax = std::max(gmax, std::abs(v));
    double worst = 0.0;
    for (int f = 0; f < cfg.num_faps; ++f) {
      for (int r = 0; r < cfg.num_rbs; ++r) {
        const double h = 1e-6 * cfg.power_budget_w(f);
        PowerMatrix hi = p, lo = p;
        hi(f, r) += h;
        lo(f, r) -= h;
        const double fd = (augmented_lagrangian_L1(hi, d, admm, pctx, delta, ts) -
                           augmented_lagrangian_L1(lo, d, admm, pctx, delta, ts)) /
                          (2.0 * h);
        worst = std::max(worst, std::abs(g(f, r) - fd) / std::max(std::abs(fd), gmax));
      }
    }
    power_worst = std::max(power_worst, worst);
    if (worst <= 1e-4) ++power_ok;

    const int f = i % cfg.num_faps;
    const SplitContext sctx{asg, p, sc.channels, w, link, caps};
    SplitDualState sd(cfg.num_rbs);
    sd.lambda3 = u01(rng);
    std::vector<double> af(cfg.num_rbs);
    for (int r = 0; r < cfg.num_rbs; ++r) af[r] = a(f, r);
    const double sts = fap_split_utility(f, af, sctx);
    const auto sg = augmented_lagrangian_L2_gradient(f, af, sd, admm, sctx, delta, sts);
    double sgmax = 0.0;
    for (double v : sg) sgmax = std::max(sgmax, std::abs(v));
    double sworst = 0.0;
    for (int r = 0; r < cfg.num_rbs; ++r) {
      const double h = 1e-7;
      std::vector<double> hi = af, lo = af;
      hi[r] += h;
      lo[r] -= h;
      const double fd = (augmented_lagrangian_L2(f, hi, sd, admm, sctx, delta, sts) -
                         augmented_lagrangian_L2(f, lo, sd, admm, sctx, delta, sts)) /
                        (2.0 * h);
      if (sgmax > 0.0 || fd != 0.0) {
        sworst = std::max(sworst, std::abs(sg[r] - fd) / std::max(std::abs(fd), sgmax));
      }
    }
    split_worst = std::max(split_worst, sworst);
    if (sworst <= 1e-4) ++split_ok;
  }
  return {power_ok == n && split_ok == n,
          fmt::format("L1 {}/{} (worst {:.1e}), L2 {}/{} (worst {:.1e})", power_ok, n,
                      power_worst, split_ok, n, split_worst)};
}

const SchemeSummary& find(const ExperimentResult& res, const std::string& scheme,
                          double sweep = 0.0) {
  for (const SchemeSummary& s : res.summaries) {
    if (s.scheme == scheme && s.sweep_value == sweep) return s;
  }
  throw std::logic_error("no summary for " + scheme);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int realizations = 500;
  std::uint64_t seed = 1;
  std::string out = "acceptance_out";
  app.add_option("--realizations", realizations, "Monte-Carlo realizations per point");
  app.add_option("--seed", seed, "Seed");
  app.add_option("--out", out, "Directory for experiment outputs");
  CLI11_PARSE(app, argc, argv);

  report(1, "Hungarian oracle", hungarian_oracle(seed));
  report(2, "MCKP oracle", mckp_oracle(seed));
  report(3, "ADMM feasibility", admm_feasibility(seed));
  report(4, "gradient checks", gradient_checks(seed));

  ExperimentSpec spec;
  spec.schemes = {SchemeSpec::parse("K-PA-PS"),    SchemeSpec::parse("H-PA-PS"),
                  SchemeSpec::parse("V-PU-FPS"),   SchemeSpec::parse("OMA-H-PA"),
                  SchemeSpec::parse("H-PA-PS/SR"), SchemeSpec::parse("K-PA-PS/SR"),
                  SchemeSpec::parse("OMA-H-PA/SR")};
  spec.num_realizations = realizations;
  spec.seed = seed;
  spec.out_dir = out + "/main";
  const auto t0 = Clock::now();
  const ExperimentResult main_res = run_experiment(spec);
  write_experiment(spec, main_res);
  const double main_secs = seconds_since(t0);
  for (const SchemeSummary& s : main_res.summaries) {
    fmt::print("     {:<12} utility {:>12.6g}  sum rate {:>10.4g}  Jain {:.4f}  outer {:.2f}  "
               "split a=1 {:.3f}  failures {}  auction fallbacks {}\n",
               s.scheme, s.mean_utility, s.mean_sum_rate, s.mean_jain, s.mean_outer_iters,
               s.frac_split_at_one, s.failures, s.auction_fallbacks);
  }

  const auto& k = find(main_res, "K-PA-PS");
  const auto& h = find(main_res, "H-PA-PS");
  const auto& v = find(main_res, "V-PU-FPS");
  const auto& oma = find(main_res, "OMA-H-PA");
  const auto& h_sr = find(main_res, "H-PA-PS/SR");
  const auto& k_sr = find(main_res, "K-PA-PS/SR");
  const auto& oma_sr = find(main_res, "OMA-H-PA/SR");

  report(5, "baseline ordering",
         {k.mean_utility > h.mean_utility && h.mean_utility > v.mean_utility &&
              k.mean_utility >= 1.05 * v.mean_utility && main_secs < 1800.0,
          fmt::format("K-PA-PS {:.4f}, H-PA-PS {:.4f}, V-PU-FPS {:.4f}; K/V {:.3f}, H/V {:.3f}; "
                      "{:.0f} s for all schemes",
                      k.mean_utility, h.mean_utility, v.mean_utility,
                      k.mean_utility / v.mean_utility, h.mean_utility / v.mean_utility, main_secs)});

  const double sr_gap = std::abs(h_sr.mean_utility - oma_sr.mean_utility) /
                        std::max(h_sr.mean_utility, oma_sr.mean_utility);
  report(6, "NOMA vs OMA fairness",
         {h.mean_jain - oma.mean_jain >= 0.05 && sr_gap <= 0.10,
          fmt::format("Jain H-PA-PS {:.4f} vs OMA {:.4f} (diff {:.4f}); sum-rate utilities {:.4g} "
                      "vs {:.4g} (gap {:.1f}%)",
                      h.mean_jain, oma.mean_jain, h.mean_jain - oma.mean_jain, h_sr.mean_utility,
                      oma_sr.mean_utility, 100.0 * sr_gap)});

  report(7, "fairness regimes",
         {h.mean_jain - h_sr.mean_jain >= 0.1 && k.mean_jain - k_sr.mean_jain >= 0.1,
          fmt::format("H: WSR {:.4f} vs SR {:.4f}; K: WSR {:.4f} vs SR {:.4f}", h.mean_jain,
                      h_sr.mean_jain, k.mean_jain, k_sr.mean_jain)});

  ExperimentSpec rb_spec;
  rb_spec.schemes = {SchemeSpec::parse("K-PA-PS"), SchemeSpec::parse("H-PA-PS")};
  rb_spec.num_realizations = realizations;
  rb_spec.seed = seed;
  rb_spec.sweep = SweepKind::kRbs;
  rb_spec.sweep_values = {1, 2, 4};
  rb_spec.out_dir = out + "/rbs";
  const ExperimentResult rb_res = run_experiment(rb_spec);
  write_experiment(rb_spec, rb_res);
  bool rb_pass = true;
  std::string rb_detail;
  for (const char* name : {"K-PA-PS", "H-PA-PS"}) {
    int inversions = 0;
    double worst_drop = 0.0;
    std::vector<double> jains;
    for (double r : rb_spec.sweep_values) jains.push_back(find(rb_res, name, r).mean_jain);
    for (std::size_t i = 1; i < jains.size(); ++i) {
      if (jains[i] < jains[i - 1]) {
        ++inversions;
        worst_drop = std::max(worst_drop, jains[i - 1] - jains[i]);
      }
    }
    if (inversions > 1 || worst_drop > 0.01) rb_pass = false;
    rb_detail += fmt::format("{}{} Jain R=1,2,4: {:.4f} {:.4f} {:.4f}", rb_detail.empty() ? "" : "; ",
                             name, jains[0], jains[1], jains[2]);
  }
  report(8, "fairness vs RBs", {rb_pass, rb_detail});

  report(9, "split ratio distribution",
         {h_sr.frac_split_at_one >= 0.5 && k_sr.frac_split_at_one >= 0.5,
          fmt::format("share of a within 1e-3 of 1 under sum rate: H-PA-PS {:.3f}, K-PA-PS {:.3f}",
                      h_sr.frac_split_at_one, k_sr.frac_split_at_one)});

  int cases = 0, broken = 0;
  std::string first;
  for (const props::Outcome& o : props::all_suites(seed)) {
    cases += o.cases;
    broken += o.failures;
    if (first.empty() && o.failures > 0) first = o.name + ": " + o.first_failure;
  }
  report(10, "invariant suites",
         {cases >= 10000 && broken == 0,
          fmt::format("{} generated cases, {} failures{}", cases, broken,
                      first.empty() ? "" : " (" + first + ")")});

  fmt::print("{} of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
