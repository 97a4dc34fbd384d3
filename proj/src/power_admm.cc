#include "fran/power_admm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace fran {

void AdmmConfig::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("AdmmConfig: delta must be positive");
  if (dual_step < 0.0) throw std::invalid_argument("AdmmConfig: dual_step must be >= 0");
  if (!(constraint_tol > 0.0) || !(primal_change_tol > 0.0)) {
    throw std::invalid_argument("AdmmConfig: tolerances must be positive");
  }
  if (max_outer_iters < 1) throw std::invalid_argument("AdmmConfig: max_outer_iters must be >= 1");
  if (subproblem_iters < 1) throw std::invalid_argument("AdmmConfig: subproblem_iters must be >= 1");
  if (!(delta_growth >= 1.0)) throw std::invalid_argument("AdmmConfig: delta_growth must be >= 1");
}

PowerContext make_power_context(const Assignment& assignment, const SplitMatrix& split,
                                const ChannelTensor& channels, std::span<const double> weights,
                                const NetworkConfig& config) {
  PowerContext ctx{assignment, split, channels, weights, LinkBudget::from(config), {}, {}};
  for (int f = 0; f < channels.faps(); ++f) {
    ctx.power_budget.push_back(config.power_budget_w(f));
    ctx.capacity.push_back(config.fronthaul_capacity(f));
  }
  return ctx;
}

namespace {

double hinge(double x) { return std::max(0.0, x); }

struct Link {
  int fap;
  int user;
  bool strong;
  double a;
  double weight;
};

// Per-RB utility, loads and their derivatives with respect to p_r.
struct ColumnTerms {
  double theta = 0.0;
  std::vector<double> grad_theta;
  std::vector<double> psi;
  std::vector<double> jac_psi;  // [g * F + k] = d psi_gr / d p_kr
};

class PowerModel {
 public:
  PowerModel(const PowerContext& ctx, const AdmmConfig& cfg, double delta, double theta_scale)
      : ctx_(ctx), cfg_(cfg), delta_(delta), theta_scale_(theta_scale),
        faps_(ctx.channels.faps()), links_(ctx.channels.rbs()) {
    for (int r = 0; r < ctx.channels.rbs(); ++r) {
      for (int f = 0; f < faps_; ++f) {
        const double a = ctx.split(f, r);
        const int s = ctx.assignment.strong_user(f, r);
        const int w = ctx.assignment.weak_user(f, r);
        if (s != kNoUser) links_[r].push_back({f, s, true, a, ctx.weights[s]});
        if (w != kNoUser) links_[r].push_back({f, w, false, a, ctx.weights[w]});
      }
    }
  }

  int faps() const { return faps_; }

  void column(int r, std::span<const double> p, bool grad, ColumnTerms& out) const {
    const int n = faps_;
    out.theta = 0.0;
    out.psi.assign(n, 0.0);
    if (grad) {
      out.grad_theta.assign(n, 0.0);
      out.jac_psi.assign(static_cast<std::size_t>(n) * n, 0.0);
    }
    const double c = ctx_.link.rb_bandwidth_hz / std::numbers::ln2;
    for (const Link& l : links_[r]) {
      const auto h = ctx_.channels.gains(r, l.user);
      double others = 0.0;
      for (int k = 0; k < n; ++k) {
        if (k != l.fap) others += p[k] * h[k];
      }
      const double ph = p[l.fap] * h[l.fap];
      const double base = ctx_.link.noise_power_w + others;
      double t1, t2, useful;
      if (l.strong) {
        useful = l.a * ph;
        t2 = base;
      } else {
        useful = (1.0 - l.a) * ph;
        t2 = base + l.a * ph;
      }
      t1 = t2 + useful;
      const double rate = c * std::log1p(useful / t2);
      out.theta += l.weight * rate;
      out.psi[l.fap] += rate;
      if (!grad) continue;
      for (int k = 0; k < n; ++k) {
        double d;
        if (k != l.fap) {
          d = c * (h[k] / t1 - h[k] / t2);
        } else if (l.strong) {
          d = c * l.a * h[k] / t1;
        } else {
          d = c * (h[k] / t1 - l.a * h[k] / t2);
        }
        out.grad_theta[k] += l.weight * d;
        out.jac_psi[static_cast<std::size_t>(l.fap) * n + k] += d;
      }
    }
  }

  double budget_norm(int f) const { return cfg_.normalize ? ctx_.power_budget[f] : 1.0; }
  double capacity_norm(int f) const {
    return cfg_.normalize && ctx_.capacity[f] > 0.0 ? ctx_.capacity[f] : 1.0;
  }

  // Penalty on a normalized hinge v with g = v^2, and its derivative in v.
  double penalty(double v, double mu) const {
    const double g = v * v;
    const double quad = cfg_.form == PenaltyForm::kLiteral ? g * g : g;
    return mu * g + 0.5 * delta_ * quad;
  }
  double penalty_slope(double v, double mu) const {
    const double dquad = cfg_.form == PenaltyForm::kLiteral ? 4.0 * v * v * v : 2.0 * v;
    return mu * 2.0 * v + 0.5 * delta_ * dquad;
  }

  // L1 as a function of column r, the remaining columns entering through
  // their row sums and loads.
  double column_value(int r, std::span<const double> p, std::span<const double> rest_sum,
                      std::span<const double> rest_psi, const DualState& duals,
                      ColumnTerms& scratch) const {
    column(r, p, false, scratch);
    double value = -scratch.theta / theta_scale_;
    for (int f = 0; f < faps_; ++f) {
      const double v1 = hinge(rest_sum[f] + p[f] - ctx_.power_budget[f]) / budget_norm(f);
      const double v2 = hinge(rest_psi[f] + scratch.psi[f] - ctx_.capacity[f]) / capacity_norm(f);
      value += penalty(v1, duals.mu1[f]) + penalty(v2, duals.mu2[f]);
    }
    return value;
  }

  void column_gradient(int r, std::span<const double> p, std::span<const double> rest_sum,
                       std::span<const double> rest_psi, const DualState& duals,
                       ColumnTerms& scratch, std::vector<double>& grad) const {
    column(r, p, true, scratch);
    grad.assign(faps_, 0.0);
    for (int k = 0; k < faps_; ++k) grad[k] = -scratch.grad_theta[k] / theta_scale_;
    for (int f = 0; f < faps_; ++f) {
      const double v1 = hinge(rest_sum[f] + p[f] - ctx_.power_budget[f]) / budget_norm(f);
      if (v1 > 0.0) grad[f] += penalty_slope(v1, duals.mu1[f]) / budget_norm(f);
      const double v2 = hinge(rest_psi[f] + scratch.psi[f] - ctx_.capacity[f]) / capacity_norm(f);
      if (v2 > 0.0) {
        const double s = penalty_slope(v2, duals.mu2[f]) / capacity_norm(f);
        for (int k = 0; k < faps_; ++k) {
          grad[k] += s * scratch.jac_psi[static_cast<std::size_t>(f) * faps_ + k];
        }
      }
    }
  }

  double full_value(const PowerMatrix& powers, const DualState& duals) const {
    ColumnTerms t;
    double theta = 0.0;
    std::vector<double> psi(faps_, 0.0);
    for (int r = 0; r < powers.rbs(); ++r) {
      column(r, powers.column(r), false, t);
      theta += t.theta;
      for (int f = 0; f < faps_; ++f) psi[f] += t.psi[f];
    }
    double value = -theta / theta_scale_;
    for (int f = 0; f < faps_; ++f) {
      const double v1 = hinge(powers.row_sum(f) - ctx_.power_budget[f]) / budget_norm(f);
      const double v2 = hinge(psi[f] - ctx_.capacity[f]) / capacity_norm(f);
      value += penalty(v1, duals.mu1[f]) + penalty(v2, duals.mu2[f]);
    }
    return value;
  }

  // Row sums and loads of every column except r.
  void rest(const PowerMatrix& powers, int r, std::vector<double>& rest_sum,
            std::vector<double>& rest_psi, ColumnTerms& scratch) const {
    rest_sum.assign(faps_, 0.0);
    rest_psi.assign(faps_, 0.0);
    for (int q = 0; q < powers.rbs(); ++q) {
      if (q == r) continue;
      const auto p = powers.column(q);
      column(q, p, false, scratch);
      for (int f = 0; f < faps_; ++f) {
        rest_sum[f] += p[f];
        rest_psi[f] += scratch.psi[f];
      }
    }
  }

 private:
  const PowerContext& ctx_;
  const AdmmConfig& cfg_;
  double delta_;
  double theta_scale_;
  int faps_;
  std::vector<std::vector<Link>> links_;
};

double total_theta(const PowerMatrix& powers, const PowerModel& model) {
  ColumnTerms t;
  double theta = 0.0;
  for (int r = 0; r < powers.rbs(); ++r) {
    model.column(r, powers.column(r), false, t);
    theta += t.theta;
  }
  return theta;
}

}  // namespace

double penalty_g1(int f, const PowerMatrix& powers, double budget) {
  const double v = hinge(powers.row_sum(f) - budget);
  return v * v;
}

double penalty_g2(int f, const PowerMatrix& powers, const PowerContext& ctx) {
  const double v = hinge(
      fap_load(f, ctx.assignment, powers, ctx.split, ctx.channels, ctx.link) - ctx.capacity[f]);
  return v * v;
}

double max_relative_violation(const PowerMatrix& powers, const PowerContext& ctx) {
  const auto loads = fap_loads(ctx.assignment, powers, ctx.split, ctx.channels, ctx.link);
  double worst = 0.0;
  for (int f = 0; f < powers.faps(); ++f) {
    worst = std::max(worst, hinge(powers.row_sum(f) - ctx.power_budget[f]) / ctx.power_budget[f]);
    const double cap = ctx.capacity[f] > 0.0 ? ctx.capacity[f] : 1.0;
    worst = std::max(worst, hinge(loads[f] - ctx.capacity[f]) / cap);
  }
  return worst;
}

double augmented_lagrangian_L1(const PowerMatrix& powers, const DualState& duals,
                               const AdmmConfig& cfg, const PowerContext& ctx, double delta,
                               double theta_scale) {
  return PowerModel(ctx, cfg, delta, theta_scale).full_value(powers, duals);
}

PowerMatrix augmented_lagrangian_L1_gradient(const PowerMatrix& powers, const DualState& duals,
                                             const AdmmConfig& cfg, const PowerContext& ctx,
                                             double delta, double theta_scale) {
  const PowerModel model(ctx, cfg, delta, theta_scale);
  PowerMatrix grad(powers.faps(), powers.rbs());
  std::vector<double> rest_sum, rest_psi, g;
  ColumnTerms scratch;
  for (int r = 0; r < powers.rbs(); ++r) {
    model.rest(powers, r, rest_sum, rest_psi, scratch);
    model.column_gradient(r, powers.column(r), rest_sum, rest_psi, duals, scratch, g);
    std::copy(g.begin(), g.end(), grad.column(r).begin());
  }
  return grad;
}

namespace {

// Projected gradient with Barzilai-Borwein steps and Armijo backtracking in
// the scaled variable x = p / budget on [0, 1]^F.
DirectionResult solve_column(int r, const PowerMatrix& powers, const DualState& duals,
                             const PowerContext& ctx, const PowerModel& model, int max_iters) {
  const int n = model.faps();
  std::vector<double> rest_sum, rest_psi;
  ColumnTerms scratch;
  model.rest(powers, r, rest_sum, rest_psi, scratch);
  const auto& ub = ctx.power_budget;

  DirectionResult out;
  const auto p_in = powers.column(r);
  out.p_r.assign(p_in.begin(), p_in.end());

  std::vector<double> p(p_in.begin(), p_in.end());
  auto value = [&](const std::vector<double>& q) {
    return model.column_value(r, q, rest_sum, rest_psi, duals, scratch);
  };
  auto gradient_x = [&](const std::vector<double>& q, std::vector<double>& g) {
    model.column_gradient(r, q, rest_sum, rest_psi, duals, scratch, g);
    for (int k = 0; k < n; ++k) g[k] *= ub[k];
  };

  const double f_in = value(p);
  if (!std::isfinite(f_in)) {
    out.warning = true;
    return out;
  }
  double fx = f_in;
  std::vector<double> g(n), g_new(n), p_new(n);
  gradient_x(p, g);
  double gmax = 0.0;
  for (double v : g) gmax = std::max(gmax, std::abs(v));
  double step = gmax > 0.0 ? 1.0 / gmax : 1.0;

  for (int it = 0; it < max_iters; ++it) {
    out.iterations = it + 1;
    double pg = 0.0;
    for (int k = 0; k < n; ++k) {
      const double x = p[k] / ub[k];
      pg = std::max(pg, std::abs(x - std::clamp(x - g[k], 0.0, 1.0)));
    }
    if (pg < 1e-12) break;

    double t = step;
    bool accepted = false;
    double f_new = fx;
    for (int bt = 0; bt < 60; ++bt) {
      double decrease = 0.0;
      for (int k = 0; k < n; ++k) {
        const double x = p[k] / ub[k];
        const double xn = std::clamp(x - t * g[k], 0.0, 1.0);
        p_new[k] = xn * ub[k];
        decrease += g[k] * (x - xn);
      }
      f_new = value(p_new);
      if (std::isfinite(f_new) && f_new <= fx - 1e-4 * decrease && decrease > 0.0) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;

    gradient_x(p_new, g_new);
    double ss = 0.0, sy = 0.0, smax = 0.0;
    for (int k = 0; k < n; ++k) {
      const double s = (p_new[k] - p[k]) / ub[k];
      const double y = g_new[k] - g[k];
      ss += s * s;
      sy += s * y;
      smax = std::max(smax, std::abs(s));
    }
    step = sy > 0.0 ? std::clamp(ss / sy, 1e-20, 1e20) : std::min(t * 4.0, 1e20);
    const double df = fx - f_new;
    p.swap(p_new);
    g.swap(g_new);
    fx = f_new;
    if (smax < 1e-12 || df <= 1e-15 * std::max(1.0, std::abs(fx))) break;
  }

  if (fx <= f_in) out.p_r = p;
  return out;
}

}  // namespace

DirectionResult minimize_direction_r(int r, const PowerMatrix& powers, const DualState& duals,
                                     const AdmmConfig& cfg, const PowerContext& ctx,
                                     double delta, double theta_scale) {
  const PowerModel model(ctx, cfg, delta, theta_scale);
  return solve_column(r, powers, duals, ctx, model, cfg.subproblem_iters);
}

AdmmPowerResult admm_power(const PowerMatrix& p_init, const PowerContext& ctx,
                           const AdmmConfig& cfg) {
  cfg.validate();
  const int faps = p_init.faps();
  const int rbs = p_init.rbs();
  for (double v : p_init.values()) {
    if (!(v >= 0.0)) throw std::invalid_argument("admm_power: initial powers must be >= 0");
  }

  double theta_scale = 1.0;
  if (cfg.normalize) {
    const PowerModel probe(ctx, cfg, cfg.delta, 1.0);
    const double t0 = std::abs(total_theta(p_init, probe));
    if (t0 > 0.0 && std::isfinite(t0)) theta_scale = t0;
  }

  AdmmPowerResult res;
  res.duals = DualState(faps);
  PowerMatrix p = p_init;
  // The box [0, budget] is part of every subproblem.
  for (int r = 0; r < rbs; ++r) {
    for (int f = 0; f < faps; ++f) p(f, r) = std::min(p(f, r), ctx.power_budget[f]);
  }

  double delta = cfg.delta;
  PowerMatrix best = p;
  double best_violation = std::numeric_limits<double>::infinity();
  double best_theta = -std::numeric_limits<double>::infinity();

  for (int it = 1; it <= cfg.max_outer_iters; ++it) {
    const PowerModel model(ctx, cfg, delta, theta_scale);
    const PowerMatrix before = p;
    for (int r = 0; r < rbs; ++r) {
      DirectionResult d = solve_column(r, p, res.duals, ctx, model, cfg.subproblem_iters);
      if (d.warning) ++res.subproblem_warnings;
      std::copy(d.p_r.begin(), d.p_r.end(), p.column(r).begin());
    }
    res.sweeps = it;

    const auto loads = fap_loads(ctx.assignment, p, ctx.split, ctx.channels, ctx.link);
    double violation = 0.0;
    for (int f = 0; f < faps; ++f) {
      const double v1 = hinge(p.row_sum(f) - ctx.power_budget[f]);
      const double v2 = hinge(loads[f] - ctx.capacity[f]);
      const double n1 = model.budget_norm(f);
      const double n2 = model.capacity_norm(f);
      res.duals.mu1[f] += cfg.step(delta) * (v1 / n1) * (v1 / n1);
      res.duals.mu2[f] += cfg.step(delta) * (v2 / n2) * (v2 / n2);
      violation = std::max(violation, v1 / ctx.power_budget[f]);
      violation = std::max(violation, v2 / (ctx.capacity[f] > 0.0 ? ctx.capacity[f] : 1.0));
    }

    double change = 0.0;
    for (int r = 0; r < rbs; ++r) {
      for (int f = 0; f < faps; ++f) {
        change = std::max(change, std::abs(p(f, r) - before(f, r)) / ctx.power_budget[f]);
      }
    }

    AdmmIteration rec;
    rec.iteration = it;
    rec.delta = delta;
    rec.max_violation = violation;
    rec.lagrangian = model.full_value(p, res.duals);
    res.trace.push_back(rec);

    const bool feasible = violation <= cfg.constraint_tol;
    const double theta = total_theta(p, model);
    const bool best_feasible = best_violation <= cfg.constraint_tol;
    const bool better = feasible ? (!best_feasible || theta > best_theta)
                                 : (!best_feasible && violation < best_violation);
    if (better) {
      best = p;
      best_violation = violation;
      best_theta = theta;
    }

    if (feasible && change <= cfg.primal_change_tol) {
      res.converged = true;
      res.powers = p;
      res.max_violation = violation;
      return res;
    }
    if (!feasible) delta = std::min(delta * cfg.delta_growth, cfg.delta_max);
  }

  res.powers = best;
  res.max_violation = best_violation;
  return res;
}

}  // namespace fran
