#include "fran/split_admm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace fran {

SplitContext make_split_context(const Assignment& assignment, const PowerMatrix& powers,
                                const ChannelTensor& channels, std::span<const double> weights,
                                const NetworkConfig& config) {
  SplitContext ctx{assignment, powers, channels, weights, LinkBudget::from(config), {}};
  for (int f = 0; f < channels.faps(); ++f) ctx.capacity.push_back(config.fronthaul_capacity(f));
  return ctx;
}

namespace {

double hinge(double x) { return std::max(0.0, x); }

// The pair served by FAP f on RB r, reduced to the quantities a enters.
struct PairTerms {
  bool has_strong = false;
  bool has_weak = false;
  double ph_s = 0.0;
  double noise_s = 0.0;  // noise + inter-FAP interference
  double ph_w = 0.0;
  double noise_w = 0.0;
  double alpha_s = 0.0;
  double alpha_w = 0.0;

  double rate_s(double a, double c) const {
    return has_strong ? c * std::log1p(a * ph_s / noise_s) : 0.0;
  }
  double rate_w(double a, double c) const {
    return has_weak ? c * std::log1p((1.0 - a) * ph_w / (noise_w + a * ph_w)) : 0.0;
  }
  double drate_s(double a, double c) const {
    return has_strong ? c * ph_s / (noise_s + a * ph_s) : 0.0;
  }
  double drate_w(double a, double c) const {
    return has_weak ? -c * ph_w / (noise_w + a * ph_w) : 0.0;
  }
};

class SplitModel {
 public:
  SplitModel(int f, const SplitContext& ctx, const AdmmConfig& cfg, double delta,
             double theta_scale)
      : cfg_(cfg), delta_(delta), theta_scale_(theta_scale), capacity_(ctx.capacity[f]),
        c_(ctx.link.rb_bandwidth_hz / std::numbers::ln2) {
    for (int r = 0; r < ctx.channels.rbs(); ++r) {
      const auto p_r = ctx.powers.column(r);
      PairTerms t;
      const int s = ctx.assignment.strong_user(f, r);
      const int w = ctx.assignment.weak_user(f, r);
      if (s != kNoUser) {
        t.has_strong = true;
        t.ph_s = p_r[f] * ctx.channels(f, r, s);
        t.noise_s = ctx.link.noise_power_w + inter_fap_interference(p_r, f, r, s, ctx.channels);
        t.alpha_s = ctx.weights[s];
      }
      if (w != kNoUser) {
        t.has_weak = true;
        t.ph_w = p_r[f] * ctx.channels(f, r, w);
        t.noise_w = ctx.link.noise_power_w + inter_fap_interference(p_r, f, r, w, ctx.channels);
        t.alpha_w = ctx.weights[w];
      }
      pairs_.push_back(t);
    }
  }

  int rbs() const { return static_cast<int>(pairs_.size()); }

  double utility(std::span<const double> a) const {
    double th = 0.0;
    for (int r = 0; r < rbs(); ++r) {
      const double x = std::clamp(a[r], 0.0, 1.0);
      th += pairs_[r].alpha_s * pairs_[r].rate_s(x, c_) + pairs_[r].alpha_w * pairs_[r].rate_w(x, c_);
    }
    return th;
  }

  double load(std::span<const double> a) const {
    double psi = 0.0;
    for (int r = 0; r < rbs(); ++r) {
      const double x = std::clamp(a[r], 0.0, 1.0);
      psi += pairs_[r].rate_s(x, c_) + pairs_[r].rate_w(x, c_);
    }
    return psi;
  }

  double capacity_norm() const { return cfg_.normalize && capacity_ > 0.0 ? capacity_ : 1.0; }

  double penalty(double v, double mu) const {
    const double g = v * v;
    const double quad = cfg_.form == PenaltyForm::kLiteral ? g * g : g;
    return mu * g + 0.5 * delta_ * quad;
  }
  double penalty_slope(double v, double mu) const {
    const double dquad = cfg_.form == PenaltyForm::kLiteral ? 4.0 * v * v * v : 2.0 * v;
    return mu * 2.0 * v + 0.5 * delta_ * dquad;
  }

  double value(std::span<const double> a, const SplitDualState& d) const {
    double v = -utility(a) / theta_scale_;
    for (int r = 0; r < rbs(); ++r) {
      v += penalty(hinge(-a[r]), d.lambda1[r]) + penalty(hinge(a[r] - 1.0), d.lambda2[r]);
    }
    v += penalty(hinge(load(a) - capacity_) / capacity_norm(), d.lambda3);
    return v;
  }

  std::vector<double> gradient(std::span<const double> a, const SplitDualState& d) const {
    std::vector<double> g(rbs(), 0.0);
    const double v3 = hinge(load(a) - capacity_) / capacity_norm();
    const double s3 = v3 > 0.0 ? penalty_slope(v3, d.lambda3) / capacity_norm() : 0.0;
    for (int r = 0; r < rbs(); ++r) {
      const PairTerms& t = pairs_[r];
      if (a[r] > 0.0 && a[r] < 1.0) {
        const double ds = t.drate_s(a[r], c_);
        const double dw = t.drate_w(a[r], c_);
        g[r] += -(t.alpha_s * ds + t.alpha_w * dw) / theta_scale_ + s3 * (ds + dw);
      }
      if (a[r] < 0.0) g[r] -= penalty_slope(-a[r], d.lambda1[r]);
      if (a[r] > 1.0) g[r] += penalty_slope(a[r] - 1.0, d.lambda2[r]);
    }
    return g;
  }

 private:
  const AdmmConfig& cfg_;
  double delta_;
  double theta_scale_;
  double capacity_;
  double c_;
  std::vector<PairTerms> pairs_;
};

// Minimizes phi over [lo, hi]: a coarse scan, then golden-section search in
// the bracket around the best scan point.
template <typename Fn>
double minimize_scalar(Fn phi, double lo, double hi, double tol) {
  constexpr int kScan = 24;
  double best_x = lo;
  double best_v = std::numeric_limits<double>::infinity();
  const double h = (hi - lo) / kScan;
  for (int i = 0; i <= kScan; ++i) {
    const double x = lo + (hi - lo) * i / kScan;
    const double v = phi(x);
    if (v < best_v) {
      best_v = v;
      best_x = x;
    }
  }
  double a = std::max(lo, best_x - h);
  double b = std::min(hi, best_x + h);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = phi(x1);
  double f2 = phi(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = phi(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = phi(x2);
    }
  }
  const double xm = 0.5 * (a + b);
  return phi(xm) <= best_v ? xm : best_x;
}

}  // namespace

double fap_split_utility(int f, std::span<const double> a_f, const SplitContext& ctx) {
  AdmmConfig cfg;
  return SplitModel(f, ctx, cfg, 1.0, 1.0).utility(a_f);
}

double fap_split_load(int f, std::span<const double> a_f, const SplitContext& ctx) {
  AdmmConfig cfg;
  return SplitModel(f, ctx, cfg, 1.0, 1.0).load(a_f);
}

double augmented_lagrangian_L2(int f, std::span<const double> a_f, const SplitDualState& duals,
                               const AdmmConfig& cfg, const SplitContext& ctx, double delta,
                               double theta_scale) {
  return SplitModel(f, ctx, cfg, delta, theta_scale).value(a_f, duals);
}

std::vector<double> augmented_lagrangian_L2_gradient(int f, std::span<const double> a_f,
                                                     const SplitDualState& duals,
                                                     const AdmmConfig& cfg,
                                                     const SplitContext& ctx, double delta,
                                                     double theta_scale) {
  return SplitModel(f, ctx, cfg, delta, theta_scale).gradient(a_f, duals);
}

SplitFapResult admm_split_fap(int f, std::span<const double> a_init, const SplitContext& ctx,
                              const AdmmConfig& cfg) {
  cfg.validate();
  const int rbs = ctx.channels.rbs();
  if (static_cast<int>(a_init.size()) != rbs) {
    throw std::invalid_argument("admm_split_fap: a_init needs one entry per RB");
  }
  std::vector<double> a(a_init.begin(), a_init.end());
  for (double& x : a) {
    if (!std::isfinite(x)) throw std::invalid_argument("admm_split_fap: non-finite a_init");
    x = std::clamp(x, 0.0, 1.0);
  }

  double theta_scale = 1.0;
  if (cfg.normalize) {
    const double t0 = std::abs(SplitModel(f, ctx, cfg, 1.0, 1.0).utility(a));
    if (t0 > 0.0 && std::isfinite(t0)) theta_scale = t0;
  }

  SplitFapResult res;
  res.duals = SplitDualState(rbs);
  double delta = cfg.delta;
  std::vector<double> best = a;
  double best_violation = std::numeric_limits<double>::infinity();
  double best_theta = -std::numeric_limits<double>::infinity();
  const double capacity = ctx.capacity[f];

  for (int it = 1; it <= cfg.max_outer_iters; ++it) {
    const SplitModel model(f, ctx, cfg, delta, theta_scale);
    const std::vector<double> before = a;
    for (int r = 0; r < rbs; ++r) {
      const double incoming = a[r];
      const double v_in = model.value(a, res.duals);
      auto phi = [&](double x) {
        a[r] = x;
        return model.value(a, res.duals);
      };
      const double x = minimize_scalar(phi, -0.1, 1.1, 1e-6);
      a[r] = x;
      if (!(model.value(a, res.duals) <= v_in)) a[r] = incoming;
    }
    res.sweeps = it;

    const double cap_norm = model.capacity_norm();
    const double v3 = hinge(model.load(a) - capacity);
    double violation = v3 / (capacity > 0.0 ? capacity : 1.0);
    const double step = cfg.step(delta);
    for (int r = 0; r < rbs; ++r) {
      const double lo = hinge(-a[r]);
      const double hi = hinge(a[r] - 1.0);
      res.duals.lambda1[r] += step * lo * lo;
      res.duals.lambda2[r] += step * hi * hi;
      violation = std::max({violation, lo, hi});
    }
    res.duals.lambda3 += step * (v3 / cap_norm) * (v3 / cap_norm);

    double change = 0.0;
    for (int r = 0; r < rbs; ++r) change = std::max(change, std::abs(a[r] - before[r]));

    AdmmIteration rec;
    rec.iteration = it;
    rec.delta = delta;
    rec.max_violation = violation;
    rec.lagrangian = model.value(a, res.duals);
    res.trace.push_back(rec);

    const bool feasible = violation <= cfg.constraint_tol;
    const double theta = model.utility(a);
    const bool best_feasible = best_violation <= cfg.constraint_tol;
    const bool better = feasible ? (!best_feasible || theta > best_theta)
                                 : (!best_feasible && violation < best_violation);
    if (better) {
      best = a;
      best_violation = violation;
      best_theta = theta;
    }
    if (feasible && change <= cfg.primal_change_tol) {
      res.converged = true;
      best = a;
      best_violation = violation;
      break;
    }
    if (!feasible) delta = std::min(delta * cfg.delta_growth, cfg.delta_max);
  }

  for (double& x : best) x = std::clamp(x, 0.0, 1.0);
  res.a = best;
  res.max_violation = best_violation;
  return res;
}

SplitAllResult admm_split_all(const SplitMatrix& a_init, const SplitContext& ctx,
                              const AdmmConfig& cfg) {
  SplitAllResult out;
  out.split = SplitMatrix(a_init.faps(), a_init.rbs());
  for (int f = 0; f < a_init.faps(); ++f) {
    std::vector<double> row(a_init.rbs());
    for (int r = 0; r < a_init.rbs(); ++r) row[r] = a_init(f, r);
    SplitFapResult fr = admm_split_fap(f, row, ctx, cfg);
    for (int r = 0; r < a_init.rbs(); ++r) out.split(f, r) = fr.a[r];
    out.per_fap.push_back(std::move(fr));
  }
  return out;
}

}  // namespace fran
