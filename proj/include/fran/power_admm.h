#pragma once

#include <span>
#include <vector>

#include "fran/netmodel.h"
#include "fran/types.h"

namespace fran {

// How the squared hinges g enter the quadratic penalty term.
enum class PenaltyForm {
  kLiteral,        // (delta/2) g^2, i.e. the hinge to the fourth power
  kHingeSquared,   // (delta/2) hinge^2
};

struct AdmmConfig {
  double delta = 1.0;
  double dual_step = 0.0;  // 0 uses the current delta
  int max_outer_iters = 50;
  // Hinge tolerances relative to the budget / capacity they measure.
  double constraint_tol = 1e-6;
  double primal_change_tol = 1e-4;
  int subproblem_iters = 200;
  PenaltyForm form = PenaltyForm::kHingeSquared;
  // Divide the utility by |Theta(start)| and each hinge by its bound so the
  // penalty is unit-free. Off means raw watts and bps.
  bool normalize = true;
  // delta is multiplied by this after every sweep that ends infeasible.
  double delta_growth = 10.0;
  double delta_max = 1e12;

  void validate() const;
  double step(double current_delta) const { return dual_step > 0.0 ? dual_step : current_delta; }
};

struct DualState {
  std::vector<double> mu1;  // power budget, one per FAP
  std::vector<double> mu2;  // fronthaul, one per FAP

  explicit DualState(int faps = 0) : mu1(faps, 0.0), mu2(faps, 0.0) {}
};

// Fixed data of the power problem: everything except P.
struct PowerContext {
  const Assignment& assignment;
  const SplitMatrix& split;
  const ChannelTensor& channels;
  std::span<const double> weights;
  LinkBudget link;
  std::vector<double> power_budget;  // watts
  std::vector<double> capacity;      // bps
};

PowerContext make_power_context(const Assignment& assignment, const SplitMatrix& split,
                                const ChannelTensor& channels, std::span<const double> weights,
                                const NetworkConfig& config);

// max{0, sum_r p_fr - budget}^2
double penalty_g1(int f, const PowerMatrix& powers, double budget);
// max{0, psi_f - capacity}^2
double penalty_g2(int f, const PowerMatrix& powers, const PowerContext& ctx);

// Largest hinge over both constraint families, each divided by its bound.
double max_relative_violation(const PowerMatrix& powers, const PowerContext& ctx);

// -Theta / theta_scale + sum_f [mu1 g1 + mu2 g2 + quadratic penalties].
double augmented_lagrangian_L1(const PowerMatrix& powers, const DualState& duals,
                               const AdmmConfig& cfg, const PowerContext& ctx,
                               double delta, double theta_scale = 1.0);

PowerMatrix augmented_lagrangian_L1_gradient(const PowerMatrix& powers, const DualState& duals,
                                             const AdmmConfig& cfg, const PowerContext& ctx,
                                             double delta, double theta_scale = 1.0);

struct DirectionResult {
  std::vector<double> p_r;
  int iterations = 0;
  bool warning = false;  // solver failed; p_r is the incoming column
};

// Minimizes L1 over column r within [0, budget_f]^F, other columns fixed.
// Never returns a point with a larger L1 than the incoming one.
DirectionResult minimize_direction_r(int r, const PowerMatrix& powers, const DualState& duals,
                                     const AdmmConfig& cfg, const PowerContext& ctx,
                                     double delta, double theta_scale = 1.0);

struct AdmmIteration {
  int iteration = 0;
  double lagrangian = 0.0;
  double max_violation = 0.0;
  double delta = 0.0;
};

struct AdmmPowerResult {
  PowerMatrix powers;
  DualState duals;
  std::vector<AdmmIteration> trace;
  int sweeps = 0;
  bool converged = false;
  double max_violation = 0.0;
  int subproblem_warnings = 0;
};

// Gauss-Seidel sweeps over the RBs followed by dual ascent, until all hinges
// are within tolerance and P has stopped moving. Without convergence the
// least-violating (then highest-utility) iterate is returned.
AdmmPowerResult admm_power(const PowerMatrix& p_init, const PowerContext& ctx,
                           const AdmmConfig& cfg = {});

}  // namespace fran
