#pragma once

#include <span>
#include <vector>

#include "fran/netmodel.h"
#include "fran/power_admm.h"
#include "fran/types.h"

namespace fran {

inline constexpr double kInitialSplit = 0.25;

struct SplitContext {
  const Assignment& assignment;
  const PowerMatrix& powers;
  const ChannelTensor& channels;
  std::span<const double> weights;
  LinkBudget link;
  std::vector<double> capacity;  // bps
};

SplitContext make_split_context(const Assignment& assignment, const PowerMatrix& powers,
                                const ChannelTensor& channels, std::span<const double> weights,
                                const NetworkConfig& config);

struct SplitDualState {
  std::vector<double> lambda1;  // a >= 0, one per RB
  std::vector<double> lambda2;  // a <= 1, one per RB
  double lambda3 = 0.0;         // fronthaul

  explicit SplitDualState(int rbs = 0) : lambda1(rbs, 0.0), lambda2(rbs, 0.0) {}
};

// Theta_f and psi_f as functions of FAP f's split row. Rates use a clamped
// to [0, 1]; the box is enforced by the penalties.
double fap_split_utility(int f, std::span<const double> a_f, const SplitContext& ctx);
double fap_split_load(int f, std::span<const double> a_f, const SplitContext& ctx);

double augmented_lagrangian_L2(int f, std::span<const double> a_f, const SplitDualState& duals,
                               const AdmmConfig& cfg, const SplitContext& ctx, double delta,
                               double theta_scale = 1.0);

std::vector<double> augmented_lagrangian_L2_gradient(int f, std::span<const double> a_f,
                                                     const SplitDualState& duals,
                                                     const AdmmConfig& cfg,
                                                     const SplitContext& ctx, double delta,
                                                     double theta_scale = 1.0);

struct SplitFapResult {
  std::vector<double> a;  // clamped to [0, 1]
  SplitDualState duals;
  std::vector<AdmmIteration> trace;
  int sweeps = 0;
  bool converged = false;
  double max_violation = 0.0;
};

SplitFapResult admm_split_fap(int f, std::span<const double> a_init, const SplitContext& ctx,
                              const AdmmConfig& cfg = {});

struct SplitAllResult {
  SplitMatrix split;
  std::vector<SplitFapResult> per_fap;
};

// Every FAP is solved independently from its own row of a_init.
SplitAllResult admm_split_all(const SplitMatrix& a_init, const SplitContext& ctx,
                              const AdmmConfig& cfg = {});

}  // namespace fran
