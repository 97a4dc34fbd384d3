#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "fran/assign_mckp.h"
#include "fran/netmodel.h"
#include "fran/power_admm.h"
#include "fran/types.h"

namespace fran {

enum class AssignMethod { kHungarian, kMckp, kVoronoi };
enum class PowerMethod { kAdmm, kUniformScaleback };
enum class SplitMethod { kAdmm, kFixed };
enum class Access { kNoma, kOma };
enum class UtilityKind { kSumRate, kWeightedSumRate };

inline constexpr double kInitialSplitRatio = 0.25;

struct SchemeSpec {
  AssignMethod assign = AssignMethod::kHungarian;
  PowerMethod power = PowerMethod::kAdmm;
  SplitMethod split = SplitMethod::kAdmm;
  // Fixed ratio for FPS schemes and starting point for PS schemes.
  double initial_split = kInitialSplitRatio;
  Access access = Access::kNoma;
  UtilityKind utility = UtilityKind::kWeightedSumRate;

  void validate() const;
  // Short label such as K-PA-PS, V-PU-FPS or OMA-H-PA, with a /SR suffix
  // under the sum-rate utility.
  std::string name() const;
  // Parses a label produced by name(); a /SR suffix overrides utility.
  static SchemeSpec parse(const std::string& label,
                          UtilityKind utility = UtilityKind::kWeightedSumRate);
};

struct OrchestratorConfig {
  double epsilon = 1e-3;  // relative utility gain that continues the outer loop
  int max_outer_iters = 10;
  AdmmConfig power_admm;
  AdmmConfig split_admm;
  AuctionOptions auction;
  // Relative slack accepted on budgets and fronthaul capacities.
  double feasibility_tol = 1e-6;
};

struct AllocationResult {
  Assignment assignment;
  PowerMatrix powers;
  SplitMatrix split;
  std::vector<double> user_rates;
  double utility = 0.0;  // Theta under the scheme's weights
  double sum_rate = 0.0;
  double jain = 0.0;
  bool jain_degenerate = false;
  std::vector<double> loads;
  int outer_iters = 0;
  bool rolled_back = false;
  bool power_feasible = false;
  bool fronthaul_feasible = false;
  double max_fronthaul_violation = 0.0;  // max_f (psi_f - C_f)^+ / C_f
  std::vector<double> utility_trace;     // Theta after every outer iteration
  int restore_passes = 0;                // scale-back passes applied at the end
  int auction_rounds = 0;
  // Outer iterations whose auction hit its round cap and used the
  // Hungarian assignment instead.
  int auction_fallbacks = 0;
};

struct JainResult {
  double value = 0.0;
  bool degenerate = false;  // all rates zero, value set to 1/U
};

JainResult jain_index(std::span<const double> rates);

// Exponential moving average of per-user rates with window tau.
struct PfState {
  std::vector<double> avg_rates;
  double tau = 50.0;
};

inline constexpr double kPfRateFloor = 1e-3;  // bps

// alpha_u = 1 / max(avg_u, floor).
std::vector<double> pf_weights(const PfState& state);

// avg <- (1 - 1/tau) avg + (1/tau) rates; returns the weights for the next
// realization.
std::vector<double> update_pf_weights(PfState& state, std::span<const double> rates);

// Starting averages: every user served by its closest FAP with unit
// small-scale fading, uniform power and a = 0.25. A FAP's 2R slots are shared
// evenly by the users it is closest to.
PfState init_pf_state(const NetworkScenario& scenario, const NetworkConfig& config, double tau);

// Two distinct users of FAP f's own cell per RB, drawn independently per RB;
// the lower-gain user is the weak one.
Assignment voronoi_assign(const NetworkScenario& scenario, std::mt19937_64& rng);

// Starts from P_f / R on every RB and shrinks the row of each overloaded FAP
// by a common factor so that psi_f lands in [C_f (1 - 1e-4), C_f]. Passes
// repeat with a widening margin (capped at 1e-2) since shrinking one FAP
// raises the others' loads.
PowerMatrix uniform_power_scaleback(const Assignment& assignment, const SplitMatrix& split,
                                    const ChannelTensor& channels, const NetworkConfig& config);

// Scales rows of overloaded FAPs (budget first, then fronthaul by bisection)
// until every FAP is within tolerance. Lowering one FAP's power raises the
// others' loads, so passes repeat; returns the number of passes used.
int restore_feasibility(PowerMatrix& powers, const Assignment& assignment,
                        const SplitMatrix& split, const ChannelTensor& channels,
                        const NetworkConfig& config, double tol = 1e-6);

// Fills rates, utility, Jain index, loads and feasibility flags.
void evaluate_allocation(AllocationResult& result, const ChannelTensor& channels,
                         std::span<const double> weights, const NetworkConfig& config,
                         double tol = 1e-6);

// Assignment, power and split stages repeated until the utility gain drops
// below epsilon. A decreasing step is rolled back and ends the loop. Weights
// are ignored under the sum-rate utility. rng is used only by the Voronoi
// assignment.
AllocationResult run_joint(const NetworkScenario& scenario, const SchemeSpec& scheme,
                           std::span<const double> weights, const NetworkConfig& config,
                           const OrchestratorConfig& orch, std::mt19937_64& rng);

// One user per RB at full RB power, assigned by the per-RB Hungarian solve,
// followed by ADMM power allocation. Runs through run_joint's outer loop.
AllocationResult oma_allocate(const NetworkScenario& scenario, std::span<const double> weights,
                              const NetworkConfig& config, const OrchestratorConfig& orch,
                              UtilityKind utility = UtilityKind::kWeightedSumRate);

}  // namespace fran
