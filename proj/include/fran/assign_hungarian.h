#pragma once

#include <span>
#include <vector>

#include "fran/netmodel.h"
#include "fran/types.h"

namespace fran {

// Users x slots cost matrix for one RB, row-major. In the NOMA layout slot
// f is FAP f's strong slot and slot F + f its weak slot.
struct CostMatrix {
  int rows = 0;  // users
  int cols = 0;  // slots
  int rb = 0;
  std::vector<double> costs;

  CostMatrix() = default;
  CostMatrix(int rows, int cols, int rb = 0)
      : rows(rows), cols(cols), rb(rb), costs(static_cast<std::size_t>(rows) * cols, 0.0) {}

  double& at(int row, int col) { return costs[static_cast<std::size_t>(row) * cols + col]; }
  double at(int row, int col) const { return costs[static_cast<std::size_t>(row) * cols + col]; }
};

struct SlotMatching {
  std::vector<int> slot_to_user;
  double total_cost = 0.0;
};

// Minimum-cost matching of every column to a distinct row (Kuhn-Munkres with
// potentials, O(cols^2 rows)). Throws std::invalid_argument when there are
// fewer rows than columns or an entry is not finite.
SlotMatching hungarian_solve(const CostMatrix& cost);

// cost(u, f) = -alpha_u C^s_fru, cost(u, F + f) = -alpha_u C^w_fru.
CostMatrix build_cost_matrix(int r, const ChannelTensor& channels, const PowerMatrix& powers,
                             const SplitMatrix& split, std::span<const double> weights,
                             const LinkBudget& link);

enum class RoleRepair {
  kSwapByGain,  // swap strong/weak when the weak slot got the larger h_fru
  kNone,
};

// Solves every RB independently; the fronthaul constraint is not enforced.
Assignment assign_all_rbs(const ChannelTensor& channels, const PowerMatrix& powers,
                          const SplitMatrix& split, std::span<const double> weights,
                          const LinkBudget& link, RoleRepair repair = RoleRepair::kSwapByGain);

// Single-user (OMA) variant: U x F costs -alpha_u C_fru with the whole RB
// power given to the one user. Weak slots are left empty.
CostMatrix build_single_user_cost_matrix(int r, const ChannelTensor& channels,
                                         const PowerMatrix& powers,
                                         std::span<const double> weights, const LinkBudget& link);

Assignment assign_single_user(const ChannelTensor& channels, const PowerMatrix& powers,
                              std::span<const double> weights, const LinkBudget& link);

}  // namespace fran
