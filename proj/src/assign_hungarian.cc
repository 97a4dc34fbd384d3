#include "fran/assign_hungarian.h"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace fran {

SlotMatching hungarian_solve(const CostMatrix& cost) {
  if (cost.cols < 1 || cost.rows < cost.cols) {
    throw std::invalid_argument("hungarian_solve: need at least as many rows as columns");
  }
  for (double c : cost.costs) {
    if (!std::isfinite(c)) throw std::invalid_argument("hungarian_solve: non-finite cost");
  }
  // Columns (slots) play the role of agents and rows (users) of tasks so that
  // agents <= tasks; indices are 1-based with 0 as the sentinel.
  const int n = cost.cols;
  const int m = cost.rows;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> pot_agent(n + 1, 0.0);
  std::vector<double> pot_task(m + 1, 0.0);
  std::vector<int> owner(m + 1, 0);
  std::vector<int> way(m + 1, 0);

  for (int i = 1; i <= n; ++i) {
    owner[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = owner[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost.at(j - 1, i0 - 1) - pot_agent[i0] - pot_task[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          pot_agent[owner[j]] += delta;
          pot_task[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const int j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  SlotMatching out;
  out.slot_to_user.assign(n, kNoUser);
  for (int j = 1; j <= m; ++j) {
    const int agent = owner[j];
    if (agent != 0) out.slot_to_user[agent - 1] = j - 1;
  }
  for (int slot = 0; slot < n; ++slot) {
    out.total_cost += cost.at(out.slot_to_user[slot], slot);
  }
  return out;
}

CostMatrix build_cost_matrix(int r, const ChannelTensor& channels, const PowerMatrix& powers,
                             const SplitMatrix& split, std::span<const double> weights,
                             const LinkBudget& link) {
  const int faps = channels.faps();
  const int users = channels.users();
  CostMatrix k(users, 2 * faps, r);
  const auto p_r = powers.column(r);
  for (int u = 0; u < users; ++u) {
    const double alpha = weights[u];
    for (int f = 0; f < faps; ++f) {
      const double a = split(f, r);
      k.at(u, f) = -alpha * rate_strong(p_r, a, f, r, u, channels, link);
      k.at(u, faps + f) = -alpha * rate_weak(p_r, a, f, r, u, channels, link);
    }
  }
  return k;
}

Assignment assign_all_rbs(const ChannelTensor& channels, const PowerMatrix& powers,
                          const SplitMatrix& split, std::span<const double> weights,
                          const LinkBudget& link, RoleRepair repair) {
  const int faps = channels.faps();
  if (channels.users() < 2 * faps) {
    throw std::invalid_argument("assign_all_rbs: need at least 2F users");
  }
  Assignment out(faps, channels.rbs());
  for (int r = 0; r < channels.rbs(); ++r) {
    const SlotMatching m =
        hungarian_solve(build_cost_matrix(r, channels, powers, split, weights, link));
    for (int f = 0; f < faps; ++f) {
      int s = m.slot_to_user[f];
      int w = m.slot_to_user[faps + f];
      if (repair == RoleRepair::kSwapByGain && channels(f, r, s) < channels(f, r, w)) {
        std::swap(s, w);
      }
      out.set_pair(f, r, s, w);
    }
  }
  return out;
}

CostMatrix build_single_user_cost_matrix(int r, const ChannelTensor& channels,
                                         const PowerMatrix& powers,
                                         std::span<const double> weights, const LinkBudget& link) {
  const int faps = channels.faps();
  const int users = channels.users();
  CostMatrix k(users, faps, r);
  const auto p_r = powers.column(r);
  for (int u = 0; u < users; ++u) {
    for (int f = 0; f < faps; ++f) {
      k.at(u, f) = -weights[u] * rate_strong(p_r, 1.0, f, r, u, channels, link);
    }
  }
  return k;
}

Assignment assign_single_user(const ChannelTensor& channels, const PowerMatrix& powers,
                              std::span<const double> weights, const LinkBudget& link) {
  const int faps = channels.faps();
  if (channels.users() < faps) {
    throw std::invalid_argument("assign_single_user: need at least F users");
  }
  Assignment out(faps, channels.rbs());
  for (int r = 0; r < channels.rbs(); ++r) {
    const SlotMatching m =
        hungarian_solve(build_single_user_cost_matrix(r, channels, powers, weights, link));
    for (int f = 0; f < faps; ++f) out.set_pair(f, r, m.slot_to_user[f], kNoUser);
  }
  return out;
}

}  // namespace fran
