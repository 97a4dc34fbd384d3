#include "fran/assign_mckp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace fran {

RateTable::RateTable(const ChannelTensor& channels, const PowerMatrix& powers,
                     const SplitMatrix& split, const LinkBudget& link)
    : faps_(channels.faps()),
      rbs_(channels.rbs()),
      users_(channels.users()),
      strong_(channels.values().size()),
      weak_(channels.values().size()) {
  for (int r = 0; r < rbs_; ++r) {
    const auto p_r = powers.column(r);
    for (int u = 0; u < users_; ++u) {
      for (int f = 0; f < faps_; ++f) {
        const double a = split(f, r);
        strong_[index(f, r, u)] = rate_strong(p_r, a, f, r, u, channels, link);
        weak_[index(f, r, u)] = rate_weak(p_r, a, f, r, u, channels, link);
      }
    }
  }
}

PairClass enumerate_pairs(int f, int r, const RateTable& rates, const ChannelTensor& channels,
                          std::span<const double> weights, const PriceBoard& prices) {
  const int users = channels.users();
  PairClass out;
  out.fap = f;
  out.rb = r;
  out.items.reserve(static_cast<std::size_t>(users) * (users - 1) / 2);
  for (int u1 = 0; u1 < users; ++u1) {
    for (int u2 = u1 + 1; u2 < users; ++u2) {
      int s = u1;
      int w = u2;
      if (channels(f, r, u2) > channels(f, r, u1)) std::swap(s, w);
      const double cs = rates.strong(f, r, s);
      const double cw = rates.weak(f, r, w);
      PairItem item;
      item.strong_user = s;
      item.weak_user = w;
      item.weight = cs + cw;
      item.profit = weights[s] * cs + weights[w] * cw - prices.price(r, s) - prices.price(r, w);
      out.items.push_back(item);
    }
  }
  return out;
}

PairClass enumerate_pairs(int f, int r, const ChannelTensor& channels, const PowerMatrix& powers,
                          const SplitMatrix& split, std::span<const double> weights,
                          const PriceBoard& prices, const LinkBudget& link) {
  return enumerate_pairs(f, r, RateTable(channels, powers, split, link), channels, weights,
                         prices);
}

std::vector<int> lp_extreme(std::span<const PairItem> items) {
  std::vector<int> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    if (items[i].weight != items[j].weight) return items[i].weight < items[j].weight;
    return items[i].profit > items[j].profit;
  });

  // Drop dominated items: after the sort an item survives only if it is
  // strictly more profitable than every lighter survivor.
  std::vector<int> kept;
  for (int i : order) {
    if (kept.empty() || items[i].profit > items[kept.back()].profit) kept.push_back(i);
  }

  // Upper convex hull: j between i and k is removed when e(k, j) >= e(j, i).
  std::vector<int> hull;
  for (int k : kept) {
    while (hull.size() >= 2) {
      const PairItem& a = items[hull[hull.size() - 2]];
      const PairItem& b = items[hull.back()];
      const PairItem& c = items[k];
      const double lhs = (c.profit - b.profit) * (b.weight - a.weight);
      const double rhs = (b.profit - a.profit) * (c.weight - b.weight);
      if (lhs >= rhs) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(k);
  }
  return hull;
}

MckpSolution mckp_greedy(std::span<const PairClass> classes, double capacity) {
  const int n = static_cast<int>(classes.size());
  std::vector<double> min_weight(n);
  double min_total = 0.0;
  for (int r = 0; r < n; ++r) {
    if (classes[r].items.empty()) throw std::invalid_argument("mckp_greedy: empty class");
    double m = classes[r].items.front().weight;
    for (const PairItem& it : classes[r].items) m = std::min(m, it.weight);
    min_weight[r] = m;
    min_total += m;
  }
  if (min_total > capacity) {
    std::ostringstream os;
    os << "mckp_greedy: lightest items need " << min_total << " > capacity " << capacity;
    throw MckpInfeasible(os.str());
  }

  // LP-extreme frontier of every class after pruning items that cannot fit
  // together with the lightest choice in every other class.
  std::vector<std::vector<int>> frontier(n);
  for (int r = 0; r < n; ++r) {
    const auto& items = classes[r].items;
    const double others = min_total - min_weight[r];
    std::vector<int> idx;
    std::vector<PairItem> pruned;
    for (int i = 0; i < static_cast<int>(items.size()); ++i) {
      if (items[i].weight + others <= capacity) {
        idx.push_back(i);
        pruned.push_back(items[i]);
      }
    }
    for (int j : lp_extreme(pruned)) frontier[r].push_back(idx[j]);
  }

  MckpSolution sol;
  sol.chosen.resize(n);
  for (int r = 0; r < n; ++r) {
    const PairItem& it = classes[r].items[frontier[r][0]];
    sol.chosen[r] = frontier[r][0];
    sol.profit += it.profit;
    sol.weight += it.weight;
  }

  struct Increment {
    int cls;
    int step;
    double dw;
    double dp;
  };
  std::vector<Increment> incs;
  for (int r = 0; r < n; ++r) {
    for (std::size_t k = 1; k < frontier[r].size(); ++k) {
      const PairItem& prev = classes[r].items[frontier[r][k - 1]];
      const PairItem& cur = classes[r].items[frontier[r][k]];
      incs.push_back({r, static_cast<int>(k), cur.weight - prev.weight, cur.profit - prev.profit});
    }
  }
  // Within a class efficiencies strictly decrease, so a stable sort keeps
  // each class's increments in frontier order.
  std::stable_sort(incs.begin(), incs.end(), [](const Increment& x, const Increment& y) {
    return x.dp * y.dw > y.dp * x.dw;
  });

  double residual = capacity - sol.weight;
  sol.lp_bound = sol.profit;
  for (const Increment& inc : incs) {
    if (residual <= 0.0) break;
    if (inc.dw <= residual) {
      residual -= inc.dw;
      sol.chosen[inc.cls] = frontier[inc.cls][inc.step];
      sol.profit += inc.dp;
      sol.weight += inc.dw;
      sol.lp_bound = sol.profit;
    } else {
      sol.split_class = inc.cls;
      sol.split_fraction = residual / inc.dw;
      sol.split_profit_gap = inc.dp;
      sol.lp_bound = sol.profit + sol.split_fraction * inc.dp;
      break;
    }
  }
  return sol;
}

double bid_amount(double old_price, double best_profit, double second_profit, double eta) {
  return old_price + std::max(0.0, best_profit - second_profit) / 2.0 + eta;
}

std::vector<FapBid> bid_prices(int f, const MckpSolution& solution,
                               std::span<const PairClass> classes, const PriceBoard& board,
                               double eta, RunnerUp runner_up) {
  std::vector<FapBid> bids;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto& items = classes[c].items;
    const int best = solution.chosen[c];
    const int r = classes[c].rb;
    for (int u : {items[best].strong_user, items[best].weak_user}) {
      double second = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < static_cast<int>(items.size()); ++i) {
        const PairItem& it = items[i];
        if (i == best) continue;
        if (runner_up != RunnerUp::kAnyPair && it.weight > items[best].weight) continue;
        if (runner_up == RunnerUp::kPerUser && (it.strong_user == u || it.weak_user == u)) continue;
        second = std::max(second, it.profit);
      }
      if (second == -std::numeric_limits<double>::infinity()) second = items[best].profit;
      bids.push_back({f, r, u, bid_amount(board.price(r, u), items[best].profit, second, eta)});
    }
  }
  return bids;
}

void agglomerate_prices(PriceBoard& board, std::span<const FapBid> bids) {
  std::vector<FapBid> sorted(bids.begin(), bids.end());
  std::sort(sorted.begin(), sorted.end(), [](const FapBid& a, const FapBid& b) {
    if (a.rb != b.rb) return a.rb < b.rb;
    return a.user < b.user;
  });
  for (std::size_t i = 0; i < sorted.size();) {
    const int r = sorted[i].rb;
    const int u = sorted[i].user;
    double best = board.price(r, u);
    int winner = board.holder(r, u);
    bool standing = winner >= 0;
    for (; i < sorted.size() && sorted[i].rb == r && sorted[i].user == u; ++i) {
      const FapBid& b = sorted[i];
      const bool beats = !standing || b.amount > best || (b.amount == best && b.fap < winner);
      if (beats) {
        best = b.amount;
        winner = b.fap;
        standing = true;
      }
    }
    board.set(r, u, std::max(best, board.price(r, u)), winner);
  }
}

namespace {

double default_eta(const std::vector<std::vector<PairClass>>& classes, double scale) {
  std::vector<double> mags;
  for (const auto& per_fap : classes) {
    for (const PairClass& c : per_fap) {
      for (const PairItem& it : c.items) mags.push_back(std::abs(it.profit));
    }
  }
  if (mags.empty()) return scale;
  auto mid = mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2);
  std::nth_element(mags.begin(), mid, mags.end());
  const double m = *mid;
  return m > 0.0 ? scale * m : scale;
}

void reprice(PairClass& c, const std::vector<double>& base, const PriceBoard& board) {
  for (std::size_t i = 0; i < c.items.size(); ++i) {
    PairItem& it = c.items[i];
    it.profit = base[i] - board.price(c.rb, it.strong_user) - board.price(c.rb, it.weak_user);
  }
}

}  // namespace

AuctionResult auction_assign(const ChannelTensor& channels, const PowerMatrix& powers,
                             const SplitMatrix& split, std::span<const double> weights,
                             std::span<const double> capacities, const LinkBudget& link,
                             const AuctionOptions& options) {
  const int faps = channels.faps();
  const int rbs = channels.rbs();
  const int users = channels.users();
  if (users < 2 * faps) throw std::invalid_argument("auction_assign: need at least 2F users");
  if (static_cast<int>(capacities.size()) != faps) {
    throw std::invalid_argument("auction_assign: one capacity per FAP required");
  }

  const RateTable rates(channels, powers, split, link);
  PriceBoard board(rbs, users);
  std::vector<std::vector<PairClass>> classes(faps);
  std::vector<std::vector<std::vector<double>>> base(faps);
  for (int f = 0; f < faps; ++f) {
    for (int r = 0; r < rbs; ++r) {
      classes[f].push_back(enumerate_pairs(f, r, rates, channels, weights, board));
      std::vector<double> b;
      for (const PairItem& it : classes[f].back().items) b.push_back(it.profit);
      base[f].push_back(std::move(b));
    }
  }

  AuctionResult result;
  result.eta = default_eta(classes, options.eta_scale);
  const int max_rounds = options.max_rounds > 0 ? options.max_rounds : 50 * faps * rbs;

  std::vector<MckpSolution> selection(faps);
  std::vector<bool> has_selection(faps, false);
  std::vector<int> bidders(faps);
  std::iota(bidders.begin(), bidders.end(), 0);

  while (!bidders.empty()) {
    if (static_cast<int>(result.trace.size()) >= max_rounds) {
      std::ostringstream os;
      os << "auction_assign: no convergence after " << max_rounds << " rounds ("
         << bidders.size() << " FAPs still outbid)";
      throw AuctionError(os.str(), result.trace);
    }
    std::vector<FapBid> bids;
    for (int f : bidders) {
      for (int r = 0; r < rbs; ++r) reprice(classes[f][r], base[f][r], board);
      MckpSolution sol = mckp_greedy(classes[f], capacities[f]);
      if (has_selection[f]) {
        for (int r = 0; r < rbs; ++r) {
          const PairItem& old = classes[f][r].items[selection[f].chosen[r]];
          const PairItem& now = classes[f][r].items[sol.chosen[r]];
          for (int u : {old.strong_user, old.weak_user}) {
            if (u != now.strong_user && u != now.weak_user && board.holder(r, u) == f) {
              board.release(r, u);
            }
          }
        }
      }
      auto fb = bid_prices(f, sol, classes[f], board, result.eta, options.runner_up);
      bids.insert(bids.end(), fb.begin(), fb.end());
      selection[f] = std::move(sol);
      has_selection[f] = true;
    }
    agglomerate_prices(board, bids);

    AuctionRound round;
    round.bidders = static_cast<int>(bidders.size());
    bidders.clear();
    for (int f = 0; f < faps; ++f) {
      bool lost = false;
      for (int r = 0; r < rbs && !lost; ++r) {
        const PairItem& it = classes[f][r].items[selection[f].chosen[r]];
        lost = board.holder(r, it.strong_user) != f || board.holder(r, it.weak_user) != f;
      }
      if (lost) bidders.push_back(f);
    }
    round.losers = static_cast<int>(bidders.size());
    for (double p : board.prices()) round.max_price = std::max(round.max_price, p);
    result.trace.push_back(round);
  }

  result.assignment = Assignment(faps, rbs);
  result.fronthaul_usage.assign(faps, 0.0);
  for (int f = 0; f < faps; ++f) {
    for (int r = 0; r < rbs; ++r) {
      const PairItem& it = classes[f][r].items[selection[f].chosen[r]];
      result.assignment.set_pair(f, r, it.strong_user, it.weak_user);
      result.fronthaul_usage[f] += it.weight;
    }
  }
  return result;
}

}  // namespace fran
