#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fran/netmodel.h"
#include "fran/types.h"

namespace fran {

// C^s and C^w of every (f, r, u) for fixed powers and split ratios.
class RateTable {
 public:
  RateTable(const ChannelTensor& channels, const PowerMatrix& powers, const SplitMatrix& split,
            const LinkBudget& link);

  double strong(int f, int r, int u) const { return strong_[index(f, r, u)]; }
  double weak(int f, int r, int u) const { return weak_[index(f, r, u)]; }
  int faps() const { return faps_; }
  int rbs() const { return rbs_; }
  int users() const { return users_; }

 private:
  std::size_t index(int f, int r, int u) const {
    return (static_cast<std::size_t>(r) * users_ + u) * faps_ + f;
  }

  int faps_ = 0;
  int rbs_ = 0;
  int users_ = 0;
  std::vector<double> strong_;
  std::vector<double> weak_;
};

struct PairItem {
  int strong_user = kNoUser;
  int weak_user = kNoUser;
  double profit = 0.0;  // weighted utility minus current prices
  double weight = 0.0;  // fronthaul usage C^s + C^w
};

struct PairClass {
  int fap = 0;
  int rb = 0;
  std::vector<PairItem> items;
};

// Absolute per-(RB, user) prices and the FAP currently holding each user.
class PriceBoard {
 public:
  PriceBoard() = default;
  PriceBoard(int rbs, int users)
      : users_(users),
        prices_(static_cast<std::size_t>(rbs) * users, 0.0),
        holders_(static_cast<std::size_t>(rbs) * users, -1) {}

  double price(int r, int u) const { return prices_[index(r, u)]; }
  int holder(int r, int u) const { return holders_[index(r, u)]; }
  void set(int r, int u, double price, int holder) {
    prices_[index(r, u)] = price;
    holders_[index(r, u)] = holder;
  }
  void release(int r, int u) { holders_[index(r, u)] = -1; }
  std::span<const double> prices() const { return prices_; }

 private:
  std::size_t index(int r, int u) const { return static_cast<std::size_t>(r) * users_ + u; }

  int users_ = 0;
  std::vector<double> prices_;
  std::vector<int> holders_;
};

// All C(U, 2) user pairs for FAP f on RB r. The user with the larger h_fru
// (lower index on ties) is the strong one.
PairClass enumerate_pairs(int f, int r, const RateTable& rates, const ChannelTensor& channels,
                          std::span<const double> weights, const PriceBoard& prices);

PairClass enumerate_pairs(int f, int r, const ChannelTensor& channels, const PowerMatrix& powers,
                          const SplitMatrix& split, std::span<const double> weights,
                          const PriceBoard& prices, const LinkBudget& link);

// Indices of the LP-extreme items ordered by increasing weight: dominated and
// LP-dominated items removed, so weights and profits strictly increase and
// incremental efficiencies strictly decrease along the result.
std::vector<int> lp_extreme(std::span<const PairItem> items);

class MckpInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MckpSolution {
  std::vector<int> chosen;  // item index into each class's items
  double profit = 0.0;
  double weight = 0.0;
  // LP relaxation value: integer profit plus the fractional part of the
  // first increment that did not fit.
  double lp_bound = 0.0;
  int split_class = -1;
  double split_fraction = 0.0;
  double split_profit_gap = 0.0;
};

// Greedy for the multiple-choice knapsack: start from the lightest LP-extreme
// item of every class and add incremental items by decreasing efficiency
// until the first one that no longer fits. Items that cannot fit even with
// the lightest choice elsewhere are pruned first. Throws MckpInfeasible if
// the lightest items already exceed the capacity.
MckpSolution mckp_greedy(std::span<const PairClass> classes, double capacity);

// old price + (best - second best) / 2 + eta, with a negative gap clamped to 0.
double bid_amount(double old_price, double best_profit, double second_profit, double eta);

struct FapBid {
  int fap = 0;
  int rb = 0;
  int user = 0;
  double amount = 0.0;
};

// Which pair sets the second-best utility in a bid.
enum class RunnerUp {
  kAnyPair,     // best other pair in the class
  kAffordable,  // best other pair no heavier than the chosen one
  kPerUser,     // per bid user: best pair without that user, no heavier than the chosen one
};

// Bids of FAP f for both users of every chosen pair, priced from the current
// board. A class without a runner-up bids eta only.
std::vector<FapBid> bid_prices(int f, const MckpSolution& solution,
                               std::span<const PairClass> classes, const PriceBoard& board,
                               double eta, RunnerUp runner_up = RunnerUp::kPerUser);

// Raises every bid-on price to the highest bid and hands the user to the
// highest bidder. The standing holder competes with its current price; ties
// go to the lowest FAP index.
void agglomerate_prices(PriceBoard& board, std::span<const FapBid> bids);

struct AuctionOptions {
  double eta_scale = 1e-6;  // eta = eta_scale * median |class profit|
  int max_rounds = 0;       // 0 selects 50 F R
  RunnerUp runner_up = RunnerUp::kPerUser;
};

struct AuctionRound {
  int bidders = 0;
  int losers = 0;
  double max_price = 0.0;
};

struct AuctionResult {
  Assignment assignment;
  std::vector<double> fronthaul_usage;  // per FAP, sum of chosen pair weights
  std::vector<AuctionRound> trace;
  double eta = 0.0;
};

class AuctionError : public std::runtime_error {
 public:
  AuctionError(const std::string& what, std::vector<AuctionRound> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<AuctionRound>& trace() const { return trace_; }

 private:
  std::vector<AuctionRound> trace_;
};

AuctionResult auction_assign(const ChannelTensor& channels, const PowerMatrix& powers,
                             const SplitMatrix& split, std::span<const double> weights,
                             std::span<const double> capacities, const LinkBudget& link,
                             const AuctionOptions& options = {});

}  // namespace fran
