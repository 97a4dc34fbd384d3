#pragma once

// Randomized invariant suites. Each returns how many cases ran and how many
// broke the property, so the unit tests and the acceptance binary can share
// them.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "fran/assign_hungarian.h"
#include "fran/assign_mckp.h"
#include "fran/harness.h"
#include "fran/orchestrator.h"
#include "oracles.h"

namespace fran::props {

struct Outcome {
  std::string name;
  int cases = 0;
  int failures = 0;
  std::string first_failure;

  void check(bool ok, const std::string& what) {
    ++cases;
    if (!ok) {
      if (failures == 0) first_failure = what;
      ++failures;
    }
  }
};

struct AuctionCase {
  ChannelTensor h;
  PowerMatrix p;
  SplitMatrix a;
  std::vector<double> w;
  std::vector<double> cap;
  LinkBudget link{5e6, 5e6 * 3.98e-21, 0.0};
};

inline AuctionCase random_auction_case(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int faps = 1 + static_cast<int>(rng() % 3);
  const int users = 2 * faps + static_cast<int>(rng() % 4);
  const int rbs = 1 + static_cast<int>(rng() % 2);
  AuctionCase c{ChannelTensor(faps, rbs, users), PowerMatrix(faps, rbs), SplitMatrix(faps, rbs),
                {}, {}};
  for (int f = 0; f < faps; ++f) {
    for (int r = 0; r < rbs; ++r) {
      c.p(f, r) = 1.0 + 10.0 * u01(rng);
      c.a(f, r) = 0.05 + 0.9 * u01(rng);
      for (int u = 0; u < users; ++u) c.h(f, r, u) = 1e-13 * std::pow(10.0, 3.0 * u01(rng));
    }
    c.cap.push_back(2e7 + 1.5e8 * u01(rng));
  }
  for (int u = 0; u < users; ++u) c.w.push_back(1e-7 * (0.2 + u01(rng)));
  return c;
}

// Hungarian and auction outputs obey the assignment invariants: every slot
// filled by a distinct user per RB, roles ordered by gain.
inline Outcome assignment_invariants(std::uint64_t seed, int n) {
  Outcome out{"assignment invariants", 0, 0, {}};
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n; ++i) {
    if (i % 2 == 0) {
      const int faps = 1 + i % 3;
      const auto in = oracle::random_rate_instance(faps, 2 * faps + i % 4, 1 + i % 3, rng);
      const Assignment asg = assign_all_rbs(in.h, in.p, in.a, in.w, in.link);
      const auto v = assignment_violations(asg, in.h);
      out.check(v.empty(), "hungarian case " + std::to_string(i) + ": " + (v.empty() ? "" : v[0]));
    } else {
      const AuctionCase c = random_auction_case(rng);
      try {
        const AuctionResult res = auction_assign(c.h, c.p, c.a, c.w, c.cap, c.link);
        const auto v = assignment_violations(res.assignment, c.h);
        out.check(v.empty(), "auction case " + std::to_string(i) + ": " + (v.empty() ? "" : v[0]));
      } catch (const AuctionError&) {
        out.check(true, "");  // termination is covered by its own suite
      } catch (const MckpInfeasible&) {
        out.check(true, "");
      }
    }
  }
  return out;
}

inline Outcome jain_bounds(std::uint64_t seed, int n) {
  Outcome out{"jain bounds", 0, 0, {}};
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> e(1.0);
  for (int i = 0; i < n; ++i) {
    std::vector<double> r(1 + rng() % 40);
    for (double& x : r) {
      const int kind = static_cast<int>(rng() % 4);
      x = kind == 0 ? 0.0 : kind == 1 ? 1e8 * e(rng) : e(rng) * e(rng) * e(rng);
    }
    const double j = jain_index(r).value;
    out.check(j >= 1.0 / r.size() - 1e-12 && j <= 1.0 + 1e-12,
              "jain case " + std::to_string(i) + " value " + std::to_string(j));
  }
  return out;
}

// Agglomeration never lowers a price and hands each user to the top bidder
// when it beats the standing price; auction traces never lower the top price.
inline Outcome price_monotonicity(std::uint64_t seed, int n) {
  Outcome out{"price monotonicity", 0, 0, {}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    if (i % 4 != 3) {
      const int rbs = 1 + static_cast<int>(rng() % 3), users = 2 + static_cast<int>(rng() % 6);
      PriceBoard board(rbs, users);
      for (int r = 0; r < rbs; ++r) {
        for (int u = 0; u < users; ++u) {
          if (rng() % 2) board.set(r, u, 10.0 * u01(rng), static_cast<int>(rng() % 4));
        }
      }
      const PriceBoard before = board;
      std::vector<FapBid> bids;
      const int nb = static_cast<int>(rng() % 12);
      for (int b = 0; b < nb; ++b) {
        bids.push_back({static_cast<int>(rng() % 4), static_cast<int>(rng() % rbs),
                        static_cast<int>(rng() % users), 12.0 * u01(rng)});
      }
      agglomerate_prices(board, bids);
      bool ok = true;
      for (int r = 0; r < rbs; ++r) {
        for (int u = 0; u < users; ++u) {
          if (board.price(r, u) < before.price(r, u)) ok = false;
          double top = -1.0;
          for (const FapBid& b : bids) {
            if (b.rb == r && b.user == u) top = std::max(top, b.amount);
          }
          if (top > before.price(r, u) && board.price(r, u) != top) ok = false;
        }
      }
      out.check(ok, "agglomerate case " + std::to_string(i));
    } else {
      const AuctionCase c = random_auction_case(rng);
      try {
        const AuctionResult res = auction_assign(c.h, c.p, c.a, c.w, c.cap, c.link);
        bool ok = true;
        for (std::size_t k = 1; k < res.trace.size(); ++k) {
          if (res.trace[k].max_price < res.trace[k - 1].max_price) ok = false;
        }
        out.check(ok, "auction trace case " + std::to_string(i));
      } catch (const AuctionError& e) {
        bool ok = true;
        for (std::size_t k = 1; k < e.trace().size(); ++k) {
          if (e.trace()[k].max_price < e.trace()[k - 1].max_price) ok = false;
        }
        out.check(ok, "auction trace case " + std::to_string(i));
      } catch (const MckpInfeasible&) {
        out.check(true, "");
      }
    }
  }
  return out;
}

// The auction either converges inside its round cap with every FAP within
// its fronthaul capacity, or reports the cap; it never runs on.
inline Outcome auction_termination(std::uint64_t seed, int n) {
  Outcome out{"auction termination", 0, 0, {}};
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n; ++i) {
    const AuctionCase c = random_auction_case(rng);
    const int cap_rounds = 50 * c.h.faps() * c.h.rbs();
    try {
      const AuctionResult res = auction_assign(c.h, c.p, c.a, c.w, c.cap, c.link);
      bool ok = static_cast<int>(res.trace.size()) <= cap_rounds;
      for (int f = 0; f < c.h.faps(); ++f) {
        if (res.fronthaul_usage[f] > c.cap[f] * (1.0 + 1e-9)) ok = false;
      }
      out.check(ok, "auction case " + std::to_string(i));
    } catch (const AuctionError& e) {
      out.check(static_cast<int>(e.trace().size()) <= cap_rounds + 1,
                "auction case " + std::to_string(i) + " overran its cap");
    } catch (const MckpInfeasible&) {
      out.check(true, "");
    }
  }
  return out;
}

// Same inputs give bit-identical outputs: RNG streams, topologies, Voronoi
// draws and full joint allocations.
inline Outcome determinism(std::uint64_t seed, int n) {
  Outcome out{"determinism", 0, 0, {}};
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n; ++i) {
    const std::uint64_t s = rng();
    const int kind = i % 3;
    if (kind == 0) {
      auto a = stream_rng(s, i, Stream::kChannels), b = stream_rng(s, i, Stream::kChannels);
      bool ok = true;
      for (int k = 0; k < 8; ++k) ok = ok && a() == b();
      out.check(ok, "stream case " + std::to_string(i));
    } else {
      NetworkConfig cfg;
      cfg.num_faps = 1 + i % 3;
      cfg.users_per_fap = 2 + i % 2;
      cfg.num_rbs = 1 + i % 2;
      std::mt19937_64 r1(s), r2(s);
      const NetworkScenario a = make_scenario(cfg, r1), b = make_scenario(cfg, r2);
      bool ok = a.channels == b.channels;
      std::vector<double> w(cfg.num_users(), 1e-7);
      const SchemeSpec scheme = SchemeSpec::parse(kind == 1 ? "K-PA-PS" : "V-PU-FPS");
      const AllocationResult x = run_joint(a, scheme, w, cfg, OrchestratorConfig{}, r1);
      const AllocationResult y = run_joint(b, scheme, w, cfg, OrchestratorConfig{}, r2);
      ok = ok && x.assignment == y.assignment && x.powers == y.powers && x.split == y.split &&
           x.utility == y.utility;
      out.check(ok, "joint case " + std::to_string(i));
    }
  }
  return out;
}

inline std::vector<Outcome> all_suites(std::uint64_t seed) {
  return {assignment_invariants(seed, 3000), jain_bounds(seed + 1, 4000),
          price_monotonicity(seed + 2, 2000), auction_termination(seed + 3, 1000),
          determinism(seed + 4, 300)};
}

}  // namespace fran::props
