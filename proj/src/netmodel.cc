#include "fran/netmodel.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace fran {
namespace {

bool inside_hexagon(double x, double y, double apothem) {
  for (int k = 0; k < 3; ++k) {
    const double angle = k * std::numbers::pi / 3.0;
    if (std::abs(x * std::cos(angle) + y * std::sin(angle)) > apothem) return false;
  }
  return true;
}

// Uniform point in the hexagonal cell of the given apothem; flat sides face
// the neighbouring FAPs at 0, 60, ..., 300 degrees.
Point sample_hexagon(double apothem, std::mt19937_64& rng) {
  const double circumradius = 2.0 * apothem / std::numbers::sqrt3;
  std::uniform_real_distribution<double> ux(-apothem, apothem);
  std::uniform_real_distribution<double> uy(-circumradius, circumradius);
  while (true) {
    const double x = ux(rng);
    const double y = uy(rng);
    if (inside_hexagon(x, y, apothem)) return {x, y};
  }
}

double norm(double dx, double dy) { return std::hypot(dx, dy); }

}  // namespace

double NetworkScenario::distance(int f, int u) const {
  const Point& a = fap_positions.at(static_cast<std::size_t>(f));
  const Point& b = user_positions.at(static_cast<std::size_t>(u));
  double best = std::numeric_limits<double>::infinity();
  for (const Point& s : cluster_shifts) {
    best = std::min(best, norm(b.x - a.x - s.x, b.y - a.y - s.y));
  }
  return best;
}

double NetworkScenario::fap_distance(int f, int g) const {
  const Point& a = fap_positions.at(static_cast<std::size_t>(f));
  const Point& b = fap_positions.at(static_cast<std::size_t>(g));
  double best = std::numeric_limits<double>::infinity();
  for (const Point& s : cluster_shifts) {
    best = std::min(best, norm(b.x - a.x - s.x, b.y - a.y - s.y));
  }
  return best;
}

int NetworkScenario::closest_fap(int u) const {
  int best = 0;
  double best_d = distance(0, u);
  for (int f = 1; f < num_faps(); ++f) {
    const double d = distance(f, u);
    if (d < best_d) {
      best_d = d;
      best = f;
    }
  }
  return best;
}

std::vector<int> NetworkScenario::cell_members(int f) const {
  std::vector<int> members;
  for (int u = 0; u < num_users(); ++u) {
    if (home_fap[static_cast<std::size_t>(u)] == f) members.push_back(u);
  }
  return members;
}

NetworkScenario build_topology(const NetworkConfig& config, std::mt19937_64& rng) {
  config.validate();
  const double d = config.inter_fap_distance_m;
  NetworkScenario sc;
  sc.cluster_shifts.push_back({0.0, 0.0});
  if (config.num_faps == 7) {
    sc.fap_positions.push_back({0.0, 0.0});
    for (int k = 0; k < 6; ++k) {
      const double angle = k * std::numbers::pi / 3.0;
      sc.fap_positions.push_back({d * std::cos(angle), d * std::sin(angle)});
    }
    // The 7-cell cluster tiles the plane with period 2 a1 + a2 (and its
    // 60-degree rotations), where a1, a2 are the FAP lattice vectors.
    const double sx = 2.5 * d;
    const double sy = 0.5 * std::numbers::sqrt3 * d;
    for (int k = 0; k < 6; ++k) {
      const double angle = k * std::numbers::pi / 3.0;
      const double c = std::cos(angle);
      const double s = std::sin(angle);
      sc.cluster_shifts.push_back({c * sx - s * sy, s * sx + c * sy});
    }
  } else if (config.num_faps >= 1 && config.num_faps <= 3) {
    for (int f = 0; f < config.num_faps; ++f) sc.fap_positions.push_back({f * d, 0.0});
  } else {
    throw std::invalid_argument("build_topology: supported FAP counts are 1, 2, 3 and 7");
  }

  const double apothem = 0.5 * d;
  for (int f = 0; f < config.num_faps; ++f) {
    const Point& c = sc.fap_positions[static_cast<std::size_t>(f)];
    for (int i = 0; i < config.users_per_fap; ++i) {
      const Point p = sample_hexagon(apothem, rng);
      sc.user_positions.push_back({c.x + p.x, c.y + p.y});
      sc.home_fap.push_back(f);
    }
  }
  return sc;
}

double path_loss_db(double distance_m, double carrier_freq_ghz) {
  if (!(distance_m > 0.0) || !(carrier_freq_ghz > 0.0)) {
    throw std::invalid_argument("path_loss_db: distance and frequency must be positive");
  }
  return 36.7 * std::log10(distance_m) + 22.8 + 20.0 * std::log10(carrier_freq_ghz);
}

ChannelTensor draw_channels(const NetworkScenario& scenario, const NetworkConfig& config,
                            std::mt19937_64& rng) {
  const int faps = scenario.num_faps();
  const int users = scenario.num_users();
  ChannelTensor h(faps, config.num_rbs, users);
  std::exponential_distribution<double> fading(1.0);
  for (int f = 0; f < faps; ++f) {
    for (int u = 0; u < users; ++u) {
      const double mean_gain =
          std::pow(10.0, -path_loss_db(std::max(scenario.distance(f, u), kMinDistanceM),
                                    config.carrier_freq_ghz) /
                           10.0);
      for (int r = 0; r < config.num_rbs; ++r) {
        const double g = config.rayleigh_fading ? fading(rng) : 1.0;
        // An exponential draw of exactly zero would break the positivity
        // invariant; it has probability ~2^-53 per draw.
        h(f, r, u) = mean_gain * std::max(g, std::numeric_limits<double>::min());
      }
    }
  }
  return h;
}

NetworkScenario make_scenario(const NetworkConfig& config, std::mt19937_64& rng) {
  NetworkScenario sc = build_topology(config, rng);
  sc.channels = draw_channels(sc, config, rng);
  return sc;
}

LinkBudget LinkBudget::from(const NetworkConfig& config) {
  return {config.rb_bandwidth_hz(), config.noise_power_w(), config.sic_imperfection};
}

double inter_fap_interference(std::span<const double> p_r, int f, int r, int u,
                              const ChannelTensor& channels) {
  const auto h = channels.gains(r, u);
  double sum = 0.0;
  for (std::size_t g = 0; g < h.size(); ++g) {
    if (static_cast<int>(g) != f) sum += p_r[g] * h[g];
  }
  return sum;
}

namespace {

double shannon(double bandwidth, double sinr) {
  return bandwidth * std::log1p(sinr) / std::numbers::ln2;
}

}  // namespace

double rate_strong(std::span<const double> p_r, double a, int f, int r, int u,
                   const ChannelTensor& channels, const LinkBudget& link) {
  const double ph = p_r[static_cast<std::size_t>(f)] * channels(f, r, u);
  const double useful = a * ph;
  const double denom = inter_fap_interference(p_r, f, r, u, channels) + link.noise_power_w;
  return shannon(link.rb_bandwidth_hz, useful / denom);
}

double rate_weak(std::span<const double> p_r, double a, int f, int r, int u,
                 const ChannelTensor& channels, const LinkBudget& link) {
  const double ph = p_r[static_cast<std::size_t>(f)] * channels(f, r, u);
  const double denom = inter_fap_interference(p_r, f, r, u, channels) + a * ph + link.noise_power_w;
  return shannon(link.rb_bandwidth_hz, (1.0 - a) * ph / denom);
}

double rate_general(std::span<const double> p_r, double a, bool strong, bool weak, int f, int r,
                    int u, const ChannelTensor& channels, const LinkBudget& link) {
  if (strong && weak) throw std::invalid_argument("rate_general: user cannot be strong and weak");
  if (!strong && !weak) return 0.0;
  const double ph = p_r[static_cast<std::size_t>(f)] * channels(f, r, u);
  const double inter = inter_fap_interference(p_r, f, r, u, channels);
  double useful, interference;
  if (strong) {
    useful = a * ph;
    interference = inter + link.sic_imperfection * (1.0 - a) * ph;
  } else {
    useful = (1.0 - a) * ph;
    interference = inter + a * ph;
  }
  return shannon(link.rb_bandwidth_hz, useful / (interference + link.noise_power_w));
}

double fap_load(int f, const Assignment& assignment, const PowerMatrix& powers,
                const SplitMatrix& split, const ChannelTensor& channels, const LinkBudget& link) {
  double load = 0.0;
  for (int r = 0; r < assignment.rbs(); ++r) {
    const auto p_r = powers.column(r);
    const double a = split(f, r);
    const int s = assignment.strong_user(f, r);
    const int w = assignment.weak_user(f, r);
    if (s != kNoUser) load += rate_strong(p_r, a, f, r, s, channels, link);
    if (w != kNoUser) load += rate_weak(p_r, a, f, r, w, channels, link);
  }
  return load;
}

std::vector<double> fap_loads(const Assignment& assignment, const PowerMatrix& powers,
                              const SplitMatrix& split, const ChannelTensor& channels,
                              const LinkBudget& link) {
  std::vector<double> loads(static_cast<std::size_t>(assignment.faps()));
  for (int f = 0; f < assignment.faps(); ++f) {
    loads[static_cast<std::size_t>(f)] = fap_load(f, assignment, powers, split, channels, link);
  }
  return loads;
}

std::vector<double> user_rates(const Assignment& assignment, const PowerMatrix& powers,
                               const SplitMatrix& split, const ChannelTensor& channels,
                               const LinkBudget& link) {
  std::vector<double> rates(static_cast<std::size_t>(channels.users()), 0.0);
  for (int r = 0; r < assignment.rbs(); ++r) {
    const auto p_r = powers.column(r);
    for (int f = 0; f < assignment.faps(); ++f) {
      const double a = split(f, r);
      const int s = assignment.strong_user(f, r);
      const int w = assignment.weak_user(f, r);
      if (s != kNoUser) {
        rates[static_cast<std::size_t>(s)] += rate_general(p_r, a, true, false, f, r, s, channels, link);
      }
      if (w != kNoUser) {
        rates[static_cast<std::size_t>(w)] += rate_general(p_r, a, false, true, f, r, w, channels, link);
      }
    }
  }
  return rates;
}

double utility(const Assignment& assignment, const PowerMatrix& powers, const SplitMatrix& split,
               const ChannelTensor& channels, std::span<const double> weights,
               const LinkBudget& link) {
  double total = 0.0;
  for (int r = 0; r < assignment.rbs(); ++r) {
    const auto p_r = powers.column(r);
    for (int f = 0; f < assignment.faps(); ++f) {
      const double a = split(f, r);
      const int s = assignment.strong_user(f, r);
      const int w = assignment.weak_user(f, r);
      if (s != kNoUser) {
        total += weights[static_cast<std::size_t>(s)] * rate_strong(p_r, a, f, r, s, channels, link);
      }
      if (w != kNoUser) {
        total += weights[static_cast<std::size_t>(w)] * rate_weak(p_r, a, f, r, w, channels, link);
      }
    }
  }
  return total;
}

PowerMatrix uniform_powers(const NetworkConfig& config) {
  PowerMatrix p(config.num_faps, config.num_rbs);
  for (int f = 0; f < config.num_faps; ++f) {
    for (int r = 0; r < config.num_rbs; ++r) p(f, r) = config.power_budget_w(f) / config.num_rbs;
  }
  return p;
}

}  // namespace fran
