#pragma once

#include <random>
#include <span>
#include <vector>

#include "fran/types.h"

namespace fran {

inline constexpr double kMinDistanceM = 3.0;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct NetworkScenario {
  std::vector<Point> fap_positions;
  std::vector<Point> user_positions;
  // FAP whose cell the user was dropped in (its Voronoi cell).
  std::vector<int> home_fap;
  // Translations of the whole cluster used for wrap-around distances; the
  // first entry is always the zero shift.
  std::vector<Point> cluster_shifts;
  ChannelTensor channels;

  int num_faps() const { return static_cast<int>(fap_positions.size()); }
  int num_users() const { return static_cast<int>(user_positions.size()); }
  // Minimum distance over all cluster copies of FAP f.
  double distance(int f, int u) const;
  double fap_distance(int f, int g) const;
  int closest_fap(int u) const;
  std::vector<int> cell_members(int f) const;
};

// Places FAPs and drops users_per_fap users uniformly in each FAP's
// hexagonal cell. F = 7 uses the wrapped hexagonal cluster; F in {1, 2, 3}
// places FAPs on a line without wrap-around. Channels are left empty.
NetworkScenario build_topology(const NetworkConfig& config, std::mt19937_64& rng);

// 36.7 log10(d) + 22.8 + 20 log10(fc). Channel generation clamps d to
// kMinDistanceM before calling this.
double path_loss_db(double distance_m, double carrier_freq_ghz);

ChannelTensor draw_channels(const NetworkScenario& scenario, const NetworkConfig& config,
                            std::mt19937_64& rng);

// build_topology followed by draw_channels.
NetworkScenario make_scenario(const NetworkConfig& config, std::mt19937_64& rng);

struct LinkBudget {
  double rb_bandwidth_hz = 0.0;  // beta
  double noise_power_w = 0.0;    // beta * N_o
  double sic_imperfection = 0.0;

  static LinkBudget from(const NetworkConfig& config);
};

// Sum over f' != f of p_f'r h_f'ru.
double inter_fap_interference(std::span<const double> p_r, int f, int r, int u,
                              const ChannelTensor& channels);

// Rate of u as FAP f's strong user on RB r, assuming perfect SIC.
double rate_strong(std::span<const double> p_r, double a, int f, int r, int u,
                   const ChannelTensor& channels, const LinkBudget& link);

// Rate of u as FAP f's weak user on RB r; the strong user's share a p h is
// treated as interference.
double rate_weak(std::span<const double> p_r, double a, int f, int r, int u,
                 const ChannelTensor& channels, const LinkBudget& link);

// General rate with role indicators and residual SIC interference
// zeta (1 - a) p h for the strong user. Throws if both indicators are set.
double rate_general(std::span<const double> p_r, double a, bool strong, bool weak, int f, int r,
                    int u, const ChannelTensor& channels, const LinkBudget& link);

// psi_f: sum of the strong and weak rates FAP f delivers over all RBs.
double fap_load(int f, const Assignment& assignment, const PowerMatrix& powers,
                const SplitMatrix& split, const ChannelTensor& channels, const LinkBudget& link);

std::vector<double> fap_loads(const Assignment& assignment, const PowerMatrix& powers,
                              const SplitMatrix& split, const ChannelTensor& channels,
                              const LinkBudget& link);

// Per-user total rate C_u, evaluated with rate_general (honours zeta).
std::vector<double> user_rates(const Assignment& assignment, const PowerMatrix& powers,
                               const SplitMatrix& split, const ChannelTensor& channels,
                               const LinkBudget& link);

// Weighted sum of assigned strong/weak rates.
double utility(const Assignment& assignment, const PowerMatrix& powers, const SplitMatrix& split,
               const ChannelTensor& channels, std::span<const double> weights,
               const LinkBudget& link);

// P_f / R on every RB.
PowerMatrix uniform_powers(const NetworkConfig& config);

}  // namespace fran
