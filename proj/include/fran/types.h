#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fran {

inline constexpr int kNoUser = -1;

// Network-wide parameters. Powers are configured in dBm and converted to
// watts on access; per-FAP lists of length one are shared by every FAP.
struct NetworkConfig {
  int num_faps = 7;
  int num_rbs = 2;
  int users_per_fap = 4;
  double inter_fap_distance_m = 200.0;
  double carrier_freq_ghz = 2.5;
  double total_bandwidth_hz = 10e6;
  double noise_psd_dbm_per_hz = -174.0;
  std::vector<double> power_budget_dbm{41.0};
  std::vector<double> fronthaul_capacity_bps{1e8};
  double sic_imperfection = 0.0;
  std::uint64_t rng_seed = 1;
  // Test hook: with fading off every small-scale gain is exactly 1.
  bool rayleigh_fading = true;

  int num_users() const { return num_faps * users_per_fap; }
  double rb_bandwidth_hz() const { return total_bandwidth_hz / num_rbs; }
  double power_budget_w(int fap) const;
  double fronthaul_capacity(int fap) const;
  // Thermal noise over one RB, beta * N_o, in watts.
  double noise_power_w() const;

  // Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

double dbm_to_watts(double dbm);

// Dense F x R matrix stored RB-major so that the per-RB power vector p_r is
// contiguous. The tag keeps powers and split ratios from being mixed up.
template <typename Tag>
class FapRbMatrix {
 public:
  FapRbMatrix() = default;
  FapRbMatrix(int faps, int rbs, double fill = 0.0)
      : faps_(faps), rbs_(rbs), data_(static_cast<std::size_t>(faps) * rbs, fill) {}

  int faps() const { return faps_; }
  int rbs() const { return rbs_; }

  double& operator()(int f, int r) { return data_[index(f, r)]; }
  double operator()(int f, int r) const { return data_[index(f, r)]; }

  std::span<double> column(int r) {
    return {data_.data() + static_cast<std::size_t>(r) * faps_, static_cast<std::size_t>(faps_)};
  }
  std::span<const double> column(int r) const {
    return {data_.data() + static_cast<std::size_t>(r) * faps_, static_cast<std::size_t>(faps_)};
  }
  std::span<const double> values() const { return data_; }

  double row_sum(int f) const {
    double s = 0.0;
    for (int r = 0; r < rbs_; ++r) s += (*this)(f, r);
    return s;
  }

  bool operator==(const FapRbMatrix&) const = default;

 private:
  std::size_t index(int f, int r) const {
    return static_cast<std::size_t>(r) * faps_ + f;
  }

  int faps_ = 0;
  int rbs_ = 0;
  std::vector<double> data_;
};

struct PowerTag {};
struct SplitTag {};
using PowerMatrix = FapRbMatrix<PowerTag>;  // watts
using SplitMatrix = FapRbMatrix<SplitTag>;  // strong-user share a_fr

// Linear power gains h_fru, laid out so that the F gains seen by one user on
// one RB are contiguous.
class ChannelTensor {
 public:
  ChannelTensor() = default;
  ChannelTensor(int faps, int rbs, int users, double fill = 0.0)
      : faps_(faps), rbs_(rbs), users_(users),
        data_(static_cast<std::size_t>(faps) * rbs * users, fill) {}

  int faps() const { return faps_; }
  int rbs() const { return rbs_; }
  int users() const { return users_; }

  double& operator()(int f, int r, int u) { return data_[index(r, u) + f]; }
  double operator()(int f, int r, int u) const { return data_[index(r, u) + f]; }

  // Gains from every FAP to user u on RB r.
  std::span<const double> gains(int r, int u) const {
    return {data_.data() + index(r, u), static_cast<std::size_t>(faps_)};
  }
  std::span<const double> values() const { return data_; }

  bool operator==(const ChannelTensor&) const = default;

 private:
  std::size_t index(int r, int u) const {
    return (static_cast<std::size_t>(r) * users_ + u) * faps_;
  }

  int faps_ = 0;
  int rbs_ = 0;
  int users_ = 0;
  std::vector<double> data_;
};

// Strong/weak user per (FAP, RB). This is the compact form of the binary
// S and W tensors: s_fru = 1 iff strong_user(f, r) == u. A weak slot holding
// kNoUser denotes single-user (OMA) service.
class Assignment {
 public:
  Assignment() = default;
  Assignment(int faps, int rbs)
      : faps_(faps), rbs_(rbs),
        strong_(static_cast<std::size_t>(faps) * rbs, kNoUser),
        weak_(static_cast<std::size_t>(faps) * rbs, kNoUser) {}

  int faps() const { return faps_; }
  int rbs() const { return rbs_; }

  int strong_user(int f, int r) const { return strong_[index(f, r)]; }
  int weak_user(int f, int r) const { return weak_[index(f, r)]; }
  void set_pair(int f, int r, int strong, int weak) {
    strong_[index(f, r)] = strong;
    weak_[index(f, r)] = weak;
  }

  bool is_strong(int f, int r, int u) const { return strong_user(f, r) == u; }
  bool is_weak(int f, int r, int u) const { return weak_user(f, r) == u; }

  bool operator==(const Assignment&) const = default;

 private:
  std::size_t index(int f, int r) const {
    return static_cast<std::size_t>(r) * faps_ + f;
  }

  int faps_ = 0;
  int rbs_ = 0;
  std::vector<int> strong_;
  std::vector<int> weak_;
};

// Lists every violated assignment invariant; empty means valid. With
// require_pairs false, a missing weak user is accepted (OMA service).
std::vector<std::string> assignment_violations(const Assignment& assignment,
                                               const ChannelTensor& channels,
                                               bool require_pairs = true);

}  // namespace fran
