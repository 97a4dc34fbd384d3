#include "fran/types.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fran {
namespace {

double per_fap(const std::vector<double>& values, int fap) {
  return values.size() == 1 ? values.front() : values.at(static_cast<std::size_t>(fap));
}

}  // namespace

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double NetworkConfig::power_budget_w(int fap) const {
  return dbm_to_watts(per_fap(power_budget_dbm, fap));
}

double NetworkConfig::fronthaul_capacity(int fap) const {
  return per_fap(fronthaul_capacity_bps, fap);
}

double NetworkConfig::noise_power_w() const {
  return dbm_to_watts(noise_psd_dbm_per_hz) * rb_bandwidth_hz();
}

void NetworkConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("NetworkConfig: " + what); };
  if (num_faps < 1) fail("num_faps must be >= 1");
  if (num_rbs < 1) fail("num_rbs must be >= 1");
  if (users_per_fap < 2) fail("users_per_fap must be >= 2");
  if (num_users() < 2 * num_rbs) fail("need at least 2R users in the network");
  if (!(total_bandwidth_hz > 0.0)) fail("total_bandwidth_hz must be positive");
  if (!(inter_fap_distance_m > 0.0)) fail("inter_fap_distance_m must be positive");
  if (!(carrier_freq_ghz > 0.0)) fail("carrier_freq_ghz must be positive");
  if (!(sic_imperfection >= 0.0 && sic_imperfection <= 1.0)) fail("sic_imperfection must be in [0,1]");
  auto check_list = [&](const std::vector<double>& v, const char* name) {
    if (v.size() != 1 && v.size() != static_cast<std::size_t>(num_faps)) {
      fail(std::string(name) + " must have 1 or num_faps entries");
    }
    for (double x : v) {
      if (!std::isfinite(x)) fail(std::string(name) + " entries must be finite");
    }
  };
  check_list(power_budget_dbm, "power_budget_dbm");
  check_list(fronthaul_capacity_bps, "fronthaul_capacity_bps");
  for (double c : fronthaul_capacity_bps) {
    if (c < 0.0) fail("fronthaul_capacity_bps must be >= 0");
  }
}

std::vector<std::string> assignment_violations(const Assignment& assignment,
                                               const ChannelTensor& channels,
                                               bool require_pairs) {
  std::vector<std::string> out;
  const int faps = assignment.faps();
  const int rbs = assignment.rbs();
  const int users = channels.users();
  auto report = [&](int f, int r, const std::string& msg) {
    std::ostringstream os;
    os << "(f=" << f << ", r=" << r << "): " << msg;
    out.push_back(os.str());
  };
  for (int r = 0; r < rbs; ++r) {
    std::vector<int> served_by(static_cast<std::size_t>(users), -1);
    for (int f = 0; f < faps; ++f) {
      const int s = assignment.strong_user(f, r);
      const int w = assignment.weak_user(f, r);
      if (s < 0 || s >= users) {
        report(f, r, "missing strong user");
        continue;
      }
      if (w == kNoUser) {
        if (require_pairs) report(f, r, "missing weak user");
      } else if (w < 0 || w >= users) {
        report(f, r, "weak user out of range");
        continue;
      } else {
        if (w == s) report(f, r, "strong and weak user coincide");
        if (channels(f, r, s) < channels(f, r, w)) report(f, r, "strong user has the lower gain");
      }
      for (int u : {s, w}) {
        if (u == kNoUser) continue;
        if (served_by[static_cast<std::size_t>(u)] >= 0) {
          report(f, r, "user " + std::to_string(u) + " served more than once on this RB");
        }
        served_by[static_cast<std::size_t>(u)] = f;
      }
    }
  }
  return out;
}

}  // namespace fran
