#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "relayfl/energy_time.hpp"
#include "relayfl/power_oracle.hpp"
#include "relayfl/scheduler.hpp"
#include "relayfl/spca.hpp"
#include "relayfl/units.hpp"
#include "test_support.hpp"

using namespace relayfl;

namespace {

const double kPmax = dbm_to_watts(23.0);
const double kDeadline = 4e-3;

// Uplink time straight from the rate formulas, independent of energy_time.
double uplink_time_by_hand(const Schedule& s, const ChannelRealization& ch, const PowerAllocation& p,
                           const LinkParams& link) {
  const double unit = link.packet_bits / link.bandwidth;
  const double sigma2 = link.noise_power;
  double t = 0.0;
  for (std::size_t n = 0; n < s.n_devices(); ++n) {
    if (!s.relay_of[n]) {
      t += unit / std::log2(1.0 + p.device_power[n] * ch.direct_gain(n) / sigma2);
    } else {
      const std::size_t k = *s.relay_of[n];
      t += unit / std::log2(1.0 + p.device_power[n] * ch.access_gain(n, k) / sigma2);
      t += unit / std::log2(1.0 + (p.relay_power[n] * ch.backhaul_gain(k) + p.device_power[n] * ch.direct_gain(n)) /
                                      sigma2);
    }
  }
  return t;
}

}  // namespace

TEST_CASE("tangent bound touches omega^2 / z at the reference point") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double w0 = rng.uniform(0.01, 10.0);
    const double z0 = std::exp(rng.uniform(-20.0, 2.0));
    const double exact = w0 * w0 / z0;
    CHECK(std::abs(omega_lower_bound(w0, z0, w0, z0) - exact) <= 1e-12 * exact);
    const double w = rng.uniform(0.0, 10.0);
    const double z = std::exp(rng.uniform(-20.0, 2.0));
    const double f = w * w / z;
    CHECK(omega_lower_bound(w, z, w0, z0) <= f + 1e-12 * std::max(1.0, f));
  }
}

TEST_CASE("frame order lists each relayed device's access leg before its combined leg") {
  const Schedule s = Schedule::from_relays({1u, std::nullopt});
  const auto legs = transmission_legs(s);
  REQUIRE(legs.size() == 3);
  CHECK(legs[0].device == 0);
  CHECK(legs[0].kind == Leg::Kind::Access);
  CHECK(legs[1].kind == Leg::Kind::Combined);
  CHECK(legs[2].device == 1);
  CHECK(legs[2].kind == Leg::Kind::Direct);
}

TEST_CASE("initial point meets the deadline at P_max") {
  Rng rng(4);
  const ChannelRealization ch = testing::random_channel(6, 2, rng);
  const Schedule s = classify(ch);
  const LinkParams link;
  const auto init = initialize_feasible(s, ch, link, kDeadline, kPmax);
  REQUIRE(init);
  CHECK(uplink_time_by_hand(s, ch, init->powers, link) <= kDeadline);
  CHECK(init->energy_bound >= power_rate_objective(s, ch, init->powers, link));
}

TEST_CASE("SPCA matches the grid oracle on small instances") {
  Rng rng(77);
  const LinkParams link;
  int compared = 0;
  while (compared < 12) {
    const std::size_t n = 1 + rng.below(2);
    const std::size_t k = rng.below(2);
    const ChannelRealization ch = testing::random_channel(n, k, rng);
    const Schedule s = classify(ch);
    if (s.n_power_variables() > 3) continue;
    const SpcaResult r = spca_minimize(s, ch, link, kDeadline, kPmax);
    const auto oracle = brute_force_power_oracle(s, ch, link, kDeadline, kPmax, 40, 8);
    REQUIRE(oracle);
    // the tail is slow, so hitting max_outer with a good iterate is normal here
    REQUIRE(r.status != SpcaStatus::Infeasible);
    REQUIRE(r.iterate);
    CHECK(uplink_time_by_hand(s, ch, r.powers, link) <= kDeadline * (1 + 1e-6));
    // a finite grid can only overestimate the minimum
    const double got = power_rate_objective(s, ch, r.powers, link);
    CHECK(got <= 1.01 * oracle->objective);
    ++compared;
  }
}

TEST_CASE("converged SPCA meets the deadline with powers in range and never increases E_t") {
  Rng rng(123);
  const LinkParams link;
  for (int trial = 0; trial < 10; ++trial) {
    const ChannelRealization ch = testing::random_channel(2 + rng.below(8), rng.below(5), rng);
    const Schedule s = classify(ch);
    const SpcaResult r = spca_minimize(s, ch, link, kDeadline, kPmax);
    REQUIRE(r.iterate);
    const auto& trace = r.report.objective_trace;
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-8 * std::abs(trace[i - 1]));
    if (r.status != SpcaStatus::Converged) continue;
    CHECK(uplink_time_by_hand(s, ch, r.powers, link) <= kDeadline * (1 + 1e-6));
    for (double p : r.powers.device_power) CHECK((p >= 0.0 && p <= kPmax));
    for (double p : r.powers.relay_power) CHECK((p >= 0.0 && p <= kPmax));
    // E_t bounds the true objective from above, and tightly at convergence
    const double truth = power_rate_objective(s, ch, r.powers, link);
    CHECK(r.iterate->energy_bound >= truth * (1 - 1e-6));
    CHECK(r.iterate->energy_bound <= truth * (1 + 1e-3));
  }
}

TEST_CASE("an unattainable deadline is reported as infeasible") {
  Rng rng(8);
  const ChannelRealization ch = testing::random_channel(5, 2, rng);
  const Schedule s = classify(ch);
  const SpcaResult r = spca_minimize(s, ch, LinkParams{}, kDeadline, dbm_to_watts(-90.0));
  CHECK(r.status == SpcaStatus::Infeasible);
  CHECK_FALSE(r.iterate);
  CHECK_FALSE(initialize_feasible(s, ch, LinkParams{}, kDeadline, dbm_to_watts(-90.0)));
  CHECK(std::string(to_string(SpcaStatus::MaxIterations)) == "max_iters");
}

TEST_CASE("the oracle refuses more than three power variables") {
  Rng rng(2);
  const ChannelRealization ch = testing::random_channel(4, 1, rng);
  CHECK_THROWS_AS(brute_force_power_oracle(Schedule::all_single_hop(4), ch, LinkParams{}, kDeadline, kPmax, 10),
                  std::invalid_argument);
}
