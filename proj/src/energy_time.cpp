#include "relayfl/energy_time.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace relayfl {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// Relative slack when comparing an achieved uplink time against T'.
constexpr double kUplinkSlack = 1e-6;
}  // namespace

void TimingBudget::validate() const {
  if (!(total_deadline > 0.0)) throw std::invalid_argument("timing: total_deadline > 0 required");
  if (!(global_rounds >= 1.0)) throw std::invalid_argument("timing: global_rounds >= 1 required");
  if (!(uplink_deadline > 0.0)) throw std::invalid_argument("timing: uplink_deadline > 0 required");
}

double compute_time(const ComputeProfile& p) { return p.cycles_per_round() / p.cpu_frequency; }

double compute_energy(const ComputeProfile& p) {
  return p.kappa * p.cycles_per_round() * p.cpu_frequency * p.cpu_frequency;
}

PowerAllocation uniform_power(const Schedule& schedule, double power) {
  PowerAllocation p;
  p.device_power.assign(schedule.n_devices(), power);
  p.relay_power.assign(schedule.n_devices(), 0.0);
  for (std::size_t n : schedule.two_hop) p.relay_power[n] = power;
  return p;
}

AchievedRates achieved_rates(const Schedule& schedule, const ChannelRealization& ch,
                             const PowerAllocation& powers, const LinkParams& link) {
  const std::size_t n_dev = schedule.n_devices();
  AchievedRates r;
  r.first.assign(n_dev, 0.0);
  r.second.assign(n_dev, 0.0);
  const double noise = link.noise_power;
  for (std::size_t n : schedule.single_hop) {
    r.first[n] = rate_direct(snr_direct(powers.device_power[n], ch.direct_gain(n), noise));
  }
  for (std::size_t n : schedule.two_hop) {
    const std::size_t k = *schedule.relay_of[n];
    r.first[n] = rate_hop1(powers.device_power[n], ch.access_gain(n, k), noise);
    r.second[n] = rate_hop2_combined(powers.relay_power[n], ch.backhaul_gain(k), powers.device_power[n],
                                     ch.direct_gain(n), noise);
  }
  return r;
}

bool UplinkTimes::feasible() const { return std::isfinite(total); }

UplinkTimes uplink_times(const Schedule& schedule, const AchievedRates& rates, const LinkParams& link) {
  UplinkTimes t;
  for (std::size_t n : schedule.single_hop) t.single_hop += packet_time(rates.first[n], link);
  for (std::size_t n : schedule.two_hop) {
    t.two_hop_first += packet_time(rates.first[n], link);
    t.two_hop_second += packet_time(rates.second[n], link);
  }
  t.total = t.single_hop + t.two_hop_first + t.two_hop_second;
  return t;
}

std::optional<TransmitEnergy> transmit_energy(const Schedule& schedule, const PowerAllocation& powers,
                                              const AchievedRates& rates, const LinkParams& link) {
  TransmitEnergy e;
  for (std::size_t n : schedule.single_hop) {
    const double airtime = packet_time(rates.first[n], link);
    if (!std::isfinite(airtime)) return std::nullopt;
    e.devices += powers.device_power[n] * airtime;
  }
  for (std::size_t n : schedule.two_hop) {
    const double first = packet_time(rates.first[n], link);
    const double second = packet_time(rates.second[n], link);
    if (!std::isfinite(first) || !std::isfinite(second)) return std::nullopt;
    e.devices += powers.device_power[n] * first;
    e.relays += powers.relay_power[n] * second;
  }
  return e;
}

double total_energy(double transmit, std::span<const double> compute, double global_rounds) {
  return global_rounds * (transmit + std::accumulate(compute.begin(), compute.end(), 0.0));
}

double completion_time(double compute_time, double uplink_time, double global_rounds) {
  return global_rounds * (compute_time + uplink_time);
}

FrequencyChoice optimal_frequency(const ComputeProfile& p, const TimingBudget& b, double uplink_time) {
  const double slack = b.per_round_budget() - uplink_time;
  if (!(slack > 0.0)) return {FrequencyStatus::BudgetExhausted, kInf};
  const double f = p.cycles_per_round() / slack;
  if (f > p.max_frequency) return {FrequencyStatus::ComputeBound, f};
  return {FrequencyStatus::Ok, f};
}

double outage_fraction(std::span<const double> completion_times, double deadline) {
  if (completion_times.empty()) return 0.0;
  std::size_t late = 0;
  for (double t : completion_times) {
    if (!(t <= deadline)) ++late;
  }
  return static_cast<double>(late) / static_cast<double>(completion_times.size());
}

double outage_probability(std::span<const std::vector<double>> trials, double deadline) {
  if (trials.empty()) throw std::invalid_argument("outage_probability: at least one trial required");
  double sum = 0.0;
  for (const auto& t : trials) sum += outage_fraction(t, deadline);
  return sum / static_cast<double>(trials.size());
}

double EnergyLatencyReport::compute_energy_sum() const {
  return std::accumulate(compute_energy.begin(), compute_energy.end(), 0.0);
}

double EnergyLatencyReport::outage_frac() const {
  if (outage.empty()) return 0.0;
  const auto late = std::count(outage.begin(), outage.end(), true);
  return static_cast<double>(late) / static_cast<double>(outage.size());
}

EnergyLatencyReport evaluate_round(const Schedule& schedule, const ChannelRealization& ch,
                                   const PowerAllocation& powers, const LinkParams& link,
                                   std::span<const ComputeProfile> profiles, const TimingBudget& budget) {
  const std::size_t n_dev = schedule.n_devices();
  if (profiles.size() != n_dev) throw std::invalid_argument("evaluate_round: one compute profile per device");

  EnergyLatencyReport rep;
  const AchievedRates rates = achieved_rates(schedule, ch, powers, link);
  rep.uplink = uplink_times(schedule, rates, link);
  rep.transmit = transmit_energy(schedule, powers, rates, link).value_or(TransmitEnergy{kInf, 0.0});
  const bool uplink_ok =
      rep.uplink.feasible() && rep.uplink.total <= budget.uplink_deadline * (1.0 + kUplinkSlack);

  rep.compute_time.resize(n_dev);
  rep.compute_energy.resize(n_dev);
  rep.frequency.resize(n_dev);
  rep.completion.resize(n_dev);
  rep.outage.assign(n_dev, false);
  for (std::size_t n = 0; n < n_dev; ++n) {
    ComputeProfile p = profiles[n];
    const FrequencyChoice f = optimal_frequency(p, budget, rep.uplink.total);
    p.cpu_frequency = f.feasible() ? f.frequency : p.max_frequency;
    rep.frequency[n] = p.cpu_frequency;
    rep.compute_time[n] = compute_time(p);
    rep.compute_energy[n] = compute_energy(p);
    rep.completion[n] = completion_time(rep.compute_time[n], rep.uplink.total, budget.global_rounds);
    rep.outage[n] = !uplink_ok || !f.feasible();
  }
  rep.total = total_energy(rep.transmit.total(), rep.compute_energy, budget.global_rounds);
  return rep;
}

}  // namespace relayfl
