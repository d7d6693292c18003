#include "relayfl/spca.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace relayfl {

namespace {

constexpr double kSafety = 0.99;

std::string indexed(const char* name, std::size_t n) { return std::string(name) + "[" + std::to_string(n) + "]"; }

const char* leg_name(Leg::Kind k) {
  switch (k) {
    case Leg::Kind::Direct: return "direct";
    case Leg::Kind::Access: return "access";
    case Leg::Kind::Combined: return "combined";
  }
  return "?";
}

/// Received-SNR coefficients (per watt) of a leg: (uses relay power?, coefficient) pairs.
struct SnrCoefficients {
  double device = 0.0;  // multiplies P_n
  double relay = 0.0;   // multiplies P^s for the combined leg
};

SnrCoefficients snr_coefficients(const Leg& leg, const Schedule& schedule, const ChannelRealization& ch,
                                 const LinkParams& link) {
  const std::size_t n = leg.device;
  const double noise = link.noise_power;
  switch (leg.kind) {
    case Leg::Kind::Direct: return {ch.direct_gain(n) / noise, 0.0};
    case Leg::Kind::Access: return {ch.access_gain(n, *schedule.relay_of[n]) / noise, 0.0};
    case Leg::Kind::Combined:
      return {ch.direct_gain(n) / noise, ch.backhaul_gain(*schedule.relay_of[n]) / noise};
  }
  return {};
}

double leg_snr(const SnrCoefficients& c, const Leg& leg, const PowerAllocation& p) {
  return c.device * p.device_power[leg.device] + c.relay * p.relay_power[leg.device];
}

double leg_power(const Leg& leg, const PowerAllocation& p) {
  return leg.kind == Leg::Kind::Combined ? p.relay_power[leg.device] : p.device_power[leg.device];
}

PowerAllocation powers_at(const Schedule& schedule, double level) {
  PowerAllocation p;
  p.device_power.assign(schedule.n_devices(), level);
  p.relay_power.assign(schedule.n_devices(), 0.0);
  for (std::size_t n : schedule.two_hop) p.relay_power[n] = level;
  return p;
}

}  // namespace

std::vector<Leg> transmission_legs(const Schedule& schedule) {
  std::vector<Leg> legs;
  legs.reserve(schedule.n_devices() + schedule.two_hop.size());
  for (std::size_t n = 0; n < schedule.n_devices(); ++n) {
    if (schedule.mode(n) == Mode::SingleHop) {
      legs.push_back({n, Leg::Kind::Direct});
    } else {
      legs.push_back({n, Leg::Kind::Access});
      legs.push_back({n, Leg::Kind::Combined});
    }
  }
  return legs;
}

double omega_lower_bound(double omega, double z, double omega_ref, double z_ref) {
  const double ratio = omega_ref / z_ref;
  return 2.0 * ratio * omega - ratio * ratio * z;
}

SpcaScaling SpcaScaling::from_iterate(const SpcaIterate& it, double p_max) {
  SpcaScaling s;
  const double floor = 1e-15 * p_max;
  s.powers = it.powers;
  for (double& p : s.powers.device_power) p = std::clamp(p, floor, p_max);
  for (double& p : s.powers.relay_power) p = std::clamp(p, floor, p_max);
  s.energy_bound = it.energy_bound;
  s.legs = it.legs;
  return s;
}

std::optional<SpcaIterate> initialize_feasible(const Schedule& schedule, const ChannelRealization& ch,
                                               const LinkParams& link, double uplink_deadline, double p_max) {
  if (schedule.n_devices() == 0 || !(p_max > 0.0) || !(uplink_deadline > 0.0)) return std::nullopt;
  const std::vector<Leg> legs = transmission_legs(schedule);
  std::vector<SnrCoefficients> coef;
  coef.reserve(legs.size());
  for (const Leg& leg : legs) coef.push_back(snr_coefficients(leg, schedule, ch, link));

  // Feasibility check at full power with true rates.
  const PowerAllocation full = powers_at(schedule, p_max);
  double airtime = 0.0;
  for (std::size_t l = 0; l < legs.size(); ++l) {
    airtime += packet_time(rate_direct(Snr{leg_snr(coef[l], legs[l], full)}), link);
  }
  if (!(airtime <= uplink_deadline)) return std::nullopt;

  const double capacity = uplink_deadline / link.airtime_per_unit_rate();  // bound on sum 1/gamma
  for (double fraction : {kSafety, 0.999, 0.9999, 1.0 - 1e-6}) {
    SpcaIterate it;
    it.powers = powers_at(schedule, fraction * p_max);
    it.legs.resize(legs.size());
    double inverse_rate_sum = 0.0;
    for (std::size_t l = 0; l < legs.size(); ++l) {
      it.legs[l].snr_bound = fraction * leg_snr(coef[l], legs[l], it.powers);
      const double cap = std::log2(1.0 + it.legs[l].snr_bound);
      it.legs[l].rate_bound = cap;
      inverse_rate_sum += 1.0 / cap;
    }
    const double load = inverse_rate_sum / capacity;
    if (!(load < 1.0)) continue;
    const double shrink = load < 0.98 ? kSafety : 0.5 * (1.0 + load);
    double inverse_energy_sum = 0.0;
    for (std::size_t l = 0; l < legs.size(); ++l) {
      LegState& st = it.legs[l];
      st.rate_bound *= shrink;
      st.omega = std::sqrt(kSafety * st.rate_bound);
      const double z = leg_power(legs[l], it.powers);
      st.inverse_energy = kSafety * st.omega * st.omega / z;
      st.omega_ref = st.omega;
      st.power_ref = z;
      inverse_energy_sum += 1.0 / st.inverse_energy;
    }
    it.energy_bound = inverse_energy_sum / kSafety;
    return it;
  }
  return std::nullopt;
}

std::vector<double> Subproblem::pack(const SpcaIterate& it) const {
  std::vector<double> x(program.n_variables(), 0.0);
  const auto& vars = program.variables();
  x[energy_bound] = it.energy_bound / vars[energy_bound].scale;
  for (std::size_t n = 0; n < device_power.size(); ++n) {
    x[device_power[n]] = it.powers.device_power[n] / vars[device_power[n]].scale;
    if (relay_power[n]) x[*relay_power[n]] = it.powers.relay_power[n] / vars[*relay_power[n]].scale;
  }
  for (std::size_t l = 0; l < legs.size(); ++l) {
    const LegVars& v = leg_vars[l];
    const LegState& s = it.legs[l];
    x[v.inverse_energy] = s.inverse_energy / vars[v.inverse_energy].scale;
    x[v.omega] = s.omega / vars[v.omega].scale;
    x[v.rate_bound] = s.rate_bound / vars[v.rate_bound].scale;
    x[v.snr_bound] = s.snr_bound / vars[v.snr_bound].scale;
  }
  return x;
}

SpcaIterate Subproblem::unpack(std::span<const double> x) const {
  const auto& vars = program.variables();
  auto phys = [&](std::size_t j) { return x[j] * vars[j].scale; };
  SpcaIterate it;
  it.energy_bound = phys(energy_bound);
  it.powers.device_power.assign(device_power.size(), 0.0);
  it.powers.relay_power.assign(device_power.size(), 0.0);
  for (std::size_t n = 0; n < device_power.size(); ++n) {
    it.powers.device_power[n] = phys(device_power[n]);
    if (relay_power[n]) it.powers.relay_power[n] = phys(*relay_power[n]);
  }
  it.legs.resize(legs.size());
  for (std::size_t l = 0; l < legs.size(); ++l) {
    const LegVars& v = leg_vars[l];
    LegState& s = it.legs[l];
    s.inverse_energy = phys(v.inverse_energy);
    s.omega = phys(v.omega);
    s.rate_bound = phys(v.rate_bound);
    s.snr_bound = phys(v.snr_bound);
    s.omega_ref = s.omega;
    s.power_ref = leg_power(legs[l], it.powers);
  }
  return it;
}

Subproblem build_subproblem(const Schedule& schedule, const ChannelRealization& ch, const LinkParams& link,
                            double uplink_deadline, double p_max, const SpcaIterate& iterate,
                            const SpcaScaling& scaling) {
  if (schedule.n_devices() == 0) throw std::invalid_argument("build_subproblem: empty device set");
  if (!(uplink_deadline > 0.0)) throw std::invalid_argument("build_subproblem: uplink deadline must be positive");
  if (!(p_max > 0.0)) throw std::invalid_argument("build_subproblem: P_max must be positive");

  Subproblem sub;
  sub.legs = transmission_legs(schedule);
  if (iterate.legs.size() != sub.legs.size() || scaling.legs.size() != sub.legs.size()) {
    throw std::invalid_argument("build_subproblem: iterate does not match the schedule");
  }
  ConvexProgram& prog = sub.program;
  const auto& device_unit = scaling.powers.device_power;
  const auto& relay_unit = scaling.powers.relay_power;

  sub.energy_bound = prog.add_variable("E_t", scaling.energy_bound);
  prog.set_objective_coefficient(sub.energy_bound, 1.0);
  sub.device_power.resize(schedule.n_devices());
  sub.relay_power.resize(schedule.n_devices());
  for (std::size_t n = 0; n < schedule.n_devices(); ++n) {
    sub.device_power[n] = prog.add_variable(indexed("P", n), device_unit[n]);
    if (schedule.mode(n) == Mode::TwoHop) sub.relay_power[n] = prog.add_variable(indexed("Ps", n), relay_unit[n]);
  }
  for (std::size_t l = 0; l < sub.legs.size(); ++l) {
    const Leg& leg = sub.legs[l];
    const LegState& sc = scaling.legs[l];
    const std::string tag = std::string(leg_name(leg.kind)) + "[" + std::to_string(leg.device) + "]";
    Subproblem::LegVars v{};
    v.inverse_energy = prog.add_variable("t." + tag, sc.inverse_energy, true);
    v.omega = prog.add_variable("omega." + tag, sc.omega);
    v.rate_bound = prog.add_variable("gamma." + tag, sc.rate_bound, true);
    v.snr_bound = prog.add_variable("snr." + tag, sc.snr_bound);
    sub.leg_vars.push_back(v);
  }

  // sum_l 1/t_l <= E_t
  {
    Constraint c;
    c.label = "energy_epigraph";
    c.linear.emplace_back(sub.energy_bound, -1.0);
    for (std::size_t l = 0; l < sub.legs.size(); ++l) {
      c.terms.push_back({Term::Kind::Inverse, sub.leg_vars[l].inverse_energy,
                         1.0 / (scaling.legs[l].inverse_energy * scaling.energy_bound)});
    }
    prog.add_constraint(std::move(c));
  }

  for (std::size_t l = 0; l < sub.legs.size(); ++l) {
    const Leg& leg = sub.legs[l];
    const LegState& sc = scaling.legs[l];
    const LegState& cur = iterate.legs[l];
    const Subproblem::LegVars& v = sub.leg_vars[l];
    const std::string tag = std::string(leg_name(leg.kind)) + "[" + std::to_string(leg.device) + "]";
    const bool relayed = leg.kind == Leg::Kind::Combined;
    const std::size_t power_var = relayed ? *sub.relay_power[leg.device] : sub.device_power[leg.device];
    const double power_unit = relayed ? relay_unit[leg.device] : device_unit[leg.device];

    // t <= Omega(omega, z), the tangent of omega^2 / z at the reference point.
    {
      const double ratio = cur.omega_ref / cur.power_ref;
      Constraint c;
      c.label = "tangent." + tag;
      c.linear.emplace_back(v.inverse_energy, 1.0);
      c.linear.emplace_back(v.omega, -2.0 * ratio * sc.omega / sc.inverse_energy);
      c.linear.emplace_back(power_var, ratio * ratio * power_unit / sc.inverse_energy);
      prog.add_constraint(std::move(c));
    }
    // omega^2 <= gamma
    {
      Constraint c;
      c.label = "square." + tag;
      c.terms.push_back({Term::Kind::Square, v.omega, sc.omega * sc.omega / sc.rate_bound});
      c.linear.emplace_back(v.rate_bound, -1.0);
      prog.add_constraint(std::move(c));
    }
    // 2^gamma <= 1 + snr_bound
    {
      const double norm = 1.0 + sc.snr_bound;
      Constraint c;
      c.label = "exp." + tag;
      c.terms.push_back({Term::Kind::Exp2, v.rate_bound, 1.0 / norm, sc.rate_bound});
      c.linear.emplace_back(v.snr_bound, -sc.snr_bound / norm);
      c.constant = -1.0 / norm;
      prog.add_constraint(std::move(c));
    }
    // snr_bound <= received SNR, affine in the powers
    {
      const SnrCoefficients k = snr_coefficients(leg, schedule, ch, link);
      Constraint c;
      c.label = "snr." + tag;
      c.linear.emplace_back(v.snr_bound, 1.0);
      c.linear.emplace_back(sub.device_power[leg.device], -k.device * device_unit[leg.device] / sc.snr_bound);
      if (relayed) {
        c.linear.emplace_back(*sub.relay_power[leg.device], -k.relay * relay_unit[leg.device] / sc.snr_bound);
      }
      prog.add_constraint(std::move(c));
    }
  }

  // sum_l 1/gamma_l <= T' W / s
  {
    const double capacity = uplink_deadline / link.airtime_per_unit_rate();
    Constraint c;
    c.label = "deadline";
    c.constant = -1.0;
    for (std::size_t l = 0; l < sub.legs.size(); ++l) {
      c.terms.push_back(
          {Term::Kind::Inverse, sub.leg_vars[l].rate_bound, 1.0 / (scaling.legs[l].rate_bound * capacity)});
    }
    prog.add_constraint(std::move(c));
  }

  auto add_box = [&](std::size_t var) {
    const std::string& name = prog.variables()[var].name;
    Constraint lo;
    lo.label = "box.lower." + name;
    lo.linear.emplace_back(var, -1.0);
    lo.box = true;
    prog.add_constraint(std::move(lo));
    Constraint hi;
    hi.label = "box.upper." + name;
    hi.linear.emplace_back(var, prog.variables()[var].scale / p_max);
    hi.constant = -1.0;
    hi.box = true;
    prog.add_constraint(std::move(hi));
  };
  for (std::size_t n = 0; n < schedule.n_devices(); ++n) {
    add_box(sub.device_power[n]);
    if (sub.relay_power[n]) add_box(*sub.relay_power[n]);
  }
  return sub;
}

ConvexSolution solve_convex_subproblem(const Subproblem& sub, const SpcaIterate& start, double tolerance) {
  BarrierOptions opt;
  opt.tolerance = tolerance;
  const std::vector<double> x0 = sub.pack(start);
  BarrierResult r = solve_convex_program(sub.program, x0, opt);
  ConvexSolution out;
  out.report = std::move(r.report);
  if (!r.x.empty()) out.iterate = sub.unpack(r.x);
  return out;
}

const char* to_string(SpcaStatus s) {
  switch (s) {
    case SpcaStatus::Converged: return "converged";
    case SpcaStatus::MaxIterations: return "max_iters";
    case SpcaStatus::Infeasible: return "infeasible";
  }
  return "?";
}

SpcaResult spca_minimize(const Schedule& schedule, const ChannelRealization& ch, const LinkParams& link,
                         double uplink_deadline, double p_max, const SpcaOptions& options) {
  SpcaResult result;
  auto seed = initialize_feasible(schedule, ch, link, uplink_deadline, p_max);
  if (!seed) {
    result.report.status = SolveStatus::Infeasible;
    return result;
  }
  SpcaIterate current = std::move(*seed);
  result.initial_energy_bound = current.energy_bound;
  double previous = current.energy_bound;
  result.status = SpcaStatus::MaxIterations;

  for (std::size_t i = 0; i < options.max_outer; ++i) {
    // Units follow the iterate: E_t and the powers shrink by orders of magnitude.
    const SpcaScaling scaling = SpcaScaling::from_iterate(current, p_max);
    const Subproblem sub = build_subproblem(schedule, ch, link, uplink_deadline, p_max, current, scaling);
    ConvexSolution sol = solve_convex_subproblem(sub, current, options.inner_tol);
    result.report.kkt_residual = sol.report.kkt_residual;
    result.report.max_violation = sol.report.max_violation;
    // The linearisation point is feasible for the subproblem, so a worse answer
    // means the inner solve broke down. Keep the last iterate.
    if (!sol.iterate || !(sol.iterate->energy_bound <= previous * (1.0 + 1e-9))) break;
    current = std::move(*sol.iterate);
    ++result.report.iterations;
    result.report.objective_trace.push_back(current.energy_bound);
    if (std::abs(current.energy_bound - previous) <= options.eps_rel * std::abs(previous)) {
      result.status = SpcaStatus::Converged;
      break;
    }
    previous = current.energy_bound;
  }

  result.report.status =
      result.status == SpcaStatus::Converged ? SolveStatus::Converged : SolveStatus::MaxIterations;
  for (std::size_t n = 0; n < schedule.n_devices(); ++n) {
    current.powers.device_power[n] = std::clamp(current.powers.device_power[n], 0.0, p_max);
    current.powers.relay_power[n] = std::clamp(current.powers.relay_power[n], 0.0, p_max);
  }
  result.powers = current.powers;
  result.iterate = std::move(current);
  return result;
}

double power_rate_objective(const Schedule& schedule, const ChannelRealization& ch,
                            const PowerAllocation& powers, const LinkParams& link) {
  double total = 0.0;
  for (const Leg& leg : transmission_legs(schedule)) {
    const SnrCoefficients k = snr_coefficients(leg, schedule, ch, link);
    const double rate = rate_direct(Snr{leg_snr(k, leg, powers)});
    total += leg_power(leg, powers) / rate;
  }
  return total;
}

}  // namespace relayfl
