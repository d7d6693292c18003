#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "relayfl/barrier_solver.hpp"
#include "relayfl/channel.hpp"
#include "relayfl/convex_program.hpp"
#include "relayfl/link_rates.hpp"
#include "relayfl/power_allocation.hpp"
#include "relayfl/scheduler.hpp"

namespace relayfl {

struct SpcaOptions {
  double eps_rel = 1e-4;
  std::size_t max_outer = 50;
  double inner_tol = 1e-8;
};

/// One TDMA transmission: a single-hop device's direct packet, or either
/// phase of a relayed device.
struct Leg {
  enum class Kind { Direct, Access, Combined };
  std::size_t device = 0;
  Kind kind = Kind::Direct;
};

/// Transmissions in frame order: device by device, Access before Combined.
std::vector<Leg> transmission_legs(const Schedule& schedule);

/// Auxiliary variables of one transmission. `power_ref` / `omega_ref` form
/// the point where omega^2 / power is linearised.
struct LegState {
  double inverse_energy = 0.0;  // t: lower bound on rate / power
  double omega = 0.0;           // omega^2 <= rate bound
  double rate_bound = 0.0;      // gamma, bits/s/Hz
  double snr_bound = 0.0;       // rho, psi or zeta
  double omega_ref = 0.0;
  double power_ref = 0.0;
};

struct SpcaIterate {
  double energy_bound = 0.0;  // E_t
  PowerAllocation powers;
  std::vector<LegState> legs;
};

/// Units of the scaled program: every quantity is measured in multiples of its
/// value at a reference iterate, so the scaled variables start near one.
struct SpcaScaling {
  PowerAllocation powers;
  double energy_bound = 1.0;
  std::vector<LegState> legs;

  /// Powers are floored at 1e-15 P_max so a vanishing power keeps a usable unit.
  static SpcaScaling from_iterate(const SpcaIterate& it, double p_max);
};

/// Convex subproblem together with the position of each named quantity.
struct Subproblem {
  struct LegVars {
    std::size_t inverse_energy, omega, rate_bound, snr_bound;
  };
  ConvexProgram program;
  std::size_t energy_bound = 0;
  std::vector<std::size_t> device_power;  // per device
  std::vector<std::optional<std::size_t>> relay_power;
  std::vector<Leg> legs;
  std::vector<LegVars> leg_vars;

  /// Scaled program values for an iterate.
  std::vector<double> pack(const SpcaIterate& it) const;
  /// Physical iterate from scaled program values; linearisation points are
  /// set to the unpacked (omega, power).
  SpcaIterate unpack(std::span<const double> x) const;
};

/// Tangent-plane underestimator of omega^2 / z at (omega_ref, z_ref).
double omega_lower_bound(double omega, double z, double omega_ref, double z_ref);

/// Powers at P_max (scaled by `power_fraction`) with every auxiliary strictly
/// inside its constraints; nullopt when the deadline cannot be met at P_max.
std::optional<SpcaIterate> initialize_feasible(const Schedule& schedule, const ChannelRealization& ch,
                                               const LinkParams& link, double uplink_deadline, double p_max);

/**
 * Convexified program at the iterate's linearisation points. Rows per
 * transmission: tangent bound t <= Omega(omega, power), omega^2 <= gamma,
 * 2^gamma <= 1 + snr_bound, snr_bound <= received SNR (affine in powers).
 * Shared rows: sum 1/t <= E_t and sum 1/gamma <= T' W / s. Two box rows
 * per power. Throws std::invalid_argument for an empty schedule or T' <= 0.
 */
Subproblem build_subproblem(const Schedule& schedule, const ChannelRealization& ch, const LinkParams& link,
                            double uplink_deadline, double p_max, const SpcaIterate& iterate,
                            const SpcaScaling& scaling);

struct ConvexSolution {
  std::optional<SpcaIterate> iterate;  // nullopt when infeasible
  SolverReport report;
};

/// Solves one subproblem starting from `start` (strictly feasible or not).
ConvexSolution solve_convex_subproblem(const Subproblem& sub, const SpcaIterate& start, double tolerance);

enum class SpcaStatus { Converged, MaxIterations, Infeasible };

const char* to_string(SpcaStatus s);

struct SpcaResult {
  SpcaStatus status = SpcaStatus::Infeasible;
  PowerAllocation powers;
  std::optional<SpcaIterate> iterate;
  /// Outer iterations; objective_trace holds E_t after each subproblem solve.
  SolverReport report;
  double initial_energy_bound = 0.0;
};

/// Sequential convex approximation of the transmit-energy problem under the
/// uplink deadline; stops when E_t changes by at most eps_rel relatively.
SpcaResult spca_minimize(const Schedule& schedule, const ChannelRealization& ch, const LinkParams& link,
                         double uplink_deadline, double p_max, const SpcaOptions& options = {});

/// sum_n P_n / r_n over all transmissions at true rates (the quantity E_t bounds).
double power_rate_objective(const Schedule& schedule, const ChannelRealization& ch,
                            const PowerAllocation& powers, const LinkParams& link);

}  // namespace relayfl
