#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "relayfl/convex_program.hpp"

namespace relayfl {

enum class SolveStatus { Converged, MaxIterations, Infeasible };

const char* to_string(SolveStatus s);

struct SolverReport {
  std::size_t iterations = 0;
  std::vector<double> objective_trace;
  /// max(relative stationarity, relative complementarity gap) at the returned point.
  double kkt_residual = 0.0;
  double max_violation = 0.0;
  SolveStatus status = SolveStatus::Infeasible;
};

struct BarrierOptions {
  /// Target for the relative stationarity, the primal residual and the relative duality gap.
  double tolerance = 1e-8;
  /// Each step aims the complementarity at 1 / weight_growth of its current mean.
  double weight_growth = 20.0;
  /// Starting barrier weight; chosen from the starting objective when unset.
  std::optional<double> initial_weight;
  std::size_t max_newton_steps = 3000;
};

struct BarrierResult {
  std::vector<double> x;  // empty when infeasible
  SolverReport report;
};

/**
 * Primal-dual interior-point method with strictly feasible iterates.
 *
 * Before the iteration the program is rewritten into an equivalent, better
 * conditioned form: pure epigraph variables are folded into the objective and
 * rows with a 2^(r x) term are taken to log form. Neither change is visible in
 * the result. The reduced Newton system is sparse and factorised with LDL^T.
 * A start that is not strictly feasible is first repaired by a phase-I
 * program (minimise a common slack).
 */
BarrierResult solve_convex_program(const ConvexProgram& program, std::span<const double> start,
                                   const BarrierOptions& options = {});

}  // namespace relayfl
