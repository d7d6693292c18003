#include "relayfl/barrier_solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace relayfl {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iters";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using LinearPart = std::vector<std::pair<std::size_t, double>>;

/// Solver-side row: linear + constant + separable terms - log(affine).
/// The log part lets exponential rows be handled in their gentler log form.
struct SmoothRow {
  LinearPart linear;
  double constant = 0.0;
  std::vector<Term> terms;
  LinearPart log_arg;  // empty: no log part
  double log_constant = 0.0;

  double log_argument(std::span<const double> x) const {
    double u = log_constant;
    for (const auto& [j, a] : log_arg) u += a * x[j];
    return u;
  }

  /// +inf where the log argument is not positive.
  double value(std::span<const double> x) const {
    double v = constant;
    for (const auto& [j, a] : linear) v += a * x[j];
    for (const Term& t : terms) v += t.value(x[t.var]);
    if (!log_arg.empty()) {
      const double u = log_argument(x);
      if (!(u > 0.0)) return kInf;
      v -= std::log(u);
    }
    return v;
  }

  std::vector<std::size_t> support() const {
    std::vector<std::size_t> s;
    for (const auto& [j, a] : linear) s.push_back(j);
    for (const Term& t : terms) s.push_back(t.var);
    for (const auto& [j, a] : log_arg) s.push_back(j);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
  }
};

/// Objective c^T x + offset + separable convex terms.
struct Objective {
  std::vector<double> linear;
  double offset = 0.0;
  std::vector<Term> terms;

  double value(std::span<const double> x) const {
    double v = offset;
    for (std::size_t j = 0; j < linear.size(); ++j) v += linear[j] * x[j];
    for (const Term& t : terms) v += t.value(x[t.var]);
    return v;
  }
};

struct Problem {
  std::vector<bool> positive;
  Objective objective;
  std::vector<SmoothRow> rows;

  std::size_t n() const { return positive.size(); }

  bool in_domain(std::span<const double> x) const {
    if (x.size() != positive.size()) return false;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (!std::isfinite(x[j]) || (positive[j] && !(x[j] > 0.0))) return false;
    }
    return true;
  }
};

SmoothRow to_row(const Constraint& c) {
  SmoothRow r;
  r.linear = c.linear;
  r.constant = c.constant;
  r.terms = c.terms;
  return r;
}

/// Per-row data laid out over its local support.
struct RowLayout {
  std::vector<std::size_t> vars;
  std::vector<std::pair<std::size_t, double>> linear;  // (local index, coefficient)
  std::vector<std::pair<std::size_t, Term>> terms;
  std::vector<std::pair<std::size_t, double>> log_arg;
  std::vector<int> slots;  // lower-triangle pairs (a >= b), row-major
};

/// Derivative bookkeeping for one problem. Holds the fixed sparsity pattern
/// of the Newton matrix so only values change between steps.
class NewtonKernel {
 public:
  explicit NewtonKernel(const Problem& problem) : problem_(problem) {
    const std::size_t n = problem.n();
    const auto& rows = problem.rows;
    layout_.resize(rows.size());

    std::vector<Eigen::Triplet<double, int>> pattern;
    for (std::size_t j = 0; j < n; ++j) pattern.emplace_back(int(j), int(j), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      RowLayout& row = layout_[i];
      row.vars = rows[i].support();
      auto local = [&](std::size_t var) {
        return std::size_t(std::lower_bound(row.vars.begin(), row.vars.end(), var) - row.vars.begin());
      };
      for (const auto& [j, a] : rows[i].linear) row.linear.emplace_back(local(j), a);
      for (const Term& t : rows[i].terms) row.terms.emplace_back(local(t.var), t);
      for (const auto& [j, a] : rows[i].log_arg) row.log_arg.emplace_back(local(j), a);
      for (std::size_t a = 0; a < row.vars.size(); ++a) {
        for (std::size_t b = 0; b <= a; ++b) pattern.emplace_back(int(row.vars[a]), int(row.vars[b]), 0.0);
      }
    }
    hessian_.resize(int(n), int(n));
    hessian_.setFromTriplets(pattern.begin(), pattern.end());
    hessian_.makeCompressed();

    auto slot_of = [&](int r, int c) {
      const int* begin = hessian_.innerIndexPtr() + hessian_.outerIndexPtr()[c];
      const int* end = hessian_.innerIndexPtr() + hessian_.outerIndexPtr()[c + 1];
      return int(std::lower_bound(begin, end, r) - hessian_.innerIndexPtr());
    };
    diag_slots_.resize(n);
    for (std::size_t j = 0; j < n; ++j) diag_slots_[j] = slot_of(int(j), int(j));
    for (RowLayout& row : layout_) {
      for (std::size_t a = 0; a < row.vars.size(); ++a) {
        for (std::size_t b = 0; b <= a; ++b) row.slots.push_back(slot_of(int(row.vars[a]), int(row.vars[b])));
      }
    }
    ldlt_.analyzePattern(hessian_);

    value_.resize(Eigen::Index(rows.size()));
    local_grad_.resize(rows.size());
    local_curv_.resize(rows.size());
    local_log_.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      local_grad_[i].resize(layout_[i].vars.size());
      local_curv_[i].resize(layout_[i].vars.size());
      local_log_[i].resize(layout_[i].vars.size());
    }
    obj_grad_.resize(Eigen::Index(n));
    obj_curv_.resize(Eigen::Index(n));
  }

  /// Caches row values and first/second derivatives at x. False outside the domain.
  bool evaluate(std::span<const double> x) {
    if (!problem_.in_domain(x)) return false;
    for (std::size_t i = 0; i < layout_.size(); ++i) {
      const double v = problem_.rows[i].value(x);
      if (!std::isfinite(v)) return false;
      value_[i] = v;
    }
    for (std::size_t i = 0; i < layout_.size(); ++i) {
      const RowLayout& row = layout_[i];
      auto& lg = local_grad_[i];
      auto& lc = local_curv_[i];
      std::fill(lg.begin(), lg.end(), 0.0);
      std::fill(lc.begin(), lc.end(), 0.0);
      for (const auto& [a, coef] : row.linear) lg[a] += coef;
      for (const auto& [a, t] : row.terms) {
        const double xv = x[row.vars[a]];
        lg[a] += t.derivative(xv);
        lc[a] += t.second_derivative(xv);
      }
      if (!row.log_arg.empty()) {
        // -log u contributes -grad u / u to the gradient and (grad u / u)(grad u / u)^T to the Hessian.
        auto& ll = local_log_[i];
        std::fill(ll.begin(), ll.end(), 0.0);
        const double inv_u = 1.0 / problem_.rows[i].log_argument(x);
        for (const auto& [a, coef] : row.log_arg) ll[a] += coef * inv_u;
        for (std::size_t a = 0; a < ll.size(); ++a) lg[a] -= ll[a];
      }
    }
    for (std::size_t j = 0; j < problem_.n(); ++j) obj_grad_(Eigen::Index(j)) = problem_.objective.linear[j];
    obj_curv_.setZero();
    for (const Term& t : problem_.objective.terms) {
      obj_grad_(Eigen::Index(t.var)) += t.derivative(x[t.var]);
      obj_curv_(Eigen::Index(t.var)) += t.second_derivative(x[t.var]);
    }
    return true;
  }

  /// grad f_0 + sum_i mult_i grad f_i for the cached state.
  Eigen::VectorXd combine(const Eigen::VectorXd& mult) const {
    Eigen::VectorXd r = obj_grad_;
    for (std::size_t i = 0; i < layout_.size(); ++i) {
      const RowLayout& row = layout_[i];
      for (std::size_t a = 0; a < row.vars.size(); ++a) {
        r(Eigen::Index(row.vars[a])) += mult(Eigen::Index(i)) * local_grad_[i][a];
      }
    }
    return r;
  }

  double row_dot(std::size_t i, const Eigen::VectorXd& d) const {
    double v = 0.0;
    const RowLayout& row = layout_[i];
    for (std::size_t a = 0; a < row.vars.size(); ++a) v += local_grad_[i][a] * d(Eigen::Index(row.vars[a]));
    return v;
  }

  /// Solves (hess f_0 + sum lambda_i hess f_i + sum lambda_i / s_i grad f_i grad f_i^T) d = rhs.
  std::optional<Eigen::VectorXd> solve(const Eigen::VectorXd& lambda, const Eigen::VectorXd& slack,
                                       const Eigen::VectorXd& rhs) {
    double* values = hessian_.valuePtr();
    std::fill(values, values + hessian_.nonZeros(), 0.0);
    for (std::size_t j = 0; j < diag_slots_.size(); ++j) values[diag_slots_[j]] = obj_curv_(Eigen::Index(j));
    for (std::size_t i = 0; i < layout_.size(); ++i) {
      const RowLayout& row = layout_[i];
      const auto& lg = local_grad_[i];
      const auto& lc = local_curv_[i];
      const auto& ll = local_log_[i];
      const bool has_log = !row.log_arg.empty();
      const double w1 = lambda(Eigen::Index(i));
      const double w2 = w1 / slack(Eigen::Index(i));
      std::size_t k = 0;
      for (std::size_t a = 0; a < row.vars.size(); ++a) {
        for (std::size_t b = 0; b < a; ++b) {
          double v = w2 * lg[a] * lg[b];
          if (has_log) v += w1 * ll[a] * ll[b];
          values[row.slots[k++]] += v;
        }
        double v = w2 * lg[a] * lg[a] + w1 * lc[a];
        if (has_log) v += w1 * ll[a] * ll[a];
        values[row.slots[k++]] += v;
      }
    }
    double max_diag = 0.0;
    for (int s : diag_slots_) max_diag = std::max(max_diag, values[s]);
    // Retry with growing diagonal shifts if the matrix is numerically singular.
    double shift = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      if (shift > 0.0) {
        for (int s : diag_slots_) values[s] += shift;
      }
      ldlt_.factorize(hessian_);
      if (ldlt_.info() == Eigen::Success && (ldlt_.vectorD().array() > 0.0).all()) {
        Eigen::VectorXd d = ldlt_.solve(rhs);
        if (d.allFinite()) return d;
      }
      const double next = shift == 0.0 ? 1e-14 * std::max(max_diag, 1.0) : shift * 100.0;
      for (int s : diag_slots_) values[s] -= shift;
      shift = next;
    }
    return std::nullopt;
  }

  const Eigen::VectorXd& values() const { return value_; }

 private:
  const Problem& problem_;
  std::vector<RowLayout> layout_;
  SpMat hessian_;
  std::vector<int> diag_slots_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  Eigen::VectorXd value_;
  std::vector<std::vector<double>> local_grad_;
  std::vector<std::vector<double>> local_curv_;
  std::vector<std::vector<double>> local_log_;
  Eigen::VectorXd obj_grad_;
  Eigen::VectorXd obj_curv_;
};

struct PathResult {
  std::vector<double> x;
  std::size_t newton_steps = 0;
  bool converged = false;
  bool stopped_early = false;
  double kkt_residual = kInf;
  std::vector<double> trace;
};

/**
 * Primal-dual interior-point method on f_i(x) + s_i = 0, s > 0. Rows may be
 * violated between iterations, so step lengths are limited only by s, the
 * multipliers and the variable domain rather than by the curvature of each
 * row. Every step aims at lambda_i s_i = sigma eta / m (eta = s^T lambda) and
 * backtracks on the norm of the perturbed KKT residual. `stop` is checked
 * after every step and ends the run when it returns true.
 */
PathResult primal_dual(const Problem& problem, std::vector<double> x, const BarrierOptions& opt,
                       const std::function<bool(std::span<const double>)>& stop) {
  NewtonKernel kernel(problem);
  const std::size_t n = problem.n();
  const std::size_t m = problem.rows.size();
  const auto mi = Eigen::Index(m);
  PathResult out;
  if (!kernel.evaluate(x)) {
    out.x = std::move(x);
    return out;
  }
  if (m == 0) {
    out.x = std::move(x);
    out.converged = true;
    out.kkt_residual = 0.0;
    return out;
  }

  const double obj0 = problem.objective.value(x);
  const double t0 = opt.initial_weight.value_or(std::max(1.0, double(m) / std::max(std::abs(obj0), 1.0)));
  Eigen::VectorXd slack = (-kernel.values()).cwiseMax(1e-12);
  Eigen::VectorXd lambda = (t0 * slack).cwiseInverse();
  const double aggressive = 1.0 / opt.weight_growth;
  double sigma = aggressive;

  struct Residual {
    double dual, primal, comp, norm;
  };
  auto residual = [&](const Eigen::VectorXd& lam, const Eigen::VectorXd& sl, double target) {
    const Eigen::VectorXd rd = kernel.combine(lam);
    const Eigen::VectorXd rp = kernel.values() + sl;
    const Eigen::VectorXd rc = lam.cwiseProduct(sl).array() - target;
    return Residual{rd.lpNorm<Eigen::Infinity>(), rp.lpNorm<Eigen::Infinity>(), rc.lpNorm<Eigen::Infinity>(),
                    std::sqrt(rd.squaredNorm() + rp.squaredNorm() + rc.squaredNorm())};
  };

  std::vector<double> trial(n);
  Eigen::VectorXd trial_slack(mi), trial_lambda(mi), dl(mi), ds(mi), rhs_rows(mi), jdx(mi);
  const Eigen::VectorXd no_mult = Eigen::VectorXd::Zero(mi);
  // Rounding eventually caps the attainable residual; stop once it no longer moves.
  std::size_t stalled = 0, restarts = 0;
  while (true) {
    kernel.evaluate(x);
    const double eta = slack.dot(lambda);
    const double obj = problem.objective.value(x);
    const double scale = std::max(1.0, kernel.combine(no_mult).lpNorm<Eigen::Infinity>());
    const Residual r = residual(lambda, slack, 0.0);
    out.kkt_residual = std::max({r.dual / scale, r.primal, eta / std::max(std::abs(obj), 1e-12)});
    out.trace.push_back(obj);
    if (out.kkt_residual <= opt.tolerance) {
      out.converged = true;
      break;
    }
    if (stalled >= 20) {
      if (out.kkt_residual > 1e3 * opt.tolerance && restarts < 5) {
        // Complementarity collapsed before the rows were satisfied. Re-centre on a
        // barrier level matched to the violation and carry on from the same x.
        const double mu = std::max(r.primal, opt.tolerance);
        for (Eigen::Index i = 0; i < mi; ++i) {
          slack(i) = std::max(-kernel.values()(i), mu);
          lambda(i) = std::max(lambda(i), mu / slack(i));
        }
        sigma = 0.5;
        stalled = 0;
        ++restarts;
        continue;
      }
      out.converged = out.kkt_residual <= 1e3 * opt.tolerance;
      break;
    }
    if (out.newton_steps >= opt.max_newton_steps) break;

    const double target = sigma * eta / double(m);
    const Eigen::VectorXd rp = kernel.values() + slack;
    for (Eigen::Index i = 0; i < mi; ++i) {
      const double rc = lambda(i) * slack(i) - target;
      rhs_rows(i) = (-rc + lambda(i) * rp(i)) / slack(i);
    }
    const auto dx = kernel.solve(lambda, slack, -kernel.combine(lambda) - kernel.combine(rhs_rows) + kernel.combine(no_mult));
    if (!dx) break;
    for (Eigen::Index i = 0; i < mi; ++i) {
      jdx(i) = kernel.row_dot(std::size_t(i), *dx);
      ds(i) = -rp(i) - jdx(i);
      dl(i) = rhs_rows(i) + lambda(i) / slack(i) * jdx(i);
    }

    // Fraction to the boundary for slacks, multipliers and positive-domain variables.
    double step = 1.0;
    for (Eigen::Index i = 0; i < mi; ++i) {
      if (ds(i) < 0.0) step = std::min(step, -slack(i) / ds(i));
      if (dl(i) < 0.0) step = std::min(step, -lambda(i) / dl(i));
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double dj = (*dx)(Eigen::Index(j));
      if (problem.positive[j] && dj < 0.0) step = std::min(step, -x[j] / dj);
    }
    step *= 0.99;

    const double r0 = residual(lambda, slack, target).norm;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt, step *= 0.5) {
      for (std::size_t j = 0; j < n; ++j) trial[j] = x[j] + step * (*dx)(Eigen::Index(j));
      if (!kernel.evaluate(trial)) continue;
      // Feasible rows take their exact slack; only violated rows follow the linear update.
      trial_slack = slack + step * ds;
      for (Eigen::Index i = 0; i < mi; ++i) {
        if (kernel.values()(i) < 0.0) trial_slack(i) = -kernel.values()(i);
      }
      trial_lambda = lambda + step * dl;
      if (residual(trial_lambda, trial_slack, target).norm <= (1.0 - 0.01 * step) * r0) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    stalled = step < 1e-6 ? stalled + 1 : 0;
    // Short steps mean the iterate left the central path; aim closer to it next time.
    sigma = step > 0.5 ? aggressive : std::min(0.5, 4.0 * sigma);
    x.swap(trial);
    slack.swap(trial_slack);
    lambda.swap(trial_lambda);
    ++out.newton_steps;
    if (stop && stop(x)) {
      out.stopped_early = true;
      break;
    }
  }
  out.x = std::move(x);
  return out;
}

/// Phase I on the untransformed rows: minimise a common slack sigma with
/// f_i(x) - sigma <= 0 and stop at the first strictly feasible iterate.
std::optional<std::vector<double>> find_strictly_feasible(const ConvexProgram& program,
                                                          std::span<const double> start,
                                                          const BarrierOptions& opt) {
  const std::size_t n = program.n_variables();
  std::vector<double> x0(n, 1.0);
  if (start.size() == n) std::copy(start.begin(), start.end(), x0.begin());
  Problem aux;
  for (std::size_t j = 0; j < n; ++j) {
    const bool positive = program.variables()[j].positive;
    if (!std::isfinite(x0[j]) || (positive && !(x0[j] > 0.0))) x0[j] = 1.0;
    aux.positive.push_back(positive);
  }
  const std::size_t sigma = n;
  aux.positive.push_back(false);
  aux.objective.linear.assign(n + 1, 0.0);
  aux.objective.linear[sigma] = 1.0;

  double worst = -kInf;
  for (const Constraint& c : program.constraints()) {
    SmoothRow row = to_row(c);
    row.linear.emplace_back(sigma, -1.0);
    aux.rows.push_back(std::move(row));
    worst = std::max(worst, c.value(x0));
  }
  if (!std::isfinite(worst)) return std::nullopt;
  x0.push_back(std::max(worst, 0.0) + 1.0);

  BarrierOptions phase_opt = opt;
  phase_opt.initial_weight = 1.0;
  phase_opt.tolerance = 1e-10;
  const auto path = primal_dual(aux, std::move(x0), phase_opt, [&](std::span<const double> x) {
    return x[sigma] < 0.0 && program.strictly_feasible(x.first(n));
  });
  if (!path.stopped_early) return std::nullopt;
  std::vector<double> x(path.x.begin(), path.x.begin() + std::ptrdiff_t(n));
  if (!program.strictly_feasible(x)) return std::nullopt;
  return x;
}

/**
 * Equivalent problem handed to the interior-point loop.
 *
 * Epigraph variables are folded into the objective: a variable with positive
 * cost that appears in one non-box row, only linearly and with a negative
 * coefficient, is tight at the optimum and can be replaced by the rest of the
 * row. Keeping it makes the iterates hug a curved boundary.
 *
 * Rows c 2^(r x_k) + a^T x + b <= 0 (x_k absent from the affine part) are
 * rewritten as r ln2 x_k + ln c - ln(-a^T x - b) <= 0, which has the same
 * strictly feasible set but far milder curvature for large r x_k.
 */
struct Reduction {
  struct Eliminated {
    std::size_t var;
    std::size_t row;
    double coef;  // total linear coefficient of var in the row, < 0
  };

  Problem problem;
  std::vector<std::optional<std::size_t>> to_reduced;
  std::vector<Eliminated> eliminated;
  const ConvexProgram* full = nullptr;

  std::vector<double> restrict(std::span<const double> x) const {
    std::vector<double> out(problem.n());
    for (std::size_t j = 0; j < to_reduced.size(); ++j) {
      if (to_reduced[j]) out[*to_reduced[j]] = x[j];
    }
    return out;
  }

  /// Full vector with each eliminated variable a hair above its row's bound.
  std::vector<double> expand(std::span<const double> xr) const {
    std::vector<double> x(to_reduced.size(), 0.0);
    for (std::size_t j = 0; j < to_reduced.size(); ++j) {
      if (to_reduced[j]) x[j] = xr[*to_reduced[j]];
    }
    for (const Eliminated& e : eliminated) {
      const double rest = full->constraints()[e.row].value(x);  // var is still 0 here
      const double v = rest / -e.coef;
      x[e.var] = v + 1e-12 * std::max(std::abs(v), 1e-300);
    }
    return x;
  }
};

std::optional<SmoothRow> as_log_row(const SmoothRow& row) {
  if (row.terms.size() != 1 || row.terms[0].kind != Term::Kind::Exp2 || row.linear.empty()) return std::nullopt;
  const Term& e = row.terms[0];
  for (const auto& [j, a] : row.linear) {
    if (j == e.var) return std::nullopt;
  }
  SmoothRow out;
  out.linear.emplace_back(e.var, e.rate * std::numbers::ln2);
  out.constant = std::log(e.coef);
  for (const auto& [j, a] : row.linear) out.log_arg.emplace_back(j, -a);
  out.log_constant = -row.constant;
  return out;
}

Reduction reduce(const ConvexProgram& program) {
  const std::size_t n = program.n_variables();
  const auto& cons = program.constraints();
  std::vector<std::size_t> appearances(n, 0);
  std::vector<bool> nonlinear(n, false);
  for (const Constraint& c : cons) {
    for (std::size_t j : c.support()) ++appearances[j];
    for (const Term& t : c.terms) nonlinear[t.var] = true;
  }

  Reduction red;
  red.full = &program;
  std::vector<bool> row_used(cons.size(), false);
  std::vector<bool> drop(n, false);
  for (std::size_t i = 0; i < cons.size(); ++i) {
    if (cons[i].box) continue;
    for (const auto& [j, a] : cons[i].linear) {
      if (row_used[i] || drop[j]) continue;
      if (program.objective()[j] <= 0.0 || appearances[j] != 1 || nonlinear[j] || program.variables()[j].positive) {
        continue;
      }
      double total = 0.0;
      for (const auto& [k, b] : cons[i].linear) {
        if (k == j) total += b;
      }
      if (total >= 0.0) continue;
      red.eliminated.push_back({j, i, total});
      row_used[i] = true;
      drop[j] = true;
    }
  }

  red.to_reduced.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (drop[j]) continue;
    red.to_reduced[j] = red.problem.positive.size();
    red.problem.positive.push_back(program.variables()[j].positive);
  }
  Objective& obj = red.problem.objective;
  obj.linear.assign(red.problem.n(), 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (red.to_reduced[j]) obj.linear[*red.to_reduced[j]] += program.objective()[j];
  }
  for (const auto& e : red.eliminated) {
    const double w = program.objective()[e.var] / -e.coef;
    const Constraint& c = cons[e.row];
    obj.offset += w * c.constant;
    for (const auto& [j, a] : c.linear) {
      if (j != e.var) obj.linear[*red.to_reduced[j]] += w * a;
    }
    for (Term t : c.terms) {
      t.coef *= w;
      t.var = *red.to_reduced[t.var];
      obj.terms.push_back(t);
    }
  }
  for (std::size_t i = 0; i < cons.size(); ++i) {
    if (row_used[i]) continue;
    SmoothRow row = to_row(cons[i]);
    for (auto& [j, a] : row.linear) j = *red.to_reduced[j];
    for (Term& t : row.terms) t.var = *red.to_reduced[t.var];
    if (auto log_row = as_log_row(row)) row = std::move(*log_row);
    red.problem.rows.push_back(std::move(row));
  }
  return red;
}

}  // namespace

BarrierResult solve_convex_program(const ConvexProgram& program, std::span<const double> start,
                                   const BarrierOptions& options) {
  BarrierResult result;
  std::vector<double> x0;
  // The main iteration tolerates small row violations, so a start that is
  // feasible up to the tolerance needs no phase I.
  if (start.size() == program.n_variables() && program.max_violation(start) <= options.tolerance) {
    x0.assign(start.begin(), start.end());
  } else {
    auto found = find_strictly_feasible(program, start, options);
    if (!found) {
      result.report.status = SolveStatus::Infeasible;
      result.report.kkt_residual = kInf;
      result.report.max_violation = kInf;
      return result;
    }
    x0 = std::move(*found);
  }

  const Reduction red = reduce(program);
  PathResult path = primal_dual(red.problem, red.restrict(x0), options, {});
  result.x = red.expand(path.x);
  result.report.iterations = path.newton_steps;
  result.report.objective_trace = std::move(path.trace);
  result.report.max_violation = program.max_violation(result.x);
  result.report.kkt_residual = path.kkt_residual;
  result.report.status = path.converged ? SolveStatus::Converged : SolveStatus::MaxIterations;
  return result;
}

}  // namespace relayfl
