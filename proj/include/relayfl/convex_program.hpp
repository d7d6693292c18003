#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace relayfl {

/// Separable nonlinear term of a constraint function.
///   Square:  coef * x^2
///   Inverse: coef / x          (requires x > 0)
///   Exp2:    coef * 2^(rate*x)
/// coef must be positive so that every term is convex.
struct Term {
  enum class Kind { Square, Inverse, Exp2 };
  Kind kind = Kind::Square;
  std::size_t var = 0;
  double coef = 1.0;
  double rate = 1.0;

  double value(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;
};

enum class ConvexityClass { Affine, Quadratic, InverseSum, ExponentialAffine };

const char* to_string(ConvexityClass c);

/// Smooth convex inequality  sum_j a_j x_j + b + sum_k term_k(x) <= 0.
struct Constraint {
  std::string label;
  std::vector<std::pair<std::size_t, double>> linear;
  double constant = 0.0;
  std::vector<Term> terms;
  bool box = false;

  double value(std::span<const double> x) const;
  ConvexityClass convexity() const;
  /// Distinct variables the function depends on, ascending.
  std::vector<std::size_t> support() const;
};

struct Variable {
  std::string name;
  /// Unit of the variable: physical value = scale * program value.
  double scale = 1.0;
  /// Domain restricted to x > 0 (set automatically for Inverse terms).
  bool positive = false;
};

/// Minimise c^T x subject to a list of smooth convex inequalities.
class ConvexProgram {
 public:
  std::size_t add_variable(std::string name, double scale = 1.0, bool positive = false);
  /// Throws std::invalid_argument on an out-of-range index or a non-convex term.
  void add_constraint(Constraint c);
  void set_objective_coefficient(std::size_t var, double coef);

  std::size_t n_variables() const { return variables_.size(); }
  std::size_t n_constraints() const { return constraints_.size(); }
  std::size_t n_box_constraints() const;

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const std::vector<double>& objective() const { return objective_; }

  std::optional<std::size_t> find_variable(const std::string& name) const;
  /// Constraints whose label starts with the given prefix.
  std::vector<const Constraint*> constraints_with_prefix(const std::string& prefix) const;

  double objective_value(std::span<const double> x) const;
  /// max(0, max_i f_i(x)); +inf outside the variable domain.
  double max_violation(std::span<const double> x) const;
  bool in_domain(std::span<const double> x) const;
  bool strictly_feasible(std::span<const double> x) const;

 private:
  std::vector<Variable> variables_;
  std::vector<double> objective_;
  std::vector<Constraint> constraints_;
};

}  // namespace relayfl
