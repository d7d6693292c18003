#include "relayfl/convex_program.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace relayfl {

double Term::value(double x) const {
  switch (kind) {
    case Kind::Square: return coef * x * x;
    case Kind::Inverse: return coef / x;
    case Kind::Exp2: return coef * std::exp2(rate * x);
  }
  return 0.0;
}

double Term::derivative(double x) const {
  switch (kind) {
    case Kind::Square: return 2.0 * coef * x;
    case Kind::Inverse: return -coef / (x * x);
    case Kind::Exp2: return coef * rate * std::numbers::ln2 * std::exp2(rate * x);
  }
  return 0.0;
}

double Term::second_derivative(double x) const {
  switch (kind) {
    case Kind::Square: return 2.0 * coef;
    case Kind::Inverse: return 2.0 * coef / (x * x * x);
    case Kind::Exp2: {
      const double k = rate * std::numbers::ln2;
      return coef * k * k * std::exp2(rate * x);
    }
  }
  return 0.0;
}

const char* to_string(ConvexityClass c) {
  switch (c) {
    case ConvexityClass::Affine: return "affine";
    case ConvexityClass::Quadratic: return "quadratic";
    case ConvexityClass::InverseSum: return "inverse-sum";
    case ConvexityClass::ExponentialAffine: return "exponential-affine";
  }
  return "?";
}

double Constraint::value(std::span<const double> x) const {
  double v = constant;
  for (const auto& [j, a] : linear) v += a * x[j];
  for (const Term& t : terms) v += t.value(x[t.var]);
  return v;
}

ConvexityClass Constraint::convexity() const {
  ConvexityClass c = ConvexityClass::Affine;
  for (const Term& t : terms) {
    switch (t.kind) {
      case Term::Kind::Exp2: return ConvexityClass::ExponentialAffine;
      case Term::Kind::Inverse: c = ConvexityClass::InverseSum; break;
      case Term::Kind::Square:
        if (c == ConvexityClass::Affine) c = ConvexityClass::Quadratic;
        break;
    }
  }
  return c;
}

std::vector<std::size_t> Constraint::support() const {
  std::vector<std::size_t> s;
  s.reserve(linear.size() + terms.size());
  for (const auto& [j, a] : linear) s.push_back(j);
  for (const Term& t : terms) s.push_back(t.var);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

std::size_t ConvexProgram::add_variable(std::string name, double scale, bool positive) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("variable scale must be positive");
  variables_.push_back({std::move(name), scale, positive});
  objective_.push_back(0.0);
  return variables_.size() - 1;
}

void ConvexProgram::add_constraint(Constraint c) {
  for (const auto& [j, a] : c.linear) {
    if (j >= variables_.size()) throw std::invalid_argument("constraint '" + c.label + "': bad variable index");
    if (!std::isfinite(a)) throw std::invalid_argument("constraint '" + c.label + "': non-finite coefficient");
  }
  for (const Term& t : c.terms) {
    if (t.var >= variables_.size()) throw std::invalid_argument("constraint '" + c.label + "': bad variable index");
    if (!(t.coef > 0.0) || !std::isfinite(t.coef)) {
      throw std::invalid_argument("constraint '" + c.label + "': nonlinear terms need a positive coefficient");
    }
    if (t.kind == Term::Kind::Inverse) variables_[t.var].positive = true;
  }
  constraints_.push_back(std::move(c));
}

void ConvexProgram::set_objective_coefficient(std::size_t var, double coef) {
  objective_.at(var) = coef;
}

std::size_t ConvexProgram::n_box_constraints() const {
  return static_cast<std::size_t>(
      std::count_if(constraints_.begin(), constraints_.end(), [](const Constraint& c) { return c.box; }));
}

std::optional<std::size_t> ConvexProgram::find_variable(const std::string& name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<const Constraint*> ConvexProgram::constraints_with_prefix(const std::string& prefix) const {
  std::vector<const Constraint*> out;
  for (const auto& c : constraints_) {
    if (c.label.rfind(prefix, 0) == 0) out.push_back(&c);
  }
  return out;
}

double ConvexProgram::objective_value(std::span<const double> x) const {
  double v = 0.0;
  for (std::size_t j = 0; j < objective_.size(); ++j) v += objective_[j] * x[j];
  return v;
}

bool ConvexProgram::in_domain(std::span<const double> x) const {
  if (x.size() != variables_.size()) return false;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!std::isfinite(x[j])) return false;
    if (variables_[j].positive && !(x[j] > 0.0)) return false;
  }
  return true;
}

double ConvexProgram::max_violation(std::span<const double> x) const {
  if (!in_domain(x)) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const auto& c : constraints_) worst = std::max(worst, c.value(x));
  return worst;
}

bool ConvexProgram::strictly_feasible(std::span<const double> x) const {
  if (!in_domain(x)) return false;
  return std::all_of(constraints_.begin(), constraints_.end(), [&](const Constraint& c) {
    const double v = c.value(x);
    return v < 0.0 && std::isfinite(v);
  });
}

}  // namespace relayfl
