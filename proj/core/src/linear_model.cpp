#include "odesys/linear_model.hpp"

#include <cmath>
#include <sstream>

#include "odesys/errors.hpp"

namespace odesys {

std::string to_string(Relation relation) {
  switch (relation) {
    case Relation::less_equal:
      return "<=";
    case Relation::greater_equal:
      return ">=";
    case Relation::equal:
      return "=";
  }
  return "<=";
}

Relation parse_relation(const std::string& text) {
  if (text == "<=") return Relation::less_equal;
  if (text == ">=") return Relation::greater_equal;
  if (text == "=" || text == "==") return Relation::equal;
  throw ValidationError("unknown constraint relation '" + text + "'");
}

namespace {

double dot(const std::vector<double>& a, const DecisionVector& x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * x[i];
  return acc;
}

}  // namespace

double LinearFunction::operator()(const DecisionVector& x) const {
  return dot(coefficients, x) + constant;
}

LinearModel::LinearModel(std::vector<GeneSpec> variables,
                         std::vector<LinearFunction> performance,
                         std::vector<LinearConstraint> constraints)
    : variables_(std::move(variables)),
      performance_(std::move(performance)),
      constraints_(std::move(constraints)) {
  if (variables_.empty()) throw ValidationError("custom model has no variables");
  if (performance_.empty()) throw ValidationError("custom model has no performance functions");
  for (const auto& f : performance_) {
    if (f.coefficients.size() != variables_.size()) {
      throw SchemaError("performance '" + f.name + "' coefficient count mismatch");
    }
  }
  for (const auto& g : constraints_) {
    if (g.coefficients.size() != variables_.size()) {
      throw SchemaError("constraint '" + g.name + "' coefficient count mismatch");
    }
  }
  MixedEncoding check(variables_);  // validates bounds
}

std::vector<std::string> LinearModel::criteria() const {
  std::vector<std::string> names;
  for (const auto& f : performance_) names.push_back(f.name);
  return names;
}

std::vector<ConstraintViolation> LinearModel::domain_violations(const DecisionVector& x) const {
  std::vector<ConstraintViolation> out;
  if (x.size() != variables_.size()) {
    out.push_back({"g0:length", 1.0, "decision vector length mismatch"});
    return out;
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& v = variables_[i];
    if (!std::isfinite(x[i])) {
      out.push_back({"g0:" + v.name, 1.0, "not finite"});
      continue;
    }
    if (x[i] < v.lower) out.push_back({"g0:" + v.name + ".lower", v.lower - x[i], ""});
    if (x[i] > v.upper) out.push_back({"g0:" + v.name + ".upper", x[i] - v.upper, ""});
    if (v.kind == GeneKind::integer && x[i] != std::round(x[i])) {
      out.push_back({"g0:" + v.name + ".integer", std::abs(x[i] - std::round(x[i])), ""});
    }
  }
  return out;
}

PerformanceVector LinearModel::capability(const DecisionVector& x, const TimeContext&) const {
  PerformanceVector f;
  f.reserve(performance_.size());
  for (const auto& p : performance_) f.push_back(p(x));
  return f;
}

std::vector<ConstraintViolation> LinearModel::constraint_violations(const DecisionVector& x) const {
  std::vector<ConstraintViolation> out;
  for (const auto& g : constraints_) {
    const double lhs = dot(g.coefficients, x);
    const double h = lhs - g.rhs;
    switch (g.relation) {
      case Relation::less_equal:
        if (h > 0.0) out.push_back({g.name, h, ""});
        break;
      case Relation::greater_equal:
        if (h < 0.0) out.push_back({g.name, -h, ""});
        break;
      case Relation::equal:
        if (h > kEqualityTolerance) out.push_back({g.name + "+", h, ""});
        if (-h > kEqualityTolerance) out.push_back({g.name + "-", -h, ""});
        break;
    }
  }
  return out;
}

Encoding LinearModel::default_encoding() const { return MixedEncoding(variables_); }

}  // namespace odesys
