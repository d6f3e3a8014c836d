#pragma once

#include <string>
#include <vector>

#include "odesys/problem.hpp"

namespace odesys {

enum class Relation { less_equal, greater_equal, equal };

std::string to_string(Relation relation);
Relation parse_relation(const std::string& text);

struct LinearFunction {
  std::string name;
  std::vector<double> coefficients;
  double constant = 0.0;

  double operator()(const DecisionVector& x) const;
  bool operator==(const LinearFunction&) const = default;
};

struct LinearConstraint {
  std::string name;
  std::vector<double> coefficients;
  Relation relation = Relation::less_equal;
  double rhs = 0.0;

  bool operator==(const LinearConstraint&) const = default;
};

/// User-defined model: bounded integer/real variables, linear performance
/// functions and linear hard constraints. Equalities are checked as two
/// opposing inequalities within kEqualityTolerance.
class LinearModel final : public SystemModel {
 public:
  LinearModel(std::vector<GeneSpec> variables, std::vector<LinearFunction> performance,
              std::vector<LinearConstraint> constraints);

  std::string_view kind() const override { return "custom"; }
  std::vector<std::string> criteria() const override;
  std::vector<ConstraintViolation> domain_violations(const DecisionVector& x) const override;
  PerformanceVector capability(const DecisionVector& x, const TimeContext& time) const override;
  std::vector<ConstraintViolation> constraint_violations(const DecisionVector& x) const override;
  Encoding default_encoding() const override;

  const std::vector<GeneSpec>& variables() const noexcept { return variables_; }
  const std::vector<LinearFunction>& performance() const noexcept { return performance_; }
  const std::vector<LinearConstraint>& constraints() const noexcept { return constraints_; }

 private:
  std::vector<GeneSpec> variables_;
  std::vector<LinearFunction> performance_;
  std::vector<LinearConstraint> constraints_;
};

}  // namespace odesys
