#pragma once

// Problem container: capability, feasibility, desirability and
// acceptability, plus the per-candidate evaluation pipeline.

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "odesys/encoding.hpp"
#include "odesys/pfm.hpp"

namespace odesys {

using PerformanceVector = std::vector<double>;

enum class TimeMode { explicit_t, fixed_horizon, timeless };

std::string to_string(TimeMode mode);
TimeMode parse_time_mode(const std::string& text);

struct TimeContext {
  TimeMode mode = TimeMode::timeless;
  double horizon = 0.0;

  bool operator==(const TimeContext&) const = default;
};

/// One violated hard constraint. `margin` is the amount by which g > 0.
struct ConstraintViolation {
  std::string name;
  double margin = 0.0;
  std::string detail;
};

/// Equality constraints h = 0 are checked as the pair h <= tol, -h <= tol.
inline constexpr double kEqualityTolerance = 1e-9;

/// System behaviour: decision domain, performance functions and hard
/// constraints. Implementations must be immutable and thread-safe.
class SystemModel {
 public:
  virtual ~SystemModel() = default;

  virtual std::string_view kind() const = 0;
  virtual std::vector<std::string> criteria() const = 0;

  /// Violations of the decision-domain bounds g_f^(0).
  virtual std::vector<ConstraintViolation> domain_violations(
      const DecisionVector& x) const = 0;

  /// F(x, y, t). Called only for in-domain x. May throw CapabilityError.
  virtual PerformanceVector capability(const DecisionVector& x,
                                       const TimeContext& time) const = 0;

  /// Violations of the remaining hard constraints g_f^(1..).
  virtual std::vector<ConstraintViolation> constraint_violations(
      const DecisionVector& x) const = 0;

  virtual Encoding default_encoding() const = 0;
};

/// Admissible affine rescaling P -> scale * P + offset of one preference
/// column (scale > 0). Aggregation sees the rescaled score; acceptability
/// thresholds stay on the curve's own 0..100 scale.
struct AffineMap {
  double scale = 1.0;
  double offset = 0.0;

  double operator()(double p) const { return scale * p + offset; }
  bool operator==(const AffineMap&) const = default;
};

struct Actor {
  std::string id;
  /// One optional curve per criterion; empty means no interest.
  std::vector<std::optional<PreferenceCurve>> curves;

  bool operator==(const Actor&) const = default;
};

struct ProblemDefinition {
  std::shared_ptr<const SystemModel> model;
  std::vector<Actor> actors;
  WeightMatrix weights;
  std::map<ScoreKey, double> thresholds;  ///< P-bar per column, default 0
  std::map<ScoreKey, AffineMap> rescale;
  TimeContext time;

  std::size_t criterion_count() const;
  /// Every (k, i) with a curve, ordered by actor then criterion.
  std::vector<ScoreKey> score_columns() const;
  double threshold(ScoreKey key) const;

  /// Throws ValidationError / SchemaError on inconsistent shapes, invalid
  /// weights, thresholds outside [0, 100] or non-positive rescale factors.
  void validate() const;
};

/// Observed extrema of one performance function.
struct CriterionRange {
  double min = 0.0;
  double max = 0.0;

  bool operator==(const CriterionRange&) const = default;
};

struct FeasibilityReport {
  std::vector<ConstraintViolation> violations;
  bool feasible() const noexcept { return violations.empty(); }
};

struct Shortfall {
  ScoreKey key;
  double preference = 0.0;
  double threshold = 0.0;
  double margin = 0.0;  ///< preference - threshold, negative
};

struct AcceptabilityReport {
  std::vector<Shortfall> shortfalls;
  bool acceptable() const noexcept { return shortfalls.empty(); }
  double total_shortfall() const noexcept;
};

struct CandidateEvaluation {
  DecisionVector x;
  PerformanceVector f_values;  ///< empty when x is outside its domain
  bool feasible = false;
  std::vector<ConstraintViolation> violations;
  /// Raw curve scores per ProblemDefinition::score_columns(); empty unless
  /// feasible.
  std::vector<double> p_values;
  bool acceptable = false;
  std::vector<Shortfall> shortfalls;
  bool clamped = false;  ///< some curve was evaluated outside its range
};

/// Throws DomainError naming the first violated domain bound.
PerformanceVector evaluate_capability(const ProblemDefinition& problem,
                                      const DecisionVector& x);

FeasibilityReport check_feasibility(const ProblemDefinition& problem,
                                    const DecisionVector& x);

AcceptabilityReport check_acceptability(std::span<const ScoreKey> columns,
                                        std::span<const double> p_values,
                                        const std::map<ScoreKey, double>& thresholds);

/// Domain -> capability -> feasibility -> curves -> acceptability.
/// Infeasible candidates stop before the curves.
CandidateEvaluation evaluate_candidate(const ProblemDefinition& problem,
                                       const DecisionVector& x);

/// Preference row fed to the aggregator: p_values with each column's
/// AffineMap applied.
std::vector<double> aggregation_row(const ProblemDefinition& problem,
                                    std::span<const double> p_values);

/// Resolution at which two aggregated scores count as tied.
inline constexpr double kZTieQuantum = 1e-9;

/// Strict ranking order: higher Z first (at kZTieQuantum resolution), then
/// the lexicographically smaller decision vector.
bool ranks_before(double za, const DecisionVector& xa, double zb, const DecisionVector& xb);

}  // namespace odesys
