#pragma once

// Dynamic vessel allocation: activities split into roles, roles assigned to
// vessels, and each vessel's roles chained into one sailing sequence.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "odesys/problem.hpp"

namespace odesys::alloc {

enum class ActivityKind { towing, maintenance };

std::string to_string(ActivityKind kind);
ActivityKind parse_activity_kind(const std::string& text);

struct Activity {
  std::string name;
  ActivityKind kind = ActivityKind::towing;
  int duration = 0;                     ///< y1, days
  int window_lo = 0;                    ///< y2 lower
  int window_hi = 0;                    ///< y2 upper
  std::size_t start_location = 0;       ///< y3, towing only
  std::size_t end_location = 0;         ///< y4, towing only
  std::vector<std::size_t> locations;   ///< y5, maintenance only
  std::optional<std::size_t> predecessor;  ///< y6

  bool operator==(const Activity&) const = default;
};

struct Role {
  std::string name;
  std::size_t activity = 0;             ///< y7
  std::vector<std::size_t> vessels;     ///< y8

  bool operator==(const Role&) const = default;
};

struct Vessel {
  std::string name;
  double mobilisation_rate = 0.0;       ///< y11, per day
  std::vector<double> speeds;           ///< y13, knots, strictly increasing
  std::vector<double> fuel_rates;       ///< y12 at each speed, per sailing day
  double fuel_price = 0.0;              ///< y14
  double standby_factor = 0.0;          ///< y15 in [0, 1]

  double max_speed() const { return speeds.back(); }
  bool operator==(const Vessel&) const = default;
};

struct AllocInstance {
  std::vector<std::string> locations;
  std::vector<std::vector<double>> distance;  ///< y10, nautical miles
  std::vector<Activity> activities;
  std::vector<Role> roles;
  std::vector<Vessel> vessels;

  /// Throws ValidationError when any parameter domain is violated.
  void validate() const;

  /// y9: roles whose parent is `a`, ascending.
  std::vector<std::size_t> roles_of(std::size_t a) const;
  /// Maintenance activities in index order; position = slot in x2.
  std::vector<std::size_t> maintenance_activities() const;
  /// Global speed band [min, max] over all vessels.
  std::pair<double, double> speed_band() const;

  bool operator==(const AllocInstance&) const = default;
};

/// x = (x1..x6). x2 holds a location index per maintenance activity;
/// x3 a vessel index per role. Speeds of unsequenced pairs are 0.
struct Schedule {
  std::vector<int> start;                         ///< x1 per activity
  std::vector<std::size_t> location;              ///< x2 per maintenance slot
  std::vector<std::size_t> vessel;                ///< x3 per role
  std::vector<std::vector<std::uint8_t>> next;    ///< x4, R x R
  std::vector<std::uint8_t> first;                ///< x5 per role
  std::vector<std::vector<double>> speed;         ///< x6, R x R

  static Schedule empty(const AllocInstance& inst);

  /// Flat layout [x1 | x2 | x3 | x4 row-major | x5 | x6 row-major].
  DecisionVector to_vector() const;
  /// Throws SchemaError on length mismatch. No domain checks.
  static Schedule from_vector(const AllocInstance& inst, const DecisionVector& x);

  bool operator==(const Schedule&) const = default;
};

std::size_t decision_length(const AllocInstance& inst);

/// theta = ceil(distance / (24 s)). Throws DomainError for s <= 0.
int sailing_duration(double distance, double speed);
int sailing_duration(const AllocInstance& inst, std::size_t from, std::size_t to, double speed);

/// delta = x1[a'] - (x1[a] + y1[a]) for the parents of r and r'.
int transition_time(const AllocInstance& inst, const Schedule& s, std::size_t r, std::size_t rp);

/// gamma = theta (y11 + y14 y12(s) - y15 y11) + y15 y11 delta.
double transition_cost(const Vessel& v, int theta, double fuel_rate, int delta);

/// y12[v](s); throws DomainError if s is not one of the vessel's speeds.
double fuel_rate(const Vessel& v, double speed);

/// (start, end) location of a role.
std::pair<std::size_t, std::size_t> role_locations(const AllocInstance& inst, const Schedule& s,
                                                   std::size_t r);

/// [f1 mobilisation distance, f2 cost, f3 fuel, f4 make-span].
PerformanceVector capability(const AllocInstance& inst, const Schedule& s);

inline const std::vector<std::string>& criteria_names() {
  static const std::vector<std::string> names = {"mobilisation_distance", "cost", "fuel",
                                                 "makespan"};
  return names;
}

/// Variable domains on the flat vector. Unsequenced pairs must carry speed 0.
std::vector<ConstraintViolation> domain_violations(const AllocInstance& inst,
                                                   const DecisionVector& x);

/// Families g1..g13, each evaluated independently. Names are "g1".."g13";
/// the detail names the offending tuple.
std::vector<ConstraintViolation> check_constraints(const AllocInstance& inst, const Schedule& s);

/// Random-key decoder. Key layout:
/// [vessel per role (R) | start offset per activity (A) |
///  location per maintenance activity (M) | speed per role (R) |
///  priority per activity (A)].
class AllocDecoder final : public RandomKeyDecoder {
 public:
  explicit AllocDecoder(std::shared_ptr<const AllocInstance> inst);

  std::size_t key_count() const override;
  DecisionVector decode(std::span<const double> keys) const override;
  Schedule decode_schedule(std::span<const double> keys) const;

  const AllocInstance& instance() const noexcept { return *inst_; }

 private:
  std::shared_ptr<const AllocInstance> inst_;
};

class AllocModel final : public SystemModel {
 public:
  explicit AllocModel(std::shared_ptr<const AllocInstance> inst);

  std::string_view kind() const override { return "alloc"; }
  std::vector<std::string> criteria() const override { return criteria_names(); }
  std::vector<ConstraintViolation> domain_violations(const DecisionVector& x) const override;
  PerformanceVector capability(const DecisionVector& x, const TimeContext& time) const override;
  std::vector<ConstraintViolation> constraint_violations(const DecisionVector& x) const override;
  Encoding default_encoding() const override;

  const AllocInstance& instance() const noexcept { return *inst_; }
  std::shared_ptr<const AllocInstance> instance_ptr() const noexcept { return inst_; }

 private:
  std::shared_ptr<const AllocInstance> inst_;
};

struct AnchorReport {
  std::vector<CriterionRange> ranges;
  bool exact = false;        ///< true when taken from full enumeration
  std::size_t samples = 0;   ///< schedules evaluated
};

/// Per-criterion extrema: exact enumeration if the instance fits the oracle
/// budget, otherwise `samples` decoded random key vectors.
AnchorReport preference_anchors(const AllocInstance& inst, std::size_t samples = 2000,
                                std::uint64_t seed = 1);

/// Operations (k = 0) and commercial (k = 1) actors with descending linear
/// curves over `ranges`, weights w12 = w24 = 0.5.
ProblemDefinition make_problem(std::shared_ptr<const AllocModel> model,
                               const std::vector<CriterionRange>& ranges);

/// 2 vessels, 3 activities (2 towing, 1 maintenance), 4 roles, 4 locations.
AllocInstance fixture_instance();

/// Larger random instance for benchmarks. Not oracle-tractable.
AllocInstance stress_instance(std::size_t vessels, std::size_t activities, std::uint64_t seed);

}  // namespace odesys::alloc
