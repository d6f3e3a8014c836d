#pragma once

// Floating wind farm installation: vessel fleet and anchor geometry
// decisions evaluated on duration, cost, fleet utilization and emissions.
//
// The installation duration comes from a deterministic cycle surrogate:
// every selected vessel repeats (load to deck capacity, transit, install at
// its rate) and the fleet works in parallel until all anchors are set.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "odesys/problem.hpp"

namespace odesys::windfarm {

enum VesselClass : std::size_t { small_vessel = 0, large_vessel = 1, crane_barge = 2 };
inline constexpr std::size_t kVesselClasses = 3;

struct VesselSpec {
  std::string name;
  double install_rate = 0.0;        ///< anchors per day
  double deck_capacity = 0.0;       ///< anchors per load
  double transit_days = 0.0;        ///< fixed overhead per load cycle
  double day_rate = 0.0;            ///< currency per day
  double emission_rate = 0.0;       ///< tCO2 per day
  double alt_deployment_prob = 0.0; ///< p_v in [0, 1]

  bool operator==(const VesselSpec&) const = default;
};

struct WindfarmParams {
  double working_point_force = 0.0;  ///< F_a, kN
  double resistance_coeff = 0.0;     ///< c1 in R_a = c1 * D * L^2
  double unit_cost_coeff = 0.0;      ///< c2 in unit cost = c2 * D * L
  int n_anchors = 0;
  std::array<VesselSpec, kVesselClasses> vessels;

  void validate() const;
  bool operator==(const WindfarmParams&) const = default;
};

/// Decision vector layout, bounds in brackets:
/// [small count 0..3, large count 0..2, crane barges 0..2,
///  anchor diameter 1.5..4 m, penetration length 2..8 m].
struct WindfarmDecision {
  int small = 0;
  int large = 0;
  int crane = 0;
  double diameter = 1.5;
  double length = 2.0;

  static WindfarmDecision from_vector(const DecisionVector& x);
  DecisionVector to_vector() const;
  std::array<int, kVesselClasses> counts() const { return {small, large, crane}; }
};

inline const std::array<GeneSpec, 5> kDomain = {{
    {"small_vessels", GeneKind::integer, 0, 3, 0},
    {"large_vessels", GeneKind::integer, 0, 2, 0},
    {"crane_barges", GeneKind::integer, 0, 2, 0},
    {"anchor_diameter", GeneKind::real, 1.5, 4.0, 0},
    {"penetration_length", GeneKind::real, 2.0, 8.0, 0},
}};

struct InstallationRun {
  double duration = 0.0;             ///< f1, days
  std::vector<double> vessel_days;   ///< busy time per selected vessel
  std::vector<std::size_t> vessel_class;
};

/// Anchors installed by one vessel of `spec` within `t` days.
double installed_by(const VesselSpec& spec, double t);

InstallationRun simulate_installation(const WindfarmDecision& x, const WindfarmParams& params);
double installation_cost(const WindfarmDecision& x, const WindfarmParams& params,
                         const InstallationRun& run);
double fleet_utilization(const WindfarmDecision& x, const WindfarmParams& params);
double emissions(const WindfarmDecision& x, const WindfarmParams& params,
                 const InstallationRun& run);
double anchor_resistance(double diameter, double length, const WindfarmParams& params);

/// g_f^(0) bounds, g_f^(1) at least one vessel, g_f^(2) R_a >= F_a.
std::vector<ConstraintViolation> windfarm_constraints(const DecisionVector& x,
                                                      const WindfarmParams& params);

inline const std::vector<std::string>& criteria_names() {
  static const std::vector<std::string> names = {"duration", "cost", "utilization",
                                                 "emissions"};
  return names;
}

class WindfarmModel final : public SystemModel {
 public:
  /// `grid_step` > 0 makes the default encoding snap diameter and length to
  /// that grid.
  explicit WindfarmModel(WindfarmParams params, double grid_step = 0.0);

  std::string_view kind() const override { return "windfarm"; }
  std::vector<std::string> criteria() const override { return criteria_names(); }
  std::vector<ConstraintViolation> domain_violations(const DecisionVector& x) const override;
  PerformanceVector capability(const DecisionVector& x, const TimeContext& time) const override;
  std::vector<ConstraintViolation> constraint_violations(const DecisionVector& x) const override;
  Encoding default_encoding() const override;

  const WindfarmParams& params() const noexcept { return params_; }
  double grid_step() const noexcept { return grid_step_; }

 private:
  WindfarmParams params_;
  double grid_step_;
};

MixedEncoding make_encoding(double grid_step);

/// Per-criterion extrema over the feasible points of the discretized
/// decision grid (integers exact, diameter/length on `grid_step`).
std::vector<CriterionRange> performance_extrema(const WindfarmParams& params,
                                                double grid_step = 0.1);

/// Two actors with the fixture weights: energy provider
/// w11 = w14 = 0.25, marine contractor w22 = w23 = 0.25. Every actor gets a
/// descending linear curve per criterion over `ranges`.
ProblemDefinition make_problem(std::shared_ptr<const WindfarmModel> model,
                               const std::vector<CriterionRange>& ranges);

/// Parameter set used by tests, fixtures and benchmarks.
WindfarmParams fixture_params();

}  // namespace odesys::windfarm
