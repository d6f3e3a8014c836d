#include <gtest/gtest.h>

#include <algorithm>
#include <memory>

#include "odesys/alloc.hpp"
#include "odesys/errors.hpp"
#include "odesys/linear_model.hpp"
#include "odesys/random.hpp"
#include "odesys/windfarm.hpp"

using namespace odesys;

namespace {

bool has_violation(const std::vector<ConstraintViolation>& v, const std::string& name) {
  return std::any_of(v.begin(), v.end(), [&](const auto& c) { return c.name == name; });
}

ProblemDefinition windfarm_problem(double fa = 1500.0) {
  auto params = windfarm::fixture_params();
  params.working_point_force = fa;
  auto model = std::make_shared<windfarm::WindfarmModel>(params);
  return windfarm::make_problem(model, {{10, 60}, {1e6, 5e6}, {0, 1}, {100, 2000}});
}

// Two integer variables in 0..4, criteria x0 and x1, actor preferring small
// x0 and large x1, constraint x0 + x1 <= 6.
ProblemDefinition linear_problem() {
  std::vector<GeneSpec> vars = {{"a", GeneKind::integer, 0, 4, 0}, {"b", GeneKind::integer, 0, 4, 0}};
  std::vector<LinearFunction> perf = {{"fa", {1, 0}, 0}, {"fb", {0, 1}, 0}};
  std::vector<LinearConstraint> cons = {{"budget", {1, 1}, Relation::less_equal, 6}};
  ProblemDefinition p;
  p.model = std::make_shared<LinearModel>(vars, perf, cons);
  Actor a{"only", {PreferenceCurve::linear(0, 4, false), PreferenceCurve::linear(0, 4, true)}};
  p.actors = {a};
  p.weights.set({0, 0}, 0.5);
  p.weights.set({0, 1}, 0.5);
  p.validate();
  return p;
}

// Hand-built schedule on the alloc fixture: the small vessel takes the
// tow-out lead then the tow-on, the large vessel assists the tow-out then
// services the yard.
alloc::Schedule hand_schedule(const alloc::AllocInstance& inst) {
  auto s = alloc::Schedule::empty(inst);
  s.start = {0, 3, 4};
  s.location = {3};
  s.vessel = {0, 1, 0, 1};
  s.first = {1, 1, 0, 0};
  s.next[0][2] = 1;
  s.next[1][3] = 1;
  s.speed[0][2] = 8.0;
  s.speed[1][3] = 10.0;
  return s;
}

ProblemDefinition alloc_problem() {
  auto inst = std::make_shared<const alloc::AllocInstance>(alloc::fixture_instance());
  auto model = std::make_shared<alloc::AllocModel>(inst);
  return alloc::make_problem(model, {{0, 300}, {0, 67000}, {0, 10}, {8, 14}});
}

}  // namespace

TEST(EvaluateCapability, WindfarmSingleSmallVessel) {
  const auto p = windfarm_problem();
  const auto f = evaluate_capability(p, {1, 0, 0, 2.0, 4.0});
  // 48 anchors at 12 per load, 7-day cycles (1 transit + 6 installing).
  ASSERT_EQ(f.size(), 4u);
  EXPECT_DOUBLE_EQ(f[0], 28.0);
  EXPECT_DOUBLE_EQ(f[1], 48 * 2000.0 * 2.0 * 4.0 + 40000.0 * 28.0);
  EXPECT_DOUBLE_EQ(f[2], 0.3);
  EXPECT_DOUBLE_EQ(f[3], 25.0 * 28.0);
}

TEST(EvaluateCapability, AllocMakespanIsLatestEndMinusEarliestStart) {
  const auto p = alloc_problem();
  const auto& inst = dynamic_cast<const alloc::AllocModel&>(*p.model).instance();
  const auto s = hand_schedule(inst);
  const auto f = evaluate_capability(p, s.to_vector());
  int end = 0, begin = 1 << 30;
  for (std::size_t a = 0; a < inst.activities.size(); ++a) {
    end = std::max(end, s.start[a] + inst.activities[a].duration);
    begin = std::min(begin, s.start[a]);
  }
  EXPECT_EQ(f[3], end - begin);
  EXPECT_EQ(f[3], 8.0);
}

TEST(EvaluateCapability, DegenerateScheduleIsDomainError) {
  const auto p = alloc_problem();
  const auto& inst = dynamic_cast<const alloc::AllocModel&>(*p.model).instance();
  // All-zero schedule: tow_on starts outside its window [1, 8].
  EXPECT_THROW(evaluate_capability(p, alloc::Schedule::empty(inst).to_vector()), DomainError);
  EXPECT_THROW(evaluate_capability(p, {}), DomainError);
}

TEST(EvaluateCapability, DomainErrorNamesTheBound) {
  const auto p = windfarm_problem();
  try {
    evaluate_capability(p, {4, 0, 0, 2.0, 4.0});
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("small_vessels.upper"), std::string::npos) << e.what();
  }
}

TEST(CheckFeasibility, NoVesselViolatesG1) {
  const auto r = check_feasibility(windfarm_problem(), {0, 0, 0, 3.0, 6.0});
  EXPECT_FALSE(r.feasible());
  EXPECT_TRUE(has_violation(r.violations, "g1"));
}

TEST(CheckFeasibility, SufficientResistanceSatisfiesG2) {
  // R_a = 20 * 4 * 64 = 5120 >= 1500.
  const auto r = check_feasibility(windfarm_problem(), {1, 0, 0, 4.0, 8.0});
  EXPECT_TRUE(r.feasible());
  const auto weak = check_feasibility(windfarm_problem(), {1, 0, 0, 1.5, 2.0});
  ASSERT_TRUE(has_violation(weak.violations, "g2"));
  EXPECT_DOUBLE_EQ(weak.violations.front().margin, 1500.0 - 20.0 * 1.5 * 4.0);
}

TEST(CheckFeasibility, AllocSharedVesselWithinActivityViolatesG1) {
  const auto p = alloc_problem();
  const auto& inst = dynamic_cast<const alloc::AllocModel&>(*p.model).instance();
  auto s = hand_schedule(inst);
  EXPECT_TRUE(check_feasibility(p, s.to_vector()).feasible());
  s.vessel[1] = 0;  // both tow-out roles on the small vessel
  EXPECT_TRUE(has_violation(check_feasibility(p, s.to_vector()).violations, "g1"));
}

TEST(CheckFeasibility, LinearEqualityWithinTolerance) {
  std::vector<GeneSpec> vars = {{"a", GeneKind::real, 0, 1, 0}};
  LinearModel m(vars, {{"f", {1}, 0}}, {{"eq", {1}, Relation::equal, 0.5}});
  EXPECT_TRUE(m.constraint_violations({0.5}).empty());
  EXPECT_TRUE(m.constraint_violations({0.5 + 5e-10}).empty());
  EXPECT_FALSE(m.constraint_violations({0.5 + 1e-8}).empty());
  EXPECT_FALSE(m.constraint_violations({0.5 - 1e-8}).empty());
}

TEST(CheckAcceptability, ZeroThresholdsAlwaysAcceptable) {
  const std::vector<ScoreKey> cols = {{0, 0}, {0, 1}};
  const std::vector<double> p = {0.0, 0.0};
  EXPECT_TRUE(check_acceptability(cols, p, {}).acceptable());
  EXPECT_TRUE(check_acceptability(cols, p, {{{0, 0}, 0.0}, {{0, 1}, 0.0}}).acceptable());
}

TEST(CheckAcceptability, BelowThresholdReportsNegativeMargin) {
  const std::vector<ScoreKey> cols = {{0, 0}};
  const std::vector<double> p = {45.0};
  const auto r = check_acceptability(cols, p, {{{0, 0}, 50.0}});
  ASSERT_EQ(r.shortfalls.size(), 1u);
  EXPECT_DOUBLE_EQ(r.shortfalls[0].margin, -5.0);
  EXPECT_DOUBLE_EQ(r.total_shortfall(), 5.0);
}

TEST(CheckAcceptability, BoundaryIsAcceptable) {
  const std::vector<ScoreKey> cols = {{0, 0}};
  const std::vector<double> p = {50.0};
  EXPECT_TRUE(check_acceptability(cols, p, {{{0, 0}, 50.0}}).acceptable());
}

TEST(EvaluateCandidate, FeasibleAcceptableFullRecord) {
  const auto p = linear_problem();
  const auto e = evaluate_candidate(p, {1, 3});
  EXPECT_TRUE(e.feasible);
  EXPECT_TRUE(e.acceptable);
  ASSERT_EQ(e.f_values, (PerformanceVector{1, 3}));
  ASSERT_EQ(e.p_values.size(), 2u);
  EXPECT_DOUBLE_EQ(e.p_values[0], 75.0);
  EXPECT_DOUBLE_EQ(e.p_values[1], 75.0);
}

TEST(EvaluateCandidate, InfeasibleCarriesNoPreferences) {
  const auto p = linear_problem();
  const auto e = evaluate_candidate(p, {4, 4});
  EXPECT_FALSE(e.feasible);
  EXPECT_FALSE(e.acceptable);
  EXPECT_TRUE(e.p_values.empty());
  EXPECT_TRUE(has_violation(e.violations, "budget"));
}

TEST(EvaluateCandidate, OutOfDomainHasNoPerformance) {
  const auto e = evaluate_candidate(linear_problem(), {5, 0});
  EXPECT_FALSE(e.feasible);
  EXPECT_TRUE(e.f_values.empty());
}

TEST(EvaluateCandidate, BelowThresholdIsUnacceptable) {
  auto p = linear_problem();
  p.thresholds[{0, 1}] = 60.0;
  const auto e = evaluate_candidate(p, {1, 2});
  EXPECT_TRUE(e.feasible);
  EXPECT_FALSE(e.acceptable);
  ASSERT_EQ(e.shortfalls.size(), 1u);
  EXPECT_DOUBLE_EQ(e.shortfalls[0].margin, -10.0);
  EXPECT_EQ(e.p_values.size(), 2u);
}

TEST(EvaluateCandidate, ClampedFlagOutsideCurveRange) {
  const auto p = windfarm_problem();
  // 28 days lies below the narrow duration range [30, 40].
  auto model = std::make_shared<windfarm::WindfarmModel>(windfarm::fixture_params());
  const auto narrow = windfarm::make_problem(model, {{30, 40}, {1e6, 5e6}, {0, 1}, {100, 2000}});
  EXPECT_FALSE(evaluate_candidate(p, {1, 0, 0, 2.0, 4.0}).clamped);
  const auto e = evaluate_candidate(narrow, {1, 0, 0, 4.0, 5.0});
  EXPECT_TRUE(e.clamped);
  EXPECT_EQ(e.p_values[0], 100.0);
}

TEST(EvaluateCandidate, PureFunction) {
  const auto p = windfarm_problem();
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const DecisionVector x = {double(rng.below(4)), double(rng.below(3)), double(rng.below(3)),
                              rng.uniform(1.5, 4.0), rng.uniform(2.0, 8.0)};
    const auto a = evaluate_candidate(p, x);
    const auto b = evaluate_candidate(p, x);
    EXPECT_EQ(a.f_values, b.f_values);
    EXPECT_EQ(a.p_values, b.p_values);
    EXPECT_EQ(a.feasible, b.feasible);
    EXPECT_EQ(a.acceptable, b.acceptable);
  }
}

TEST(EvaluateCandidate, InSfaIffFeasibleAndAcceptable) {
  auto p = windfarm_problem();
  p.thresholds[{0, 0}] = 40.0;
  p.thresholds[{1, 2}] = 30.0;
  Rng rng(11);
  for (int t = 0; t < 300; ++t) {
    const DecisionVector x = {double(rng.below(4)), double(rng.below(3)), double(rng.below(3)),
                              rng.uniform(1.5, 4.0), rng.uniform(2.0, 8.0)};
    const auto e = evaluate_candidate(p, x);
    const bool feasible = check_feasibility(p, x).feasible();
    bool acceptable = false;
    if (feasible) acceptable = check_acceptability(p.score_columns(), e.p_values, p.thresholds).acceptable();
    EXPECT_EQ(e.feasible && e.acceptable, feasible && acceptable);
  }
}

TEST(EvaluateCandidate, RaisingThresholdNeverAddsCandidates) {
  const auto base = windfarm_problem();
  Rng rng(5);
  std::vector<DecisionVector> xs;
  for (int t = 0; t < 200; ++t) {
    xs.push_back({double(rng.below(4)), double(rng.below(3)), double(rng.below(3)),
                  rng.uniform(1.5, 4.0), rng.uniform(2.0, 8.0)});
  }
  const auto cols = base.score_columns();
  for (int trial = 0; trial < 20; ++trial) {
    auto lo = base;
    for (const auto& c : cols) lo.thresholds[c] = rng.uniform(0.0, 60.0);
    auto hi = lo;
    const auto& key = cols[rng.below(cols.size())];
    hi.thresholds[key] = std::min(100.0, lo.thresholds[key] + rng.uniform(0.0, 40.0));
    for (const auto& x : xs) {
      if (evaluate_candidate(hi, x).acceptable) EXPECT_TRUE(evaluate_candidate(lo, x).acceptable);
    }
  }
}

TEST(EvaluateCandidate, TimelessIgnoresHorizon) {
  auto p = windfarm_problem();
  const DecisionVector x = {1, 1, 0, 3.0, 5.0};
  p.time = {TimeMode::timeless, 0.0};
  const auto a = evaluate_capability(p, x);
  for (double h : {1.0, 30.0, 365.0, 1e6}) {
    p.time.horizon = h;
    EXPECT_EQ(evaluate_capability(p, x), a);
  }
}

TEST(ProblemDefinition, ValidateRejectsBadShapes) {
  auto p = linear_problem();
  p.thresholds[{0, 0}] = 120.0;
  EXPECT_THROW(p.validate(), ValidationError);

  p = linear_problem();
  p.weights.set({0, 0}, 0.4);
  EXPECT_THROW(p.validate(), ValidationError);

  p = linear_problem();
  p.actors[0].curves.pop_back();
  EXPECT_ANY_THROW(p.validate());

  p = linear_problem();
  p.rescale[{0, 0}] = {0.0, 1.0};
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(ProblemDefinition, ScoreColumnsOrderedByActorThenCriterion) {
  const auto p = windfarm_problem();
  const auto cols = p.score_columns();
  ASSERT_EQ(cols.size(), 8u);
  EXPECT_TRUE(std::is_sorted(cols.begin(), cols.end()));
}

TEST(ProblemDefinition, AggregationRowAppliesRescale) {
  auto p = linear_problem();
  p.rescale[{0, 1}] = {2.0, -3.0};
  const std::vector<double> pv = {10.0, 20.0};
  EXPECT_EQ(aggregation_row(p, pv), (std::vector<double>{10.0, 37.0}));
}

TEST(Ranking, TiesBrokenLexicographically) {
  EXPECT_TRUE(ranks_before(1.0, {5}, 0.5, {0}));
  EXPECT_FALSE(ranks_before(0.5, {0}, 1.0, {5}));
  EXPECT_TRUE(ranks_before(1.0, {0, 2}, 1.0 + 1e-12, {0, 3}));
  EXPECT_FALSE(ranks_before(1.0 + 1e-12, {0, 3}, 1.0, {0, 2}));
  EXPECT_FALSE(ranks_before(1.0, {1}, 1.0, {1}));
}

TEST(TimeMode, RoundTripsNames) {
  for (auto m : {TimeMode::explicit_t, TimeMode::fixed_horizon, TimeMode::timeless}) {
    EXPECT_EQ(parse_time_mode(to_string(m)), m);
  }
  EXPECT_ANY_THROW(parse_time_mode("sometimes"));
}
