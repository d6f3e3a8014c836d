#include "odesys/windfarm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "odesys/errors.hpp"

namespace odesys::windfarm {

void WindfarmParams::validate() const {
  if (n_anchors <= 0) throw ValidationError("n_anchors must be positive");
  if (!(working_point_force >= 0.0)) throw ValidationError("F_a must be non-negative");
  if (!(resistance_coeff >= 0.0) || !(unit_cost_coeff >= 0.0)) {
    throw ValidationError("anchor coefficients must be non-negative");
  }
  for (const auto& v : vessels) {
    const bool ok = v.install_rate >= 0.0 && v.deck_capacity >= 0.0 &&
                    v.transit_days >= 0.0 && v.day_rate >= 0.0 &&
                    v.emission_rate >= 0.0 && v.alt_deployment_prob >= 0.0 &&
                    v.alt_deployment_prob <= 1.0;
    if (!ok) throw ValidationError("vessel '" + v.name + "' has an out-of-range parameter");
  }
}

WindfarmDecision WindfarmDecision::from_vector(const DecisionVector& x) {
  if (x.size() != kDomain.size()) throw SchemaError("windfarm decision needs 5 entries");
  return {static_cast<int>(std::lround(x[0])), static_cast<int>(std::lround(x[1])),
          static_cast<int>(std::lround(x[2])), x[3], x[4]};
}

DecisionVector WindfarmDecision::to_vector() const {
  return {static_cast<double>(small), static_cast<double>(large),
          static_cast<double>(crane), diameter, length};
}

namespace {

bool productive(const VesselSpec& v) { return v.install_rate > 0.0 && v.deck_capacity > 0.0; }

double cycle_days(const VesselSpec& v) { return v.transit_days + v.deck_capacity / v.install_rate; }

}  // namespace

double installed_by(const VesselSpec& spec, double t) {
  if (!productive(spec) || t <= 0.0) return 0.0;
  const double cycle = cycle_days(spec);
  const double full = std::floor(t / cycle);
  const double into = t - full * cycle - spec.transit_days;
  return full * spec.deck_capacity + std::clamp(spec.install_rate * into, 0.0, spec.deck_capacity);
}

InstallationRun simulate_installation(const WindfarmDecision& x, const WindfarmParams& params) {
  const auto counts = x.counts();
  const double n = static_cast<double>(params.n_anchors);

  double horizon = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < kVesselClasses; ++c) {
    const auto& v = params.vessels[c];
    if (counts[c] > 0 && productive(v)) {
      horizon = std::min(horizon, std::ceil(n / v.deck_capacity) * cycle_days(v));
    }
  }
  if (!std::isfinite(horizon)) {
    throw CapabilityError("selected fleet has zero installation capacity");
  }

  auto fleet_installed = [&](double t) {
    double total = 0.0;
    for (std::size_t c = 0; c < kVesselClasses; ++c) {
      if (counts[c] > 0) total += counts[c] * installed_by(params.vessels[c], t);
    }
    return total;
  };

  // Fleet output is piecewise linear between the phase changes of its
  // vessels: collect them and solve on the segment where n is crossed.
  std::vector<double> events{0.0, horizon};
  for (std::size_t c = 0; c < kVesselClasses; ++c) {
    const auto& v = params.vessels[c];
    if (counts[c] == 0 || !productive(v)) continue;
    const double cycle = cycle_days(v);
    for (double start = 0.0; start < horizon; start += cycle) {
      if (start + v.transit_days < horizon) events.push_back(start + v.transit_days);
      if (start + cycle < horizon) events.push_back(start + cycle);
    }
  }
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());

  double duration = horizon;
  for (std::size_t j = 1; j < events.size(); ++j) {
    const double hi_value = fleet_installed(events[j]);
    if (hi_value < n) continue;
    if (hi_value == n) {
      duration = events[j];
      break;
    }
    const double lo = events[j - 1];
    const double lo_value = fleet_installed(lo);
    const double mid = 0.5 * (lo + events[j]);
    double slope = 0.0;
    for (std::size_t c = 0; c < kVesselClasses; ++c) {
      const auto& v = params.vessels[c];
      if (counts[c] == 0 || !productive(v)) continue;
      const double phase = mid - std::floor(mid / cycle_days(v)) * cycle_days(v);
      if (phase > v.transit_days) slope += counts[c] * v.install_rate;
    }
    duration = slope > 0.0 ? lo + (n - lo_value) / slope : events[j];
    break;
  }

  InstallationRun run;
  run.duration = duration;
  for (std::size_t c = 0; c < kVesselClasses; ++c) {
    for (int i = 0; i < counts[c]; ++i) {
      run.vessel_days.push_back(duration);
      run.vessel_class.push_back(c);
    }
  }
  return run;
}

double installation_cost(const WindfarmDecision& x, const WindfarmParams& params,
                         const InstallationRun& run) {
  const double capex = params.n_anchors * params.unit_cost_coeff * x.diameter * x.length;
  double opex = 0.0;
  for (std::size_t i = 0; i < run.vessel_days.size(); ++i) {
    opex += params.vessels[run.vessel_class[i]].day_rate * run.vessel_days[i];
  }
  return capex + opex;
}

double fleet_utilization(const WindfarmDecision& x, const WindfarmParams& params) {
  const auto counts = x.counts();
  double idle = 1.0;
  for (std::size_t c = 0; c < kVesselClasses; ++c) {
    for (int i = 0; i < counts[c]; ++i) idle *= 1.0 - params.vessels[c].alt_deployment_prob;
  }
  return 1.0 - idle;
}

double emissions(const WindfarmDecision&, const WindfarmParams& params,
                 const InstallationRun& run) {
  double total = 0.0;
  for (std::size_t i = 0; i < run.vessel_days.size(); ++i) {
    total += params.vessels[run.vessel_class[i]].emission_rate * run.vessel_days[i];
  }
  return total;
}

double anchor_resistance(double diameter, double length, const WindfarmParams& params) {
  return params.resistance_coeff * diameter * length * length;
}

namespace {

std::vector<ConstraintViolation> domain_of(const DecisionVector& x) {
  std::vector<ConstraintViolation> out;
  if (x.size() != kDomain.size()) {
    out.push_back({"g0:length", 1.0, "windfarm decision needs 5 entries"});
    return out;
  }
  for (std::size_t i = 0; i < kDomain.size(); ++i) {
    const auto& g = kDomain[i];
    if (!std::isfinite(x[i])) {
      out.push_back({"g0:" + g.name, 1.0, "not finite"});
      continue;
    }
    if (x[i] < g.lower) out.push_back({"g0:" + g.name + ".lower", g.lower - x[i], ""});
    if (x[i] > g.upper) out.push_back({"g0:" + g.name + ".upper", x[i] - g.upper, ""});
    if (g.kind == GeneKind::integer && x[i] != std::round(x[i])) {
      out.push_back({"g0:" + g.name + ".integer", std::abs(x[i] - std::round(x[i])), ""});
    }
  }
  return out;
}

std::vector<ConstraintViolation> hard_of(const DecisionVector& x, const WindfarmParams& params) {
  std::vector<ConstraintViolation> out;
  const auto d = WindfarmDecision::from_vector(x);
  const double g1 = -(d.small + d.large + d.crane) + 1.0;
  if (g1 > 0.0) out.push_back({"g1", g1, "at least one vessel required"});
  const double g2 = params.working_point_force - anchor_resistance(d.diameter, d.length, params);
  if (g2 > 0.0) {
    std::ostringstream msg;
    msg << "anchor resistance below working point force by " << g2 << " kN";
    out.push_back({"g2", g2, msg.str()});
  }
  return out;
}

}  // namespace

std::vector<ConstraintViolation> windfarm_constraints(const DecisionVector& x,
                                                      const WindfarmParams& params) {
  auto out = domain_of(x);
  if (!out.empty()) return out;
  return hard_of(x, params);
}

WindfarmModel::WindfarmModel(WindfarmParams params, double grid_step)
    : params_(std::move(params)), grid_step_(grid_step) {
  params_.validate();
  if (grid_step_ < 0.0) throw ValidationError("grid step must be non-negative");
}

std::vector<ConstraintViolation> WindfarmModel::domain_violations(const DecisionVector& x) const {
  return domain_of(x);
}

PerformanceVector WindfarmModel::capability(const DecisionVector& x, const TimeContext&) const {
  const auto d = WindfarmDecision::from_vector(x);
  const auto run = simulate_installation(d, params_);
  return {run.duration, installation_cost(d, params_, run), fleet_utilization(d, params_),
          emissions(d, params_, run)};
}

std::vector<ConstraintViolation> WindfarmModel::constraint_violations(const DecisionVector& x) const {
  return hard_of(x, params_);
}

MixedEncoding make_encoding(double grid_step) {
  std::vector<GeneSpec> genes(kDomain.begin(), kDomain.end());
  if (grid_step > 0.0) {
    genes[3].step = grid_step;
    genes[4].step = grid_step;
  }
  return MixedEncoding(std::move(genes));
}

Encoding WindfarmModel::default_encoding() const { return make_encoding(grid_step_); }

std::vector<CriterionRange> performance_extrema(const WindfarmParams& params, double grid_step) {
  const auto diameters = grid_points(kDomain[3].lower, kDomain[3].upper, grid_step);
  const auto lengths = grid_points(kDomain[4].lower, kDomain[4].upper, grid_step);
  std::vector<CriterionRange> ranges(4, {std::numeric_limits<double>::infinity(),
                                         -std::numeric_limits<double>::infinity()});
  bool any = false;
  for (int s = 0; s <= 3; ++s) {
    for (int l = 0; l <= 2; ++l) {
      for (int c = 0; c <= 2; ++c) {
        if (s + l + c == 0) continue;
        for (double dia : diameters) {
          for (double len : lengths) {
            if (anchor_resistance(dia, len, params) < params.working_point_force) continue;
            const WindfarmDecision d{s, l, c, dia, len};
            const auto run = simulate_installation(d, params);
            const double f[4] = {run.duration, installation_cost(d, params, run),
                                 fleet_utilization(d, params), emissions(d, params, run)};
            for (std::size_t i = 0; i < 4; ++i) {
              ranges[i].min = std::min(ranges[i].min, f[i]);
              ranges[i].max = std::max(ranges[i].max, f[i]);
            }
            any = true;
          }
        }
      }
    }
  }
  if (!any) throw ConstructionError("windfarm grid has no feasible point");
  return ranges;
}

ProblemDefinition make_problem(std::shared_ptr<const WindfarmModel> model,
                               const std::vector<CriterionRange>& ranges) {
  if (ranges.size() != 4) throw SchemaError("windfarm needs four criterion ranges");
  ProblemDefinition p;
  p.model = std::move(model);
  for (const char* id : {"energy_provider", "marine_contractor"}) {
    Actor a;
    a.id = id;
    for (const auto& r : ranges) a.curves.emplace_back(PreferenceCurve::linear(r.min, r.max, false));
    p.actors.push_back(std::move(a));
  }
  p.weights.set({0, 0}, 0.25);
  p.weights.set({0, 3}, 0.25);
  p.weights.set({1, 1}, 0.25);
  p.weights.set({1, 2}, 0.25);
  p.validate();
  return p;
}

WindfarmParams fixture_params() {
  WindfarmParams p;
  p.working_point_force = 1500.0;
  p.resistance_coeff = 20.0;
  p.unit_cost_coeff = 2000.0;
  p.n_anchors = 48;
  p.vessels[small_vessel] = {"small_ahts", 2.0, 12.0, 1.0, 40000.0, 25.0, 0.3};
  p.vessels[large_vessel] = {"large_ahts", 4.0, 24.0, 1.5, 90000.0, 45.0, 0.5};
  p.vessels[crane_barge] = {"crane_barge", 6.0, 36.0, 3.0, 120000.0, 30.0, 0.2};
  return p;
}

}  // namespace odesys::windfarm
