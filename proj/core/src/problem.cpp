#include "odesys/problem.hpp"

#include <cmath>
#include <sstream>

#include "odesys/errors.hpp"

namespace odesys {

std::string to_string(TimeMode mode) {
  switch (mode) {
    case TimeMode::explicit_t:
      return "explicit_t";
    case TimeMode::fixed_horizon:
      return "fixed_horizon";
    case TimeMode::timeless:
      return "timeless";
  }
  return "timeless";
}

TimeMode parse_time_mode(const std::string& text) {
  if (text == "explicit_t") return TimeMode::explicit_t;
  if (text == "fixed_horizon") return TimeMode::fixed_horizon;
  if (text == "timeless") return TimeMode::timeless;
  throw ValidationError("unknown time mode '" + text + "'");
}

std::size_t ProblemDefinition::criterion_count() const {
  return model ? model->criteria().size() : 0;
}

std::vector<ScoreKey> ProblemDefinition::score_columns() const {
  std::vector<ScoreKey> cols;
  for (std::size_t k = 0; k < actors.size(); ++k) {
    for (std::size_t i = 0; i < actors[k].curves.size(); ++i) {
      if (actors[k].curves[i]) cols.push_back({k, i});
    }
  }
  return cols;
}

double ProblemDefinition::threshold(ScoreKey key) const {
  auto it = thresholds.find(key);
  return it == thresholds.end() ? 0.0 : it->second;
}

void ProblemDefinition::validate() const {
  if (!model) throw ValidationError("problem has no capability model");
  const std::size_t n = criterion_count();
  if (actors.empty()) throw ValidationError("problem has no actors");
  for (const auto& a : actors) {
    if (a.curves.size() != n) {
      std::ostringstream msg;
      msg << "actor '" << a.id << "' has " << a.curves.size()
          << " curve slots, model has " << n << " criteria";
      throw SchemaError(msg.str());
    }
  }
  const auto cols = score_columns();
  auto has_curve = [&](ScoreKey key) {
    return key.actor < actors.size() && key.criterion < n &&
           actors[key.actor].curves[key.criterion].has_value();
  };
  for (const auto& [key, w] : weights.entries()) {
    if (w != 0.0 && !has_curve(key)) {
      std::ostringstream msg;
      msg << "weight on (" << key.actor << ", " << key.criterion
          << ") has no preference curve";
      throw SchemaError(msg.str());
    }
  }
  const auto report = validate_weights(weights);
  if (!report.valid) {
    std::ostringstream msg;
    msg << "weights must be non-negative and sum to 1 (sum " << report.sum
        << ", deviation " << report.deviation << ")";
    throw ValidationError(msg.str());
  }
  for (const auto& [key, t] : thresholds) {
    if (!has_curve(key)) throw SchemaError("threshold on a column without a curve");
    if (!(t >= 0.0 && t <= 100.0)) {
      throw ValidationError("acceptability threshold outside [0, 100]");
    }
  }
  for (const auto& [key, m] : rescale) {
    if (!has_curve(key)) throw SchemaError("rescale on a column without a curve");
    if (!(m.scale > 0.0) || !std::isfinite(m.offset)) {
      throw ValidationError("preference rescale needs scale > 0");
    }
  }
}

double AcceptabilityReport::total_shortfall() const noexcept {
  double total = 0.0;
  for (const auto& s : shortfalls) total -= s.margin;
  return total;
}

PerformanceVector evaluate_capability(const ProblemDefinition& problem,
                                      const DecisionVector& x) {
  const auto domain = problem.model->domain_violations(x);
  if (!domain.empty()) {
    throw DomainError("domain bound violated: " + domain.front().name +
                      (domain.front().detail.empty() ? "" : " (" + domain.front().detail + ")"));
  }
  return problem.model->capability(x, problem.time);
}

FeasibilityReport check_feasibility(const ProblemDefinition& problem,
                                    const DecisionVector& x) {
  FeasibilityReport report;
  report.violations = problem.model->domain_violations(x);
  if (!report.violations.empty()) return report;
  auto rest = problem.model->constraint_violations(x);
  report.violations.insert(report.violations.end(), rest.begin(), rest.end());
  return report;
}

AcceptabilityReport check_acceptability(std::span<const ScoreKey> columns,
                                        std::span<const double> p_values,
                                        const std::map<ScoreKey, double>& thresholds) {
  if (columns.size() != p_values.size()) {
    throw SchemaError("preference vector does not match column list");
  }
  AcceptabilityReport report;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    auto it = thresholds.find(columns[c]);
    const double bar = it == thresholds.end() ? 0.0 : it->second;
    if (p_values[c] < bar) {
      report.shortfalls.push_back({columns[c], p_values[c], bar, p_values[c] - bar});
    }
  }
  return report;
}

CandidateEvaluation evaluate_candidate(const ProblemDefinition& problem,
                                       const DecisionVector& x) {
  CandidateEvaluation ev;
  ev.x = x;
  ev.violations = problem.model->domain_violations(x);
  if (!ev.violations.empty()) return ev;

  try {
    ev.f_values = problem.model->capability(x, problem.time);
  } catch (const CapabilityError& e) {
    ev.violations.push_back({"capability", 1.0, e.what()});
  }
  auto hard = problem.model->constraint_violations(x);
  ev.violations.insert(ev.violations.end(), hard.begin(), hard.end());
  ev.feasible = ev.violations.empty();
  if (!ev.feasible) return ev;

  const auto cols = problem.score_columns();
  ev.p_values.reserve(cols.size());
  for (const auto& key : cols) {
    const auto& curve = *problem.actors[key.actor].curves[key.criterion];
    const auto value = curve.evaluate(ev.f_values[key.criterion]);
    ev.clamped = ev.clamped || value.clamped;
    ev.p_values.push_back(value.preference);
  }
  auto acc = check_acceptability(cols, ev.p_values, problem.thresholds);
  ev.shortfalls = std::move(acc.shortfalls);
  ev.acceptable = ev.shortfalls.empty();
  return ev;
}

std::vector<double> aggregation_row(const ProblemDefinition& problem,
                                    std::span<const double> p_values) {
  const auto cols = problem.score_columns();
  if (cols.size() != p_values.size()) throw SchemaError("preference row does not match columns");
  std::vector<double> row(p_values.begin(), p_values.end());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    auto it = problem.rescale.find(cols[c]);
    if (it != problem.rescale.end()) row[c] = it->second(row[c]);
  }
  return row;
}

bool ranks_before(double za, const DecisionVector& xa, double zb, const DecisionVector& xb) {
  const double qa = std::round(za / kZTieQuantum);
  const double qb = std::round(zb / kZTieQuantum);
  if (qa != qb) return qa > qb;
  return xa < xb;
}

}  // namespace odesys
