#include "odesys/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "odesys/errors.hpp"
#include "odesys/windfarm.hpp"

namespace odesys::oracle {

const OracleCandidate* EnumerationReport::find(const DecisionVector& x) const {
  auto it = std::lower_bound(candidates.begin(), candidates.end(), x,
                             [](const OracleCandidate& c, const DecisionVector& v) { return c.x < v; });
  return it != candidates.end() && it->x == x ? &*it : nullptr;
}

EnumerationReport evaluate_exhaustive(const ProblemDefinition& problem,
                                      std::vector<DecisionVector> xs) {
  std::sort(xs.begin(), xs.end());
  if (std::adjacent_find(xs.begin(), xs.end()) != xs.end()) {
    throw ValidationError("oracle candidates must be distinct");
  }
  EnumerationReport report;
  report.enumerated = xs.size();
  const std::size_t n_crit = problem.criterion_count();
  report.extrema.assign(n_crit, {std::numeric_limits<double>::infinity(),
                                 -std::numeric_limits<double>::infinity()});
  ScoreTable table(problem.score_columns());
  std::vector<std::size_t> row_owner;
  for (auto& x : xs) {
    const auto ev = evaluate_candidate(problem, x);
    OracleCandidate c;
    c.x = std::move(x);
    c.f = ev.f_values;
    c.feasible = ev.feasible;
    c.acceptable = ev.feasible && ev.acceptable;
    if (c.feasible) {
      ++report.feasible_count;
      for (std::size_t i = 0; i < n_crit; ++i) {
        report.extrema[i].min = std::min(report.extrema[i].min, c.f[i]);
        report.extrema[i].max = std::max(report.extrema[i].max, c.f[i]);
      }
    }
    if (c.acceptable) {
      ++report.acceptable_count;
      table.add_row(aggregation_row(problem, ev.p_values));
      row_owner.push_back(report.candidates.size());
    }
    report.candidates.push_back(std::move(c));
  }
  if (row_owner.empty()) return report;

  std::vector<double> z(row_owner.size(), 0.0);
  if (row_owner.size() >= 2) z = afine_aggregate(z_normalize(table), problem.weights);
  std::size_t best = 0;
  for (std::size_t r = 0; r < row_owner.size(); ++r) {
    report.candidates[row_owner[r]].z = z[r];
    if (r > 0 && ranks_before(z[r], report.candidates[row_owner[r]].x, z[best],
                              report.candidates[row_owner[best]].x)) {
      best = r;
    }
  }
  report.best_index = row_owner[best];
  report.best_x = report.candidates[row_owner[best]].x;
  report.best_Z = z[best];
  return report;
}

std::vector<DecisionVector> windfarm_grid(double grid_step, std::size_t budget) {
  using windfarm::kDomain;
  if (!(grid_step > 0.0)) throw ValidationError("grid step must be positive");
  const auto dia = grid_points(kDomain[3].lower, kDomain[3].upper, grid_step);
  const auto len = grid_points(kDomain[4].lower, kDomain[4].upper, grid_step);
  const double size = 4.0 * 3.0 * 3.0 * static_cast<double>(dia.size()) *
                      static_cast<double>(len.size());
  if (size > static_cast<double>(budget)) {
    std::ostringstream msg;
    msg << "windfarm grid has " << size << " points, budget " << budget;
    throw BudgetError(msg.str(), size);
  }
  std::vector<DecisionVector> xs;
  xs.reserve(static_cast<std::size_t>(size));
  for (int s = 0; s <= 3; ++s)
    for (int l = 0; l <= 2; ++l)
      for (int c = 0; c <= 2; ++c)
        for (double d : dia)
          for (double p : len) xs.push_back({double(s), double(l), double(c), d, p});
  return xs;
}

EnumerationReport enumerate_windfarm(const ProblemDefinition& problem, double grid_step) {
  if (!dynamic_cast<const windfarm::WindfarmModel*>(problem.model.get())) {
    throw SchemaError("enumerate_windfarm needs a windfarm problem");
  }
  return evaluate_exhaustive(problem, windfarm_grid(grid_step));
}

namespace {

double factorial(std::size_t n) {
  double f = 1.0;
  for (std::size_t k = 2; k <= n; ++k) f *= static_cast<double>(k);
  return f;
}

constexpr double kCountableAssignments = 1e6;

// Calls fn(assignment) for every vessel assignment in lexicographic order
// that gives the roles of each activity distinct vessels.
template <class Fn>
void for_each_assignment(const alloc::AllocInstance& inst, Fn&& fn) {
  const std::size_t R = inst.roles.size();
  for (const auto& r : inst.roles) {
    if (r.vessels.empty()) return;
  }
  std::vector<std::size_t> idx(R, 0);
  std::vector<std::size_t> x3(R);
  while (true) {
    bool clash = false;
    for (std::size_t r = 0; r < R; ++r) {
      x3[r] = inst.roles[r].vessels[idx[r]];
      for (std::size_t q = 0; q < r && !clash; ++q) {
        clash = inst.roles[q].activity == inst.roles[r].activity && x3[q] == x3[r];
      }
    }
    if (!clash) fn(x3);
    std::size_t k = R;
    while (k > 0) {
      --k;
      if (++idx[k] < inst.roles[k].vessels.size()) break;
      idx[k] = 0;
      if (k == 0) return;
    }
    if (R == 0) return;
  }
}

double time_location_factor(const alloc::AllocInstance& inst) {
  double f = 1.0;
  for (const auto& a : inst.activities) {
    f *= static_cast<double>(a.window_hi - a.window_lo + 1);
    if (a.kind == alloc::ActivityKind::maintenance) f *= static_cast<double>(a.locations.size());
  }
  return f;
}

double sequence_count(const alloc::AllocInstance& inst, const std::vector<std::size_t>& x3) {
  std::vector<std::size_t> per(inst.vessels.size(), 0);
  for (auto v : x3) ++per[v];
  double n = 1.0;
  for (std::size_t v = 0; v < per.size(); ++v) {
    if (per[v] == 0) continue;
    n *= factorial(per[v]) *
         std::pow(static_cast<double>(inst.vessels[v].speeds.size()), static_cast<double>(per[v] - 1));
  }
  return n;
}

}  // namespace

double alloc_enumeration_size(const alloc::AllocInstance& inst) {
  double raw = 1.0;
  for (const auto& r : inst.roles) raw *= static_cast<double>(r.vessels.size());
  const double tl = time_location_factor(inst);
  if (raw == 0.0) return 0.0;
  if (raw > kCountableAssignments) {
    double worst = 1.0;
    for (std::size_t v = 0; v < inst.vessels.size(); ++v) {
      worst = std::max(worst, static_cast<double>(inst.vessels[v].speeds.size()));
    }
    return tl * raw * factorial(inst.roles.size()) *
           std::pow(worst, static_cast<double>(inst.roles.size()));
  }
  double seq = 0.0;
  for_each_assignment(inst, [&](const std::vector<std::size_t>& x3) { seq += sequence_count(inst, x3); });
  return tl * seq;
}

std::vector<alloc::Schedule> enumerate_alloc_schedules(const alloc::AllocInstance& inst,
                                                       std::size_t budget) {
  const double size = alloc_enumeration_size(inst);
  if (size > static_cast<double>(budget)) {
    std::ostringstream msg;
    msg << "alloc enumeration would visit " << size << " schedules, budget " << budget;
    throw BudgetError(msg.str(), size);
  }
  const std::size_t A = inst.activities.size();
  const std::size_t V = inst.vessels.size();
  const auto maint = inst.maintenance_activities();
  std::vector<alloc::Schedule> out;

  for_each_assignment(inst, [&](const std::vector<std::size_t>& x3) {
    std::vector<std::vector<std::size_t>> seq(V);
    for (std::size_t r = 0; r < x3.size(); ++r) seq[x3[r]].push_back(r);

    // odometer over per-vessel permutations
    std::vector<std::vector<std::size_t>> perm = seq;
    while (true) {
      std::vector<std::pair<std::size_t, std::size_t>> links;  // (r, r') with vessel
      std::vector<std::size_t> link_vessel;
      for (std::size_t v = 0; v < V; ++v) {
        for (std::size_t i = 0; i + 1 < perm[v].size(); ++i) {
          links.emplace_back(perm[v][i], perm[v][i + 1]);
          link_vessel.push_back(v);
        }
      }
      std::vector<std::size_t> speed_idx(links.size(), 0);
      while (true) {
        alloc::Schedule base = alloc::Schedule::empty(inst);
        base.vessel = x3;
        for (std::size_t v = 0; v < V; ++v) {
          if (!perm[v].empty()) base.first[perm[v].front()] = 1;
        }
        for (std::size_t k = 0; k < links.size(); ++k) {
          base.next[links[k].first][links[k].second] = 1;
          base.speed[links[k].first][links[k].second] =
              inst.vessels[link_vessel[k]].speeds[speed_idx[k]];
        }
        std::vector<int> t(A);
        std::vector<std::size_t> loc(maint.size(), 0);
        for (std::size_t a = 0; a < A; ++a) t[a] = inst.activities[a].window_lo;
        while (true) {
          alloc::Schedule s = base;
          s.start = t;
          for (std::size_t m = 0; m < maint.size(); ++m) {
            s.location[m] = inst.activities[maint[m]].locations[loc[m]];
          }
          if (alloc::domain_violations(inst, s.to_vector()).empty() &&
              alloc::check_constraints(inst, s).empty()) {
            out.push_back(std::move(s));
          }
          // advance start days, then locations
          std::size_t a = A;
          bool carry = true;
          while (carry && a > 0) {
            --a;
            if (++t[a] <= inst.activities[a].window_hi) {
              carry = false;
            } else {
              t[a] = inst.activities[a].window_lo;
            }
          }
          std::size_t m = maint.size();
          while (carry && m > 0) {
            --m;
            if (++loc[m] < inst.activities[maint[m]].locations.size()) {
              carry = false;
            } else {
              loc[m] = 0;
            }
          }
          if (carry) break;
        }
        std::size_t k = links.size();
        bool carry = true;
        while (carry && k > 0) {
          --k;
          if (++speed_idx[k] < inst.vessels[link_vessel[k]].speeds.size()) {
            carry = false;
          } else {
            speed_idx[k] = 0;
          }
        }
        if (carry) break;
      }
      std::size_t v = V;
      bool carry = true;
      while (carry && v > 0) {
        --v;
        if (std::next_permutation(perm[v].begin(), perm[v].end())) carry = false;
      }
      if (carry) break;
    }
  });

  std::sort(out.begin(), out.end(), [](const alloc::Schedule& a, const alloc::Schedule& b) {
    return a.to_vector() < b.to_vector();
  });
  return out;
}

EnumerationReport enumerate_alloc(const ProblemDefinition& problem) {
  const auto* model = dynamic_cast<const alloc::AllocModel*>(problem.model.get());
  if (!model) throw SchemaError("enumerate_alloc needs an alloc problem");
  const auto& inst = model->instance();
  const auto schedules = enumerate_alloc_schedules(inst);
  std::vector<DecisionVector> xs;
  xs.reserve(schedules.size());
  for (const auto& s : schedules) xs.push_back(s.to_vector());
  auto report = evaluate_exhaustive(problem, std::move(xs));
  report.enumerated = static_cast<std::size_t>(alloc_enumeration_size(inst));
  return report;
}

}  // namespace odesys::oracle
