#pragma once

// Brute-force reference answers on instances small enough to enumerate.

#include <limits>
#include <optional>
#include <vector>

#include "odesys/alloc.hpp"
#include "odesys/problem.hpp"

namespace odesys::oracle {

inline constexpr std::size_t kWindfarmBudget = 1'000'000;
inline constexpr std::size_t kAllocBudget = 100'000;

struct OracleCandidate {
  DecisionVector x;
  PerformanceVector f;   ///< empty outside the domain or on capability failure
  bool feasible = false;
  bool acceptable = false;
  double z = std::numeric_limits<double>::quiet_NaN();  ///< set when acceptable
};

struct EnumerationReport {
  std::vector<OracleCandidate> candidates;  ///< lexicographic in x
  std::size_t enumerated = 0;               ///< size of the raw search space
  std::size_t feasible_count = 0;
  std::size_t acceptable_count = 0;
  std::optional<std::size_t> best_index;
  DecisionVector best_x;
  double best_Z = std::numeric_limits<double>::quiet_NaN();
  std::vector<CriterionRange> extrema;      ///< over feasible candidates

  const OracleCandidate* find(const DecisionVector& x) const;
};

/// Evaluates every vector (distinct, in the given order), z-normalizes the
/// acceptable ones jointly and picks the argmax with the solver's tie rule.
EnumerationReport evaluate_exhaustive(const ProblemDefinition& problem,
                                      std::vector<DecisionVector> xs);

/// Full windfarm cross product with diameter and length on `grid_step`.
/// Throws BudgetError above `budget` points.
std::vector<DecisionVector> windfarm_grid(double grid_step, std::size_t budget = kWindfarmBudget);

/// `problem` must wrap a WindfarmModel.
EnumerationReport enumerate_windfarm(const ProblemDefinition& problem, double grid_step);

/// Number of schedules the alloc enumeration visits: start days within the
/// windows, maintenance locations, vessel assignments free of same-activity
/// clashes, per-vessel role orders and link speeds. When the assignment space
/// itself is too large to count, an upper bound is returned.
double alloc_enumeration_size(const alloc::AllocInstance& inst);

/// Every schedule of the alloc search space that passes the domain and
/// g1..g13 checks, sorted lexicographically by decision vector. Throws
/// BudgetError (carrying the size) when the space exceeds `budget`.
std::vector<alloc::Schedule> enumerate_alloc_schedules(const alloc::AllocInstance& inst,
                                                       std::size_t budget = kAllocBudget);

/// `problem` must wrap an AllocModel.
EnumerationReport enumerate_alloc(const ProblemDefinition& problem);

}  // namespace odesys::oracle
