#pragma once

// IMAP search: an intergenerational genetic algorithm that ranks every
// generation jointly with a reference set of earlier generation bests.

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "odesys/problem.hpp"
#include "odesys/random.hpp"

namespace odesys {

struct GaConfig {
  std::size_t population_size = 100;
  std::size_t max_generations = 200;
  double crossover_rate = 0.9;
  double mutation_rate = 0.2;     ///< per gene, direct encoding
  double elite_fraction = 0.2;
  double mutant_fraction = 0.15;
  double inheritance_prob = 0.7;  ///< rho, random-key encoding
  std::uint64_t rng_seed = 1;
  std::size_t stall_generations = 25;
  std::size_t refset_capacity = 50;
  double prune_kappa = 2.0;       ///< infinity disables pruning
  std::size_t max_resample = 100;
  std::size_t threads = 1;
  /// Decision vectors (direct encoding) or key vectors (random keys).
  std::vector<DecisionVector> initial_solutions;

  /// Throws ValidationError. elite + mutant may reach 1 so a pure restart
  /// (mutant_fraction = 1) is expressible.
  void validate() const;
  bool operator==(const GaConfig&) const = default;
};

enum class Termination { max_generations, stall };

std::string to_string(Termination t);

struct TraceRow {
  std::size_t generation = 0;
  double best_Z = 0.0;
  double mean_Z = 0.0;            ///< over acceptable population members
  std::size_t feasible_count = 0;

  bool operator==(const TraceRow&) const = default;
};

struct ReferenceMember {
  DecisionVector x;
  std::size_t generation = 0;

  bool operator==(const ReferenceMember&) const = default;
};

struct ReferenceSet {
  std::size_t capacity = 50;
  std::vector<ReferenceMember> members;  ///< oldest first

  bool contains(const DecisionVector& x) const;
  bool operator==(const ReferenceSet&) const = default;
};

/// Appends `best` unless an identical vector is stored. When over capacity
/// the oldest member other than `current_best` is evicted.
ReferenceSet update_reference_set(ReferenceSet refset, const DecisionVector& best,
                                  std::size_t generation, const DecisionVector* current_best = nullptr);

struct Ranking {
  std::vector<std::size_t> order;  ///< indices, best first
  std::vector<double> z;           ///< aggregated Z per index, NaN unless acceptable
};

/// Joint ranking. Acceptable candidates (deduplicated by x) are z-normalized
/// together and ordered by Z; feasible but unacceptable ones follow by total
/// shortfall, infeasible ones last.
Ranking rank_candidates(const ProblemDefinition& problem,
                        std::span<const CandidateEvaluation* const> candidates);

/// Indices of `z` kept by the cutoff mean - kappa * std. The maximum is
/// always kept; NaN entries are kept untouched.
std::vector<std::size_t> selective_reevaluate(std::span<const double> z, double kappa);

struct RunResult {
  DecisionVector best_x;
  double best_Z = 0.0;
  CandidateEvaluation best;
  std::vector<TraceRow> trace;
  std::size_t evaluations = 0;
  std::size_t generations = 0;
  Termination terminated_by = Termination::max_generations;
  std::uint64_t seed = 0;

  bool operator==(const RunResult&) const;
};

/// CSV with header generation,best_Z,mean_Z,feasible_count.
std::string trace_csv(const std::vector<TraceRow>& trace);

struct Individual {
  std::vector<double> genome;  ///< decision vector or key vector
  std::shared_ptr<const CandidateEvaluation> eval;
};

class ImapSolver {
 public:
  ImapSolver(const ProblemDefinition& problem, GaConfig config, Encoding encoding);

  /// Samples generation 1. Called by run() if needed.
  void initialize();
  /// Advances one generation. Returns false once a stop rule fired.
  bool step_generation();
  /// Runs to termination; throws InfeasibilityExhaustedError when no
  /// feasible and acceptable candidate was found.
  RunResult run();

  const std::vector<Individual>& population() const noexcept { return population_; }
  const ReferenceSet& reference_set() const noexcept { return refset_; }
  const std::vector<TraceRow>& trace() const noexcept { return trace_; }
  std::size_t generation() const noexcept { return generation_; }
  std::size_t evaluations() const noexcept { return evaluations_; }

 private:
  struct Ranked {
    std::vector<const CandidateEvaluation*> evals;
    std::size_t population_count = 0;
    Ranking ranking;
  };

  bool random_keys() const noexcept;
  std::size_t genome_length() const;
  DecisionVector to_decision(const std::vector<double>& genome) const;
  bool quick_feasible(const DecisionVector& x) const;
  std::vector<double> random_genome();
  std::vector<double> feasible_random_genome();
  std::vector<double> crossover(const std::vector<double>& a, const std::vector<double>& b);
  void mutate(std::vector<double>& genome);
  void evaluate_all(std::vector<Individual>& batch);
  Ranked rank_joint() const;
  void finish_generation();
  std::size_t elite_count() const;
  std::size_t mutant_count() const;

  const ProblemDefinition& problem_;
  GaConfig config_;
  Encoding encoding_;
  Rng rng_;
  std::vector<Individual> population_;
  ReferenceSet refset_;
  std::vector<TraceRow> trace_;
  std::map<DecisionVector, std::shared_ptr<const CandidateEvaluation>> cache_;
  std::size_t generation_ = 0;
  std::size_t evaluations_ = 0;
  std::size_t stall_ = 0;
  DecisionVector last_best_;
  bool stopped_ = false;
  Termination terminated_by_ = Termination::max_generations;
};

RunResult solve(const ProblemDefinition& problem, const GaConfig& config, const Encoding& encoding);
/// Uses the model's default encoding.
RunResult solve(const ProblemDefinition& problem, const GaConfig& config);

}  // namespace odesys
