#include "odesys/imap.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

#include "odesys/errors.hpp"

namespace odesys {

void GaConfig::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (population_size < 2) throw ValidationError("population_size must be at least 2");
  if (max_generations < 1) throw ValidationError("max_generations must be positive");
  if (!unit(crossover_rate) || !unit(mutation_rate)) {
    throw ValidationError("crossover and mutation rates must lie in [0, 1]");
  }
  if (!unit(elite_fraction) || !unit(mutant_fraction) || !unit(inheritance_prob)) {
    throw ValidationError("elite, mutant and inheritance fractions must lie in [0, 1]");
  }
  if (elite_fraction + mutant_fraction > 1.0 + 1e-12) {
    throw ValidationError("elite_fraction + mutant_fraction must not exceed 1");
  }
  if (stall_generations < 1) throw ValidationError("stall_generations must be positive");
  if (refset_capacity < 1) throw ValidationError("refset_capacity must be positive");
  if (!(prune_kappa >= 0.0)) throw ValidationError("prune_kappa must be >= 0");
  if (max_resample < 1) throw ValidationError("max_resample must be positive");
  if (threads < 1) throw ValidationError("threads must be positive");
}

std::string to_string(Termination t) {
  return t == Termination::stall ? "stall" : "max_generations";
}

bool ReferenceSet::contains(const DecisionVector& x) const {
  return std::any_of(members.begin(), members.end(), [&](const auto& m) { return m.x == x; });
}

ReferenceSet update_reference_set(ReferenceSet refset, const DecisionVector& best,
                                  std::size_t generation, const DecisionVector* current_best) {
  if (!refset.contains(best)) refset.members.push_back({best, generation});
  while (refset.members.size() > refset.capacity) {
    auto victim = refset.members.begin();
    if (current_best && victim->x == *current_best && refset.members.size() > 1) ++victim;
    refset.members.erase(victim);
  }
  return refset;
}

Ranking rank_candidates(const ProblemDefinition& problem,
                        std::span<const CandidateEvaluation* const> candidates) {
  const std::size_t n = candidates.size();
  Ranking out;
  out.z.assign(n, std::numeric_limits<double>::quiet_NaN());

  std::map<DecisionVector, std::size_t> row_of;
  ScoreTable table(problem.score_columns());
  for (const auto* c : candidates) {
    if (!c->feasible || !c->acceptable) continue;
    if (row_of.emplace(c->x, table.rows()).second) {
      const auto row = aggregation_row(problem, c->p_values);
      table.add_row(row);
    }
  }
  std::vector<double> z(table.rows(), 0.0);
  if (table.rows() >= 2) z = afine_aggregate(z_normalize(table), problem.weights);
  for (std::size_t i = 0; i < n; ++i) {
    const auto* c = candidates[i];
    if (c->feasible && c->acceptable) out.z[i] = z[row_of.at(c->x)];
  }

  std::vector<double> shortfall(n, 0.0);
  std::vector<int> tier(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const auto* c = candidates[i];
    if (!c->feasible) continue;
    tier[i] = c->acceptable ? 0 : 1;
    for (const auto& s : c->shortfalls) shortfall[i] -= s.margin;
  }
  out.order.resize(n);
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  std::stable_sort(out.order.begin(), out.order.end(), [&](std::size_t a, std::size_t b) {
    if (tier[a] != tier[b]) return tier[a] < tier[b];
    const auto& xa = candidates[a]->x;
    const auto& xb = candidates[b]->x;
    if (tier[a] == 0) {
      if (xa == xb) return false;
      return ranks_before(out.z[a], xa, out.z[b], xb);
    }
    if (tier[a] == 1 && shortfall[a] != shortfall[b]) return shortfall[a] < shortfall[b];
    return xa < xb;
  });
  return out;
}

std::vector<std::size_t> selective_reevaluate(std::span<const double> z, double kappa) {
  std::vector<std::size_t> keep;
  double sum = 0.0;
  std::size_t count = 0;
  std::size_t top = z.size();
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (std::isnan(z[i])) continue;
    sum += z[i];
    ++count;
    if (top == z.size() || z[i] > z[top]) top = i;
  }
  if (count < 2 || !std::isfinite(kappa)) {
    keep.resize(z.size());
    std::iota(keep.begin(), keep.end(), std::size_t{0});
    return keep;
  }
  const double mean = sum / static_cast<double>(count);
  double ss = 0.0;
  for (double v : z) {
    if (!std::isnan(v)) ss += (v - mean) * (v - mean);
  }
  const double sd = std::sqrt(ss / static_cast<double>(count));
  const double cutoff = mean - kappa * sd - 1e-9;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (std::isnan(z[i]) || i == top || z[i] >= cutoff) keep.push_back(i);
  }
  return keep;
}

namespace {

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

}  // namespace

bool RunResult::operator==(const RunResult& o) const {
  if (trace.size() != o.trace.size()) return false;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& a = trace[i];
    const auto& b = o.trace[i];
    if (a.generation != b.generation || !same(a.best_Z, b.best_Z) || !same(a.mean_Z, b.mean_Z) ||
        a.feasible_count != b.feasible_count) {
      return false;
    }
  }
  return best_x == o.best_x && same(best_Z, o.best_Z) && best.f_values == o.best.f_values &&
         best.p_values == o.best.p_values && evaluations == o.evaluations &&
         generations == o.generations && terminated_by == o.terminated_by && seed == o.seed;
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "generation,best_Z,mean_Z,feasible_count\n";
  for (const auto& row : trace) {
    out << row.generation << ',' << row.best_Z << ',' << row.mean_Z << ',' << row.feasible_count
        << '\n';
  }
  return out.str();
}

ImapSolver::ImapSolver(const ProblemDefinition& problem, GaConfig config, Encoding encoding)
    : problem_(problem), config_(std::move(config)), encoding_(std::move(encoding)),
      rng_(config_.rng_seed) {
  problem_.validate();
  config_.validate();
  if (random_keys() && !std::get<RandomKeyEncoding>(encoding_).decoder) {
    throw ValidationError("random-key encoding has no decoder");
  }
  if (!random_keys() && std::get<MixedEncoding>(encoding_).size() == 0) {
    throw ValidationError("direct encoding has no genes");
  }
  refset_.capacity = config_.refset_capacity;
}

bool ImapSolver::random_keys() const noexcept {
  return std::holds_alternative<RandomKeyEncoding>(encoding_);
}

std::size_t ImapSolver::genome_length() const {
  if (random_keys()) return std::get<RandomKeyEncoding>(encoding_).decoder->key_count();
  return std::get<MixedEncoding>(encoding_).size();
}

DecisionVector ImapSolver::to_decision(const std::vector<double>& genome) const {
  if (random_keys()) return std::get<RandomKeyEncoding>(encoding_).decoder->decode(genome);
  return std::get<MixedEncoding>(encoding_).snap(genome);
}

bool ImapSolver::quick_feasible(const DecisionVector& x) const {
  return check_feasibility(problem_, x).feasible();
}

std::vector<double> ImapSolver::random_genome() {
  std::vector<double> g(genome_length());
  if (random_keys()) {
    for (auto& k : g) k = rng_.uniform();
    return g;
  }
  const auto& enc = std::get<MixedEncoding>(encoding_);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& gene = enc.genes()[i];
    if (gene.kind == GeneKind::integer) {
      g[i] = static_cast<double>(rng_.between(static_cast<long long>(std::ceil(gene.lower)),
                                              static_cast<long long>(std::floor(gene.upper))));
    } else {
      g[i] = rng_.uniform(gene.lower, gene.upper);
    }
  }
  return enc.snap(g);
}

std::vector<double> ImapSolver::feasible_random_genome() {
  auto g = random_genome();
  if (random_keys()) return g;
  for (std::size_t attempt = 1; attempt < config_.max_resample && !quick_feasible(g); ++attempt) {
    g = random_genome();
  }
  return g;
}

std::vector<double> ImapSolver::crossover(const std::vector<double>& a,
                                          const std::vector<double>& b) {
  std::vector<double> child(a.size());
  if (random_keys()) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      child[i] = rng_.bernoulli(config_.inheritance_prob) ? a[i] : b[i];
    }
    return child;
  }
  const auto& enc = std::get<MixedEncoding>(encoding_);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (enc.genes()[i].kind == GeneKind::integer) {
      child[i] = rng_.bernoulli(0.5) ? a[i] : b[i];
    } else {
      const double lo = std::min(a[i], b[i]);
      const double hi = std::max(a[i], b[i]);
      const double span = hi - lo;
      child[i] = rng_.uniform(lo - 0.5 * span, hi + 0.5 * span);
    }
  }
  return enc.snap(child);
}

void ImapSolver::mutate(std::vector<double>& genome) {
  const auto& enc = std::get<MixedEncoding>(encoding_);
  for (std::size_t i = 0; i < genome.size(); ++i) {
    if (!rng_.bernoulli(config_.mutation_rate)) continue;
    const auto& gene = enc.genes()[i];
    if (gene.kind == GeneKind::integer) {
      genome[i] = static_cast<double>(rng_.between(static_cast<long long>(std::ceil(gene.lower)),
                                                   static_cast<long long>(std::floor(gene.upper))));
    } else {
      genome[i] += rng_.normal(0.0, 0.1 * (gene.upper - gene.lower));
    }
  }
  genome = enc.snap(genome);
}

void ImapSolver::evaluate_all(std::vector<Individual>& batch) {
  std::vector<DecisionVector> xs(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!batch[i].eval) xs[i] = to_decision(batch[i].genome);
  }
  std::vector<DecisionVector> todo;
  std::map<DecisionVector, std::size_t> slot;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].eval || cache_.count(xs[i])) continue;
    if (slot.emplace(xs[i], todo.size()).second) todo.push_back(xs[i]);
  }
  std::vector<std::shared_ptr<const CandidateEvaluation>> fresh(todo.size());
  auto work = [&](std::size_t w, std::size_t stride) {
    for (std::size_t k = w; k < todo.size(); k += stride) {
      fresh[k] = std::make_shared<const CandidateEvaluation>(evaluate_candidate(problem_, todo[k]));
    }
  };
  const std::size_t workers = std::min(config_.threads, std::max<std::size_t>(1, todo.size()));
  if (workers <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  }
  for (std::size_t k = 0; k < todo.size(); ++k) cache_.emplace(todo[k], fresh[k]);
  evaluations_ += todo.size();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!batch[i].eval) batch[i].eval = cache_.at(xs[i]);
  }
}

ImapSolver::Ranked ImapSolver::rank_joint() const {
  Ranked r;
  for (const auto& ind : population_) r.evals.push_back(ind.eval.get());
  r.population_count = r.evals.size();
  for (const auto& m : refset_.members) {
    r.evals.push_back(cache_.at(m.x).get());
  }
  r.ranking = rank_candidates(problem_, r.evals);
  return r;
}

std::size_t ImapSolver::elite_count() const {
  const auto n = static_cast<double>(config_.population_size);
  return std::min(config_.population_size,
                  static_cast<std::size_t>(std::llround(config_.elite_fraction * n)));
}

std::size_t ImapSolver::mutant_count() const {
  const auto n = static_cast<double>(config_.population_size);
  return std::min(config_.population_size - elite_count(),
                  static_cast<std::size_t>(std::llround(config_.mutant_fraction * n)));
}

void ImapSolver::initialize() {
  population_.clear();
  const std::size_t n = config_.population_size;
  for (const auto& seed : config_.initial_solutions) {
    if (population_.size() == n) break;
    if (seed.size() != genome_length()) {
      throw ValidationError("initial solution has the wrong length for the encoding");
    }
    if (random_keys()) RandomKeyVector check(seed);
    Individual ind;
    ind.genome = random_keys() ? seed : std::get<MixedEncoding>(encoding_).snap(seed);
    population_.push_back(std::move(ind));
  }
  while (population_.size() < n) population_.push_back({feasible_random_genome(), nullptr});
  evaluate_all(population_);
  generation_ = 1;
  finish_generation();
}

void ImapSolver::finish_generation() {
  const std::size_t protect = generation_ > 1 ? elite_count() : 0;
  Ranked ranked = rank_joint();

  if (std::isfinite(config_.prune_kappa)) {
    const auto keep = selective_reevaluate(ranked.ranking.z, config_.prune_kappa);
    std::vector<bool> kept(ranked.evals.size(), false);
    for (auto i : keep) kept[i] = true;
    bool replaced = false;
    for (std::size_t i = protect; i < ranked.population_count; ++i) {
      if (kept[i]) continue;
      population_[i] = {feasible_random_genome(), nullptr};
      replaced = true;
    }
    if (replaced) {
      evaluate_all(population_);
      ranked = rank_joint();
    }
  }

  std::vector<Individual> sorted;
  for (auto i : ranked.ranking.order) {
    if (i < ranked.population_count) sorted.push_back(population_[i]);
  }
  population_ = std::move(sorted);

  const std::size_t top = ranked.ranking.order.front();
  const double best_z = ranked.ranking.z[top];
  const DecisionVector best_x = ranked.evals[top]->x;

  TraceRow row;
  row.generation = generation_;
  row.best_Z = best_z;
  double sum = 0.0;
  std::size_t acceptable = 0;
  for (std::size_t i = 0; i < ranked.population_count; ++i) {
    if (ranked.evals[i]->feasible) ++row.feasible_count;
    if (!std::isnan(ranked.ranking.z[i])) {
      sum += ranked.ranking.z[i];
      ++acceptable;
    }
  }
  row.mean_Z = acceptable ? sum / static_cast<double>(acceptable)
                          : std::numeric_limits<double>::quiet_NaN();
  trace_.push_back(row);

  if (!std::isnan(best_z)) {
    const auto& pop_best = population_.front().eval;
    if (pop_best->feasible && pop_best->acceptable) {
      refset_ = update_reference_set(std::move(refset_), pop_best->x, generation_, &best_x);
    }
  }

  if (generation_ > 1 && best_x == last_best_) {
    ++stall_;
  } else {
    stall_ = 0;
  }
  last_best_ = best_x;
  if (stall_ >= config_.stall_generations) {
    stopped_ = true;
    terminated_by_ = Termination::stall;
  } else if (generation_ >= config_.max_generations) {
    stopped_ = true;
    terminated_by_ = Termination::max_generations;
  }
}

bool ImapSolver::step_generation() {
  if (generation_ == 0) {
    initialize();
    return !stopped_;
  }
  if (stopped_) return false;

  const std::size_t n = config_.population_size;
  const std::size_t ne = elite_count();
  const std::size_t nm = mutant_count();
  std::vector<Individual> next;
  next.reserve(n);
  for (std::size_t i = 0; i < ne; ++i) next.push_back(population_[i]);
  for (std::size_t i = 0; i < nm; ++i) next.push_back({feasible_random_genome(), nullptr});

  auto tournament = [&]() -> const Individual& {
    const auto a = rng_.below(n);
    const auto b = rng_.below(n);
    return population_[std::min(a, b)];
  };
  while (next.size() < n) {
    std::vector<double> child;
    if (random_keys()) {
      const auto& elite = population_[rng_.below(std::max<std::size_t>(ne, 1))];
      const auto& other = n > ne ? population_[ne + rng_.below(n - ne)] : population_[rng_.below(n)];
      child = crossover(elite.genome, other.genome);
    } else {
      bool ok = false;
      for (std::size_t attempt = 0; attempt < config_.max_resample && !ok; ++attempt) {
        const auto& pa = tournament();
        const auto& pb = tournament();
        child = rng_.bernoulli(config_.crossover_rate) ? crossover(pa.genome, pb.genome) : pa.genome;
        mutate(child);
        ok = quick_feasible(child);
      }
      if (!ok) {
        child = population_[rng_.below(std::max<std::size_t>(ne, 1))].genome;
        mutate(child);
      }
    }
    next.push_back({std::move(child), nullptr});
  }
  evaluate_all(next);
  population_ = std::move(next);
  ++generation_;
  finish_generation();
  return !stopped_;
}

RunResult ImapSolver::run() {
  if (generation_ == 0) initialize();
  while (step_generation()) {
  }
  const Ranked ranked = rank_joint();
  const std::size_t top = ranked.ranking.order.front();
  if (std::isnan(ranked.ranking.z[top])) {
    std::size_t feasible = 0;
    std::map<std::string, std::size_t> causes;
    for (const auto& [x, ev] : cache_) {
      if (ev->feasible) ++feasible;
      for (const auto& v : ev->violations) ++causes[v.name.substr(0, v.name.find(':'))];
    }
    std::ostringstream msg;
    msg << "no feasible and acceptable candidate after " << evaluations_ << " evaluations ("
        << feasible << " feasible)";
    if (!causes.empty()) {
      msg << "; violations:";
      for (const auto& [name, count] : causes) msg << ' ' << name << '=' << count;
    }
    throw InfeasibilityExhaustedError(msg.str());
  }
  RunResult result;
  result.best = *ranked.evals[top];
  result.best_x = result.best.x;
  result.best_Z = ranked.ranking.z[top];
  result.trace = trace_;
  result.evaluations = evaluations_;
  result.generations = generation_;
  result.terminated_by = terminated_by_;
  result.seed = config_.rng_seed;
  return result;
}

RunResult solve(const ProblemDefinition& problem, const GaConfig& config, const Encoding& encoding) {
  ImapSolver solver(problem, config, encoding);
  return solver.run();
}

RunResult solve(const ProblemDefinition& problem, const GaConfig& config) {
  if (!problem.model) throw ValidationError("problem has no capability model");
  return solve(problem, config, problem.model->default_encoding());
}

}  // namespace odesys
