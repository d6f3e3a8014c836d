#include "odesys/app.hpp"

#include "odesys/alloc.hpp"
#include "odesys/imap.hpp"
#include "odesys/linear_model.hpp"
#include "odesys/windfarm.hpp"

namespace odesys::app {

int exit_code(const std::exception& e) noexcept {
  if (dynamic_cast<const InfeasibilityExhaustedError*>(&e) ||
      dynamic_cast<const ConstructionError*>(&e)) {
    return kExitNoSolution;
  }
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const SchemaError*>(&e) ||
      dynamic_cast<const DomainError*>(&e) || dynamic_cast<const BudgetError*>(&e)) {
    return kExitInput;
  }
  return kExitFailure;
}

std::string error_code(int exit) noexcept {
  switch (exit) {
    case kExitOk:
      return "ok";
    case kExitInput:
      return "invalid_input";
    case kExitNoSolution:
      return "no_solution";
    default:
      return "internal_error";
  }
}

io::Json error_json(const std::exception& e) {
  const int exit = exit_code(e);
  io::Json j = {{"code", error_code(exit)}, {"exit_code", exit}, {"message", e.what()}};
  if (const auto* in = dynamic_cast<const io::InputError*>(&e)) {
    j["message"] = in->message();
    j["pointer"] = in->pointer();
    if (in->line() > 0) {
      j["line"] = in->line();
      j["column"] = in->column();
    }
  }
  return j;
}

io::LoadedProblem with_run_settings(const io::LoadedProblem& base, std::optional<std::uint64_t> seed,
                                    const io::Json* solver_overrides, const std::string& pointer) {
  io::LoadedProblem out = base;
  if (seed) out.file.seed = *seed;
  if (solver_overrides) out.file.solver = io::config_from_json(*solver_overrides, out.file.solver, pointer);
  out.config = out.file.solver;
  out.config.rng_seed = out.file.seed;
  return out;
}

SolveOutput run_solve(const io::LoadedProblem& loaded) {
  SolveOutput out;
  out.result = solve(loaded.problem, loaded.config, loaded.encoding);
  out.document = io::serialize_result(loaded, out.result);
  return out;
}

namespace {

std::vector<DecisionVector> linear_grid(const LinearModel& model) {
  double size = 1.0;
  std::vector<std::vector<double>> axes;
  for (const auto& g : model.variables()) {
    std::vector<double> axis;
    if (g.kind == GeneKind::integer) {
      for (double v = std::ceil(g.lower); v <= g.upper; v += 1.0) axis.push_back(v);
    } else if (g.step > 0.0) {
      axis = grid_points(g.lower, g.upper, g.step);
    } else {
      throw ValidationError("variable '" + g.name + "' is continuous; give it a step to enumerate");
    }
    size *= static_cast<double>(axis.size());
    axes.push_back(std::move(axis));
  }
  if (size > static_cast<double>(oracle::kWindfarmBudget)) {
    throw BudgetError("custom grid too large to enumerate", size);
  }
  std::vector<DecisionVector> xs;
  std::vector<std::size_t> idx(axes.size(), 0);
  if (std::any_of(axes.begin(), axes.end(), [](const auto& a) { return a.empty(); })) return xs;
  while (true) {
    DecisionVector x(axes.size());
    for (std::size_t i = 0; i < axes.size(); ++i) x[i] = axes[i][idx[i]];
    xs.push_back(std::move(x));
    std::size_t k = axes.size();
    while (k > 0) {
      --k;
      if (++idx[k] < axes[k].size()) break;
      idx[k] = 0;
      if (k == 0) return xs;
    }
    if (axes.empty()) return xs;
  }
}

}  // namespace

oracle::EnumerationReport run_oracle(const io::LoadedProblem& loaded) {
  const SystemModel* model = loaded.problem.model.get();
  if (const auto* wf = dynamic_cast<const windfarm::WindfarmModel*>(model)) {
    const double step = wf->grid_step() > 0.0 ? wf->grid_step() : loaded.file.anchor_grid_step;
    return oracle::enumerate_windfarm(loaded.problem, step);
  }
  if (dynamic_cast<const alloc::AllocModel*>(model)) return oracle::enumerate_alloc(loaded.problem);
  if (const auto* lin = dynamic_cast<const LinearModel*>(model)) {
    return oracle::evaluate_exhaustive(loaded.problem, linear_grid(*lin));
  }
  throw SchemaError("no oracle for problem kind '" + loaded.file.kind + "'");
}

io::LoadedProblem apply_whatif(const io::LoadedProblem& base, const io::Override& o) {
  return io::build_problem(io::apply_override(base.file, o));
}

io::Json run_summary(const io::LoadedProblem& loaded, const RunResult& result) {
  const auto ev = io::evaluation_to_json(loaded, result.best);
  return {
      {"problem_id", io::problem_id(loaded.file)},
      {"best_x", result.best_x},
      {"best_Z", std::isfinite(result.best_Z) ? io::Json(result.best_Z) : io::Json(nullptr)},
      {"f", ev.at("f")},
      {"preferences", ev.at("preferences")},
      {"acceptable", ev.at("acceptable")},
  };
}

io::Json whatif_report(const io::LoadedProblem& base, const RunResult& base_result,
                       const io::LoadedProblem& alt, const RunResult* alt_result,
                       const std::exception* alt_error) {
  io::Json j = {{"format_version", io::kWhatIfFormat},
                {"problem_kind", base.file.kind},
                {"seed", base_result.seed},
                {"base", run_summary(base, base_result)}};
  if (alt_result) {
    j["whatif"] = run_summary(alt, *alt_result);
    j["whatif"]["status"] = "done";
    j["best_x_changed"] = alt_result->best_x != base_result.best_x;
  } else {
    j["whatif"] = {{"problem_id", io::problem_id(alt.file)}, {"status", "failed"}};
    if (alt_error) j["whatif"]["error"] = error_json(*alt_error);
    j["best_x_changed"] = nullptr;
  }
  j["base"]["status"] = "done";
  return j;
}

}  // namespace odesys::app
