// odesys: solve, compare and serve preference-based design problems.

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "odesys/app.hpp"
#include "odesys/service.hpp"

namespace {

using namespace odesys;
namespace fs = std::filesystem;

void print_vector(std::ostream& out, const std::vector<double>& x) {
  out << '[';
  for (std::size_t i = 0; i < x.size(); ++i) out << (i ? ", " : "") << x[i];
  out << ']';
}

void print_summary(std::ostream& out, const io::LoadedProblem& lp, const RunResult& r) {
  const auto criteria = lp.problem.model->criteria();
  out << std::setprecision(10);
  out << "best_x: ";
  print_vector(out, r.best_x);
  out << "\nbest_Z: " << r.best_Z << "\n";
  out << "feasible: " << (r.best.feasible ? "yes" : "no")
      << "  acceptable: " << (r.best.acceptable ? "yes" : "no") << "\n";
  for (std::size_t i = 0; i < r.best.f_values.size(); ++i) {
    out << "  f " << criteria[i] << " = " << r.best.f_values[i] << "\n";
  }
  const auto cols = lp.problem.score_columns();
  for (std::size_t c = 0; c < cols.size() && c < r.best.p_values.size(); ++c) {
    out << "  P " << lp.problem.actors[cols[c].actor].id << "/" << criteria[cols[c].criterion]
        << " = " << r.best.p_values[c] << "\n";
  }
  out << "generations: " << r.generations << " (" << to_string(r.terminated_by)
      << "), evaluations: " << r.evaluations << "\n";
}

void print_oracle_summary(std::ostream& out, const io::LoadedProblem& lp,
                          const oracle::EnumerationReport& rep) {
  const auto criteria = lp.problem.model->criteria();
  out << std::setprecision(10);
  out << "enumerated: " << rep.enumerated << "  candidates: " << rep.candidates.size()
      << "  feasible: " << rep.feasible_count << "  acceptable: " << rep.acceptable_count << "\n";
  if (rep.best_index) {
    out << "best_x: ";
    print_vector(out, rep.best_x);
    out << "\nbest_Z: " << rep.best_Z << "\n";
  }
  for (std::size_t i = 0; i < rep.extrema.size() && i < criteria.size(); ++i) {
    out << "  " << criteria[i] << " in [" << rep.extrema[i].min << ", " << rep.extrema[i].max << "]\n";
  }
}

int report_error(const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  return app::exit_code(e);
}

struct SolveArgs {
  std::string problem;
  std::optional<std::uint64_t> seed;
  bool oracle = false;
  std::string out;
  std::string trace;
};

int cmd_solve(const SolveArgs& a) {
  try {
    const auto lp = app::with_run_settings(io::load_path(a.problem), a.seed, nullptr);
    if (!a.out.empty()) fs::create_directories(a.out);
    if (a.oracle) {
      const auto rep = app::run_oracle(lp);
      const auto doc = io::serialize_oracle(lp, rep);
      if (a.out.empty()) {
        std::cout << doc;
        print_oracle_summary(std::cerr, lp, rep);
      } else {
        io::write_file((fs::path(a.out) / "oracle.json").string(), doc);
        print_oracle_summary(std::cout, lp, rep);
      }
      return rep.best_index ? app::kExitOk : app::kExitNoSolution;
    }
    const auto out = app::run_solve(lp);
    std::string trace_path = a.trace;
    if (trace_path.empty() && !a.out.empty()) trace_path = (fs::path(a.out) / "trace.csv").string();
    if (!trace_path.empty()) io::write_file(trace_path, trace_csv(out.result.trace));
    if (a.out.empty()) {
      std::cout << out.document;
      print_summary(std::cerr, lp, out.result);
    } else {
      io::write_file((fs::path(a.out) / "result.json").string(), out.document);
      print_summary(std::cout, lp, out.result);
    }
    return app::kExitOk;
  } catch (const std::exception& e) {
    return report_error(e);
  }
}

struct WhatIfArgs {
  std::string problem;
  std::string whatif;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_whatif(const WhatIfArgs& a) {
  try {
    const auto base = app::with_run_settings(io::load_path(a.problem), a.seed, nullptr);
    std::string override_text;
    try {
      override_text = io::read_file(a.whatif);
    } catch (const Error& e) {
      throw io::InputError(a.whatif, "", 0, 0, e.what());
    }
    const auto o = io::parse_override(override_text, a.whatif);
    io::LoadedProblem alt;
    try {
      alt = app::apply_whatif(base, o);
    } catch (const io::InputError& e) {
      throw io::InputError(a.whatif, "", 0, 0,
                           "override yields an invalid problem: " + e.message() +
                               (e.pointer().empty() ? "" : " (at " + e.pointer() + ")"));
    }
    const auto base_out = app::run_solve(base);
    io::Json report;
    int code = app::kExitOk;
    try {
      const auto alt_out = app::run_solve(alt);
      report = app::whatif_report(base, base_out.result, alt, &alt_out.result, nullptr);
    } catch (const std::exception& e) {
      code = app::exit_code(e);
      if (code != app::kExitNoSolution) throw;
      report = app::whatif_report(base, base_out.result, alt, nullptr, &e);
      std::cerr << "what-if run failed: " << e.what() << "\n";
    }
    const std::string doc = report.dump(2) + "\n";
    if (a.out.empty()) {
      std::cout << doc;
    } else {
      fs::create_directories(a.out);
      io::write_file((fs::path(a.out) / "whatif.json").string(), doc);
    }
    return code;
  } catch (const std::exception& e) {
    return report_error(e);
  }
}

int cmd_validate(const std::string& problem) {
  try {
    const auto lp = io::load_path(problem);
    std::cout << problem << ": ok (" << lp.file.kind << ", id " << io::problem_id(lp.file) << ")\n";
    return app::kExitOk;
  } catch (const std::exception& e) {
    return report_error(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"odesys: integrative maximisation of aggregated preferences"};
  cli.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve = cli.add_subcommand("solve", "Solve a problem file with IMAP or the oracle");
  solve->add_option("--problem", solve_args.problem, "Problem file")->required();
  solve->add_option("--seed", solve_args.seed, "Random seed (overrides the file)");
  solve->add_flag("--oracle", solve_args.oracle, "Enumerate exhaustively instead of searching");
  solve->add_option("--out", solve_args.out, "Directory for result.json / oracle.json and trace.csv");
  solve->add_option("--trace", solve_args.trace, "Convergence trace CSV path");

  WhatIfArgs whatif_args;
  auto* whatif = cli.add_subcommand("whatif", "Re-solve with an override and compare");
  whatif->add_option("--problem", whatif_args.problem, "Problem file")->required();
  whatif->add_option("--whatif", whatif_args.whatif, "Override file")->required();
  whatif->add_option("--seed", whatif_args.seed, "Random seed (overrides the file)");
  whatif->add_option("--out", whatif_args.out, "Directory for whatif.json");

  std::string validate_path;
  auto* validate = cli.add_subcommand("validate", "Check a problem file");
  validate->add_option("--problem", validate_path, "Problem file")->required();

  service::ServiceOptions serve_opts;
  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve = cli.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");
  serve->add_option("--store", serve_opts.store_dir, "Record store directory");
  serve->add_option("--workers", serve_opts.workers, "Run workers")->check(CLI::PositiveNumber);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : app::kExitInput;
  }

  if (*solve) return cmd_solve(solve_args);
  if (*whatif) return cmd_whatif(whatif_args);
  if (*validate) return cmd_validate(validate_path);
  if (*serve) {
    std::cerr << "odesys service listening on " << host << ":" << port << "\n";
    const int rc = service::serve(serve_opts, host, port);
    if (rc != 0) std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
    return rc;
  }
  return app::kExitInput;
}
