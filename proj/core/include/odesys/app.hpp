#pragma once

// Operations shared by the command-line tool and the HTTP service, so both
// produce byte-identical documents for the same (problem, config, seed).

#include <cstdint>
#include <exception>
#include <optional>
#include <string>

#include "odesys/io.hpp"
#include "odesys/oracle.hpp"

namespace odesys::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,   ///< unexpected internal error
  kExitInput = 2,     ///< invalid file, flag or override
  kExitNoSolution = 3 ///< no feasible and acceptable solution
};

/// Exit code for an exception escaping a run.
int exit_code(const std::exception& e) noexcept;
/// Machine-readable error code matching exit_code().
std::string error_code(int exit) noexcept;
/// {"code", "exit_code", "message"} plus pointer/line/column for InputError.
io::Json error_json(const std::exception& e);

/// Copy of `base` with a new seed and solver overrides merged in. Override
/// errors point under `pointer`.
io::LoadedProblem with_run_settings(const io::LoadedProblem& base, std::optional<std::uint64_t> seed,
                                    const io::Json* solver_overrides,
                                    const std::string& pointer = "/config");

struct SolveOutput {
  RunResult result;
  std::string document;  ///< serialize_result()
};

/// Runs IMAP with the problem's encoding and config.
SolveOutput run_solve(const io::LoadedProblem& loaded);

/// Exhaustive enumeration: windfarm on the encoding grid (anchor grid when
/// the encoding is continuous), alloc over all schedules, custom over the
/// integer/stepped variable grid.
oracle::EnumerationReport run_oracle(const io::LoadedProblem& loaded);

/// Applies an override to `base`, keeping seed and solver settings.
io::LoadedProblem apply_whatif(const io::LoadedProblem& base, const io::Override& o);

/// One side of a what-if comparison: best_x, best_Z, f and per-actor P.
io::Json run_summary(const io::LoadedProblem& loaded, const RunResult& result);

/// Side-by-side report. Pass `alt_error` when the what-if run failed.
io::Json whatif_report(const io::LoadedProblem& base, const RunResult& base_result,
                       const io::LoadedProblem& alt, const RunResult* alt_result,
                       const std::exception* alt_error);

}  // namespace odesys::app
