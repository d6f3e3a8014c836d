#pragma once

// Versioned JSON formats: problem files, results, oracle reports and
// what-if overrides, plus the registry mapping problem kinds to models.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "odesys/errors.hpp"
#include "odesys/imap.hpp"
#include "odesys/oracle.hpp"
#include "odesys/problem.hpp"

namespace odesys::io {

using Json = nlohmann::json;

inline constexpr const char* kProblemFormat = "odesys-problem/1";
inline constexpr const char* kResultFormat = "odesys-result/1";
inline constexpr const char* kOracleFormat = "odesys-oracle/1";
inline constexpr const char* kOverrideFormat = "odesys-override/1";
inline constexpr const char* kWhatIfFormat = "odesys-whatif/1";

/// Input error tied to a location in a document. `pointer` is a JSON
/// pointer; line and column are 1-based, 0 when unknown.
class InputError : public SchemaError {
 public:
  InputError(std::string source, std::string pointer, std::size_t line, std::size_t column,
             std::string message);

  const std::string& source() const noexcept { return source_; }
  const std::string& pointer() const noexcept { return pointer_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string source_;
  std::string pointer_;
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

/// Byte offset of the value addressed by `pointer` in `text`. When the
/// pointer does not resolve, the offset of its deepest existing ancestor.
std::optional<std::size_t> locate_pointer(const std::string& text, const std::string& pointer);

/// 1-based (line, column) of a byte offset.
std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset);

/// Parses JSON text; syntax errors become InputError with line/column.
Json parse_json(const std::string& text, const std::string& source);

struct ProblemFile;

/// A problem-kind plug-in: validates its capability/feasibility sections,
/// builds the model and computes automatic curve anchors. `build` reports
/// bad input as InputError with pointers under /capability or /feasibility.
struct ModelFactory {
  std::function<std::shared_ptr<const SystemModel>(const Json& capability,
                                                   const Json& feasibility, double grid_step)>
      build;
  /// Per-criterion ranges for "anchors": "auto" curves; null if unsupported.
  std::function<std::vector<CriterionRange>(const SystemModel& model, const ProblemFile& file)>
      anchors;
};

void register_model(const std::string& kind, ModelFactory factory);
const ModelFactory& model_factory(const std::string& kind);
std::vector<std::string> registered_kinds();

struct CurveSpec {
  CurveDirection direction = CurveDirection::descending;
  /// Empty means anchors come from the model ("anchors": "auto").
  std::vector<Breakpoint> breakpoints;

  bool automatic() const noexcept { return breakpoints.empty(); }
  bool operator==(const CurveSpec&) const = default;
};

struct ActorSpec {
  std::string id;
  std::map<std::string, CurveSpec> curves;
  std::map<std::string, double> weights;
  std::map<std::string, AffineMap> rescale;

  bool operator==(const ActorSpec&) const = default;
};

/// Declarative problem file. Capability and feasibility stay as JSON and
/// are interpreted by the registered factory for `kind`.
struct ProblemFile {
  std::string kind;
  Json capability = Json::object();
  Json feasibility = Json::object();
  std::vector<ActorSpec> actors;
  double anchor_grid_step = 0.1;
  std::size_t anchor_samples = 2000;
  std::map<std::string, std::map<std::string, double>> thresholds;
  GaConfig solver;  ///< rng_seed is ignored; `seed` applies
  double grid_step = 0.0;
  std::uint64_t seed = 1;
  TimeContext time;

  bool operator==(const ProblemFile&) const = default;
};

/// Parses and validates a problem document, including its capability
/// section. Cross-references are checked by build_problem.
ProblemFile parse_problem(const std::string& text, const std::string& source = "<problem>");
Json problem_to_json(const ProblemFile& file);
std::string serialize_problem(const ProblemFile& file);

struct LoadedProblem {
  ProblemFile file;
  ProblemDefinition problem;
  Encoding encoding;
  GaConfig config;  ///< solver settings with rng_seed = file seed
};

/// Builds the model, resolves automatic anchors and validates the result.
/// Errors point into the file via `pointer` paths.
LoadedProblem build_problem(const ProblemFile& file);

/// parse_problem + build_problem with every error located in `text`.
LoadedProblem load(const std::string& text, const std::string& source = "<problem>");
/// Reads and loads a problem file; an unreadable path is an InputError.
LoadedProblem load_path(const std::string& path);

/// Short content id: 16 hex digits of the SHA-256 of the canonical dump.
std::string problem_id(const ProblemFile& file);

struct Override {
  std::optional<std::map<std::string, std::map<std::string, double>>> weights;
  std::map<std::string, std::map<std::string, CurveSpec>> curves;
  std::map<std::string, std::map<std::string, double>> thresholds;
  std::map<std::string, std::map<std::string, AffineMap>> rescale;

  bool operator==(const Override&) const = default;
};

Override parse_override(const std::string& text, const std::string& source = "<override>");
Json override_to_json(const Override& o);
/// `weights` replaces the whole weight matrix; curves, thresholds and
/// rescale entries replace the named entries only. Unknown actors throw.
ProblemFile apply_override(const ProblemFile& file, const Override& o);

/// Re-throws `e` with its line and column resolved in `text`.
[[noreturn]] void rethrow_located(const InputError& e, const std::string& text,
                                  const std::string& source);

Json config_to_json(const GaConfig& config);
/// Reads solver keys from `j` on top of `base`; unknown keys rejected.
GaConfig config_from_json(const Json& j, GaConfig base, const std::string& pointer = "");

Json evaluation_to_json(const LoadedProblem& loaded, const CandidateEvaluation& ev);
Json result_to_json(const LoadedProblem& loaded, const RunResult& result);
/// The canonical result document, shared by the CLI and the service.
std::string serialize_result(const LoadedProblem& loaded, const RunResult& result);

Json oracle_to_json(const LoadedProblem& loaded, const oracle::EnumerationReport& report);
std::string serialize_oracle(const LoadedProblem& loaded, const oracle::EnumerationReport& report);

/// Lower-case hex SHA-256 of `data`.
std::string sha256_hex(const std::string& data);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace odesys::io
