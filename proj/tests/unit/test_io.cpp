#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <string>

#include "odesys/app.hpp"
#include "odesys/io.hpp"

using namespace odesys;
using io::Json;

namespace {

std::string fixture_path(const std::string& name) {
  return std::string(ODESYS_FIXTURE_DIR) + "/" + name + ".fixture.json";
}

Json fixture_json(const std::string& name) { return Json::parse(io::read_file(fixture_path(name))); }

io::InputError load_error(const std::string& text) {
  try {
    io::load(text, "doc.json");
  } catch (const io::InputError& e) {
    return e;
  }
  ADD_FAILURE() << "expected InputError";
  return io::InputError("", "", 0, 0, "");
}

Json small_solver(Json doc) {
  doc["solvability"]["solver"] = {{"population_size", 30}, {"max_generations", 20}, {"stall_generations", 10}};
  return doc;
}

Json custom_doc() {
  return Json::parse(R"({
    "format_version": "odesys-problem/1",
    "problem_kind": "custom",
    "capability": {
      "variables": [
        {"name": "a", "kind": "integer", "lower": 0, "upper": 3},
        {"name": "b", "kind": "integer", "lower": 0, "upper": 3}
      ],
      "performance": [
        {"name": "total", "coefficients": [1, 1]},
        {"name": "spread", "coefficients": [1, -1], "constant": 3}
      ]
    },
    "feasibility": {
      "constraints": [{"name": "cap", "coefficients": [1, 1], "relation": "<=", "rhs": 4}]
    },
    "desirability": {
      "actors": [{
        "id": "owner",
        "curves": {
          "total": {"direction": "ascending", "breakpoints": [[0, 0], [6, 100]]},
          "spread": {"direction": "ascending", "breakpoints": [[0, 0], [6, 100]]}
        },
        "weights": {"total": 1.0}
      }]
    },
    "solvability": {"solver": {"population_size": 20, "max_generations": 30}},
    "seed": 3
  })");
}

}  // namespace

TEST(ProblemFile, FixturesRoundTrip) {
  for (const char* name : {"windfarm", "alloc"}) {
    const auto f = io::parse_problem(io::read_file(fixture_path(name)));
    EXPECT_EQ(io::parse_problem(io::serialize_problem(f)), f) << name;
    EXPECT_EQ(io::serialize_problem(io::parse_problem(io::serialize_problem(f))), io::serialize_problem(f));
  }
}

TEST(ProblemFile, CustomRoundTrip) {
  const auto f = io::parse_problem(custom_doc().dump());
  EXPECT_EQ(io::parse_problem(io::serialize_problem(f)), f);
}

TEST(ProblemFile, UnknownFieldIsLocated) {
  std::string text = io::read_file(fixture_path("windfarm"));
  ASSERT_EQ(text.substr(0, 2), "{\n");
  text.insert(2, "  \"bogus\": 1,\n");
  try {
    io::parse_problem(text, "doc.json");
    FAIL();
  } catch (const io::InputError& e) {
    EXPECT_EQ(e.pointer(), "/bogus");
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 12u);
    EXPECT_EQ(e.source(), "doc.json");
  }
}

TEST(ProblemFile, UnknownNestedFieldNamesPointer) {
  auto doc = fixture_json("windfarm");
  doc["capability"]["vessels"][1]["colour"] = "red";
  const auto e = load_error(doc.dump(2));
  EXPECT_EQ(e.pointer(), "/capability/vessels/1/colour");
  EXPECT_GT(e.line(), 0u);
}

TEST(ProblemFile, WeightSumIsRejected) {
  auto doc = fixture_json("windfarm");
  doc["desirability"]["actors"][0]["weights"]["duration"] = 0.15;
  const auto e = load_error(doc.dump(2));
  EXPECT_EQ(e.pointer(), "/desirability/actors");
  EXPECT_NE(e.message().find("0.9"), std::string::npos);
}

TEST(ProblemFile, NegativeWeightIsRejected) {
  auto doc = fixture_json("windfarm");
  doc["desirability"]["actors"][0]["weights"]["duration"] = -0.25;
  EXPECT_EQ(load_error(doc.dump()).pointer(), "/desirability/actors/0/weights/duration");
}

TEST(ProblemFile, WrongFormatVersion) {
  auto doc = fixture_json("alloc");
  doc["format_version"] = "odesys-problem/2";
  EXPECT_EQ(load_error(doc.dump()).pointer(), "/format_version");
}

TEST(ProblemFile, UnknownKind) {
  auto doc = fixture_json("alloc");
  doc["problem_kind"] = "bridge";
  EXPECT_EQ(load_error(doc.dump()).pointer(), "/problem_kind");
}

TEST(ProblemFile, UnknownCriterionInWeights) {
  auto doc = fixture_json("windfarm");
  doc["desirability"]["actors"][0]["weights"] = {{"noise", 0.5}};
  EXPECT_EQ(load_error(doc.dump()).pointer(), "/desirability/actors/0/weights/noise");
}

TEST(ProblemFile, ThresholdForUnknownActor) {
  auto doc = fixture_json("windfarm");
  doc["acceptability"]["thresholds"] = {{"regulator", {{"cost", 10}}}};
  EXPECT_EQ(load_error(doc.dump()).pointer(), "/acceptability/thresholds/regulator");
}

TEST(ProblemFile, NonMonotoneCurveRejected) {
  auto doc = custom_doc();
  doc["desirability"]["actors"][0]["curves"]["total"]["breakpoints"] = {{0, 0}, {3, 100}, {6, 50}};
  const auto e = load_error(doc.dump());
  EXPECT_EQ(e.pointer(), "/desirability/actors/0/curves/total/breakpoints");
}

TEST(ProblemFile, ConstraintLengthMismatch) {
  auto doc = custom_doc();
  doc["feasibility"]["constraints"][0]["coefficients"] = {1, 1, 1};
  EXPECT_EQ(load_error(doc.dump()).pointer().rfind("/capability", 0), 0u);
}

TEST(ProblemFile, SyntaxErrorHasLineAndColumn) {
  try {
    io::parse_json("{\n  \"a\": 1,\n  \"b\": ]\n}", "bad.json");
    FAIL();
  } catch (const io::InputError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 8u);
    EXPECT_EQ(e.source(), "bad.json");
  }
}

TEST(ProblemFile, MissingFileIsInputError) {
  EXPECT_THROW(io::load_path("/nonexistent/problem.json"), io::InputError);
}

TEST(LocatePointer, FindsValuesAndFallsBack) {
  const std::string text = R"({"a": {"b": [10, {"c": true}]}, "d~e": 5})";
  EXPECT_EQ(io::locate_pointer(text, ""), 0u);
  EXPECT_EQ(text.substr(*io::locate_pointer(text, "/a/b/0"), 2), "10");
  EXPECT_EQ(text.substr(*io::locate_pointer(text, "/a/b/1/c"), 4), "true");
  EXPECT_EQ(text.substr(*io::locate_pointer(text, "/d~0e"), 1), "5");
  EXPECT_EQ(io::locate_pointer(text, "/a/b/7"), io::locate_pointer(text, "/a/b"));
  EXPECT_EQ(io::locate_pointer(text, "/zzz"), 0u);
}

TEST(LineColumn, OneBased) {
  const std::string text = "ab\ncd\n\nef";
  EXPECT_EQ(io::line_column(text, 0), (std::pair<std::size_t, std::size_t>{1, 1}));
  EXPECT_EQ(io::line_column(text, 4), (std::pair<std::size_t, std::size_t>{2, 2}));
  EXPECT_EQ(io::line_column(text, 7), (std::pair<std::size_t, std::size_t>{4, 1}));
}

TEST(ProblemId, StableUnderFormattingAndSensitiveToContent) {
  const auto doc = fixture_json("alloc");
  const auto a = io::parse_problem(doc.dump());
  const auto b = io::parse_problem(doc.dump(4));
  EXPECT_EQ(io::problem_id(a), io::problem_id(b));
  EXPECT_EQ(io::problem_id(a).size(), 16u);
  auto changed = doc;
  changed["seed"] = 99;
  EXPECT_NE(io::problem_id(io::parse_problem(changed.dump())), io::problem_id(a));
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(io::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(io::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Override, RoundTrip) {
  const std::string text = R"({"format_version": "odesys-override/1",
    "weights": {"energy_provider": {"duration": 1.0}},
    "curves": {"marine_contractor": {"cost": {"direction": "descending", "breakpoints": [[0, 100], [1e7, 0]]}}},
    "thresholds": {"energy_provider": {"cost": 20}},
    "rescale": {"marine_contractor": {"cost": {"scale": 2, "offset": 1}}}})";
  const auto o = io::parse_override(text);
  EXPECT_EQ(io::parse_override(io::override_to_json(o).dump()), o);
}

TEST(Override, WeightsReplaceWholeMatrix) {
  const auto file = io::parse_problem(io::read_file(fixture_path("windfarm")));
  const auto o = io::parse_override(
      R"({"format_version": "odesys-override/1", "weights": {"energy_provider": {"cost": 1.0}}})");
  const auto alt = io::apply_override(file, o);
  EXPECT_EQ(alt.actors[0].weights, (std::map<std::string, double>{{"cost", 1.0}}));
  EXPECT_TRUE(alt.actors[1].weights.empty());
  EXPECT_EQ(alt.actors[0].curves, file.actors[0].curves);
  EXPECT_NO_THROW(io::build_problem(alt));
}

TEST(Override, CurvesThresholdsAndRescaleMerge) {
  const auto file = io::parse_problem(io::read_file(fixture_path("windfarm")));
  const auto o = io::parse_override(R"({"format_version": "odesys-override/1",
    "curves": {"marine_contractor": {"cost": {"direction": "descending", "breakpoints": [[5e5, 100], [6e6, 0]]}}},
    "thresholds": {"energy_provider": {"emissions": 10}},
    "rescale": {"energy_provider": {"duration": {"scale": 3}}}})");
  const auto alt = io::apply_override(file, o);
  EXPECT_EQ(alt.actors[1].curves.at("cost").breakpoints.size(), 2u);
  EXPECT_EQ(alt.actors[1].curves.at("duration"), file.actors[1].curves.at("duration"));
  EXPECT_EQ(alt.thresholds.at("energy_provider").at("emissions"), 10.0);
  EXPECT_EQ(alt.actors[0].rescale.at("duration").scale, 3.0);
  EXPECT_EQ(alt.actors[0].weights, file.actors[0].weights);
  EXPECT_EQ(alt.seed, file.seed);
}

TEST(Override, UnknownActorThrows) {
  const auto file = io::parse_problem(io::read_file(fixture_path("windfarm")));
  const auto o = io::parse_override(
      R"({"format_version": "odesys-override/1", "thresholds": {"regulator": {"cost": 1}}})");
  EXPECT_THROW(io::apply_override(file, o), io::InputError);
}

TEST(Override, UnknownKeyRejected) {
  EXPECT_THROW(io::parse_override(R"({"format_version": "odesys-override/1", "seed": 4})"), io::InputError);
}

TEST(SolverConfig, RoundTripAndInfiniteKappa) {
  GaConfig c;
  c.prune_kappa = std::numeric_limits<double>::infinity();
  c.population_size = 17;
  const auto j = io::config_to_json(c);
  EXPECT_EQ(j.at("prune_kappa"), "inf");
  const auto back = io::config_from_json(j, GaConfig{});
  EXPECT_TRUE(std::isinf(back.prune_kappa));
  EXPECT_EQ(back.population_size, 17u);
}

TEST(SolverConfig, UnknownKeyRejected) {
  try {
    io::config_from_json(Json{{"populaton_size", 10}}, GaConfig{}, "/solvability/solver");
    FAIL();
  } catch (const io::InputError& e) {
    EXPECT_EQ(e.pointer(), "/solvability/solver/populaton_size");
  }
}

TEST(SolverConfig, SeedComesFromFile) {
  auto doc = fixture_json("windfarm");
  doc["seed"] = 42;
  const auto lp = io::load(doc.dump());
  EXPECT_EQ(lp.config.rng_seed, 42u);
  EXPECT_EQ(lp.config.population_size, 100u);
  EXPECT_EQ(lp.config.stall_generations, 25u);
}

TEST(ResultDocument, StableBytesAndTrailingNewline) {
  const auto lp = io::load(small_solver(fixture_json("windfarm")).dump());
  const auto a = app::run_solve(lp);
  const auto b = app::run_solve(lp);
  EXPECT_EQ(a.document, b.document);
  ASSERT_FALSE(a.document.empty());
  EXPECT_EQ(a.document.back(), '\n');
  const auto j = Json::parse(a.document);
  EXPECT_EQ(j.at("format_version"), io::kResultFormat);
  EXPECT_EQ(j.at("best_x").size(), 5u);
  EXPECT_TRUE(j.at("best").at("acceptable").get<bool>());
}

TEST(ResultDocument, NanBecomesNull) {
  const auto lp = io::load(fixture_json("windfarm").dump());
  CandidateEvaluation ev = evaluate_candidate(lp.problem, {1, 0, 0, 4, 4});
  ASSERT_FALSE(ev.feasible);
  const auto j = io::evaluation_to_json(lp, ev);
  EXPECT_FALSE(j.at("feasible").get<bool>());
  EXPECT_FALSE(j.at("violations").empty());
  EXPECT_NO_THROW(Json::parse(j.dump()));
}

TEST(CustomKind, SolvesLinearModel) {
  const auto lp = io::load(custom_doc().dump());
  EXPECT_EQ(lp.problem.model->criteria(), (std::vector<std::string>{"total", "spread"}));
  const auto out = app::run_solve(lp);
  EXPECT_DOUBLE_EQ(out.result.best.f_values[0], 4.0);
  const auto rep = app::run_oracle(lp);
  EXPECT_EQ(rep.enumerated, 16u);
  EXPECT_EQ(rep.feasible_count, 13u);
  EXPECT_EQ(rep.candidates[*rep.best_index].f[0], 4.0);
}

TEST(CustomKind, AutomaticAnchorsUnsupported) {
  auto doc = custom_doc();
  doc["desirability"]["actors"][0]["curves"]["total"] = {{"direction", "ascending"}, {"anchors", "auto"}};
  EXPECT_THROW(io::load(doc.dump()), io::InputError);
}

TEST(AutoAnchors, WindfarmCurvesSpanExtrema) {
  const auto lp = io::load(fixture_json("windfarm").dump());
  for (const auto& a : lp.problem.actors) {
    for (std::size_t i = 0; i < a.curves.size(); ++i) {
      ASSERT_TRUE(a.curves[i]);
      const auto [lo, hi] = a.curves[i]->reference_interval();
      EXPECT_LT(lo, hi);
    }
  }
}
