#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "z2lab/experiments.hpp"

using namespace z2lab;

namespace {

std::string csv_of(const ExperimentResult& r) {
  std::ostringstream out;
  write_csv(out, r.rows);
  return out.str();
}

std::string json_of(const ExperimentResult& r) {
  std::ostringstream out;
  write_json(out, r.rows);
  return out.str();
}

const char* kSmallWilson = R"({
  "kind": "wilson", "seed": 5, "betas": [0.5, 0.6],
  "loops": [{"m": 2, "n": 1, "plane": [0, 1]}, {"m": 3, "n": 1, "plane": [2, 3]}],
  "burn_in": 5, "samples": 64
})";

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentSpec s = parse_spec(kSmallWilson);
  CHECK(s.kind == ExperimentKind::wilson);
  CHECK(s.seed == 5);
  CHECK(s.betas.size() == 2);
  CHECK(s.loops.size() == 2);
  CHECK(s.loops[1].dir_a == 2);
  CHECK(s.chain.samples == 64);
  CHECK(s.margin == 6);

  const ExperimentSpec c = parse_spec(R"({"kind": "census", "betas": [0.6],
      "box": {"lo": [0,0,0,0], "hi": [13,13,13,13]}, "window": {"cube": [6, 7]}})");
  CHECK(c.box == cube(0, 13));
  CHECK(*c.window == cube(6, 7));

  CHECK(parse_spec("{}", ExperimentKind::selftest).kind == ExperimentKind::selftest);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS((void)parse_spec("{"), ConfigError);
  CHECK_THROWS_AS((void)parse_spec("[]"), ConfigError);
  CHECK_THROWS_AS((void)parse_spec(R"({"kind": "bogus"})"), ConfigError);
  CHECK_THROWS_AS((void)parse_spec(R"({"betas": [0.5]})"), ConfigError);
  CHECK_THROWS_AS((void)parse_spec(R"({"kind": "wilson", "betas": [0.5], "loops": [{"m": 2, "n": 2}], "typo": 1})"),
                  ConfigError);
  CHECK_THROWS_AS((void)parse_spec(R"({"kind": "wilson", "betas": [0.5], "loops": [{"m": 2, "n": 2}], "margin": 3})"),
                  ConfigError);
  CHECK_THROWS_AS((void)parse_spec(R"({"kind": "wilson", "betas": [-1], "loops": [{"m": 2, "n": 2}]})"),
                  ConfigError);
  CHECK_THROWS_AS((void)parse_spec(R"({"kind": "wilson", "betas": [0.5], "loops": [{"edges": [[0,0,0,0,0]]}]})"),
                  ConfigError);
  CHECK_THROWS_AS((void)parse_spec(R"({"kind": "wilson", "betas": ["x"], "loops": [{"m": 2, "n": 2}]})"),
                  ConfigError);
  CHECK_THROWS_AS((void)parse_spec(R"({"kind": "census", "betas": [0.6], "box": {"cube": [0, 13]},
                                       "window": {"cube": [5, 7]}})"),
                  ConfigError);
  CHECK_THROWS_AS((void)parse_spec(R"({"kind": "duality", "betas": [0.5], "box": {"lo": [0,0,0,0], "hi": [1,1,1,2]}})"),
                  ConfigError);
  CHECK_THROWS_AS((void)parse_spec(R"({"kind": "decay", "loop": {"m": 2, "n": 2}, "distances": [12]})"), ConfigError);
  CHECK_THROWS_AS((void)parse_spec(R"({"kind": "coupling", "lambdas": [0.1], "distances": [0]})"), ConfigError);
  CHECK_THROWS_AS((void)parse_spec(R"({"kind": "wilson"})", ExperimentKind::census), ConfigError);
}

TEST_CASE("explicit edge loops") {
  const ExperimentSpec s = parse_spec(R"({"kind": "wilson", "betas": [0.5], "loops": [{"edges":
      [[0,0,0,0,0], [1,0,0,0,1], [0,1,0,0,0], [0,0,0,0,1]]}]})");
  const LoopSpec l = s.loops[0].build();
  CHECK(l.ell == 4);
  CHECK(l.ell0 == 4);
}

TEST_CASE("number formatting and seeds") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(1e-300) == "1e-300");
  CHECK(std::stod(format_double(0.1 + 0.2)) == 0.1 + 0.2);
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
}

TEST_CASE("csv rows are schema complete and match json") {
  const ExperimentResult r = run_experiment(parse_spec(kSmallWilson), 1);
  const std::string csv = csv_of(r);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == kCsvHeader);
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 12);
    ++n;
  }
  CHECK(n == r.rows.size());

  const auto j = nlohmann::json::parse(json_of(r));
  REQUIRE(j.size() == r.rows.size());
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    CHECK(j[i]["run_id"] == row.run_id);
    CHECK(j[i]["observable"] == row.observable);
    if (row.estimate)
      CHECK(j[i]["estimate"].get<double>() == *row.estimate);
    else
      CHECK(j[i]["estimate"].is_null());
    if (row.prediction)
      CHECK(j[i]["prediction"].get<double>() == *row.prediction);
    else
      CHECK(j[i]["prediction"].is_null());
    CHECK((row.observable == "wilson") == row.prediction.has_value());
    if (row.stderr_value) CHECK(*row.stderr_value >= 0.0);
  }
}

TEST_CASE("missing numerics are empty fields") {
  ResultRow row;
  row.run_id = "x-000";
  row.kind = "wilson";
  row.box = "0..1x0..1x0..1x0..1";
  row.observable = "wilson";
  std::ostringstream out;
  write_csv(out, {row});
  CHECK(out.str() == std::string(kCsvHeader) + "\nx-000,wilson,,,0..1x0..1x0..1x0..1,,,wilson,,,,,0\n");
}

TEST_CASE("identical seeds give identical bytes for any thread count") {
  const ExperimentSpec w = parse_spec(kSmallWilson);
  const std::string a = csv_of(run_experiment(w, 1));
  CHECK(a == csv_of(run_experiment(w, 1)));
  CHECK(a == csv_of(run_experiment(w, 3)));
  ExperimentSpec other = w;
  other.seed = 6;
  CHECK(a != csv_of(run_experiment(other, 1)));

  const ExperimentSpec c = parse_spec(R"({"kind": "coupling", "seed": 2, "lambdas": [0.1],
      "distances": [1, 2], "margin": 2, "burn_in": 2, "samples": 64, "replicas": 2})");
  CHECK(csv_of(run_experiment(c, 1)) == csv_of(run_experiment(c, 2)));

  const ExperimentSpec d = parse_spec(R"({"kind": "decay", "seed": 2, "beta": 0.7,
      "loop": {"m": 1, "n": 1}, "distances": [1, 2], "outer_margin": 3, "burn_in": 2, "samples": 64})");
  CHECK(csv_of(run_experiment(d, 1)) == csv_of(run_experiment(d, 2)));

  const ExperimentSpec s = parse_spec(R"({"kind": "census", "seed": 2, "betas": [0.5, 0.6],
      "box": {"cube": [0, 13]}, "window": {"cube": [6, 7]}, "burn_in": 2, "samples": 32})");
  CHECK(csv_of(run_experiment(s, 1)) == csv_of(run_experiment(s, 2)));
}

TEST_CASE("decay with identical boxes reports zero difference") {
  const ExperimentSpec d = parse_spec(R"({"kind": "decay", "seed": 9, "beta": 0.7,
      "loop": {"m": 1, "n": 1}, "distances": [3], "outer_margin": 3, "burn_in": 2, "samples": 64})");
  const ExperimentResult r = run_experiment(d, 1);
  CHECK(r.invariants_hold());
  bool found = false;
  for (const auto& row : r.rows)
    if (row.observable == "abs_difference") {
      CHECK(*row.estimate == 0.0);
      found = true;
    }
  CHECK(found);
}

TEST_CASE("coupling at lambda zero agrees after one sweep") {
  const ExperimentSpec c = parse_spec(R"({"kind": "coupling", "seed": 1, "lambdas": [0],
      "distances": [1, 3], "margin": 2, "burn_in": 1, "samples": 50})");
  for (const auto& row : run_experiment(c, 1).rows) CHECK(*row.estimate == 0.0);
}

TEST_CASE("duality experiment rows") {
  const ExperimentSpec s = parse_spec(R"({"kind": "duality", "betas": [0.5], "box": {"cube": [0, 1]}})");
  const ExperimentResult r = run_experiment(s, 1);
  CHECK(r.invariants_hold());
  CHECK(r.thresholds_hold());
  bool saw = false;
  for (const auto& row : r.rows)
    if (row.observable == "a_exponent") {
      CHECK(*row.estimate == 80.0);
      saw = true;
    }
  CHECK(saw);
}
