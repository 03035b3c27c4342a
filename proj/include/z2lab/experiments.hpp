#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "z2lab/gauge.hpp"
#include "z2lab/lattice.hpp"

// Experiment runners behind the z2lab command line. Every runner is a pure
// function of its spec: seeds for sub-runs are derived from the spec seed and
// the sub-run index, so output does not depend on the thread count.

namespace z2lab {

/// Invalid experiment configuration (exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind : std::uint8_t { selftest, wilson, census, duality, decay, coupling };

[[nodiscard]] std::string to_string(ExperimentKind k);
/// Throws ConfigError for unknown names.
[[nodiscard]] ExperimentKind parse_kind(const std::string& s);

/// A loop given either as an m x n rectangle or as an explicit edge list.
struct LoopInput {
  int m = 0, n = 0;
  int dir_a = 0, dir_b = 1;
  Vec4 offset{};
  std::vector<CellId> edges;  // used when non-empty

  /// Throws ConfigError if the edges do not form a generalized loop.
  [[nodiscard]] LoopSpec build() const;
};

struct ChainParams {
  int burn_in = 200;
  int spacing = 1;
  int samples = 1000;
  int replicas = 1;
};

struct ExpectationInput {
  double beta = 0.6;
  std::vector<std::vector<CellId>> plaquette_sets;
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::selftest;
  std::uint64_t seed = 1;
  std::string output;  // empty: standard output
  bool checks = false;
  ChainParams chain;

  std::vector<double> betas;    // wilson, census, duality
  std::vector<double> lambdas;  // coupling
  double beta = 1.0;            // decay
  std::vector<LoopInput> loops;  // wilson; decay uses loops.front()
  int margin = 6;               // wilson box margin; coupling outer margin
  Box box = cube(0, 1);         // census sampling box, duality primal cube
  std::optional<Box> window;    // census
  std::vector<int> distances;   // decay, coupling
  int outer_margin = 10;        // decay
  std::optional<ExpectationInput> expectation;  // duality
  int trials = 1000;            // selftest random forms per degree
  int selftest_size = 4;        // selftest boxes up to [0, size]^4

  /// Throws ConfigError on any invalid field.
  void validate() const;
};

/// Parses a JSON document; unknown keys and wrong types throw ConfigError.
/// `expected` (from the subcommand) must match a "kind" key when present.
[[nodiscard]] ExperimentSpec parse_spec(const std::string& json_text,
                                        std::optional<ExperimentKind> expected = std::nullopt);

struct ResultRow {
  std::string run_id;
  std::string kind;
  std::optional<double> beta;
  std::optional<double> lambda;
  std::string box;
  std::optional<std::int64_t> ell;
  std::optional<std::int64_t> ell0;
  std::string observable;
  std::optional<double> estimate;
  std::optional<double> stderr_value;
  std::optional<std::int64_t> n_samples;
  std::optional<double> prediction;
  std::uint64_t seed = 0;
};

/// Outcome of an experiment: rows plus the verdicts of its exact invariants
/// and (optional) acceptance thresholds.
struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<CheckResult> invariants;  // failure => exit 3
  std::vector<CheckResult> thresholds;  // failure => exit 4 when checks are on

  [[nodiscard]] bool invariants_hold() const;
  [[nodiscard]] bool thresholds_hold() const;
};

[[nodiscard]] ExperimentResult run_wilson(const ExperimentSpec& spec, int threads);
[[nodiscard]] ExperimentResult run_census(const ExperimentSpec& spec, int threads);
[[nodiscard]] ExperimentResult run_duality(const ExperimentSpec& spec, int threads);
[[nodiscard]] ExperimentResult run_decay(const ExperimentSpec& spec, int threads);
[[nodiscard]] ExperimentResult run_coupling(const ExperimentSpec& spec, int threads);
[[nodiscard]] ExperimentResult run_selftest(const ExperimentSpec& spec, int threads);
[[nodiscard]] ExperimentResult run_experiment(const ExperimentSpec& spec, int threads);

inline constexpr const char* kCsvHeader =
    "run_id,kind,beta,lambda,box,ell,ell0,observable,estimate,stderr,n_samples,prediction,seed";

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_json(std::ostream& out, const std::vector<ResultRow>& rows);

/// Shortest decimal text that reads back to the same double.
[[nodiscard]] std::string format_double(double v);

/// Seed of sub-run `index` of a run seeded with `seed`.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Progress lines to standard error; off by default in library use.
void set_verbose(bool on);

}  // namespace z2lab
