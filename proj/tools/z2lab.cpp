#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "z2lab/experiments.hpp"
#include "z2lab/parallel.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kInvariant = 3, kThreshold = 4 };

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw z2lab::ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void report(const char* label, const std::vector<z2lab::CheckResult>& checks) {
  for (const auto& c : checks)
    std::cerr << label << ' ' << (c.passed ? "ok    " : "FAILED") << ' ' << c.name
              << (c.detail.empty() ? "" : ": " + c.detail) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"z2lab: 4D Z2 lattice gauge theory experiments"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_path;
  int threads = z2lab::default_threads();
  std::string format = "csv";
  bool verbose = false;

  for (const char* name : {"selftest", "wilson", "census", "duality", "decay", "coupling"}) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out_path, "output file (default: standard output)");
    sub->add_option("--threads", threads, "worker threads (default: Z2LAB_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("-v,--verbose", verbose, "progress lines on standard error");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  z2lab::set_verbose(verbose);
  try {
    const auto kind = z2lab::parse_kind(command);
    std::string text = "{}";
    if (!config_path.empty())
      text = read_file(config_path);
    else if (kind != z2lab::ExperimentKind::selftest)
      throw z2lab::ConfigError("--config is required for " + command);
    z2lab::ExperimentSpec spec = z2lab::parse_spec(text, kind);
    if (seed) spec.seed = *seed;
    if (out_path) spec.output = *out_path;

    const z2lab::ExperimentResult result = z2lab::run_experiment(spec, threads);

    if (spec.output.empty()) {
      if (format == "json")
        z2lab::write_json(std::cout, result.rows);
      else
        z2lab::write_csv(std::cout, result.rows);
    } else {
      std::ofstream out(spec.output, std::ios::binary);
      if (!out) throw z2lab::ConfigError("cannot write output file '" + spec.output + "'");
      if (format == "json")
        z2lab::write_json(out, result.rows);
      else
        z2lab::write_csv(out, result.rows);
    }

    if (verbose || !result.invariants_hold()) report("invariant", result.invariants);
    if (spec.checks) report("threshold", result.thresholds);
    if (!result.invariants_hold()) return kInvariant;
    if (spec.checks && !result.thresholds_hold()) return kThreshold;
    return kOk;
  } catch (const z2lab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "invariant failure: " << e.what() << '\n';
    return kInvariant;
  }
}
