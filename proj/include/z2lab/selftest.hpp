#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "z2lab/forms.hpp"
#include "z2lab/lattice.hpp"

// Exact property suites over the cell complex, forms, surfaces and gauge
// layer. The operators under test are injectable so that deliberately broken
// versions can be shown to fail.

namespace z2lab {

struct SuiteResult {
  std::string name;
  bool passed = true;
  std::size_t cases = 0;
  std::string detail;  // first failure
};

struct DecOps {
  std::function<Form(const Form&)> d = [](const Form& f) { return z2lab::d(f); };
  std::function<Form(const Form&)> delta = [](const Form& f) { return z2lab::delta(f); };
  std::function<CellId(const CellId&)> hodge_cell = [](const CellId& c) { return z2lab::hodge_cell(c); };
};

struct SelftestOptions {
  int trials = 1000;     // random forms per degree
  int max_side = 4;      // random boxes up to [0, max_side]^4
  int scan_side = 2;     // exhaustive hodge scans on [0, scan_side]^4
  int solver_trials = 500;
  int loop_trials = 200;
  int intersection_trials = 200;
  std::uint64_t seed = 1;
};

/// dd = 0, delta delta = 0, delta = *d* on internally supported forms, the
/// hodge involution, incidence consistency and the hodge classification scans.
[[nodiscard]] std::vector<SuiteResult> run_dec_suites(const SelftestOptions& opt, const DecOps& ops = {});

/// Poincare round trips (plain and boundary-vanishing) and the coderivative
/// solver with support containment.
[[nodiscard]] std::vector<SuiteResult> run_solver_suites(const SelftestOptions& opt);

/// Surfaces spanning random generalized loops in [0,6]^4 and even
/// intersection of closed dual surfaces with flat surfaces.
[[nodiscard]] std::vector<SuiteResult> run_surface_suites(const SelftestOptions& opt);

/// Gauge invariance, GF(2) rank identities and counting constants.
[[nodiscard]] std::vector<SuiteResult> run_algebra_suites(const SelftestOptions& opt);

/// Vortex decomposition of `configs` configurations sampled on [0,6]^4 at
/// beta: partition, closedness and minimal size.
[[nodiscard]] SuiteResult run_vortex_suite(double beta, int configs, std::uint64_t seed);

[[nodiscard]] std::vector<SuiteResult> run_all_suites(const SelftestOptions& opt, const DecOps& ops = {});

}  // namespace z2lab
