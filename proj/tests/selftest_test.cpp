#include <algorithm>

#include "doctest.h"
#include "z2lab/selftest.hpp"

using namespace z2lab;

namespace {

const SuiteResult& find(const std::vector<SuiteResult>& rs, const std::string& name) {
  const auto it = std::find_if(rs.begin(), rs.end(), [&](const SuiteResult& r) { return r.name == name; });
  REQUIRE(it != rs.end());
  return *it;
}

SelftestOptions quick() {
  SelftestOptions o;
  o.trials = 60;
  o.max_side = 3;
  o.solver_trials = 20;
  o.loop_trials = 20;
  o.intersection_trials = 20;
  return o;
}

}  // namespace

TEST_CASE("all exact suites pass") {
  for (const auto& r : run_all_suites(quick())) {
    INFO(r.name << ": " << r.detail);
    CHECK(r.passed);
    CHECK(r.cases > 0);
  }
}

TEST_CASE("a derivative that drops a face term fails dd = 0") {
  DecOps ops;
  ops.d = [](const Form& f) {
    Form out(f.degree() + 1, f.box());
    const auto& cells = out.table().cells();
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto faces = incident_down(cells[i]);
      bool v = false;
      for (std::size_t j = 1; j < faces.size(); ++j) v ^= f.at(faces[j]);
      if (v) out.set(i);
    }
    return out;
  };
  const auto rs = run_dec_suites(quick(), ops);
  CHECK_FALSE(find(rs, "dd_zero").passed);
}

TEST_CASE("a shifted hodge map fails the classification scan") {
  DecOps ops;
  ops.hodge_cell = [](const CellId& c) {
    CellId h = hodge_cell(c);
    ++h.base[0];
    return h;
  };
  const auto rs = run_dec_suites(quick(), ops);
  CHECK_FALSE(find(rs, "hodge_classification_scan").passed);
  CHECK(find(rs, "dd_zero").passed);
}
