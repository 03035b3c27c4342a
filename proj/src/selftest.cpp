#include "z2lab/selftest.hpp"

#include <algorithm>
#include <sstream>

#include "z2lab/duality.hpp"
#include "z2lab/gauge.hpp"
#include "z2lab/rng.hpp"
#include "z2lab/surfaces.hpp"

namespace z2lab {

namespace {

std::string show(const CellId& c) {
  std::ostringstream os;
  os << (c.lattice == Lattice::dual ? "dual(" : "(");
  for (int i = 0; i < kDim; ++i) os << (i ? "," : "") << c.base[i];
  os << ";";
  for (int i = 0; i < kDim; ++i)
    if (c.spans(i)) os << i;
  os << ")";
  return os.str();
}

// Records the first failure of a suite.
class Suite {
 public:
  explicit Suite(std::string name) { r_.name = std::move(name); }
  void check(bool ok, const std::string& what) {
    ++r_.cases;
    if (!ok && r_.passed) {
      r_.passed = false;
      r_.detail = what;
    }
  }
  [[nodiscard]] bool failed() const { return !r_.passed; }
  SuiteResult done() { return r_; }

 private:
  SuiteResult r_;
};

int below(CounterRng& rng, int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }

Box random_box(CounterRng& rng, int max_side) {
  if (below(rng, 4) == 3) {
    Box b;
    for (int i = 0; i < kDim; ++i) b.hi[i] = below(rng, max_side + 1);
    return b;
  }
  return cube(0, 1 + below(rng, max_side));
}

Form random_form(int k, const Box& box, CounterRng& rng) {
  Form f(k, box);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i % 64 == 0) word = rng();
    if ((word >> (i % 64)) & 1) f.set(i);
  }
  return f;
}

Form random_internal_form(int k, const Box& box, CounterRng& rng) {
  Form f = random_form(k, box, rng);
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.get(i) && classify_cell(box, f.table().cell(i)) != CellClass::Internal) f.set(i, false);
  return f;
}

CellId random_cell(CounterRng& rng) {
  CellId c;
  for (auto& x : c.base) x = below(rng, 11) - 5;
  c.dirs = static_cast<DirMask>(below(rng, 16));
  c.lattice = below(rng, 2) ? Lattice::dual : Lattice::primal;
  return c;
}

std::string where(int k, const Box& box) { return "k=" + std::to_string(k) + " on " + box.describe(); }

}  // namespace

std::vector<SuiteResult> run_dec_suites(const SelftestOptions& opt, const DecOps& ops) {
  CounterRng rng(opt.seed);
  std::vector<SuiteResult> out;

  {
    Suite s("dd_zero");
    for (int k = 0; k <= 2 && !s.failed(); ++k)
      for (int t = 0; t < opt.trials && !s.failed(); ++t) {
        const Box box = random_box(rng, opt.max_side);
        s.check(ops.d(ops.d(random_form(k, box, rng))).is_zero(), "dd f != 0 for " + where(k, box));
      }
    out.push_back(s.done());
  }
  {
    Suite s("delta_delta_zero");
    for (int k = 2; k <= 4 && !s.failed(); ++k)
      for (int t = 0; t < opt.trials && !s.failed(); ++t) {
        const Box box = random_box(rng, opt.max_side);
        s.check(ops.delta(ops.delta(random_form(k, box, rng))).is_zero(),
                "delta delta f != 0 for " + where(k, box));
      }
    out.push_back(s.done());
  }
  {
    // delta f = *d*f for f supported on internal cells
    Suite s("codifferential_is_star_d_star");
    for (int k = 1; k <= 4 && !s.failed(); ++k)
      for (int t = 0; t < opt.trials && !s.failed(); ++t) {
        const Box box = cube(0, 2 + below(rng, std::max(1, opt.max_side - 1)));
        const Box dual = dual_box(box);
        const Form f = random_internal_form(k, box, rng);
        Form g(4 - k, dual);
        bool placed = true;
        for (const auto& c : f.support()) {
          const CellId h = ops.hodge_cell(c);
          if (!dual.contains_cell(h)) {
            placed = false;
            break;
          }
          g.set(h);
        }
        if (!placed) {
          s.check(false, "hodge of an internal cell leaves the dual box, " + where(k, box));
          break;
        }
        const Form dg = ops.d(g);
        const Form df = ops.delta(f);
        bool same = true;
        for (std::size_t i = 0; i < df.size() && same; ++i)
          same = df.get(i) == dg.at(ops.hodge_cell(df.table().cell(i)));
        s.check(same, "delta f differs from *d*f for " + where(k, box));
      }
    out.push_back(s.done());
  }
  {
    Suite s("hodge_involution");
    for (int t = 0; t < opt.trials * 5 && !s.failed(); ++t) {
      const CellId c = random_cell(rng);
      const CellId h = ops.hodge_cell(c);
      s.check(h.lattice != c.lattice && h.degree() == 4 - c.degree() && ops.hodge_cell(h) == c,
              "hodge(hodge(c)) != c at " + show(c));
    }
    for (int k = 0; k <= 4 && !s.failed(); ++k)
      for (int t = 0; t < opt.trials / 10 + 1 && !s.failed(); ++t) {
        const Box box = cube(0, 1 + below(rng, opt.max_side));
        const Form f = random_internal_form(k, box, rng);
        const Form ff = transfer(hodge(hodge(f)), box);
        s.check(ff == f, "hodge(hodge(f)) != f for " + where(k, box));
      }
    out.push_back(s.done());
  }
  {
    Suite s("incidence_consistency");
    for (int t = 0; t < opt.trials && !s.failed(); ++t) {
      const CellId c = random_cell(rng);
      const int k = c.degree();
      if (k < 4) {
        const auto up = incident_up(c);
        s.check(static_cast<int>(up.size()) == 2 * (4 - k), "wrong coface count at " + show(c));
        for (const auto& u : up) {
          const auto down = incident_down(u);
          s.check(std::find(down.begin(), down.end(), c) != down.end(), "coface misses face at " + show(c));
        }
      }
      if (k > 0) {
        const auto down = incident_down(c);
        s.check(static_cast<int>(down.size()) == 2 * k, "wrong face count at " + show(c));
        for (const auto& f : down) {
          const auto up = incident_up(f);
          s.check(std::find(up.begin(), up.end(), c) != up.end(), "face misses coface at " + show(c));
        }
      }
    }
    out.push_back(s.done());
  }
  {
    // c outside B <=> *c outside or on the boundary of *B; a cell outside B
    // with a face in B has its dual on the boundary of *B.
    Suite s("hodge_classification_scan");
    const Box box = cube(0, opt.scan_side);
    const Box dual = dual_box(box);
    for (int k = 0; k <= 4 && !s.failed(); ++k)
      for (const auto& c : enumerate_cells(box.expanded(1), k)) {
        const bool outside = classify_cell(box, c) == CellClass::Outside;
        const CellClass dc = classify_cell(dual, ops.hodge_cell(c));
        s.check(outside == (dc != CellClass::Internal), "classification mismatch at " + show(c));
        if (outside && k > 0) {
          bool touches = false;
          for (const auto& f : incident_down(c)) touches = touches || box.contains_cell(f);
          if (touches) s.check(dc == CellClass::Boundary, "outside cell with face in B not dual-boundary at " + show(c));
        }
        if (s.failed()) break;
      }
    out.push_back(s.done());
  }
  return out;
}

std::vector<SuiteResult> run_solver_suites(const SelftestOptions& opt) {
  CounterRng rng(opt.seed ^ 0x5eed5eedULL);
  std::vector<SuiteResult> out;
  {
    Suite s("poincare_round_trip");
    for (int k = 1; k <= 3 && !s.failed(); ++k)
      for (int t = 0; t < opt.solver_trials && !s.failed(); ++t) {
        const Box box = cube(0, 1 + below(rng, opt.max_side));
        const Form f = d(random_form(k - 1, box, rng));
        const Form g = poincare_solve(f);
        s.check(g.degree() == k - 1 && d(g) == f, "dg != f for " + where(k, box));
      }
    try {
      Form bad(2, cube(0, 2));
      bad.set(std::size_t{0});
      (void)poincare_solve(bad);
      s.check(false, "non-closed form accepted");
    } catch (const NotClosedError&) {
      s.check(true, "");
    }
    out.push_back(s.done());
  }
  {
    Suite s("poincare_vanishing_boundary");
    for (int k = 1; k <= 3 && !s.failed(); ++k)
      for (int t = 0; t < opt.solver_trials && !s.failed(); ++t) {
        const Box box = cube(0, 2 + below(rng, std::max(1, opt.max_side - 1)));
        const Form f = d(random_internal_form(k - 1, box, rng));
        if (!vanishes_on_boundary(f)) {
          s.check(false, "generator produced boundary support, " + where(k, box));
          break;
        }
        const Form g = poincare_solve(f, true);
        s.check(d(g) == f && vanishes_on_boundary(g), "boundary-vanishing solve failed for " + where(k, box));
      }
    out.push_back(s.done());
  }
  {
    Suite s("copoincare_round_trip");
    for (int k = 1; k <= 3 && !s.failed(); ++k)
      for (int t = 0; t < opt.solver_trials && !s.failed(); ++t) {
        const Box box = cube(0, 1 + below(rng, opt.max_side));
        const Form f = delta(random_form(k + 1, box, rng));
        const Form h = copoincare_solve(f);
        s.check(h.degree() == k + 1 && h.box() == box && delta(h) == f,
                "delta h != f or support escapes for " + where(k, box));
      }
    out.push_back(s.done());
  }
  return out;
}

std::vector<SuiteResult> run_surface_suites(const SelftestOptions& opt) {
  CounterRng rng(opt.seed ^ 0x10095ULL);
  std::vector<SuiteResult> out;
  {
    Suite s("surface_spans_loop");
    const Box ambient = cube(0, 6);
    int made = 0;
    while (made < opt.loop_trials && !s.failed()) {
      Form gamma(1, ambient);
      const int parts = 1 + below(rng, 4);
      for (int p = 0; p < parts; ++p) {
        const int a = below(rng, 4);
        int b = below(rng, 3);
        if (b >= a) ++b;
        const int m = 1 + below(rng, 5), n = 1 + below(rng, 5);
        Vec4 off{};
        for (int i = 0; i < kDim; ++i) off[i] = below(rng, 7);
        off[a] = below(rng, 7 - m);
        off[b] = below(rng, 7 - n);
        gamma ^= make_rectangle_loop(m, n, a, b, off).as_form(ambient);
      }
      if (gamma.is_zero()) continue;
      ++made;
      s.check(delta(gamma).is_zero(), "generated edge set is not a loop");
      const Form q = copoincare_solve(gamma);
      s.check(surface_boundary(q) == gamma, "surface boundary differs from the loop");
    }
    out.push_back(s.done());
  }
  {
    Suite s("closed_dual_surface_even_intersection");
    const Box ambient = cube(0, 12);
    for (int t = 0; t < opt.intersection_trials && !s.failed(); ++t) {
      const int side = 2 + below(rng, 2);
      const int a = 2 + below(rng, 3);
      const Box b = cube(a, a + side);
      const Box bb = double_dual_box(b);

      // P: a union of minimal vortices around internal edges of B
      Form p(2, ambient);
      std::vector<CellId> internal;
      for (const auto& e : enumerate_cells(b, 1))
        if (classify_cell(b, e) == CellClass::Internal) internal.push_back(e);
      const int picks = 1 + below(rng, 4);
      for (int i = 0; i < picks; ++i)
        for (const auto& pl : edge_plaquettes(internal[static_cast<std::size_t>(below(rng, static_cast<int>(internal.size())))]))
          p.flip(pl);

      // Q: one or two large flat rectangles crossing the double dual of B
      Form q(2, ambient);
      const int sheets = 1 + below(rng, 2);
      for (int sh = 0; sh < sheets; ++sh) {
        const int i = below(rng, 4);
        int j = below(rng, 3);
        if (j >= i) ++j;
        Box flat;
        for (int c = 0; c < kDim; ++c) {
          if (c == i || c == j) {
            flat.lo[c] = below(rng, bb.lo[c]);
            flat.hi[c] = bb.hi[c] + 1 + below(rng, 12 - bb.hi[c]);
          } else {
            flat.lo[c] = flat.hi[c] = bb.lo[c] + below(rng, bb.hi[c] - bb.lo[c] + 1);
          }
        }
        for (const auto& pl : enumerate_cells(flat, 2)) q.flip(pl);
      }

      // Precondition: plaquettes of Q inside **B are internal to Q.
      const Form qb = surface_boundary(q);
      bool ok = true;
      for (const auto& pl : q.support()) {
        if (!bb.contains_cell(pl)) continue;
        for (const auto& e : incident_down(pl)) ok = ok && !qb.at(e);
      }
      if (!ok) {
        s.check(false, "generated Q violates the precondition");
        break;
      }
      std::size_t common = 0;
      for (std::size_t i = 0; i < p.size(); ++i) common += p.get(i) && q.get(i);
      s.check(common % 2 == 0, "odd intersection with B=" + b.describe());
    }
    out.push_back(s.done());
  }
  return out;
}

std::vector<SuiteResult> run_algebra_suites(const SelftestOptions& opt) {
  CounterRng rng(opt.seed ^ 0xa16eb7aULL);
  std::vector<SuiteResult> out;
  {
    Suite s("gauge_invariance");
    for (int t = 0; t < opt.trials / 4 + 1 && !s.failed(); ++t) {
      const Box box = cube(0, 2 + below(rng, 3));
      SpinConfig sigma(random_form(1, box, rng));
      const int side = box.side(0);
      const LoopSpec loop = make_rectangle_loop(1 + below(rng, side), 1 + below(rng, side), 0, 3);
      const double h = hamiltonian(sigma);
      const Form neg = d(sigma.negative_edges());
      const int w = wilson_loop(sigma, loop);
      Vec4 v{};
      for (auto& x : v) x = below(rng, side + 1);
      gauge_flip(sigma, v);
      s.check(hamiltonian(sigma) == h && d(sigma.negative_edges()) == neg && wilson_loop(sigma, loop) == w,
              "gauge flip changed an invariant on " + box.describe());
    }
    out.push_back(s.done());
  }
  {
    Suite s("gf2_identities");
    s.check(gf2_rank(Gf2Matrix::identity(5)) == 5 && gf2_kernel_basis(Gf2Matrix::identity(5)).empty(),
            "identity rank");
    s.check(gf2_rank(Gf2Matrix(3, 4)) == 0 && gf2_kernel_basis(Gf2Matrix(3, 4)).size() == 4, "zero matrix");
    const Box unit = cube(0, 1);
    s.check(gf2_rank(d_matrix(unit, 0)) == 15, "rank of d on 0-forms of the unit cube");
    for (int k = 1; k <= 2; ++k) {
      const Gf2Matrix m = d_matrix(unit, k - 1);
      const auto kernel = gf2_kernel_basis(m);
      s.check(kernel.size() == m.cols() - gf2_rank(m), "rank-nullity for k=" + std::to_string(k));
      for (const auto& v : kernel) {
        Form g(k - 1, unit);
        g.bits() = v;
        s.check(d(g).is_zero(), "kernel vector is not closed");
      }
      for (int t = 0; t < 20; ++t) {
        const Form f = d(random_form(k - 1, unit, rng));
        const auto sol = gf2_solve(m, f.bits());
        bool ok = sol.has_value();
        if (ok) {
          Form g(k - 1, unit);
          g.bits() = *sol;
          ok = d(g) == f;
        }
        s.check(ok, "no preimage for a closed form, k=" + std::to_string(k));
      }
    }
    out.push_back(s.done());
  }
  {
    Suite s("counting_constants");
    s.check(count_closed_one_forms(dual_box(cube(0, 1))) == 80, "closed 1-forms on the dual of [0,1]^4");
    s.check(count_closed_one_forms(cube(0, 1, Lattice::dual)) == 15, "closed 1-forms on a 2^4 box");
    s.check(count_boundary_plaquettes(dual_box(cube(0, 1))) == 192, "boundary plaquettes of the dual of [0,1]^4");
    s.check(count_boundary_plaquettes(cube(0, 1, Lattice::dual)) == 24, "boundary plaquettes of a 2^4 box");
    for (int side = 1; side <= 2; ++side) {
      const auto c = verify_counting_identity(cube(0, side));
      s.check(c.holds(), "counting identity on [0," + std::to_string(side) + "]^4");
      s.check(c.a_exponent == c.dual_vertices - 1, "closed equals exact for 1-forms");
    }
    out.push_back(s.done());
  }
  return out;
}

SuiteResult run_vortex_suite(double beta, int configs, std::uint64_t seed) {
  Suite s("vortex_decomposition");
  const Box box = cube(0, 6);
  {
    SpinConfig sigma(box);
    const CellId e = make_edge({3, 3, 3, 3}, 1);
    sigma.flip(e);
    const auto v = vortex_decompose(sigma);
    s.check(v.size() == 1 && v.front().size() == 6 && is_minimal_vortex(sigma, e), "single flipped edge");
  }
  HeatBathChain chain(box, Boundary::free, beta, CounterRng(seed));
  chain.sweeps(50);
  for (int i = 0; i < configs && !s.failed(); ++i) {
    chain.sweep();
    const Surface neg = negative_plaquettes(chain);
    std::vector<Vortex> vortices;
    try {
      vortices = vortex_decompose(neg);
    } catch (const InvariantError& err) {
      s.check(false, err.what());
      break;
    }
    std::vector<std::uint8_t> hit(neg.size(), 0);
    bool partition = true;
    for (const auto& v : vortices)
      for (auto p : v.plaquettes) {
        partition = partition && neg.get(p) && !hit[p];
        hit[p] = 1;
      }
    std::size_t covered = 0;
    for (auto h : hit) covered += h;
    s.check(partition && covered == neg.count(), "vortices do not partition the negative plaquettes");
    for (const auto& v : vortices)
      if (!v.touches_boundary) s.check(dual_closed(neg, v.plaquettes) && v.size() >= 6, "interior vortex invariant");
  }
  return s.done();
}

std::vector<SuiteResult> run_all_suites(const SelftestOptions& opt, const DecOps& ops) {
  std::vector<SuiteResult> out = run_dec_suites(opt, ops);
  for (auto&& group : {run_solver_suites(opt), run_surface_suites(opt), run_algebra_suites(opt)})
    out.insert(out.end(), group.begin(), group.end());
  out.push_back(run_vortex_suite(0.7, std::max(1, opt.trials / 10), opt.seed));
  return out;
}

}  // namespace z2lab
