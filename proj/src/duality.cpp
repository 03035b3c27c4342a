#include "z2lab/duality.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace z2lab {

DualCoupling dual_coupling(double beta) {
  if (!(beta > 0.0)) throw std::domain_error("dual coupling needs beta > 0");
  return {-0.5 * std::log(std::tanh(beta)), std::sqrt(std::cosh(beta) * std::sinh(beta))};
}

double self_dual_beta() { return 0.5 * std::log(1.0 + std::numbers::sqrt2); }

int count_closed_one_forms(const Box& box) {
  const auto edges = cell_table(box, 1)->size();
  if (edges == 0) return 0;
  return static_cast<int>(edges - gf2_rank(d_matrix(box, 1)));
}

std::int64_t count_boundary_plaquettes(const Box& box) {
  std::int64_t n = 0;
  for (const auto& p : cell_table(box, 2)->cells()) n += classify_cell(box, p) == CellClass::Boundary;
  return n;
}

void LogSum::add(long double log_term, long double multiplicity) {
  if (multiplicity == 0.0L) return;
  terms_.emplace_back(log_term, multiplicity);
}

long double LogSum::log() const {
  if (terms_.empty()) return -std::numeric_limits<long double>::infinity();
  long double top = terms_.front().first;
  for (const auto& t : terms_) top = std::max(top, t.first);
  // Kahan summation of the rescaled terms
  long double sum = 0.0L, carry = 0.0L;
  for (const auto& [lt, mult] : terms_) {
    const long double y = mult * std::exp(lt - top) - carry;
    const long double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return top + std::log(sum);
}

long double log_relative_error(long double log_a, long double log_b) {
  return -std::expm1(-std::fabs(log_a - log_b));
}

// ---------------------------------------------------------------------------

GaugeFixedEnumerator::GaugeFixedEnumerator(const Box& box, SpanningTree tree) : box_(box) {
  const auto verts = cell_table(box, 0);
  const auto edges = cell_table(box, 1);
  const auto plaqs = cell_table(box, 2);
  if (plaqs->size() > 64) throw std::length_error("gauge-fixed enumeration needs <= 64 plaquettes");
  plaquettes_ = static_cast<int>(plaqs->size());
  orbit_exponent_ = static_cast<int>(verts->size()) - 1;

  // Neighbours in lexicographic edge order.
  const auto neighbours = [&](std::size_t v) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;  // (edge, vertex)
    const CellId x = verts->cell(v);
    std::vector<CellId> incident;
    for (const auto& e : incident_up(x))
      if (box.contains_cell(e)) incident.push_back(e);
    std::sort(incident.begin(), incident.end());
    for (const auto& e : incident) {
      const auto ends = e.vertices();
      const Vec4& other = ends[0] == x.base ? ends[1] : ends[0];
      out.emplace_back(static_cast<std::uint32_t>(edges->index_of(e)),
                       static_cast<std::uint32_t>(verts->index_of(other, 0)));
    }
    return out;
  };

  std::vector<std::uint8_t> seen(verts->size(), 0);
  std::vector<std::uint8_t> in_tree(edges->size(), 0);
  if (tree == SpanningTree::bfs) {
    std::deque<std::size_t> queue{0};
    seen[0] = 1;
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop_front();
      for (const auto& [e, w] : neighbours(v))
        if (!seen[w]) {
          seen[w] = 1;
          in_tree[e] = 1;
          queue.push_back(w);
        }
    }
  } else {
    // depth first from the top corner
    const std::size_t root = verts->size() - 1;
    std::vector<std::size_t> stack{root};
    seen[root] = 1;
    while (!stack.empty()) {
      const auto v = stack.back();
      bool advanced = false;
      for (const auto& [e, w] : neighbours(v))
        if (!seen[w]) {
          seen[w] = 1;
          in_tree[e] = 1;
          stack.push_back(w);
          advanced = true;
          break;
        }
      if (!advanced) stack.pop_back();
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw std::logic_error("box is not connected");

  for (std::uint32_t e = 0; e < edges->size(); ++e) {
    if (in_tree[e]) {
      tree_.push_back(e);
      continue;
    }
    free_edges_.push_back(e);
    std::uint64_t mask = 0;
    for (const auto& p : incident_up(edges->cell(e)))
      if (auto i = plaqs->index_of(p); i >= 0) mask |= std::uint64_t{1} << i;
    masks_.push_back(mask);
  }
  if (free_edges_.size() > kMaxFreeEdges)
    throw std::length_error("gauge-fixed enumeration limited to 24 free edges");
}

std::vector<std::vector<std::uint64_t>> GaugeFixedEnumerator::histogram(
    const std::vector<std::uint32_t>& watched) const {
  if (watched.size() > 16) throw std::length_error("too many watched plaquettes");
  for (auto w : watched)
    if (w >= static_cast<std::uint32_t>(plaquettes_)) throw std::out_of_range("watched plaquette not in box");
  std::vector<std::vector<std::uint64_t>> counts(std::size_t{1} << watched.size(),
                                                 std::vector<std::uint64_t>(static_cast<std::size_t>(plaquettes_) + 1, 0));
  const auto record = [&](std::uint64_t mask) {
    std::size_t pattern = 0;
    for (std::size_t i = 0; i < watched.size(); ++i) pattern |= ((mask >> watched[i]) & 1u) << i;
    ++counts[pattern][static_cast<std::size_t>(std::popcount(mask))];
  };
  std::uint64_t mask = 0;
  record(mask);
  const std::uint64_t total = std::uint64_t{1} << free_edges_.size();
  for (std::uint64_t i = 1; i < total; ++i) {
    mask ^= masks_[static_cast<std::size_t>(std::countr_zero(i))];
    record(mask);
  }
  return counts;
}

namespace {

constexpr long double kLn2 = 0.693147180559945309417232121458176568L;

long double log_weight(const std::vector<std::uint64_t>& by_negatives, int plaquettes, double beta) {
  LogSum sum;
  for (std::size_t n = 0; n < by_negatives.size(); ++n)
    sum.add(static_cast<long double>(beta) * (plaquettes - 2 * static_cast<long double>(n)),
            static_cast<long double>(by_negatives[n]));
  return sum.log();
}

std::vector<std::uint32_t> plaquette_indices(const Box& box, const std::vector<CellId>& plaquettes) {
  const auto table = cell_table(box, 2);
  std::vector<std::uint32_t> out;
  for (const auto& p : plaquettes) {
    const auto i = table->index_of(p);
    if (p.degree() != 2 || i < 0) throw std::out_of_range("plaquette not in box");
    out.push_back(static_cast<std::uint32_t>(i));
  }
  return out;
}

// Gray-code walk over the span of `basis`, histogram of support sizes.
std::vector<std::uint64_t> span_weight_histogram(const std::vector<BitVector>& basis, std::size_t length) {
  if (basis.size() > 24) throw std::length_error("span enumeration limited to dimension 24");
  std::vector<std::uint64_t> counts(length + 1, 0);
  BitVector v(length);
  ++counts[0];
  const std::uint64_t total = std::uint64_t{1} << basis.size();
  for (std::uint64_t i = 1; i < total; ++i) {
    v ^= basis[static_cast<std::size_t>(std::countr_zero(i))];
    ++counts[v.count()];
  }
  return counts;
}

// Rank of the incidence matrix between boundary plaquettes and all edges.
std::size_t boundary_constraint_rank(const Box& box) {
  const auto edges = cell_table(box, 1);
  std::vector<CellId> rows;
  for (const auto& p : cell_table(box, 2)->cells())
    if (classify_cell(box, p) == CellClass::Boundary) rows.push_back(p);
  Gf2Matrix m(rows.size(), edges->size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const auto& e : incident_down(rows[r])) m.flip(r, static_cast<std::size_t>(edges->index_of(e)));
  return gf2_rank(m);
}

}  // namespace

long double log_exact_partition_free(const Box& box, double beta, SpanningTree tree) {
  const GaugeFixedEnumerator en(box, tree);
  const auto counts = en.histogram();
  return en.orbit_exponent() * kLn2 + log_weight(counts[0], en.plaquette_count(), beta);
}

std::vector<double> exact_plaquette_distribution(const Box& box, double beta,
                                                 const std::vector<CellId>& plaquettes) {
  const GaugeFixedEnumerator en(box);
  const auto counts = en.histogram(plaquette_indices(box, plaquettes));
  std::vector<long double> logs;
  LogSum total;
  for (const auto& c : counts) {
    logs.push_back(log_weight(c, en.plaquette_count(), beta));
    total.add(logs.back());
  }
  const long double log_z = total.log();
  std::vector<double> out;
  for (auto l : logs) out.push_back(static_cast<double>(std::exp(l - log_z)));
  return out;
}

double exact_plaquette_product(const Box& box, double beta, const std::vector<CellId>& plaquettes) {
  const auto dist = exact_plaquette_distribution(box, beta, plaquettes);
  double acc = 0.0;
  for (std::size_t pattern = 0; pattern < dist.size(); ++pattern)
    acc += (std::popcount(pattern) % 2 ? -1.0 : 1.0) * dist[pattern];
  return acc;
}

std::vector<BitVector> coclosed_two_form_basis(const Box& box) {
  return gf2_kernel_basis(delta_matrix(box, 2));
}

long double log_closed_two_form_sum(const Box& box, double lambda) {
  const auto plaquettes = cell_table(box, 2)->size();
  const auto counts = span_weight_histogram(coclosed_two_form_basis(box), plaquettes);
  return log_weight(counts, static_cast<int>(plaquettes), lambda);
}

long double log_zero_boundary_partition(const Box& box, double lambda) {
  const auto edges = cell_table(box, 1);
  const auto plaqs = cell_table(box, 2);
  std::vector<std::uint32_t> interior;
  for (std::uint32_t e = 0; e < edges->size(); ++e)
    if (classify_cell(box, edges->cell(e)) == CellClass::Internal) interior.push_back(e);
  if (interior.size() > 24) throw std::length_error("pinned enumeration limited to 24 interior edges");

  std::vector<BitVector> gens;
  for (auto e : interior) {
    BitVector g(plaqs->size());
    for (const auto& p : incident_up(edges->cell(e)))
      if (auto i = plaqs->index_of(p); i >= 0) g.flip(static_cast<std::size_t>(i));
    gens.push_back(std::move(g));
  }
  const auto counts = span_weight_histogram(gens, plaqs->size());
  // Every flat boundary configuration is a gauge transform of the all-plus
  // one, so each contributes the same pinned sum.
  const std::size_t boundary_edges = edges->size() - interior.size();
  const auto flat_exponent =
      static_cast<long double>(boundary_edges) - static_cast<long double>(boundary_constraint_rank(box));
  return flat_exponent * kLn2 + log_weight(counts, static_cast<int>(plaqs->size()), lambda);
}

CountingReport verify_counting_identity(const Box& box) {
  const Box dual = dual_box(box);
  CountingReport r;
  r.a_exponent = count_closed_one_forms(dual);
  const auto plaquettes = static_cast<std::int64_t>(cell_table(box, 2)->size());
  r.gamma_exponent = plaquettes - static_cast<std::int64_t>(gf2_rank(delta_matrix(box, 2)));
  r.zero_bc_exponent = static_cast<std::int64_t>(cell_table(dual, 1)->size()) -
                       static_cast<std::int64_t>(boundary_constraint_rank(dual));
  r.dual_vertices = static_cast<std::int64_t>(dual.vertex_count());
  return r;
}

DualityReport verify_partition_identity(const Box& box, double beta) {
  if (!box.is_cube()) throw std::invalid_argument("partition identity is stated for cubes");
  const auto [lambda, alpha] = dual_coupling(beta);
  const Box dual = dual_box(box);

  DualityReport r;
  r.beta = beta;
  r.lambda = lambda;
  r.alpha = alpha;
  r.edge_count = static_cast<std::int64_t>(cell_table(box, 1)->size());
  r.plaquette_count = static_cast<std::int64_t>(cell_table(box, 2)->size());
  r.b_count = count_boundary_plaquettes(dual);

  const auto counting = verify_counting_identity(box);
  r.a_exponent = counting.a_exponent;
  r.gamma_exponent = counting.gamma_exponent;
  r.zero_bc_exponent = counting.zero_bc_exponent;

  r.log_lhs = log_exact_partition_free(box, beta, SpanningTree::bfs);
  const long double prefactor = r.edge_count * kLn2 + r.plaquette_count * std::log(static_cast<long double>(alpha));
  r.log_rhs = prefactor + log_closed_two_form_sum(box, lambda);
  r.relative_error = static_cast<double>(log_relative_error(r.log_lhs, r.log_rhs));
  r.tree_relative_error = static_cast<double>(
      log_relative_error(r.log_lhs, log_exact_partition_free(box, beta, SpanningTree::dfs)));

  r.log_zstar_inferred = r.log_lhs + r.a_exponent * kLn2 + static_cast<long double>(lambda) * r.b_count - prefactor;
  try {
    r.log_zstar_direct = log_zero_boundary_partition(dual, lambda);
    r.zstar_direct_available = true;
    r.zstar_relative_error = static_cast<double>(log_relative_error(r.log_zstar_direct, r.log_zstar_inferred));
  } catch (const std::length_error&) {
    r.zstar_direct_available = false;
  }
  return r;
}

ExpectationReport verify_expectation_duality(const std::vector<CellId>& plaquettes, double beta,
                                             const Box& primal_box, RunConfig mc, int threads) {
  ExpectationReport r;
  r.beta = beta;
  r.lambda = dual_coupling(beta).lambda;
  r.exact = exact_plaquette_product(primal_box, beta, plaquettes);

  const Box dual = dual_box(primal_box);
  std::vector<CellId> starred;
  for (const auto& p : plaquettes) starred.push_back(hodge_cell(p));
  mc.beta = r.lambda;
  mc.box = dual;
  mc.boundary = Boundary::zero;
  r.dual = estimate_observable(mc, exp_plaquette_sum_observable(starred, -2.0 * r.lambda, dual), threads);
  r.z_score = r.dual.std_error > 0.0 ? (r.dual.mean - r.exact) / r.dual.std_error
                                     : (r.dual.mean == r.exact ? 0.0 : std::numeric_limits<double>::infinity());
  return r;
}

}  // namespace z2lab
