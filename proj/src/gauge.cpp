#include "z2lab/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

#include "z2lab/parallel.hpp"

namespace z2lab {

std::string to_string(Boundary bc) { return bc == Boundary::free ? "free" : "zero"; }

Boundary parse_boundary(const std::string& s) {
  if (s == "free") return Boundary::free;
  if (s == "zero") return Boundary::zero;
  throw std::invalid_argument("unknown boundary condition '" + s + "'");
}

SpinConfig::SpinConfig(const Box& box) : edges_(1, box) {}

SpinConfig::SpinConfig(Form negative_edges) : edges_(std::move(negative_edges)) {
  if (edges_.degree() != 1) throw std::invalid_argument("SpinConfig needs a 1-form");
}

namespace {

std::size_t edge_index(const Form& edges, const CellId& e) {
  const auto i = edges.table().index_of(e);
  if (i < 0) throw std::out_of_range("edge not in box");
  return static_cast<std::size_t>(i);
}

}  // namespace

int SpinConfig::spin(const CellId& e) const { return edges_.get(edge_index(edges_, e)) ? -1 : 1; }

void SpinConfig::set_spin(const CellId& e, int s) {
  if (s != 1 && s != -1) throw std::invalid_argument("spin must be +1 or -1");
  edges_.set(edge_index(edges_, e), s == -1);
}

void SpinConfig::flip(const CellId& e) { edges_.flip(edge_index(edges_, e)); }

int plaquette_product(const SpinConfig& sigma, const CellId& p) {
  if (p.degree() != 2 || !sigma.box().contains_cell(p))
    throw std::out_of_range("plaquette not in box");
  int prod = 1;
  for (const auto& e : incident_down(p)) prod *= sigma.spin(e);
  return prod;
}

double hamiltonian(const SpinConfig& sigma) {
  // d of the negative-edge 1-form marks exactly the negative plaquettes
  const Form neg = d(sigma.negative_edges());
  return -static_cast<double>(neg.size()) + 2.0 * static_cast<double>(neg.count());
}

int local_field(const SpinConfig& sigma, const CellId& e) {
  if (e.degree() != 1 || !sigma.box().contains_cell(e)) throw std::out_of_range("edge not in box");
  int field = 0;
  for (const auto& p : incident_up(e)) {
    if (!sigma.box().contains_cell(p)) continue;
    int prod = 1;
    for (const auto& f : incident_down(p))
      if (!(f == e)) prod *= sigma.spin(f);
    field += prod;
  }
  return field;
}

void gauge_flip(SpinConfig& sigma, const Vec4& vertex) {
  if (!sigma.box().contains(vertex)) throw std::out_of_range("vertex not in box");
  for (const auto& e : incident_up(make_vertex(vertex, sigma.box().lattice)))
    if (sigma.box().contains_cell(e)) sigma.flip(e);
}

double heat_bath_plus_probability(double beta, int field) {
  return 1.0 / (1.0 + std::exp(-2.0 * beta * field));
}

void heat_bath_sweep(SpinConfig& sigma, double beta, CounterRng& rng, Boundary bc) {
  HeatBathChain chain(sigma.box(), bc, beta, rng);
  chain.load(sigma);
  chain.sweep();
  sigma = chain.snapshot();
  rng = chain.rng();
}

LoopSpec LoopSpec::from_edges(std::vector<CellId> edges) {
  std::sort(edges.begin(), edges.end());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i].degree() != 1) throw std::invalid_argument("loop contains a non-edge cell");
    if (i && edges[i] == edges[i - 1]) throw std::invalid_argument("loop repeats an edge");
  }
  std::map<Vec4, int> degree;
  for (const auto& e : edges)
    for (const auto& v : e.vertices()) ++degree[v];
  for (const auto& [v, deg] : degree)
    if (deg % 2) throw std::invalid_argument("edge set is not a generalized loop (odd vertex)");
  LoopSpec loop;
  loop.ell = static_cast<int>(edges.size());
  loop.ell0 = static_cast<int>(corner_edges(edges).size());
  loop.edges = std::move(edges);
  return loop;
}

Box LoopSpec::bounding_box() const {
  if (edges.empty()) throw std::invalid_argument("bounding box of an empty loop");
  Box b{edges.front().base, edges.front().base, edges.front().lattice};
  for (const auto& e : edges)
    for (int i = 0; i < kDim; ++i) {
      b.lo[i] = std::min(b.lo[i], e.base[i]);
      b.hi[i] = std::max(b.hi[i], e.base[i] + (e.spans(i) ? 1 : 0));
    }
  return b;
}

Form LoopSpec::as_form(const Box& box) const {
  Form f(1, box);
  for (const auto& e : edges) f.set(e);
  return f;
}

LoopSpec make_rectangle_loop(int m, int n, int dir_a, int dir_b, const Vec4& offset) {
  if (m < 1 || n < 1) throw std::invalid_argument("rectangle sides must be >= 1");
  if (dir_a == dir_b || dir_a < 0 || dir_b < 0 || dir_a >= kDim || dir_b >= kDim)
    throw std::invalid_argument("rectangle plane needs two distinct directions");
  std::vector<CellId> edges;
  for (int t = 0; t < m; ++t) {
    Vec4 x = offset;
    x[dir_a] += t;
    edges.push_back(make_edge(x, dir_a));
    x[dir_b] += n;
    edges.push_back(make_edge(x, dir_a));
  }
  for (int s = 0; s < n; ++s) {
    Vec4 x = offset;
    x[dir_b] += s;
    edges.push_back(make_edge(x, dir_b));
    x[dir_a] += m;
    edges.push_back(make_edge(x, dir_b));
  }
  return LoopSpec::from_edges(std::move(edges));
}

std::vector<CellId> corner_edges(const std::vector<CellId>& edges) {
  std::vector<CellId> sorted = edges;
  std::sort(sorted.begin(), sorted.end());
  const auto member = [&](const CellId& c) {
    return std::binary_search(sorted.begin(), sorted.end(), c);
  };
  std::vector<CellId> out;
  for (const auto& e : sorted) {
    bool corner = false;
    for (const auto& p : incident_up(e)) {
      for (const auto& f : incident_down(p))
        if (!(f == e) && member(f)) corner = true;
      if (corner) break;
    }
    if (corner) out.push_back(e);
  }
  return out;
}

int wilson_loop(const SpinConfig& sigma, const LoopSpec& gamma) {
  int prod = 1;
  for (const auto& e : gamma.edges) prod *= sigma.spin(e);
  return prod;
}

double wilson_prediction(double beta, int ell) {
  return std::exp(-2.0 * ell * std::exp(-12.0 * beta));
}

double edge_factor(double beta) { return std::tanh(6.0 * beta); }

// ---------------------------------------------------------------------------

ChainGeometry::ChainGeometry(const Box& box) : box_(box) {
  std::int64_t s = kDim;
  for (int i = kDim - 1; i >= 0; --i) {
    if (box.side(i) < 0) throw std::invalid_argument("box with hi < lo");
    stride_[i] = s;
    s *= box.side(i) + 1;
  }
  slot_count_ = static_cast<std::size_t>(s);
  if (slot_count_ > std::numeric_limits<std::uint32_t>::max())
    throw std::length_error("box too large for a chain");

  Vec4 x = box.lo;
  std::uint32_t slot = 0;
  while (true) {
    for (int i = 0; i < kDim; ++i, ++slot) {
      if (x[i] + 1 > box.hi[i]) continue;
      Entry e{slot, static_cast<std::uint8_t>(i), 0, 0};
      for (int j = 0; j < kDim; ++j) {
        if (j == i) continue;
        if (x[j] + 1 <= box.hi[j]) e.plaquettes |= static_cast<std::uint8_t>(1u << (2 * j));
        if (x[j] - 1 >= box.lo[j]) e.plaquettes |= static_cast<std::uint8_t>(1u << (2 * j + 1));
      }
      Vec4 y = x;
      ++y[i];
      e.internal = !(is_boundary_vertex(box, x) && is_boundary_vertex(box, y));
      entries_.push_back(e);
    }
    int i = kDim - 1;
    while (i >= 0 && x[i] == box.hi[i]) {
      x[i] = box.lo[i];
      --i;
    }
    if (i < 0) break;
    ++x[i];
  }
}

std::uint32_t ChainGeometry::slot_of(const CellId& edge) const {
  if (edge.degree() != 1 || !box_.contains_cell(edge)) throw std::out_of_range("edge not in box");
  std::int64_t s = 0;
  int dir = 0;
  for (int i = 0; i < kDim; ++i) {
    s += (edge.base[i] - box_.lo[i]) * stride_[i];
    if (edge.spans(i)) dir = i;
  }
  return static_cast<std::uint32_t>(s + dir);
}

std::shared_ptr<const ChainGeometry> chain_geometry(const Box& box) {
  using Key = std::pair<Vec4, Vec4>;
  static std::mutex mutex;
  static std::map<Key, std::weak_ptr<const ChainGeometry>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{box.lo, box.hi}];
  if (auto g = slot.lock(); g && g->box() == box) return g;
  auto g = std::make_shared<const ChainGeometry>(box);
  slot = g;
  return g;
}

HeatBathChain::HeatBathChain(const Box& box, Boundary bc, double beta, CounterRng rng)
    : geom_(chain_geometry(box)), beta_(beta), rng_(rng) {
  spins_.assign(geom_->slot_count(), 0);
  pinned_.assign(geom_->entries().size(), 0);
  if (bc == Boundary::zero)
    for (std::size_t i = 0; i < pinned_.size(); ++i) pinned_[i] = !geom_->entries()[i].internal;
  build_updates();
  set_beta(beta);
}

HeatBathChain::HeatBathChain(const Box& box, const Box& region, double beta, CounterRng rng)
    : geom_(chain_geometry(box)), beta_(beta), rng_(rng) {
  if (!box.contains_box(region)) throw std::invalid_argument("region not inside chain box");
  spins_.assign(geom_->slot_count(), 0);
  const auto cells = cell_table(box, 1);
  pinned_.assign(geom_->entries().size(), 1);
  for (std::size_t i = 0; i < pinned_.size(); ++i)
    pinned_[i] = classify_cell(region, cells->cell(i)) != CellClass::Internal;
  build_updates();
  set_beta(beta);
}

void HeatBathChain::build_updates() {
  updates_.clear();
  for (std::uint32_t i = 0; i < pinned_.size(); ++i)
    if (!pinned_[i]) updates_.push_back(i);

  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) {
      if (i == j) continue;
      const std::int64_t si = geom_->slot_stride(i), sj = geom_->slot_stride(j), dj = j - i;
      offsets_[static_cast<std::size_t>((i * kDim + j) * 2)] = {si + dj, sj, dj};
      offsets_[static_cast<std::size_t>((i * kDim + j) * 2 + 1)] = {-sj, -sj + dj, -sj + si + dj};
    }
}

void HeatBathChain::set_beta(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be finite and >= 0");
  beta_ = beta;
  for (int s = -6; s <= 6; ++s) {
    const long double p = heat_bath_plus_probability(beta, s);
    const long double scaled = std::ldexp(p, 64);
    thresholds_[static_cast<std::size_t>(s + 6)] =
        scaled >= 0x1.0p64L ? std::numeric_limits<std::uint64_t>::max()
                            : static_cast<std::uint64_t>(scaled);
  }
}

int HeatBathChain::local_field(const ChainGeometry::Entry& e) const noexcept {
  const std::uint8_t* s = spins_.data() + e.slot;
  int field = 0;
  for (int j = 0; j < kDim; ++j) {
    if (j == e.dir) continue;
    for (int side = 0; side < 2; ++side) {
      if (!((e.plaquettes >> (2 * j + side)) & 1)) continue;
      const auto& off = offsets_[static_cast<std::size_t>((e.dir * kDim + j) * 2 + side)];
      const int parity = s[off[0]] ^ s[off[1]] ^ s[off[2]];
      field += 1 - 2 * parity;
    }
  }
  return field;
}

void HeatBathChain::sweep() {
  const auto& entries = geom_->entries();
  for (const std::uint32_t idx : updates_) {
    const auto& e = entries[idx];
    const std::uint64_t u = rng_();
    spins_[e.slot] = u >= plus_threshold(local_field(e)) ? 1 : 0;
  }
}

void coupled_sweep(HeatBathChain& a, HeatBathChain& b, CounterRng& shared) {
  if (!(a.box() == b.box())) throw std::invalid_argument("coupled chains need a common box");
  const auto& entries = a.geom_->entries();
  for (std::size_t idx = 0; idx < entries.size(); ++idx) {
    const bool pa = a.pinned_[idx], pb = b.pinned_[idx];
    if (pa && pb) continue;
    const auto& e = entries[idx];
    const std::uint64_t u = shared();
    if (!pa) a.spins_[e.slot] = u >= a.plus_threshold(a.local_field(e)) ? 1 : 0;
    if (!pb) b.spins_[e.slot] = u >= b.plus_threshold(b.local_field(e)) ? 1 : 0;
  }
}

SpinConfig HeatBathChain::snapshot() const {
  SpinConfig sigma(box());
  Form& bits = sigma.negative_edges();
  const auto& entries = geom_->entries();
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (spins_[entries[i].slot]) bits.set(i);
  return sigma;
}

void HeatBathChain::load(const SpinConfig& sigma) {
  if (!(sigma.box() == box())) throw std::invalid_argument("configuration box differs from chain box");
  const Form& bits = sigma.negative_edges();
  const auto& entries = geom_->entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (bits.get(i) && pinned_[i]) throw std::invalid_argument("pinned edge must hold +1");
    spins_[entries[i].slot] = bits.get(i) ? 1 : 0;
  }
}

void HeatBathChain::gauge_flip(const Vec4& vertex) {
  if (!box().contains(vertex)) throw std::out_of_range("vertex not in box");
  for (const auto& e : incident_up(make_vertex(vertex, box().lattice)))
    if (box().contains_cell(e)) spins_[geom_->slot_of(e)] ^= 1;
}

// ---------------------------------------------------------------------------

void RunConfig::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be finite and >= 0");
  if (burn_in_sweeps < 0 || sweeps_per_sample < 0 || n_samples < 0)
    throw std::invalid_argument("sweep counts must be >= 0");
  if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
  for (int i = 0; i < kDim; ++i)
    if (box.side(i) < 0) throw std::invalid_argument("box with hi < lo");
}

namespace {

std::vector<std::uint32_t> plaquette_slots(const std::vector<CellId>& plaquettes, const Box& box) {
  const auto geom = chain_geometry(box);
  std::vector<std::uint32_t> slots;
  for (const auto& p : plaquettes) {
    if (p.degree() != 2 || !box.contains_cell(p)) throw std::out_of_range("plaquette not in box");
    for (const auto& e : incident_down(p)) slots.push_back(geom->slot_of(e));
  }
  return slots;
}

}  // namespace

Observable wilson_observable(const LoopSpec& gamma, const Box& box) {
  const auto geom = chain_geometry(box);
  std::vector<std::uint32_t> slots;
  for (const auto& e : gamma.edges) slots.push_back(geom->slot_of(e));
  return {"wilson", [slots, box](const HeatBathChain& chain) {
            int parity = 0;
            for (auto s : slots) parity ^= chain.negative(s);
            return parity ? -1.0 : 1.0;
          }};
}

Observable plaquette_product_observable(const std::vector<CellId>& plaquettes, const Box& box) {
  auto slots = plaquette_slots(plaquettes, box);
  return {"plaquette_product", [slots = std::move(slots)](const HeatBathChain& chain) {
            int parity = 0;
            for (auto s : slots) parity ^= chain.negative(s);
            return parity ? -1.0 : 1.0;
          }};
}

Observable exp_plaquette_sum_observable(const std::vector<CellId>& plaquettes, double coefficient,
                                        const Box& box) {
  auto slots = plaquette_slots(plaquettes, box);
  return {"exp_plaquette_sum", [slots = std::move(slots), coefficient](const HeatBathChain& chain) {
            int psi = 0;
            for (std::size_t i = 0; i < slots.size(); i += 4) {
              const int parity = chain.negative(slots[i]) ^ chain.negative(slots[i + 1]) ^
                                 chain.negative(slots[i + 2]) ^ chain.negative(slots[i + 3]);
              psi += 1 - 2 * parity;
            }
            return std::exp(coefficient * psi);
          }};
}

void run_replicas(const RunConfig& config, int threads,
                  const std::function<void(int, int, const HeatBathChain&)>& on_sample) {
  config.validate();
  const CounterRng root(config.seed);
  parallel_for(static_cast<std::size_t>(config.replicas), threads, [&](std::size_t r) {
    HeatBathChain chain(config.box, config.boundary, config.beta, root.split(r));
    chain.sweeps(config.burn_in_sweeps);
    for (int i = 0; i < config.n_samples; ++i) {
      chain.sweeps(config.sweeps_per_sample);
      on_sample(static_cast<int>(r), i, chain);
    }
  });
}

std::vector<Estimate> estimate_observables(const RunConfig& config,
                                           const std::vector<Observable>& observables,
                                           int threads) {
  std::vector<std::vector<std::vector<double>>> samples(
      observables.size(),
      std::vector<std::vector<double>>(static_cast<std::size_t>(std::max(config.replicas, 1)),
                                       std::vector<double>(static_cast<std::size_t>(
                                           std::max(config.n_samples, 0)))));
  run_replicas(config, threads, [&](int r, int i, const HeatBathChain& chain) {
    for (std::size_t o = 0; o < observables.size(); ++o)
      samples[o][static_cast<std::size_t>(r)][static_cast<std::size_t>(i)] =
          observables[o].evaluate(chain);
  });
  std::vector<Estimate> out;
  out.reserve(observables.size());
  for (const auto& s : samples) out.push_back(batch_means(s));
  return out;
}

Estimate estimate_observable(const RunConfig& config, const Observable& observable, int threads) {
  return estimate_observables(config, {observable}, threads).front();
}

}  // namespace z2lab
