#include "z2lab/surfaces.hpp"

#include <algorithm>
#include <bit>
#include <limits>

#include "z2lab/union_find.hpp"

namespace z2lab {

namespace {

// The four 3-cells containing a plaquette.
std::array<CellId, 4> plaquette_cofaces(const CellId& p) {
  std::array<CellId, 4> out{};
  int n = 0;
  for (int k = 0; k < kDim; ++k) {
    if (p.spans(k)) continue;
    const auto dirs = static_cast<DirMask>(p.dirs | (1u << k));
    CellId c{p.base, dirs, p.lattice};
    out[static_cast<std::size_t>(n++)] = c;
    --c.base[k];
    out[static_cast<std::size_t>(n++)] = c;
  }
  return out;
}

// The six plaquettes bounding a 3-cell.
std::array<CellId, 6> cube_faces(const CellId& c) {
  std::array<CellId, 6> out{};
  int n = 0;
  for (int t = 0; t < kDim; ++t) {
    if (!c.spans(t)) continue;
    CellId f{c.base, static_cast<DirMask>(c.dirs & ~(1u << t)), c.lattice};
    out[static_cast<std::size_t>(n++)] = f;
    ++f.base[t];
    out[static_cast<std::size_t>(n++)] = f;
  }
  return out;
}

std::int64_t position(const std::vector<std::uint32_t>& sorted, std::int64_t idx) {
  if (idx < 0) return -1;
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), static_cast<std::uint32_t>(idx));
  if (it == sorted.end() || *it != static_cast<std::uint32_t>(idx)) return -1;
  return it - sorted.begin();
}

std::vector<std::uint32_t> support_indices(const Surface& s) {
  std::vector<std::uint32_t> out;
  out.reserve(s.count());
  const auto words = s.bits().words();
  for (std::size_t w = 0; w < words.size(); ++w)
    for (auto bits = words[w]; bits; bits &= bits - 1)
      out.push_back(static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(std::countr_zero(bits))));
  return out;
}

}  // namespace

Surface negative_plaquettes(const SpinConfig& sigma) { return d(sigma.negative_edges()); }

Surface negative_plaquettes(const HeatBathChain& chain) {
  const Box& box = chain.box();
  const auto& geom = chain.geometry();
  Surface out(2, box);
  std::size_t idx = 0;
  Vec4 x = box.lo;
  std::uint32_t base = 0;
  while (true) {
    for (int i = 0; i < kDim; ++i) {
      if (x[i] == box.hi[i]) continue;
      for (int j = i + 1; j < kDim; ++j) {
        if (x[j] == box.hi[j]) continue;
        const auto si = static_cast<std::uint32_t>(geom.slot_stride(i));
        const auto sj = static_cast<std::uint32_t>(geom.slot_stride(j));
        const bool neg = chain.negative(base + static_cast<std::uint32_t>(i)) ^
                         chain.negative(base + static_cast<std::uint32_t>(j)) ^
                         chain.negative(base + si + static_cast<std::uint32_t>(j)) ^
                         chain.negative(base + sj + static_cast<std::uint32_t>(i));
        if (neg) out.set(idx);
        ++idx;
      }
    }
    base += kDim;
    int i = kDim - 1;
    while (i >= 0 && x[i] == box.hi[i]) {
      x[i] = box.lo[i];
      --i;
    }
    if (i < 0) break;
    ++x[i];
  }
  return out;
}

bool dual_closed(const Surface& surface, const std::vector<std::uint32_t>& plaquettes) {
  const auto& table = surface.table();
  std::vector<std::uint32_t> sorted = plaquettes;
  std::sort(sorted.begin(), sorted.end());
  for (auto p : sorted) {
    for (const auto& c : plaquette_cofaces(table.cell(p))) {
      int hits = 0;
      for (const auto& f : cube_faces(c)) hits += position(sorted, table.index_of(f)) >= 0;
      if (hits % 2) return false;
    }
  }
  return true;
}

std::vector<Vortex> vortex_decompose(const Surface& negative) {
  if (negative.degree() != 2) throw std::invalid_argument("vortex_decompose needs a 2-form");
  const auto& table = negative.table();
  const Box& box = negative.box();
  const auto plaq = support_indices(negative);

  UnionFind uf(plaq.size());
  std::vector<std::uint8_t> touches(plaq.size(), 0);
  for (std::size_t a = 0; a < plaq.size(); ++a) {
    const CellId p = table.cell(plaq[a]);
    for (const auto& c : plaquette_cofaces(p)) {
      if (!box.contains_cell(c)) {
        touches[a] = 1;
        continue;
      }
      for (const auto& f : cube_faces(c)) {
        const auto b = position(plaq, table.index_of(f));
        if (b >= 0) uf.unite(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
      }
    }
  }

  // Components in order of their smallest plaquette, which is the first
  // member met while scanning the ascending index list.
  std::vector<std::int64_t> slot_of_root(plaq.size(), -1);
  std::vector<Vortex> out;
  for (std::size_t a = 0; a < plaq.size(); ++a) {
    const auto r = uf.find(static_cast<std::uint32_t>(a));
    if (slot_of_root[r] < 0) {
      slot_of_root[r] = static_cast<std::int64_t>(out.size());
      out.emplace_back();
    }
    auto& v = out[static_cast<std::size_t>(slot_of_root[r])];
    v.plaquettes.push_back(plaq[a]);
    v.touches_boundary = v.touches_boundary || touches[a];
  }

  for (const auto& v : out) {
    if (v.touches_boundary) continue;
    if (!dual_closed(negative, v.plaquettes))
      throw InvariantError("interior vortex with open dual surface");
    if (v.size() < 6) throw InvariantError("interior vortex smaller than 6 plaquettes");
  }
  return out;
}

std::vector<Vortex> vortex_decompose(const SpinConfig& sigma) {
  return vortex_decompose(negative_plaquettes(sigma));
}

std::vector<CellId> edge_plaquettes(const CellId& e) {
  if (e.degree() != 1) throw std::invalid_argument("edge_plaquettes needs an edge");
  return incident_up(e);
}

bool is_minimal_vortex(const SpinConfig& sigma, const CellId& e) {
  const Box& box = sigma.box();
  if (e.degree() != 1 || classify_cell(box, e) != CellClass::Internal)
    throw std::invalid_argument("is_minimal_vortex needs an internal edge");
  const Surface neg = negative_plaquettes(sigma);
  const auto around = edge_plaquettes(e);
  for (const auto& p : around)
    if (!neg.at(p)) return false;
  for (const auto& p : around)
    for (const auto& c : plaquette_cofaces(p))
      for (const auto& f : cube_faces(c)) {
        if (std::find(around.begin(), around.end(), f) != around.end()) continue;
        if (neg.at(f)) return false;
      }
  return true;
}

double VortexCensus::large_vortex_fraction() const {
  if (negative_plaquette_count == 0) return std::numeric_limits<double>::quiet_NaN();
  std::uint64_t large = 0;
  for (const auto& [size, count] : histogram)
    if (size > 6) large += size * count;
  return static_cast<double>(large) / static_cast<double>(negative_plaquette_count);
}

CensusAccumulator::CensusAccumulator(const Box& box, const Box& window) : box_(box), window_(window) {
  if (box.lattice != window.lattice || !box.contains_box(window.expanded(kCensusMargin)))
    throw std::invalid_argument("census window " + window.describe() +
                                " needs a margin of 6 inside " + box.describe());
  census_.window = window;
  const auto plaquettes = cell_table(box, 2);
  in_window_.assign(plaquettes->size(), 0);
  for (const auto& p : enumerate_cells(window, 2)) {
    const auto idx = static_cast<std::uint32_t>(plaquettes->index_of(p));
    window_plaquettes_.push_back(idx);
    in_window_[idx] = 1;
  }
  for (const auto& e : enumerate_cells(window, 1)) {
    if (classify_cell(window, e) != CellClass::Internal) continue;
    std::array<std::uint32_t, 6> ids{};
    const auto around = edge_plaquettes(e);
    for (std::size_t i = 0; i < 6; ++i) ids[i] = static_cast<std::uint32_t>(plaquettes->index_of(around[i]));
    window_edges_.push_back(ids);
  }
}

void CensusAccumulator::add(const Surface& negative) {
  if (negative.degree() != 2 || !(negative.box() == box_))
    throw std::invalid_argument("census sample on a different box");
  std::size_t neg = 0;
  for (auto idx : window_plaquettes_) neg += negative.get(idx);
  std::size_t minimal = 0;
  for (const auto& ids : window_edges_) {
    bool all = true;
    for (auto idx : ids) all = all && negative.get(idx);
    minimal += all;
  }
  negative_samples_.push_back(static_cast<double>(neg) / static_cast<double>(window_plaquettes_.size()));
  minimal_samples_.push_back(window_edges_.empty()
                                 ? 0.0
                                 : static_cast<double>(minimal) / static_cast<double>(window_edges_.size()));

  for (const auto& v : vortex_decompose(negative)) {
    if (v.touches_boundary || !in_window_[v.plaquettes.front()]) continue;
    ++census_.histogram[v.size()];
    if (v.size() == 6) ++census_.minimal_vortex_count;
    census_.negative_plaquette_count += v.size();
  }
  ++census_.configs;
}

VortexCensus CensusAccumulator::result() const {
  VortexCensus out = census_;
  out.negative_density = batch_means(negative_samples_);
  out.minimal_density = batch_means(minimal_samples_);
  return out;
}

VortexCensus census(const std::vector<SpinConfig>& configs, const Box& window) {
  if (configs.empty()) throw std::invalid_argument("census of an empty stream");
  CensusAccumulator acc(configs.front().box(), window);
  for (const auto& sigma : configs) acc.add(sigma);
  return acc.result();
}

}  // namespace z2lab
