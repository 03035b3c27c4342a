#include "z2lab/lattice.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace z2lab {

namespace {

std::array<std::vector<DirMask>, kDim + 1> build_dir_sets() {
  std::array<std::vector<std::vector<int>>, kDim + 1> tuples;
  for (int m = 0; m < 16; ++m) {
    std::vector<int> t;
    for (int i = 0; i < kDim; ++i)
      if ((m >> i) & 1) t.push_back(i);
    tuples[t.size()].push_back(t);
  }
  std::array<std::vector<DirMask>, kDim + 1> out;
  for (int k = 0; k <= kDim; ++k) {
    std::sort(tuples[k].begin(), tuples[k].end());
    for (const auto& t : tuples[k]) {
      DirMask m = 0;
      for (int i : t) m |= static_cast<DirMask>(1u << i);
      out[k].push_back(m);
    }
  }
  return out;
}

const std::array<std::vector<DirMask>, kDim + 1>& all_dir_sets() {
  static const auto sets = build_dir_sets();
  return sets;
}

const std::array<int, 16>& rank_table() {
  static const auto table = [] {
    std::array<int, 16> r{};
    for (int k = 0; k <= kDim; ++k) {
      const auto& sets = all_dir_sets()[k];
      for (std::size_t i = 0; i < sets.size(); ++i) r[sets[i]] = static_cast<int>(i);
    }
    return r;
  }();
  return table;
}

void check_degree(int k) {
  if (k < 0 || k > kDim) throw std::out_of_range("cell degree out of range: " + std::to_string(k));
}

}  // namespace

int dir_set_count(int k) {
  check_degree(k);
  return static_cast<int>(all_dir_sets()[k].size());
}

const std::vector<DirMask>& dir_sets(int k) {
  check_degree(k);
  return all_dir_sets()[k];
}

int dir_rank(DirMask m) { return rank_table()[m & 0xF]; }

std::vector<Vec4> CellId::vertices() const {
  std::vector<int> span;
  for (int i = 0; i < kDim; ++i)
    if (spans(i)) span.push_back(i);
  std::vector<Vec4> out;
  out.reserve(std::size_t{1} << span.size());
  for (unsigned bits = 0; bits < (1u << span.size()); ++bits) {
    Vec4 v = base;
    for (std::size_t j = 0; j < span.size(); ++j)
      if ((bits >> j) & 1) ++v[span[j]];
    out.push_back(v);
  }
  return out;
}

bool operator<(const CellId& a, const CellId& b) {
  if (a.base != b.base) return a.base < b.base;
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  return dir_rank(a.dirs) < dir_rank(b.dirs);
}

CellId make_vertex(Vec4 x, Lattice l) { return CellId{x, 0, l}; }

CellId make_edge(Vec4 x, int dir, Lattice l) {
  return CellId{x, static_cast<DirMask>(1u << dir), l};
}

CellId make_plaquette(Vec4 x, int dir_a, int dir_b, Lattice l) {
  if (dir_a == dir_b) throw std::invalid_argument("plaquette needs two distinct directions");
  return CellId{x, static_cast<DirMask>((1u << dir_a) | (1u << dir_b)), l};
}

bool Box::is_cube() const noexcept {
  for (int i = 1; i < kDim; ++i)
    if (side(i) != side(0)) return false;
  return side(0) >= 0;
}

bool Box::contains(const Vec4& x) const noexcept {
  for (int i = 0; i < kDim; ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

bool Box::contains_cell(const CellId& c) const noexcept {
  for (int i = 0; i < kDim; ++i) {
    const int top = c.base[i] + (c.spans(i) ? 1 : 0);
    if (c.base[i] < lo[i] || top > hi[i]) return false;
  }
  return true;
}

bool Box::contains_box(const Box& inner) const noexcept {
  for (int i = 0; i < kDim; ++i)
    if (inner.lo[i] < lo[i] || inner.hi[i] > hi[i]) return false;
  return true;
}

std::size_t Box::vertex_count() const noexcept {
  std::size_t n = 1;
  for (int i = 0; i < kDim; ++i) n *= static_cast<std::size_t>(side(i) + 1);
  return n;
}

DirMask Box::active_dirs() const noexcept {
  DirMask m = 0;
  for (int i = 0; i < kDim; ++i)
    if (side(i) > 0) m |= static_cast<DirMask>(1u << i);
  return m;
}

Box Box::expanded(int margin) const {
  Box b = *this;
  for (int i = 0; i < kDim; ++i) {
    b.lo[i] -= margin;
    b.hi[i] += margin;
  }
  return b;
}

std::string Box::describe() const {
  std::ostringstream os;
  if (lattice == Lattice::dual) os << "dual:";
  for (int i = 0; i < kDim; ++i) {
    if (i) os << 'x';
    os << lo[i] << ".." << hi[i];
  }
  return os.str();
}

Box cube(int a, int b, Lattice l) {
  if (b < a) throw std::invalid_argument("cube with b < a");
  return Box{{a, a, a, a}, {b, b, b, b}, l};
}

bool is_boundary_vertex(const Box& box, const Vec4& x) noexcept {
  for (int i = 0; i < kDim; ++i)
    if (x[i] == box.lo[i] || x[i] == box.hi[i]) return true;
  return false;
}

std::vector<CellId> enumerate_cells(const Box& box, int k) {
  check_degree(k);
  return cell_table(box, k)->cells();
}

CellClass classify_cell(const Box& box, const CellId& c) {
  if (!box.contains_cell(c)) return CellClass::Outside;
  for (const auto& v : c.vertices())
    if (!is_boundary_vertex(box, v)) return CellClass::Internal;
  return CellClass::Boundary;
}

std::vector<CellId> incident_up(const CellId& c) {
  std::vector<CellId> out;
  if (c.degree() >= kDim) return out;
  for (int j = 0; j < kDim; ++j) {
    if (c.spans(j)) continue;
    const auto dirs = static_cast<DirMask>(c.dirs | (1u << j));
    out.push_back(CellId{c.base, dirs, c.lattice});
    Vec4 down = c.base;
    --down[j];
    out.push_back(CellId{down, dirs, c.lattice});
  }
  return out;
}

std::vector<CellId> incident_down(const CellId& c) {
  std::vector<CellId> out;
  for (int i = 0; i < kDim; ++i) {
    if (!c.spans(i)) continue;
    const auto dirs = static_cast<DirMask>(c.dirs & ~(1u << i));
    out.push_back(CellId{c.base, dirs, c.lattice});
    Vec4 up = c.base;
    ++up[i];
    out.push_back(CellId{up, dirs, c.lattice});
  }
  return out;
}

CellId hodge_cell(const CellId& c) {
  CellId out{c.base, complement(c.dirs), opposite(c.lattice)};
  if (c.lattice == Lattice::primal) {
    for (int j = 0; j < kDim; ++j)
      if (!c.spans(j)) --out.base[j];
  } else {
    for (int j = 0; j < kDim; ++j)
      if (c.spans(j)) ++out.base[j];
  }
  return out;
}

Box dual_box(const Box& box) {
  Box out = box;
  out.lattice = opposite(box.lattice);
  for (int i = 0; i < kDim; ++i) {
    if (box.lattice == Lattice::primal)
      --out.lo[i];
    else
      ++out.hi[i];
  }
  return out;
}

Box double_dual_box(const Box& box) { return dual_box(dual_box(box)); }

CellTable::CellTable(const Box& box, int k) : box_(box), k_(k) {
  check_degree(k);
  for (int i = 0; i < kDim; ++i)
    if (box.side(i) < 0) throw std::invalid_argument("box with hi < lo");
  std::int64_t s = 1;
  for (int i = kDim - 1; i >= 0; --i) {
    stride_[i] = s;
    s *= box.side(i) + 1;
  }
  const auto& sets = dir_sets(k);
  slot_.assign(static_cast<std::size_t>(s) * sets.size(), -1);

  Vec4 x = box.lo;
  std::int64_t vertex = 0;
  // row-major walk, last coordinate fastest, gives lexicographic base order
  while (true) {
    for (std::size_t r = 0; r < sets.size(); ++r) {
      const DirMask m = sets[r];
      bool fits = true;
      for (int i = 0; i < kDim && fits; ++i)
        if (((m >> i) & 1) && x[i] + 1 > box.hi[i]) fits = false;
      if (!fits) continue;
      slot_[static_cast<std::size_t>(vertex) * sets.size() + r] =
          static_cast<std::int32_t>(cells_.size());
      cells_.push_back(CellId{x, m, box.lattice});
    }
    ++vertex;
    int i = kDim - 1;
    while (i >= 0 && x[i] == box.hi[i]) {
      x[i] = box.lo[i];
      --i;
    }
    if (i < 0) break;
    ++x[i];
  }
}

std::int64_t CellTable::index_of(const Vec4& x, DirMask dirs) const noexcept {
  if (dir_count(dirs) != k_) return -1;
  std::int64_t v = 0;
  for (int i = 0; i < kDim; ++i) {
    if (x[i] < box_.lo[i] || x[i] > box_.hi[i]) return -1;
    v += (x[i] - box_.lo[i]) * stride_[i];
  }
  const auto per_vertex = static_cast<std::int64_t>(dir_set_count(k_));
  return slot_[static_cast<std::size_t>(v * per_vertex + dir_rank(dirs))];
}

std::shared_ptr<const CellTable> cell_table(const Box& box, int k) {
  using Key = std::tuple<Vec4, Vec4, int, int>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const CellTable>> cache;
  const Key key{box.lo, box.hi, static_cast<int>(box.lattice), k};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto table = std::make_shared<const CellTable>(box, k);
  std::lock_guard lock(mutex);
  // TODO: bound the cache; poincare slice recursion on large boxes inserts
  // one entry per slice.
  return cache.emplace(key, std::move(table)).first->second;
}

}  // namespace z2lab
