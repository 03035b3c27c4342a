#include "z2lab/forms.hpp"

#include <string>

namespace z2lab {

Form::Form(int k, const Box& box)
    : k_(k), table_(cell_table(box, k)), bits_(table_->size()) {}

Form::Form(int k, const Box& box, const std::vector<CellId>& support) : Form(k, box) {
  for (const auto& c : support) flip(c);
}

bool Form::at(const CellId& c) const noexcept {
  const auto i = table_->index_of(c);
  return i >= 0 && bits_.get(static_cast<std::size_t>(i));
}

void Form::set(const CellId& c, bool v) {
  const auto i = table_->index_of(c);
  if (i < 0) throw std::out_of_range("cell not in form's box");
  bits_.set(static_cast<std::size_t>(i), v);
}

void Form::flip(const CellId& c) {
  const auto i = table_->index_of(c);
  if (i < 0) throw std::out_of_range("cell not in form's box");
  bits_.flip(static_cast<std::size_t>(i));
}

std::vector<CellId> Form::support() const {
  std::vector<CellId> out;
  for (std::size_t i = 0; i < size(); ++i)
    if (get(i)) out.push_back(table_->cell(i));
  return out;
}

Form& Form::operator^=(const Form& o) {
  if (o.k_ != k_ || !(o.box() == box())) throw std::invalid_argument("form mismatch in xor");
  bits_ ^= o.bits_;
  return *this;
}

Form d(const Form& f) {
  if (f.degree() >= kDim) throw std::domain_error("d of a 4-form");
  Form out(f.degree() + 1, f.box());
  const auto& src = f.table();
  const auto& dst = out.table();
  for (std::size_t j = 0; j < dst.size(); ++j) {
    const CellId& c = dst.cell(j);
    bool v = false;
    for (int i = 0; i < kDim; ++i) {
      if (!c.spans(i)) continue;
      const auto face = static_cast<DirMask>(c.dirs & ~(1u << i));
      Vec4 up = c.base;
      ++up[i];
      v ^= f.get(static_cast<std::size_t>(src.index_of(c.base, face)));
      v ^= f.get(static_cast<std::size_t>(src.index_of(up, face)));
    }
    if (v) out.set(j);
  }
  return out;
}

Form delta(const Form& f) {
  if (f.degree() == 0) return Form(0, f.box());
  Form out(f.degree() - 1, f.box());
  const auto& src = f.table();
  const auto& dst = out.table();
  for (std::size_t j = 0; j < dst.size(); ++j) {
    const CellId& c = dst.cell(j);
    bool v = false;
    for (int i = 0; i < kDim; ++i) {
      if (c.spans(i)) continue;
      const auto coface = static_cast<DirMask>(c.dirs | (1u << i));
      Vec4 down = c.base;
      --down[i];
      if (auto a = src.index_of(c.base, coface); a >= 0) v ^= f.get(static_cast<std::size_t>(a));
      if (auto b = src.index_of(down, coface); b >= 0) v ^= f.get(static_cast<std::size_t>(b));
    }
    if (v) out.set(j);
  }
  return out;
}

Form hodge(const Form& f) {
  Form out(kDim - f.degree(), dual_box(f.box()));
  const auto& dst = out.table();
  for (std::size_t j = 0; j < dst.size(); ++j)
    if (f.at(hodge_cell(dst.cell(j)))) out.set(j);
  return out;
}

Form transfer(const Form& f, const Box& box) {
  Form out(f.degree(), box);
  const auto& dst = out.table();
  for (std::size_t j = 0; j < dst.size(); ++j)
    if (f.at(dst.cell(j))) out.set(j);
  return out;
}

bool vanishes_on_boundary(const Form& f) {
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.get(i) && classify_cell(f.box(), f.table().cell(i)) == CellClass::Boundary)
      return false;
  return true;
}

namespace {

// Boundary relative to the box's own dimension: a vertex is on the boundary
// when it sits on an end of some direction with positive side length.
bool on_active_boundary(const Box& box, DirMask active, const Vec4& x) {
  for (int i = 0; i < kDim; ++i)
    if (((active >> i) & 1) && (x[i] == box.lo[i] || x[i] == box.hi[i])) return true;
  return false;
}

bool cell_on_active_boundary(const Box& box, DirMask active, const CellId& c) {
  for (const auto& v : c.vertices())
    if (!on_active_boundary(box, active, v)) return false;
  return true;
}

Box slice_at(const Box& box, int dir, int r) {
  Box s = box;
  s.lo[dir] = s.hi[dir] = r;
  return s;
}

// Writes a form living on a slice into the matching cells of `target`.
void embed(const Form& slice_form, Form& target) {
  const auto& src = slice_form.table();
  const auto& dst = target.table();
  for (std::size_t i = 0; i < src.size(); ++i)
    if (slice_form.get(i))
      target.set(static_cast<std::size_t>(dst.index_of(src.cell(i))), true);
}

Form solve_closed(const Form& f, bool vanish) {
  const Box& box = f.box();
  const int k = f.degree();
  Form g(k - 1, box);
  const DirMask active = box.active_dirs();
  if (dir_count(active) < k) return g;  // no k-cells: f = 0

  int n = kDim - 1;
  while (!((active >> n) & 1)) --n;
  const auto n_bit = static_cast<DirMask>(1u << n);

  if (!vanish) {
    const Box first = slice_at(box, n, box.lo[n]);
    if (dir_count(first.active_dirs()) >= k) embed(solve_closed(transfer(f, first), false), g);
  }

  // g(x, S) = g(x - e_n, S) + f(x - e_n, S u {n}) for n not in S; zero when n in S.
  const auto& gt = g.table();
  const auto& ft = f.table();
  for (int r = box.lo[n] + 1; r <= box.hi[n]; ++r) {
    const auto layer = cell_table(slice_at(box, n, r), k - 1);
    for (const CellId& c : layer->cells()) {
      Vec4 below = c.base;
      --below[n];
      bool v = g.get(static_cast<std::size_t>(gt.index_of(below, c.dirs)));
      v ^= f.get(static_cast<std::size_t>(ft.index_of(below, static_cast<DirMask>(c.dirs | n_bit))));
      if (v) g.set(static_cast<std::size_t>(gt.index_of(c)), true);
    }
  }

  if (!vanish || k == 1) return g;

  // g now vanishes on every face except the last slice; there it is closed
  // and vanishes on the slice's own boundary. Subtract d of a potential.
  const Box last = slice_at(box, n, box.hi[n]);
  const Form g_last = transfer(g, last);
  if (g_last.is_zero()) return g;
  Form w(k - 2, box);
  embed(solve_closed(g_last, true), w);
  return g ^ d(w);
}

}  // namespace

Form poincare_solve(const Form& f, bool vanish_boundary) {
  const int k = f.degree();
  if (k < 1) throw std::invalid_argument("poincare_solve needs k >= 1");
  if (k < kDim && !d(f).is_zero()) throw NotClosedError("poincare_solve: form is not closed");
  if (vanish_boundary) {
    const DirMask active = f.box().active_dirs();
    if (k > dir_count(active) - 1)
      throw BoundaryConditionError("poincare_solve: boundary variant needs k <= dim - 1");
    for (std::size_t i = 0; i < f.size(); ++i)
      if (f.get(i) && cell_on_active_boundary(f.box(), active, f.table().cell(i)))
        throw BoundaryConditionError("poincare_solve: form does not vanish on the boundary");
  }
  return solve_closed(f, vanish_boundary);
}

Form copoincare_solve(const Form& f) {
  const int k = f.degree();
  if (k < 1 || k > kDim - 1) throw std::invalid_argument("copoincare_solve needs 1 <= k <= 3");
  if (!delta(f).is_zero()) throw NotCoclosedError("copoincare_solve: form is not coclosed");
  const Form g = poincare_solve(hodge(f), true);
  return transfer(hodge(g), f.box());
}

Form surface_boundary(const Form& plaquettes) {
  if (plaquettes.degree() != 2) throw std::invalid_argument("surface_boundary needs a 2-form");
  return delta(plaquettes);
}

Gf2Matrix d_matrix(const Box& box, int k) {
  const auto src = cell_table(box, k);
  const auto dst = cell_table(box, k + 1);
  Gf2Matrix m(dst->size(), src->size());
  for (std::size_t j = 0; j < dst->size(); ++j)
    for (const auto& face : incident_down(dst->cell(j)))
      m.flip(j, static_cast<std::size_t>(src->index_of(face)));
  return m;
}

Gf2Matrix delta_matrix(const Box& box, int k) {
  const auto src = cell_table(box, k);
  const auto dst = cell_table(box, k - 1);
  Gf2Matrix m(dst->size(), src->size());
  for (std::size_t j = 0; j < dst->size(); ++j)
    for (const auto& coface : incident_up(dst->cell(j)))
      if (auto i = src->index_of(coface); i >= 0) m.flip(j, static_cast<std::size_t>(i));
  return m;
}

}  // namespace z2lab
