#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "z2lab/forms.hpp"
#include "z2lab/gauge.hpp"
#include "z2lab/stats.hpp"

// Negative plaquettes and their decomposition into vortices. Two plaquettes
// are adjacent when they are faces of a common 3-cell, i.e. when their dual
// plaquettes share a dual edge.

namespace z2lab {

/// Raised when an exact structural invariant fails on real data.
struct InvariantError : std::logic_error {
  using std::logic_error::logic_error;
};

/// A set of plaquettes, stored as a 2-form on a box.
using Surface = Form;

struct Vortex {
  /// Plaquette indices in the surface's box, ascending.
  std::vector<std::uint32_t> plaquettes;
  /// Some plaquette has a coface 3-cell outside the box, so the component
  /// may continue beyond what the box can see.
  bool touches_boundary = false;

  [[nodiscard]] std::size_t size() const noexcept { return plaquettes.size(); }
};

/// Plaquettes with sigma_p = -1.
[[nodiscard]] Surface negative_plaquettes(const SpinConfig& sigma);
[[nodiscard]] Surface negative_plaquettes(const HeatBathChain& chain);

/// Connected components of the surface, ordered by smallest plaquette index.
/// Components away from the box boundary are checked to be closed (every
/// coface 3-cell meets an even number of their plaquettes) and of size >= 6;
/// a failure throws InvariantError.
[[nodiscard]] std::vector<Vortex> vortex_decompose(const Surface& negative);
[[nodiscard]] std::vector<Vortex> vortex_decompose(const SpinConfig& sigma);

/// True if every coface 3-cell of the given plaquettes meets an even number
/// of them (the dual surface has no boundary).
[[nodiscard]] bool dual_closed(const Surface& surface, const std::vector<std::uint32_t>& plaquettes);

/// The 6 plaquettes containing an edge (all in the box for an internal edge).
[[nodiscard]] std::vector<CellId> edge_plaquettes(const CellId& e);

/// True iff all 6 plaquettes around e are negative and none of the plaquettes
/// adjacent to them is negative. Throws std::invalid_argument unless e is an
/// internal edge of the box.
[[nodiscard]] bool is_minimal_vortex(const SpinConfig& sigma, const CellId& e);

struct VortexCensus {
  Box window{};
  std::size_t configs = 0;
  /// size -> number of vortices of that size anchored in the window.
  std::map<std::size_t, std::uint64_t> histogram;
  std::uint64_t minimal_vortex_count = 0;
  /// Plaquettes of the counted vortices; equals sum of size * count.
  std::uint64_t negative_plaquette_count = 0;
  /// Fraction of window plaquettes that are negative.
  Estimate negative_density;
  /// Fraction of internal window edges e whose 6 plaquettes are all negative.
  Estimate minimal_density;
  /// Share of counted negative plaquettes lying in vortices larger than 6.
  [[nodiscard]] double large_vortex_fraction() const;
};

/// Streaming census. A vortex is counted when it stays away from the sampling
/// box boundary and its smallest plaquette lies in the window.
class CensusAccumulator {
 public:
  /// Throws std::invalid_argument unless the window sits inside `box` with a
  /// margin of at least 6.
  CensusAccumulator(const Box& box, const Box& window);

  void add(const Surface& negative);
  void add(const SpinConfig& sigma) { add(negative_plaquettes(sigma)); }

  [[nodiscard]] VortexCensus result() const;

 private:
  Box box_;
  Box window_;
  std::vector<std::uint32_t> window_plaquettes_;
  std::vector<std::array<std::uint32_t, 6>> window_edges_;
  std::vector<std::uint8_t> in_window_;
  VortexCensus census_;
  std::vector<double> negative_samples_;
  std::vector<double> minimal_samples_;
};

inline constexpr int kCensusMargin = 6;

[[nodiscard]] VortexCensus census(const std::vector<SpinConfig>& configs, const Box& window);

}  // namespace z2lab
