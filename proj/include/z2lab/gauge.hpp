#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "z2lab/forms.hpp"
#include "z2lab/lattice.hpp"
#include "z2lab/rng.hpp"
#include "z2lab/stats.hpp"

// Ising lattice gauge theory on a box: +-1 spins on edges, plaquette variables,
// the Hamiltonian -sum_p sigma_p, heat-bath dynamics and Wilson loops.

namespace z2lab {

enum class Boundary : std::uint8_t {
  free,  ///< no constraint
  zero,  ///< boundary edges pinned to +1, so every boundary plaquette is +1
};

[[nodiscard]] std::string to_string(Boundary bc);
/// Parses "free" / "zero"; throws std::invalid_argument otherwise.
[[nodiscard]] Boundary parse_boundary(const std::string& s);

/// Edge spins of a box. Bit 1 of the underlying 1-form means spin -1.
class SpinConfig {
 public:
  explicit SpinConfig(const Box& box);
  explicit SpinConfig(Form negative_edges);

  [[nodiscard]] const Box& box() const noexcept { return edges_.box(); }
  [[nodiscard]] std::size_t edge_count() const noexcept { return edges_.size(); }

  /// +1 or -1. Throws std::out_of_range for edges outside the box.
  [[nodiscard]] int spin(const CellId& e) const;
  void set_spin(const CellId& e, int s);
  void flip(const CellId& e);

  [[nodiscard]] const Form& negative_edges() const noexcept { return edges_; }
  [[nodiscard]] Form& negative_edges() noexcept { return edges_; }

  friend bool operator==(const SpinConfig&, const SpinConfig&) = default;

 private:
  Form edges_;
};

/// sigma_p as +-1. Throws std::out_of_range if p is not a plaquette of the box.
[[nodiscard]] int plaquette_product(const SpinConfig& sigma, const CellId& p);

/// -sum_p sigma_p over all plaquettes of the box.
[[nodiscard]] double hamiltonian(const SpinConfig& sigma);

/// Sum over plaquettes p of the box containing e of the product of the other
/// three edge spins of p; flipping e changes the energy by 2 * S_e * sigma_e.
[[nodiscard]] int local_field(const SpinConfig& sigma, const CellId& e);

/// Negates every edge spin at a vertex of the box.
void gauge_flip(SpinConfig& sigma, const Vec4& vertex);

/// Exact conditional probability of spin +1 given local field S.
[[nodiscard]] double heat_bath_plus_probability(double beta, int field);

/// One systematic pass in lexicographic edge order; each updatable edge is
/// resampled from its exact conditional law. Under Boundary::zero only
/// internal edges update (boundary edges are expected to hold +1).
void heat_bath_sweep(SpinConfig& sigma, double beta, CounterRng& rng,
                     Boundary bc = Boundary::free);

/// A generalized loop: every vertex meets an even number of its edges.
struct LoopSpec {
  std::vector<CellId> edges;  // sorted, distinct
  int ell = 0;
  int ell0 = 0;

  /// Validates evenness (throws std::invalid_argument) and fills ell, ell0.
  [[nodiscard]] static LoopSpec from_edges(std::vector<CellId> edges);

  /// Smallest box holding every edge (degenerate sides allowed).
  [[nodiscard]] Box bounding_box() const;
  /// The loop's 1-form on `box`; throws std::out_of_range if an edge is outside.
  [[nodiscard]] Form as_form(const Box& box) const;
};

/// Boundary of the m x n rectangle in plane (dir_a, dir_b) with lower corner
/// `offset`; m edges along dir_a, n along dir_b, ell = 2(m + n).
[[nodiscard]] LoopSpec make_rectangle_loop(int m, int n, int dir_a, int dir_b,
                                           const Vec4& offset = {});

/// Edges of the set sharing a plaquette with some other edge of the set.
[[nodiscard]] std::vector<CellId> corner_edges(const std::vector<CellId>& edges);

/// Product of loop edge spins. Throws std::out_of_range for edges outside the box.
[[nodiscard]] int wilson_loop(const SpinConfig& sigma, const LoopSpec& gamma);

/// exp(-2 ell exp(-12 beta)).
[[nodiscard]] double wilson_prediction(double beta, int ell);
/// tanh(6 beta): the per-edge factor of a non-corner edge.
[[nodiscard]] double edge_factor(double beta);

/// Shared geometry of a heat-bath chain on a box: spins live in "slots"
/// vertex * 4 + dir so that plaquette partners sit at fixed offsets.
class ChainGeometry {
 public:
  struct Entry {
    std::uint32_t slot;
    std::uint8_t dir;
    std::uint8_t plaquettes;  // bit 2j: plaquette toward +e_j, bit 2j+1: toward -e_j
    std::uint8_t internal;    // not a boundary edge of the box
  };

  explicit ChainGeometry(const Box& box);

  [[nodiscard]] const Box& box() const noexcept { return box_; }
  [[nodiscard]] std::size_t slot_count() const noexcept { return slot_count_; }
  /// One entry per edge, in lexicographic edge order.
  [[nodiscard]] const std::vector<Entry>& entries() const noexcept { return entries_; }
  /// Throws std::out_of_range for edges outside the box.
  [[nodiscard]] std::uint32_t slot_of(const CellId& edge) const;
  [[nodiscard]] std::int64_t slot_stride(int dir) const noexcept { return stride_[dir]; }

 private:
  Box box_;
  std::array<std::int64_t, kDim> stride_{};
  std::size_t slot_count_ = 0;
  std::vector<Entry> entries_;
};

[[nodiscard]] std::shared_ptr<const ChainGeometry> chain_geometry(const Box& box);

/// Heat-bath Markov chain. Owns its spins and random stream.
///
/// Pinned edges hold +1 and are never resampled. Boundary::zero pins the
/// boundary edges of the box; the region constructor pins every edge that is
/// not internal to `region`, which realizes zero boundary condition on the
/// sub-box with +1 spins outside it.
class HeatBathChain {
 public:
  HeatBathChain(const Box& box, Boundary bc, double beta, CounterRng rng);
  HeatBathChain(const Box& box, const Box& region, double beta, CounterRng rng);

  void sweep();
  void sweeps(int n) {
    for (int i = 0; i < n; ++i) sweep();
  }

  void set_beta(double beta);
  [[nodiscard]] double beta() const noexcept { return beta_; }
  [[nodiscard]] const ChainGeometry& geometry() const noexcept { return *geom_; }
  [[nodiscard]] const Box& box() const noexcept { return geom_->box(); }

  [[nodiscard]] bool negative(std::uint32_t slot) const noexcept { return spins_[slot] != 0; }
  [[nodiscard]] bool pinned(std::size_t entry) const noexcept { return pinned_[entry] != 0; }
  [[nodiscard]] int local_field(const ChainGeometry::Entry& e) const noexcept;

  [[nodiscard]] SpinConfig snapshot() const;
  /// Replaces the spins; pinned edges must hold +1 (throws std::invalid_argument).
  void load(const SpinConfig& sigma);

  /// Negates all spins at a vertex (no pinning check).
  void gauge_flip(const Vec4& vertex);

  [[nodiscard]] CounterRng& rng() noexcept { return rng_; }

  /// One coupled pass over the common box: both chains visit edges in the same
  /// order and use the same uniform per edge, so each single-edge update is a
  /// maximal coupling of the two conditional laws. Chains must share a box.
  friend void coupled_sweep(HeatBathChain& a, HeatBathChain& b, CounterRng& shared);

 private:
  void build_updates();
  [[nodiscard]] std::uint64_t plus_threshold(int field) const noexcept {
    return thresholds_[static_cast<std::size_t>(field + 6)];
  }

  std::shared_ptr<const ChainGeometry> geom_;
  double beta_;
  CounterRng rng_;
  std::array<std::uint64_t, 13> thresholds_{};
  std::vector<std::uint8_t> spins_;
  std::vector<std::uint8_t> pinned_;
  std::vector<std::uint32_t> updates_;
  std::array<std::array<std::int64_t, 3>, 2 * kDim * kDim> offsets_{};
};

struct RunConfig {
  double beta = 0.0;
  Box box{};
  Boundary boundary = Boundary::free;
  int burn_in_sweeps = 0;
  int sweeps_per_sample = 1;
  int n_samples = 0;
  std::uint64_t seed = 0;
  int replicas = 1;

  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;
};

/// A measurement read off a chain's current state.
struct Observable {
  std::string name;
  std::function<double(const HeatBathChain&)> evaluate;
};

[[nodiscard]] Observable wilson_observable(const LoopSpec& gamma, const Box& box);
/// pi_P = prod_{p in P} sigma_p.
[[nodiscard]] Observable plaquette_product_observable(const std::vector<CellId>& plaquettes,
                                                      const Box& box);
/// exp(coefficient * psi_P) with psi_P = sum_{p in P} sigma_p.
[[nodiscard]] Observable exp_plaquette_sum_observable(const std::vector<CellId>& plaquettes,
                                                      double coefficient, const Box& box);

/// Runs config.replicas independent chains (replica r seeded with
/// CounterRng(seed).split(r)), each with burn-in then n_samples measurements
/// spaced sweeps_per_sample apart. on_sample(r, i, chain) is called after each
/// spacing; calls for one replica are sequential.
void run_replicas(const RunConfig& config, int threads,
                  const std::function<void(int, int, const HeatBathChain&)>& on_sample);

/// Pooled batch-means estimate of each observable.
[[nodiscard]] std::vector<Estimate> estimate_observables(const RunConfig& config,
                                                         const std::vector<Observable>& observables,
                                                         int threads = 1);
[[nodiscard]] Estimate estimate_observable(const RunConfig& config, const Observable& observable,
                                           int threads = 1);

}  // namespace z2lab
