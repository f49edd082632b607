#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pspec/graph.hpp"

namespace pspec {

/// Describes G' relative to a periodic base G in base coordinates:
///   V(G_0) = base vertices kept by the perturbation,
///   E(G_0) = base edges between kept vertices minus removed copies,
///   G'     = G_0 plus added vertices and added edges.
/// Implementations must be pure and thread-safe.
class Perturbation {
 public:
  virtual ~Perturbation() = default;

  virtual std::string name() const = 0;

  /// Whether base vertex x belongs to V(G_0).
  virtual bool keeps(const Vertex& x) const = 0;

  /// Number of copies of the base edge {x, y} removed (both kept).
  virtual int removed_copies(const Vertex& x, const Vertex& y) const = 0;

  /// Whether v is a vertex of G' that is not a kept base vertex.
  virtual bool is_added(const Vertex& v) const = 0;

  /// Added vertices whose cell is c, ordered by label.
  virtual std::vector<Vertex> added_in_cell(const Cell& c) const = 0;

  /// Targets of added oriented edges at v (kept base or added vertex).
  virtual std::vector<Vertex> added_neighbors(const Vertex& v) const = 0;

  /// Base-adjacency layers any local query consults. Infinite perturbations
  /// must be decidable from this neighbourhood.
  virtual int influence_radius() const = 0;

  /// True for explicit finite patches, which may carry an identification table.
  virtual bool is_finite() const { return false; }
};

/// Identity perturbation: G' = G, Lambda = V(G).
class NoPerturbation final : public Perturbation {
 public:
  std::string name() const override { return "none"; }
  bool keeps(const Vertex&) const override { return true; }
  int removed_copies(const Vertex&, const Vertex&) const override { return 0; }
  bool is_added(const Vertex&) const override { return false; }
  std::vector<Vertex> added_in_cell(const Cell&) const override { return {}; }
  std::vector<Vertex> added_neighbors(const Vertex&) const override { return {}; }
  int influence_radius() const override { return 0; }
};

/// Infinite perturbation given by local rules.
class PredicatePatch final : public Perturbation {
 public:
  struct Rules {
    std::string name;
    std::function<bool(const Vertex&)> keep;
    std::function<bool(const Vertex&)> added;
    std::function<std::vector<Vertex>(const Cell&)> added_in_cell;
    std::function<std::vector<Vertex>(const Vertex&)> extra_edges;
    int influence_radius = 1;
  };

  explicit PredicatePatch(Rules rules);

  std::string name() const override { return rules_.name; }
  bool keeps(const Vertex& x) const override { return rules_.keep(x); }
  int removed_copies(const Vertex&, const Vertex&) const override { return 0; }
  bool is_added(const Vertex& v) const override { return rules_.added(v); }
  std::vector<Vertex> added_in_cell(const Cell& c) const override { return rules_.added_in_cell(c); }
  std::vector<Vertex> added_neighbors(const Vertex& v) const override { return rules_.extra_edges(v); }
  int influence_radius() const override { return rules_.influence_radius; }

 private:
  Rules rules_;
};

/// Finite patch: explicit vertex and edge edits of the base graph.
struct PatchSpec {
  std::vector<Vertex> removed_vertices;
  std::vector<std::pair<Vertex, Vertex>> removed_edges;  // one entry per copy
  std::vector<Vertex> added_vertices;
  std::vector<std::pair<Vertex, Vertex>> added_edges;  // one entry per copy
};

class ExplicitPatch final : public Perturbation {
 public:
  /// Validates against the base: removed items exist, added edges only touch
  /// vertices present afterwards, and no affected vertex ends up isolated.
  ExplicitPatch(const PeriodicGraph& base, const PatchSpec& spec);

  std::string name() const override { return "patch"; }
  bool keeps(const Vertex& x) const override;
  int removed_copies(const Vertex& x, const Vertex& y) const override;
  bool is_added(const Vertex& v) const override { return added_.count(v) != 0; }
  std::vector<Vertex> added_in_cell(const Cell& c) const override;
  std::vector<Vertex> added_neighbors(const Vertex& v) const override;
  int influence_radius() const override { return 1; }
  bool is_finite() const override { return true; }

 private:
  PeriodicGraph base_;
  std::set<Vertex> removed_;
  std::map<std::pair<Vertex, Vertex>, int> removed_edges_;  // key ordered (min, max)
  std::set<Vertex> added_;
  std::map<Vertex, std::vector<Vertex>> added_adjacency_;
  std::map<Cell, std::vector<Vertex>> added_by_cell_;

  int degree_after(const Vertex& x) const;
};

/// Finite permutation of vertex names, identity elsewhere. Maps a G' name
/// x' to its base coordinate phi(x').
class VertexPermutation {
 public:
  VertexPermutation() = default;
  /// pairs (x', phi(x')); keys and values must be the same finite set.
  explicit VertexPermutation(const std::vector<std::pair<Vertex, Vertex>>& pairs);

  bool is_identity() const { return forward_.empty(); }
  Vertex forward(const Vertex& name) const;   // phi
  Vertex backward(const Vertex& base) const;  // phi^{-1}
  const std::map<Vertex, Vertex>& table() const { return forward_; }

 private:
  std::map<Vertex, Vertex> forward_;
  std::map<Vertex, Vertex> backward_;
};

/// Oracle for G', exposed in G' names (phi^{-1} of base coordinates).
class PerturbedOracle final : public GraphOracle {
 public:
  PerturbedOracle(std::shared_ptr<const PeriodicOracle> base,
                  std::shared_ptr<const Perturbation> perturbation, VertexPermutation phi);

  int dimension() const override { return base_->dimension(); }
  bool contains(const Vertex& v) const override;
  std::vector<Vertex> out_edges(const Vertex& v) const override;
  int degree(const Vertex& v) const override;
  std::vector<Vertex> vertices_in_cell(const Cell& c) const override;

 private:
  bool contains_internal(const Vertex& x) const;
  std::vector<Vertex> out_edges_internal(const Vertex& x) const;

  std::shared_ptr<const PeriodicOracle> base_;
  std::shared_ptr<const Perturbation> perturbation_;
  VertexPermutation phi_;
};

/// A perturbed periodic graph G' with common subgraph G_0 ~ G_0'.
class PerturbedGraph {
 public:
  PerturbedGraph(PeriodicGraph base, std::shared_ptr<const Perturbation> perturbation,
                 VertexPermutation phi = {});

  const PeriodicGraph& base() const noexcept { return base_oracle_->graph(); }
  const GraphOracle& base_oracle() const noexcept { return *base_oracle_; }
  const GraphOracle& oracle() const noexcept { return *oracle_; }
  std::shared_ptr<const GraphOracle> oracle_ptr() const noexcept { return oracle_; }
  const Perturbation& perturbation() const noexcept { return *perturbation_; }

  /// x in V(G_0).
  bool in_common(const Vertex& x) const;
  Vertex phi(const Vertex& name) const { return phi_.forward(name); }
  Vertex phi_inverse(const Vertex& x) const { return phi_.backward(x); }

 private:
  std::shared_ptr<const PeriodicOracle> base_oracle_;
  std::shared_ptr<const Perturbation> perturbation_;
  VertexPermutation phi_;
  std::shared_ptr<const PerturbedOracle> oracle_;
};

/// x in Lambda: deg_{G'} phi^{-1}(x) = deg_G x and A_x(G) lies in G_0.
/// Throws VertexNotInCommonSubgraph if x is not in V(G_0).
bool lambda_contains(const PerturbedGraph& p, const Vertex& x);

/// Cached membership in Lambda; vertices outside V(G_0) are reported absent.
/// Concurrent lookups are safe; racing inserts write identical values.
class LambdaSet {
 public:
  explicit LambdaSet(const PerturbedGraph& p) : p_(&p) {}

  bool contains(const Vertex& x) const;

 private:
  const PerturbedGraph* p_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<Vertex, bool, VertexHash> cache_;
};

struct WindowReport {
  int n = 0;
  std::optional<Vertex> center;  // x_n
  std::uint64_t searched = 0;
  std::int64_t box_lo = 0;  // I_n offsets: [box_lo, box_hi]^d around x_n
  std::int64_t box_hi = 0;
};

/// Scans centers with cell in `window` in lexicographic order and returns the
/// first whose box I_n(x_n) lies in Lambda.
WindowReport check_condition_P(const PerturbedGraph& p, int n, const Box& window);

/// U_0: transplants values on V(G_0) to G' via phi^{-1}; drops the rest.
VertexFunction embed_u0(const PerturbedGraph& p, const VertexFunction& psi);

struct U0Constants {
  double c0 = 1.0;          // sqrt(min deg' / max deg)
  double C0 = 1.0;          // sqrt(max deg' / min deg)
  double c0_literal = 1.0;  // min deg' / max deg
  double C0_literal = 1.0;  // max deg' / min deg
};

/// Norm-ratio constants of U_0 over `support` (a subset of V(G_0)).
U0Constants u0_constants(const PerturbedGraph& p, std::span<const Vertex> support);

/// K_Lambda psi = P^perp_{phi^{-1}(Lambda)} (L_{G'} U_0 - U_0 L_G) psi. Entries
/// on phi^{-1}(Lambda) are removed from the result.
VertexFunction apply_k_lambda(const PerturbedGraph& p, const VertexFunction& psi);

}  // namespace pspec
