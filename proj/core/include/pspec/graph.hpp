#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "pspec/lattice.hpp"

namespace pspec {

/// One unoriented edge of the fundamental domain, stored in canonical
/// orientation. The reverse orientation (target, origin, -index) is implied.
struct FundEdge {
  int origin = 0;
  int target = 0;
  Cell index;  // edge index chi(e) = cell(target) - cell(origin)

  FundEdge reversed() const { return {target, origin, -index}; }
  bool is_bridge() const { return !index.is_zero(); }

  auto operator<=>(const FundEdge&) const = default;
  bool operator==(const FundEdge&) const = default;
};

/// Z^d-periodic graph given by its fundamental cell: s vertices per lattice
/// cell and a multiset of edge templates translated over all of Z^d.
class PeriodicGraph {
 public:
  /// Validates and canonicalizes. Each record is one unoriented edge; loops
  /// with zero index count twice toward the degree of their vertex.
  static PeriodicGraph build(int dim, int cell_size, std::vector<FundEdge> edges);

  int dimension() const noexcept { return dim_; }
  int cell_size() const noexcept { return cell_size_; }
  std::span<const FundEdge> edges() const noexcept { return edges_; }
  std::span<const int> degrees() const noexcept { return degrees_; }
  int degree(int label) const { return degrees_.at(static_cast<std::size_t>(label)); }

  /// l_G: largest |chi_j(e)| over all edges and axes. Zero means every edge
  /// stays inside its cell (degenerate translation).
  int propagation_length() const noexcept { return propagation_length_; }
  bool has_translation() const noexcept { return propagation_length_ > 0; }

  /// #B(G): oriented edges with nonzero index and origin in cell 0.
  std::size_t bridge_count() const noexcept;

  /// Neighbour templates of label i: pairs (cell offset, target label), one per
  /// oriented edge with origin (0, i), loops listed twice.
  std::span<const std::pair<Cell, int>> neighbor_templates(int label) const {
    return templates_.at(static_cast<std::size_t>(label));
  }

  bool is_base_vertex(const Vertex& v) const noexcept {
    return v.cell.dim() == dim_ && v.label >= 0 && v.label < cell_size_;
  }

 private:
  int dim_ = 0;
  int cell_size_ = 0;
  int propagation_length_ = 0;
  std::vector<FundEdge> edges_;
  std::vector<int> degrees_;
  std::vector<std::vector<std::pair<Cell, int>>> templates_;
};

inline PeriodicGraph build_periodic(int dim, int cell_size, std::vector<FundEdge> edges) {
  return PeriodicGraph::build(dim, cell_size, std::move(edges));
}

inline int propagation_length(const PeriodicGraph& g) { return g.propagation_length(); }

/// Local query interface over a possibly infinite graph. Implementations are
/// immutable after construction and safe for concurrent reads.
class GraphOracle {
 public:
  virtual ~GraphOracle() = default;

  virtual int dimension() const = 0;
  virtual bool contains(const Vertex& v) const = 0;

  /// Targets of all oriented edges at v, with multiplicity; a loop appears
  /// twice. Throws VertexNotInGraph when !contains(v).
  virtual std::vector<Vertex> out_edges(const Vertex& v) const = 0;

  virtual int degree(const Vertex& v) const { return static_cast<int>(out_edges(v).size()); }

  /// All vertices of the graph whose cell is c, ordered by label.
  virtual std::vector<Vertex> vertices_in_cell(const Cell& c) const = 0;
};

/// Oracle for the full periodic graph: out_edges((m,i)) = {(m + chi(e), j)}.
class PeriodicOracle final : public GraphOracle {
 public:
  explicit PeriodicOracle(PeriodicGraph graph) : graph_(std::move(graph)) {}

  const PeriodicGraph& graph() const noexcept { return graph_; }

  int dimension() const override { return graph_.dimension(); }
  bool contains(const Vertex& v) const override { return graph_.is_base_vertex(v); }
  std::vector<Vertex> out_edges(const Vertex& v) const override;
  int degree(const Vertex& v) const override;
  std::vector<Vertex> vertices_in_cell(const Cell& c) const override;

 private:
  PeriodicGraph graph_;
};

std::shared_ptr<const PeriodicOracle> periodic_oracle(const PeriodicGraph& g);

/// chi = cell(t) - cell(o). Throws DimensionMismatch for unequal dimensions.
Cell edge_index(const Vertex& o, const Vertex& t);

/// sqrt(sum_x |psi(x)|^2 deg x). Throws VertexNotInGraph for support outside O.
double weighted_norm(const VertexFunction& psi, const GraphOracle& oracle);

/// <psi, phi> = sum_x conj(psi(x)) phi(x) deg x.
Complex weighted_inner(const VertexFunction& psi, const VertexFunction& phi,
                       const GraphOracle& oracle);

/// (L psi)(x) = (1/deg x) sum_{e in A_x} psi(t(e)), evaluated on supp psi and
/// its neighbours. Entries that evaluate to zero are kept.
VertexFunction apply_laplacian(const VertexFunction& psi, const GraphOracle& oracle);

/// a*x + y over the union of supports.
VertexFunction axpy(Complex a, const VertexFunction& x, const VertexFunction& y);

/// max_x |psi(x)|, 0 for the empty function.
double sup_norm(const VertexFunction& psi);

/// Number of vertex pairs (v, u) among the out-edges of `samples` whose
/// multiplicities disagree between out_edges(v) and out_edges(u).
std::size_t symmetry_violations(const GraphOracle& oracle, std::span<const Vertex> samples);

}  // namespace pspec
