#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "pspec/floquet.hpp"
#include "pspec/graph.hpp"

namespace pspec {

/// Finite restriction of a graph to the vertices whose cell lies in a box.
class BoxGraph {
 public:
  struct Neighbor {
    std::size_t index;
    int multiplicity;  // oriented edge copies; a loop counts twice
    Cell shift;        // winding offset across the box for wrapped edges
  };

  const Box& box() const noexcept { return box_; }
  bool wrapped() const noexcept { return wrapped_; }
  std::size_t size() const noexcept { return vertices_.size(); }
  std::span<const Vertex> vertices() const noexcept { return vertices_; }
  std::optional<std::size_t> index_of(const Vertex& v) const;
  std::span<const Neighbor> neighbors(std::size_t i) const { return adjacency_.at(i); }
  int degree(std::size_t i) const { return degrees_.at(i); }
  /// Degree in the untruncated graph; differs from degree(i) at cut vertices.
  int full_degree(std::size_t i) const { return full_degrees_.at(i); }
  /// Vertices dropped because no edge survived inside the box.
  std::size_t dropped() const noexcept { return dropped_; }

  /// Box Laplacian (1/deg) sum over neighbours, on a dense vector in vertex order.
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;

  friend BoxGraph truncate(const GraphOracle& oracle, const Box& box, bool periodic_wrap);

 private:
  Box box_;
  bool wrapped_ = false;
  std::vector<Vertex> vertices_;
  std::unordered_map<Vertex, std::size_t, VertexHash> index_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<int> degrees_;
  std::vector<int> full_degrees_;
  std::size_t dropped_ = 0;
};

/// Induced subgraph on the cells of `box`, degrees recomputed inside the box.
/// With periodic_wrap, edges of a PeriodicOracle close modulo the box lengths.
/// Throws EmptyBox; wrapping any other oracle throws InvalidArgument.
BoxGraph truncate(const GraphOracle& oracle, const Box& box, bool periodic_wrap);

inline constexpr std::size_t kDenseLimit = 4000;

/// Ascending eigenvalues of D^{1/2} A_norm D^{-1/2}. Dense for up to
/// kDenseLimit vertices; larger wrapped boxes are block-diagonalized by the
/// cyclic translations of the box first. Larger unwrapped boxes are rejected.
std::vector<double> spectrum_of_box(const BoxGraph& b, int threads = 1);

struct BoxEigensystem {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns are eigenvectors of the normalized operator
};

/// Dense eigensystem of the box Laplacian; eigenvectors are returned in
/// original coordinates (D^{-1/2} applied) with unit degree-weighted norm.
BoxEigensystem eigensystem_of_box(const BoxGraph& b);

struct TruncationReport {
  std::vector<double> eigenvalues;
  double inside_fraction = 1.0;
  std::size_t outside_count = 0;
  std::size_t boundary_count = 0;          // eigenvectors localized at the cut
  std::size_t outside_on_boundary = 0;     // outside eigenvalues whose vector is localized
  double max_distance = 0.0;
};

/// Fraction of eigenvalues within eps of the intervals of S.
TruncationReport compare_spectra(std::span<const double> eigs, const SpectrumApprox& s, double eps);

/// Also classifies eigenvectors: localized when at least half of their
/// weighted mass sits within graph distance 2 of a vertex that lost edges.
TruncationReport compare_spectra(const BoxGraph& b, const SpectrumApprox& s, double eps);

/// Number of eigenvalues with |lambda| <= tol.
std::size_t zero_mode_count(const BoxGraph& b, double tol, int threads = 1);

}  // namespace pspec
