#pragma once

// Reference computations used by the tests. Each one works from raw inputs and
// avoids the library's own assembly and solver paths.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "pspec/graph.hpp"

namespace oracle {

struct RawEdge {
  int o, t;
  std::vector<long> idx;
};

/// Eigenvalues of the (non-Hermitian) Floquet matrix built straight from the
/// edge list, by a general complex eigensolver. Sorted real parts.
inline std::vector<double> floquet_eigs(int s, const std::vector<RawEdge>& edges,
                                        const std::vector<double>& k) {
  std::vector<int> deg(static_cast<std::size_t>(s), 0);
  for (const auto& e : edges) {
    ++deg[static_cast<std::size_t>(e.o)];
    ++deg[static_cast<std::size_t>(e.t)];
  }
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(s, s);
  for (const auto& e : edges) {
    double phase = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j) phase += static_cast<double>(e.idx[j]) * k[j];
    m(e.o, e.t) += std::polar(1.0, phase) / static_cast<double>(deg[static_cast<std::size_t>(e.o)]);
    m(e.t, e.o) += std::polar(1.0, -phase) / static_cast<double>(deg[static_cast<std::size_t>(e.t)]);
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m, false);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < s; ++i) out.push_back(solver.eigenvalues()(i).real());
  std::sort(out.begin(), out.end());
  return out;
}

/// Roots of lambda^2 - (2 cos k / 3) lambda - 1/3 for the chain with one pendant per site.
inline std::pair<double, double> g11_bands(double k) {
  const double c = std::cos(k) / 3.0;
  const double r = std::sqrt(c * c + 1.0 / 3.0);
  return {c - r, c + r};
}

/// Sum over the cube |m_j| < n of prod_j (1 - |m_j|/n)^2, term by term.
inline double tent_sum(int n, int d) {
  std::vector<long> m(static_cast<std::size_t>(d), -(n - 1));
  double total = 0.0;
  while (true) {
    double v = 1.0;
    for (long x : m) v *= 1.0 - std::abs(static_cast<double>(x)) / n;
    total += v * v;
    int j = d - 1;
    while (j >= 0 && m[static_cast<std::size_t>(j)] == n - 1) m[static_cast<std::size_t>(j--)] = -(n - 1);
    if (j < 0) break;
    ++m[static_cast<std::size_t>(j)];
  }
  return total;
}

/// Integer form of the tent identity: sum_m (n - |m|)^2 over |m| < n equals
/// n (2n^2 + 1) / 3, so the d-fold sum times 3^d equals (n(2n^2+1))^d.
inline bool tent_identity_exact(int n, int d) {
  __int128 one = 0;
  for (long m = -(n - 1); m <= n - 1; ++m) one += static_cast<__int128>(n - std::abs(m)) * (n - std::abs(m));
  __int128 lhs = 1, rhs = 1;
  for (int j = 0; j < d; ++j) {
    lhs *= 3 * one;
    rhs *= static_cast<__int128>(n) * (2 * static_cast<__int128>(n) * n + 1);
  }
  return lhs == rhs;
}

/// n^2 f_l(n) as an exact integer: sum_m ((n - |m - l|)_+ - (n - |m|)_+)^2.
inline std::int64_t lemma_sum_scaled(int n, int l) {
  auto t = [n](long m) { return std::max<long>(0, n - std::abs(m)); };
  std::int64_t s = 0;
  for (long m = -n - std::abs(l) - 1; m <= n + std::abs(l) + 1; ++m) {
    const long d = t(m - l) - t(m);
    s += d * d;
  }
  return s;
}

/// Dense normalized Laplacian (1/deg) * adjacency of the induced subgraph on
/// `vertices`, assembled straight from out_edges with degrees counted inside.
inline Eigen::MatrixXd induced_laplacian(const pspec::GraphOracle& g,
                                         const std::vector<pspec::Vertex>& vertices) {
  std::map<pspec::Vertex, Eigen::Index> idx;
  for (std::size_t i = 0; i < vertices.size(); ++i) idx[vertices[i]] = static_cast<Eigen::Index>(i);
  const auto n = static_cast<Eigen::Index>(vertices.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (const auto& t : g.out_edges(vertices[i])) {
      auto it = idx.find(t);
      if (it != idx.end()) a(static_cast<Eigen::Index>(i), it->second) += 1.0;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double deg = a.row(i).sum();
    if (deg > 0) a.row(i) /= deg;
  }
  return a;
}

/// Sorted real parts of the eigenvalues of a general real matrix.
inline std::vector<double> general_eigs(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(solver.eigenvalues()(i).real());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace oracle
