#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pspec/floquet.hpp"
#include "pspec/perturbation.hpp"

namespace pspec {

/// rho_n(m) = prod_j max(0, 1 - |m_j|/n).
double tent_value(int n, const Cell& m);

/// sum_m rho_n(m)^2 = ((2n^2 + 1) / (3n))^d.
double tent_norm_sq(int n, int d);

/// psi_n(m, i) = exp(i k0.m) rho_n(m) xi0_i on cells |m_j| < n. Exact zeros
/// are not stored. Throws BadEigenpair when |L_G(k0) xi0 - lambda xi0| > 1e-9.
VertexFunction build_psi_n(const PeriodicGraph& g, std::span<const double> k0,
                           const Eigen::VectorXcd& xi0, double lambda, int n);

inline constexpr double kEigenpairTol = 1e-9;

/// (T_a psi)(m, i) = psi(m - a, i): the support moves to cells around a.
VertexFunction translate(const VertexFunction& psi, const Cell& a);

struct WeylMeta {
  int band = 0;
  std::vector<double> k0;
  Eigen::VectorXcd xi0;
  double lambda = 0.0;  // lambda_band(k0)
  int n = 0;
  Vertex center;        // x_n
  double c_norm = 0.0;  // |U_0 T psi_n| in G'
  double psi_norm_sq = 0.0;   // |psi_n|^2 in G
  double tent_norm_sq = 0.0;  // closed form, for comparison with psi_norm_sq
};

struct WeylState {
  VertexFunction vector;      // Psi_n on G', unit norm
  VertexFunction base_state;  // T psi_n on G, unnormalized
  WeylMeta meta;
};

/// Runs the condition (P) search, locates a band state for lambda_target and
/// assembles Psi_n = U_0 T psi_n / |U_0 T psi_n|.
/// Throws ConditionPFailed when the window has no admissible center.
WeylState build_weyl_state(const PerturbedGraph& p, double lambda_target, int n,
                           const Box& window, int grid_per_axis = 64);
WeylState build_weyl_state(const PerturbedGraph& p, const LocatedState& state, int n,
                           const Box& window);

struct ResidualCheck {
  double residual = 0.0;    // |(L_{G'} - lambda) Psi_n|
  double via_base = 0.0;    // |U_0 T (L_G - lambda) psi_n| / c_norm
  double defect_max = 0.0;  // sup of K_Lambda T psi_n
  double sup_norm = 0.0;
  double sup_bound = 0.0;   // c_0^{-1} ((2n^2+1)/(3n))^{-d/2}
  double bound = 0.0;       // square root of residual_bound plus eigenpair slack
  U0Constants constants;
};

ResidualCheck residual_check(const PerturbedGraph& p, const WeylState& w, double lambda);

inline double residual(const PerturbedGraph& p, const WeylState& w, double lambda) {
  return residual_check(p, w, lambda).residual;
}

/// Right side of the residual-squared estimate:
///   C_0^2 c_0^{-2} #B (3n/(2n^2+1)) sum_{e in B} q_e sum_{j: chi_j(e) != 0} f_{chi_j(e)}(n)
/// where q_e is the number of nonzero components of chi(e).
double residual_bound_sq(const PeriodicGraph& g, int n, const U0Constants& constants);

/// f_l(n) = sum_m |rho((m - l)/n) - rho(m/n)|^2, summed term by term.
double lemma33_sum(int n, int l);

struct Lemma33Parts {
  double i1 = 0.0;  // m = -n+1 .. n-l-1
  double i2 = 0.0;  // m = -n-l+1 .. -n
  double i3 = 0.0;  // m = n-l .. n-1
  double total() const { return i1 + i2 + i3; }
};

/// Decomposition of f_l(n) for n > l >= 1, evaluated in exact integer
/// arithmetic before the final division by n^2.
Lemma33Parts lemma33_parts(int n, int l);

struct ResidualRow {
  int n = 0;
  Vertex center;
  double residual = 0.0;
  double via_base = 0.0;
  double defect_max = 0.0;
  double sup_norm = 0.0;
  double sup_bound = 0.0;
  double bound = 0.0;
};

struct ResidualReport {
  double lambda = 0.0;
  LocatedState state;
  std::vector<ResidualRow> rows;  // ordered as n_list
  double slope = 0.0;             // least-squares slope of log residual vs log n
};

/// Builds Psi_n and its residual for each n, in parallel, ordered by n_list.
ResidualReport weyl_sweep(const PerturbedGraph& p, double lambda_target,
                          std::span<const int> n_list, const Box& window,
                          int grid_per_axis = 64, int threads = 1);

/// Least-squares slope of log y against log x. Needs two distinct x values.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace pspec
