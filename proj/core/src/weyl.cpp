#include "pspec/weyl.hpp"

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>

#include "pspec/error.hpp"
#include "pspec/parallel.hpp"

namespace pspec {

namespace {

__extension__ typedef unsigned __int128 u128;

double rho(double t) { return std::max(0.0, 1.0 - std::abs(t)); }

std::vector<Vertex> box_vertices(const PeriodicGraph& g, const Box& box) {
  std::vector<Vertex> out;
  for_each_cell(box, [&](const Cell& c) {
    for (int i = 0; i < g.cell_size(); ++i) out.push_back({c, i});
  });
  return out;
}

// Weighted norm of L_G(k0) xi0 - lambda xi0.
double eigen_defect(const PeriodicGraph& g, std::span<const double> k0, const Eigen::VectorXcd& xi0,
                    double lambda) {
  const auto m = assemble_floquet(g, k0);
  const Eigen::VectorXcd r = m.entries * xi0 - lambda * xi0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) sum += std::norm(r(i)) * g.degree(static_cast<int>(i));
  return std::sqrt(sum);
}

}  // namespace

double tent_value(int n, const Cell& m) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "tent half-width n must be >= 1");
  double v = 1.0;
  for (int j = 0; j < m.dim(); ++j) {
    const std::int64_t a = std::abs(m[j]);
    if (a >= n) return 0.0;
    v *= static_cast<double>(n - a) / n;
  }
  return v;
}

double tent_norm_sq(int n, int d) {
  if (n < 1 || d < 1) throw Error(ErrorKind::InvalidArgument, "tent_norm_sq needs n, d >= 1");
  // (2n^2 + 1)^d / (3n)^d with one rounding while the integers stay exact.
  const u128 num1 = 2 * static_cast<u128>(n) * n + 1;
  u128 num = 1, den = 1;
  constexpr u128 kExact = static_cast<u128>(1) << 64;
  for (int j = 0; j < d; ++j) {
    num *= num1;
    den *= 3 * static_cast<u128>(n);
    if (num >= kExact) return std::pow((2.0 * n * n + 1.0) / (3.0 * n), d);
  }
  return static_cast<double>(static_cast<long double>(static_cast<std::uint64_t>(num)) /
                             static_cast<long double>(static_cast<std::uint64_t>(den)));
}

VertexFunction build_psi_n(const PeriodicGraph& g, std::span<const double> k0,
                           const Eigen::VectorXcd& xi0, double lambda, int n) {
  const int d = g.dimension();
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
  if (static_cast<int>(k0.size()) != d || xi0.size() != g.cell_size()) {
    throw Error(ErrorKind::DimensionMismatch, "k0 or xi0 does not match the graph");
  }
  const double defect = eigen_defect(g, k0, xi0, lambda);
  if (!(defect <= kEigenpairTol)) {
    throw Error(ErrorKind::BadEigenpair, "eigenpair residual " + std::to_string(defect));
  }

  VertexFunction psi;
  const Box support = Box::cube(Cell(d), n - 1);
  for_each_cell(support, [&](const Cell& m) {
    double phase = 0.0;
    for (int j = 0; j < d; ++j) phase += k0[static_cast<std::size_t>(j)] * static_cast<double>(m[j]);
    const Complex wave = std::polar(tent_value(n, m), phase);
    for (int i = 0; i < g.cell_size(); ++i) {
      const Complex v = wave * xi0(i);
      if (v != Complex{}) psi.emplace(Vertex{m, i}, v);
    }
  });
  return psi;
}

VertexFunction translate(const VertexFunction& psi, const Cell& a) {
  VertexFunction out;
  for (const auto& [x, v] : psi) out.emplace(Vertex{x.cell + a, x.label}, v);
  return out;
}

WeylState build_weyl_state(const PerturbedGraph& p, double lambda_target, int n, const Box& window,
                           int grid_per_axis) {
  const auto report = check_condition_P(p, n, window);
  if (!report.center) {
    throw Error(ErrorKind::ConditionPFailed,
                "no center in the window satisfies condition (P) at n=" + std::to_string(n));
  }
  return build_weyl_state(p, locate_state(p.base(), lambda_target, grid_per_axis), n, window);
}

WeylState build_weyl_state(const PerturbedGraph& p, const LocatedState& state, int n,
                           const Box& window) {
  const auto report = check_condition_P(p, n, window);
  if (!report.center) {
    throw Error(ErrorKind::ConditionPFailed,
                "no center in the window satisfies condition (P) at n=" + std::to_string(n));
  }
  const PeriodicGraph& g = p.base();
  const auto psi = build_psi_n(g, state.k0, state.xi0, state.lambda, n);

  WeylState w;
  w.base_state = translate(psi, report.center->cell);
  auto embedded = embed_u0(p, w.base_state);
  const double c_norm = weighted_norm(embedded, p.oracle());
  if (!(c_norm > 0.0)) throw Error(ErrorKind::InvariantViolation, "Weyl state has zero norm");
  for (auto& [x, v] : embedded) v /= c_norm;
  w.vector = std::move(embedded);

  w.meta.band = state.band;
  w.meta.k0 = state.k0;
  w.meta.xi0 = state.xi0;
  w.meta.lambda = state.lambda;
  w.meta.n = n;
  w.meta.center = *report.center;
  w.meta.c_norm = c_norm;
  const double psi_norm = weighted_norm(psi, p.base_oracle());
  w.meta.psi_norm_sq = psi_norm * psi_norm;
  w.meta.tent_norm_sq = tent_norm_sq(n, g.dimension());
  return w;
}

ResidualCheck residual_check(const PerturbedGraph& p, const WeylState& w, double lambda) {
  const PeriodicGraph& g = p.base();
  const int n = w.meta.n;
  const int d = g.dimension();

  ResidualCheck out;
  const auto l_psi = apply_laplacian(w.vector, p.oracle());
  out.residual = weighted_norm(axpy(-lambda, w.vector, l_psi), p.oracle());

  const auto base_defect = axpy(-lambda, w.base_state, apply_laplacian(w.base_state, p.base_oracle()));
  out.via_base = weighted_norm(embed_u0(p, base_defect), p.oracle()) / w.meta.c_norm;

  out.defect_max = sup_norm(apply_k_lambda(p, w.base_state));
  out.sup_norm = sup_norm(w.vector);

  const std::int64_t reach = n + g.propagation_length() - 1;
  const auto support = box_vertices(g, Box::cube(w.meta.center.cell, reach));
  out.constants = u0_constants(p, support);
  const double c0 = out.constants.c0;
  const double C0 = out.constants.C0;
  out.sup_bound = std::pow(tent_norm_sq(n, 1), -0.5 * d) / c0;

  const double slack = eigen_defect(g, w.meta.k0, w.meta.xi0, w.meta.lambda) * C0 / c0 +
                       std::abs(lambda - w.meta.lambda);
  out.bound = std::sqrt(residual_bound_sq(g, n, out.constants)) + slack;
  return out;
}

double residual_bound_sq(const PeriodicGraph& g, int n, const U0Constants& constants) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
  double sum = 0.0;
  for (const auto& e : g.edges()) {
    if (!e.is_bridge()) continue;
    int q = 0;
    double f = 0.0;
    for (int j = 0; j < e.index.dim(); ++j) {
      if (e.index[j] == 0) continue;
      ++q;
      f += lemma33_sum(n, static_cast<int>(e.index[j]));
    }
    sum += 2.0 * q * f;  // both orientations; f_{-l} = f_l
  }
  const double ratio = constants.C0 * constants.C0 / (constants.c0 * constants.c0);
  return ratio * static_cast<double>(g.bridge_count()) * sum / tent_norm_sq(n, 1);
}

double lemma33_sum(int n, int l) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
  const int a = std::abs(l);
  double sum = 0.0;
  for (int m = -n - a; m <= n + a; ++m) {
    const double diff = rho(static_cast<double>(m - l) / n) - rho(static_cast<double>(m) / n);
    sum += diff * diff;
  }
  return sum;
}

Lemma33Parts lemma33_parts(int n, int l) {
  if (l < 1 || n <= l) throw Error(ErrorKind::InvalidArgument, "lemma33_parts needs n > l >= 1");
  // n * rho(m/n) as an integer.
  auto tent = [n](std::int64_t m) { return std::max<std::int64_t>(0, n - std::abs(m)); };
  std::int64_t s1 = 0, s2 = 0, s3 = 0;
  for (std::int64_t m = -n + 1; m <= n - l - 1; ++m) {
    const std::int64_t diff = tent(m + l) - tent(m);
    s1 += diff * diff;
  }
  for (std::int64_t m = -n - l + 1; m <= -n; ++m) s2 += tent(m + l) * tent(m + l);
  for (std::int64_t m = n - l; m <= n - 1; ++m) s3 += tent(m) * tent(m);
  const double nn = static_cast<double>(n) * n;
  return {static_cast<double>(s1) / nn, static_cast<double>(s2) / nn, static_cast<double>(s3) / nn};
}

ResidualReport weyl_sweep(const PerturbedGraph& p, double lambda_target, std::span<const int> n_list,
                          const Box& window, int grid_per_axis, int threads) {
  if (n_list.empty()) throw Error(ErrorKind::InvalidArgument, "n_list is empty");
  ResidualReport report;
  report.lambda = lambda_target;
  report.state = locate_state(p.base(), lambda_target, grid_per_axis);
  report.rows.resize(n_list.size());
  parallel_for(n_list.size(), threads, [&](std::size_t i) {
    const int n = n_list[i];
    const auto w = build_weyl_state(p, report.state, n, window);
    const auto check = residual_check(p, w, lambda_target);
    report.rows[i] = {n,           w.meta.center,    check.residual, check.via_base,
                      check.defect_max, check.sup_norm, check.sup_bound, check.bound};
  });
  if (n_list.size() >= 2) {
    std::vector<double> x, y;
    for (const auto& row : report.rows) {
      x.push_back(row.n);
      y.push_back(row.residual);
    }
    report.slope = loglog_slope(x, y);
  }
  return report;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "loglog_slope needs two or more paired samples");
  }
  const double count = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "loglog_slope needs positive samples");
    }
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double mx = sx / count, my = sy / count;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  if (sxx == 0.0) throw Error(ErrorKind::InvalidArgument, "loglog_slope needs distinct x values");
  return sxy / sxx;
}

}  // namespace pspec
