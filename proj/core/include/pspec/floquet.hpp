#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pspec/graph.hpp"

namespace pspec {

/// Fibre L_G(k) of the periodic Laplacian at quasimomentum k.
struct FloquetMatrix {
  std::vector<double> k;
  Eigen::MatrixXcd entries;
};

/// Sorted band energies at one quasimomentum. When requested, column i of
/// `vectors` is an eigenvector for lambdas[i] with sum_j |xi_j|^2 d_j = 1.
struct BandSample {
  std::vector<double> k;
  Eigen::VectorXd lambdas;
  Eigen::MatrixXcd vectors;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool flat = false;

  double width() const { return hi - lo; }
};

/// Finite union of closed intervals approximating the essential spectrum.
struct SpectrumApprox {
  std::vector<Interval> intervals;  // disjoint, ascending
  std::vector<double> flat_points;  // bands narrower than flat_tol, before merging
  int resolution = 0;
  double flat_tol = 0.0;

  /// Distance from x to the union of intervals (0 inside).
  double distance(double x) const;
  bool contains(double x, double eps) const { return distance(x) <= eps; }
};

inline constexpr double kDefaultFlatTol = 1e-8;
inline constexpr double kMergeTol = 1e-10;
inline constexpr double kHermitianTol = 1e-9;
inline constexpr double kSpectrumSlack = 1e-9;

/// (L_G(k))_{ij} = (1/d_i) sum_{e in A_ij} exp(i chi(e).k).
FloquetMatrix assemble_floquet(const PeriodicGraph& g, std::span<const double> k);

/// Diagonalizes via the Hermitian similarity D^{1/2} M D^{-1/2}.
/// Throws NonHermitian if that matrix is not Hermitian to kHermitianTol.
BandSample band_eigensystem(const FloquetMatrix& m, std::span<const int> degrees,
                            bool with_vectors = true);

/// Quasimomentum of flat grid index `index` on the uniform grid with
/// `grid_per_axis` points 2*pi*t/grid_per_axis per axis (last axis fastest).
std::vector<double> grid_point(int dim, int grid_per_axis, std::size_t index);
std::size_t grid_size(int dim, int grid_per_axis);

/// Band energies at every grid point, in grid order.
std::vector<BandSample> sample_bands(const PeriodicGraph& g, int grid_per_axis, int threads = 1);

/// Union over bands of [min lambda_i, max lambda_i], taken over the grid and
/// refined by golden-section search around each extremum. grid_per_axis must
/// be even so that 0 and pi are grid points.
SpectrumApprox essential_spectrum(const PeriodicGraph& g, int grid_per_axis,
                                  double flat_tol = kDefaultFlatTol, int threads = 1);

/// Merges intervals whose endpoints are within kMergeTol; flat marks width < flat_tol.
std::vector<Interval> merge_intervals(std::vector<Interval> intervals, double flat_tol);

/// A band state lambda = lambda_band(k0) with eigenvector xi0.
struct LocatedState {
  int band = 0;  // 0-based
  std::vector<double> k0;
  Eigen::VectorXcd xi0;
  double lambda = 0.0;  // lambda_band(k0)
  double target = 0.0;
};

inline constexpr double kLocateAcceptTol = 1e-6;
inline constexpr double kLocateTol = 1e-8;

/// Finds (band, k0) with |lambda_band(k0) - target| <= kLocateTol. Throws
/// NotInSpectrum when no band comes within kLocateAcceptTol of the target.
LocatedState locate_state(const PeriodicGraph& g, double lambda_target, int grid_per_axis = 64);

/// Minimizes f on [a, b] with `steps` golden-section reductions.
template <class F>
double golden_section_minimize(F&& f, double a, double b, int steps) {
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < steps; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? c : d;
}

}  // namespace pspec
