#include "pspec/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "pspec/error.hpp"
#include "pspec/parallel.hpp"

namespace pspec {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double clamp_to_unit(double x) {
  if (x < -1.0 - kSpectrumSlack || x > 1.0 + kSpectrumSlack) {
    throw Error(ErrorKind::InvariantViolation,
                "band energy " + std::to_string(x) + " outside [-1,1]");
  }
  return std::clamp(x, -1.0, 1.0);
}

Eigen::VectorXd band_energies(const PeriodicGraph& g, std::span<const double> k) {
  return band_eigensystem(assemble_floquet(g, k), g.degrees(), false).lambdas;
}

double band_value(const PeriodicGraph& g, int band, std::span<const double> k) {
  return band_energies(g, k)(band);
}

// Coordinate sweep of golden-section searches on `objective` around k, each
// within one grid step of the current point. Keeps a move only if it improves.
template <class Objective>
double refine_coordinates(std::vector<double>& k, double value, double step,
                          Objective&& objective) {
  for (std::size_t axis = 0; axis < k.size(); ++axis) {
    std::vector<double> trial = k;
    auto along = [&](double t) {
      trial[axis] = t;
      return objective(std::span<const double>(trial));
    };
    const double best_t = golden_section_minimize(along, k[axis] - step, k[axis] + step, 40);
    trial[axis] = best_t;
    const double v = objective(std::span<const double>(trial));
    if (v < value) {
      value = v;
      k = trial;
    }
  }
  return value;
}

struct BandExtrema {
  std::vector<double> min_value, max_value;
  std::vector<std::vector<double>> min_k, max_k;
};

BandExtrema sampled_extrema(const PeriodicGraph& g, int grid,
                            const std::vector<BandSample>& samples) {
  const int s = g.cell_size();
  const int d = g.dimension();

  BandExtrema ex;
  ex.min_value.assign(static_cast<std::size_t>(s), std::numeric_limits<double>::infinity());
  ex.max_value.assign(static_cast<std::size_t>(s), -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> arg_min(static_cast<std::size_t>(s)), arg_max(static_cast<std::size_t>(s));
  for (std::size_t p = 0; p < samples.size(); ++p) {
    for (int h = 0; h < s; ++h) {
      const double v = samples[p].lambdas(h);
      const auto hh = static_cast<std::size_t>(h);
      if (v < ex.min_value[hh]) {
        ex.min_value[hh] = v;
        arg_min[hh] = p;
      }
      if (v > ex.max_value[hh]) {
        ex.max_value[hh] = v;
        arg_max[hh] = p;
      }
    }
  }

  const double step = kTwoPi / grid;
  for (int h = 0; h < s; ++h) {
    const auto hh = static_cast<std::size_t>(h);
    ex.min_k.push_back(grid_point(d, grid, arg_min[hh]));
    ex.max_k.push_back(grid_point(d, grid, arg_max[hh]));
    ex.min_value[hh] = refine_coordinates(ex.min_k[hh], ex.min_value[hh], step,
                                          [&](std::span<const double> k) {
                                            return band_value(g, h, k);
                                          });
    ex.max_value[hh] = -refine_coordinates(ex.max_k[hh], -ex.max_value[hh], step,
                                           [&](std::span<const double> k) {
                                             return -band_value(g, h, k);
                                           });
  }
  return ex;
}

}  // namespace

double SpectrumApprox::distance(double x) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& iv : intervals) {
    if (x >= iv.lo && x <= iv.hi) return 0.0;
    best = std::min(best, x < iv.lo ? iv.lo - x : x - iv.hi);
  }
  return best;
}

FloquetMatrix assemble_floquet(const PeriodicGraph& g, std::span<const double> k) {
  const int d = g.dimension();
  if (static_cast<int>(k.size()) != d) {
    throw Error(ErrorKind::DimensionMismatch, "quasimomentum has length " +
                                                  std::to_string(k.size()) + ", expected " +
                                                  std::to_string(d));
  }
  const int s = g.cell_size();
  FloquetMatrix m{std::vector<double>(k.begin(), k.end()), Eigen::MatrixXcd::Zero(s, s)};
  for (const auto& e : g.edges()) {
    double phase = 0.0;
    for (int j = 0; j < d; ++j) phase += static_cast<double>(e.index[j]) * k[static_cast<std::size_t>(j)];
    const Complex w = std::polar(1.0, phase);
    m.entries(e.origin, e.target) += w / static_cast<double>(g.degree(e.origin));
    m.entries(e.target, e.origin) += std::conj(w) / static_cast<double>(g.degree(e.target));
  }
  return m;
}

BandSample band_eigensystem(const FloquetMatrix& m, std::span<const int> degrees,
                            bool with_vectors) {
  const auto s = m.entries.rows();
  if (m.entries.cols() != s || static_cast<Eigen::Index>(degrees.size()) != s) {
    throw Error(ErrorKind::DimensionMismatch, "Floquet matrix and degree vector disagree");
  }
  Eigen::VectorXd sqrt_deg(s);
  for (Eigen::Index i = 0; i < s; ++i) sqrt_deg(i) = std::sqrt(static_cast<double>(degrees[static_cast<std::size_t>(i)]));

  Eigen::MatrixXcd h = sqrt_deg.asDiagonal() * m.entries * sqrt_deg.cwiseInverse().asDiagonal();
  const double asym = (h - h.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kHermitianTol) {
    throw Error(ErrorKind::NonHermitian,
                "symmetrized Floquet matrix deviates from Hermitian by " + std::to_string(asym));
  }
  h = (h + h.adjoint()) * 0.5;

  BandSample out;
  out.k = m.k;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
      h, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::InvariantViolation, "Hermitian eigensolver did not converge");
  }
  out.lambdas = solver.eigenvalues();
  if (with_vectors) out.vectors = sqrt_deg.cwiseInverse().asDiagonal() * solver.eigenvectors();
  return out;
}

std::size_t grid_size(int dim, int grid_per_axis) {
  std::size_t n = 1;
  for (int j = 0; j < dim; ++j) n *= static_cast<std::size_t>(grid_per_axis);
  return n;
}

std::vector<double> grid_point(int dim, int grid_per_axis, std::size_t index) {
  std::vector<double> k(static_cast<std::size_t>(dim));
  for (int j = dim - 1; j >= 0; --j) {
    const auto t = index % static_cast<std::size_t>(grid_per_axis);
    index /= static_cast<std::size_t>(grid_per_axis);
    k[static_cast<std::size_t>(j)] = kTwoPi * static_cast<double>(t) / grid_per_axis;
  }
  return k;
}

std::vector<BandSample> sample_bands(const PeriodicGraph& g, int grid_per_axis, int threads) {
  if (grid_per_axis < 2) throw Error(ErrorKind::InvalidArgument, "grid_per_axis must be >= 2");
  const int d = g.dimension();
  std::vector<BandSample> out(grid_size(d, grid_per_axis));
  parallel_for(out.size(), threads, [&](std::size_t p) {
    const auto k = grid_point(d, grid_per_axis, p);
    out[p] = band_eigensystem(assemble_floquet(g, k), g.degrees(), false);
  });
  return out;
}

std::vector<Interval> merge_intervals(std::vector<Interval> intervals, double flat_tol) {
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) {
              return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
            });
  std::vector<Interval> merged;
  for (const auto& iv : intervals) {
    if (!merged.empty() && iv.lo <= merged.back().hi + kMergeTol) {
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    } else {
      merged.push_back(iv);
    }
  }
  for (auto& iv : merged) iv.flat = iv.width() < flat_tol;
  return merged;
}

SpectrumApprox essential_spectrum(const PeriodicGraph& g, int grid_per_axis, double flat_tol,
                                  int threads) {
  if (grid_per_axis < 2 || grid_per_axis % 2 != 0) {
    throw Error(ErrorKind::InvalidArgument,
                "grid_per_axis must be even and >= 2 so that 0 and pi are sampled");
  }
  const auto ex = sampled_extrema(g, grid_per_axis, sample_bands(g, grid_per_axis, threads));

  SpectrumApprox out;
  out.resolution = grid_per_axis;
  out.flat_tol = flat_tol;
  std::vector<Interval> bands;
  for (std::size_t h = 0; h < ex.min_value.size(); ++h) {
    Interval iv{clamp_to_unit(ex.min_value[h]), clamp_to_unit(ex.max_value[h]), false};
    if (iv.width() < flat_tol) out.flat_points.push_back(0.5 * (iv.lo + iv.hi));
    bands.push_back(iv);
  }
  out.intervals = merge_intervals(std::move(bands), flat_tol);
  return out;
}

LocatedState locate_state(const PeriodicGraph& g, double lambda_target, int grid_per_axis) {
  if (!std::isfinite(lambda_target)) {
    throw Error(ErrorKind::InvalidArgument, "target energy must be finite");
  }
  if (grid_per_axis < 2) throw Error(ErrorKind::InvalidArgument, "grid_per_axis must be >= 2");
  const int d = g.dimension();
  const int s = g.cell_size();
  const auto samples = sample_bands(g, grid_per_axis, 1);
  const auto ex = sampled_extrema(g, grid_per_axis, samples);

  std::vector<bool> candidate(static_cast<std::size_t>(s));
  bool any = false;
  for (int h = 0; h < s; ++h) {
    const auto hh = static_cast<std::size_t>(h);
    candidate[hh] = lambda_target >= ex.min_value[hh] - kLocateAcceptTol &&
                    lambda_target <= ex.max_value[hh] + kLocateAcceptTol;
    any = any || candidate[hh];
  }
  if (!any) {
    throw Error(ErrorKind::NotInSpectrum,
                "no band comes within 1e-6 of " + std::to_string(lambda_target));
  }

  // Best grid point over candidate bands, first in grid order then band order.
  int band = -1;
  std::size_t best_point = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < samples.size(); ++p) {
    for (int h = 0; h < s; ++h) {
      if (!candidate[static_cast<std::size_t>(h)]) continue;
      const double err = std::abs(samples[p].lambdas(h) - lambda_target);
      if (err < best_err) {
        best_err = err;
        best_point = p;
        band = h;
      }
    }
  }

  std::vector<double> k0 = grid_point(d, grid_per_axis, best_point);
  auto mismatch = [&](std::span<const double> k) {
    return std::abs(band_value(g, band, k) - lambda_target);
  };
  if (best_err > 0.0) {
    best_err = refine_coordinates(k0, best_err, kTwoPi / grid_per_axis, mismatch);
  }
  if (best_err > kLocateTol) {
    // Bisection along the segment joining the band minimum and maximum; the
    // band is continuous on it, so the clamped target is crossed.
    const auto hh = static_cast<std::size_t>(band);
    const double goal = std::clamp(lambda_target, ex.min_value[hh], ex.max_value[hh]);
    const auto& ka = ex.min_k[hh];
    const auto& kb = ex.max_k[hh];
    auto at = [&](double t) {
      std::vector<double> k(ka.size());
      for (std::size_t j = 0; j < k.size(); ++j) k[j] = ka[j] + t * (kb[j] - ka[j]);
      return k;
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (band_value(g, band, at(mid)) < goal) lo = mid; else hi = mid;
    }
    auto k_lo = at(lo);
    auto k_hi = at(hi);
    const double e_lo = mismatch(k_lo);
    const double e_hi = mismatch(k_hi);
    const auto& k_best = e_lo <= e_hi ? k_lo : k_hi;
    const double e_best = std::min(e_lo, e_hi);
    if (e_best < best_err) {
      k0 = k_best;
      best_err = e_best;
    }
  }

  const auto sample = band_eigensystem(assemble_floquet(g, k0), g.degrees(), true);
  LocatedState out;
  out.band = band;
  out.k0 = k0;
  out.xi0 = sample.vectors.col(band);
  out.lambda = sample.lambdas(band);
  out.target = lambda_target;
  return out;
}

}  // namespace pspec
