#include "pspec/truncation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "pspec/error.hpp"
#include "pspec/parallel.hpp"

namespace pspec {

namespace {

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

std::int64_t floor_div(std::int64_t a, std::int64_t m) { return (a - floor_mod(a, m)) / m; }

Eigen::MatrixXd dense_operator(const BoxGraph& b) {
  const auto n = static_cast<Eigen::Index>(b.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (const auto& nb : b.neighbors(i)) {
      h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(nb.index)) +=
          nb.multiplicity / std::sqrt(static_cast<double>(b.degree(i)) * b.degree(nb.index));
    }
  }
  return h;
}

void check_unit_range(std::span<const double> values) {
  for (double v : values) {
    if (v < -1.0 - kSpectrumSlack || v > 1.0 + kSpectrumSlack) {
      throw Error(ErrorKind::InvariantViolation,
                  "box eigenvalue " + std::to_string(v) + " outside [-1,1]");
    }
  }
}

std::vector<double> dense_spectrum(const BoxGraph& b) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense_operator(b), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::InvariantViolation, "dense eigensolver did not converge");
  }
  std::vector<double> out(solver.eigenvalues().data(),
                          solver.eigenvalues().data() + solver.eigenvalues().size());
  return out;
}

// Wrapped boxes are invariant under cyclic translations along every axis.
// Reducing along the first `axes` axes leaves one block per character, indexed
// by the vertices of the slab where those coordinates equal box.lo.
std::vector<double> reduced_spectrum(const BoxGraph& b, int axes, int threads) {
  const Box& box = b.box();
  std::vector<std::int64_t> extent(static_cast<std::size_t>(axes));
  std::size_t characters = 1;
  for (int a = 0; a < axes; ++a) {
    extent[static_cast<std::size_t>(a)] = box.extent(a);
    characters *= static_cast<std::size_t>(box.extent(a));
  }

  std::vector<std::size_t> slab;
  std::vector<std::int64_t> slab_pos(b.size(), -1);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const Cell& c = b.vertices()[i].cell;
    bool on_slab = true;
    for (int a = 0; a < axes && on_slab; ++a) on_slab = c[a] == box.lo[a];
    if (on_slab) {
      slab_pos[i] = static_cast<std::int64_t>(slab.size());
      slab.push_back(i);
    }
  }
  // Slab representative of each vertex: same label and trailing coordinates.
  std::vector<std::size_t> rep(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    Vertex v = b.vertices()[i];
    for (int a = 0; a < axes; ++a) v.cell[a] = box.lo[a];
    const auto idx = b.index_of(v);
    if (!idx || slab_pos[*idx] < 0) {
      throw Error(ErrorKind::InvariantViolation, "wrapped box is not translation invariant");
    }
    rep[i] = static_cast<std::size_t>(slab_pos[*idx]);
  }

  auto character = [&](std::size_t flat) {
    std::vector<std::int64_t> t(static_cast<std::size_t>(axes));
    for (int a = axes - 1; a >= 0; --a) {
      const auto aa = static_cast<std::size_t>(a);
      t[aa] = static_cast<std::int64_t>(flat % static_cast<std::size_t>(extent[aa]));
      flat /= static_cast<std::size_t>(extent[aa]);
    }
    return t;
  };
  auto conjugate_flat = [&](const std::vector<std::int64_t>& t) {
    std::size_t flat = 0;
    for (int a = 0; a < axes; ++a) {
      const auto aa = static_cast<std::size_t>(a);
      flat = flat * static_cast<std::size_t>(extent[aa]) +
             static_cast<std::size_t>(floor_mod(-t[aa], extent[aa]));
    }
    return flat;
  };

  const auto m = static_cast<Eigen::Index>(slab.size());
  std::vector<std::vector<double>> blocks(characters);
  parallel_for(characters, threads, [&](std::size_t flat) {
    const auto t = character(flat);
    const std::size_t partner = conjugate_flat(t);
    if (partner < flat) return;  // same eigenvalues as its conjugate block
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
      const std::size_t u = slab[static_cast<std::size_t>(r)];
      for (const auto& nb : b.neighbors(u)) {
        const Cell& cy = b.vertices()[nb.index].cell;
        double phase = 0.0;
        for (int a = 0; a < axes; ++a) {
          const auto aa = static_cast<std::size_t>(a);
          phase += 2.0 * std::numbers::pi * static_cast<double>(t[aa]) *
                   static_cast<double>(cy[a] - box.lo[a]) / static_cast<double>(extent[aa]);
        }
        const double w = nb.multiplicity / std::sqrt(static_cast<double>(b.degree(u)) *
                                                     b.degree(nb.index));
        h(r, static_cast<Eigen::Index>(rep[nb.index])) += std::polar(w, phase);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorKind::InvariantViolation, "block eigensolver did not converge");
    }
    const auto& ev = solver.eigenvalues();
    std::vector<double> values(ev.data(), ev.data() + ev.size());
    if (partner != flat) values.insert(values.end(), ev.data(), ev.data() + ev.size());
    blocks[flat] = std::move(values);
  });

  std::vector<double> out;
  out.reserve(b.size());
  for (const auto& blk : blocks) out.insert(out.end(), blk.begin(), blk.end());
  return out;
}

}  // namespace

std::optional<std::size_t> BoxGraph::index_of(const Vertex& v) const {
  auto it = index_.find(v);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Eigen::VectorXcd BoxGraph::apply(const Eigen::VectorXcd& x) const {
  if (x.size() != static_cast<Eigen::Index>(size())) {
    throw Error(ErrorKind::DimensionMismatch, "vector length does not match the box");
  }
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(x.size());
  for (std::size_t i = 0; i < size(); ++i) {
    Complex acc{};
    for (const auto& nb : adjacency_[i]) {
      acc += static_cast<double>(nb.multiplicity) * x(static_cast<Eigen::Index>(nb.index));
    }
    y(static_cast<Eigen::Index>(i)) = acc / static_cast<double>(degrees_[i]);
  }
  return y;
}

BoxGraph truncate(const GraphOracle& oracle, const Box& box, bool periodic_wrap) {
  if (box.empty()) throw Error(ErrorKind::EmptyBox, "box has no cells");
  if (box.dim() != oracle.dimension()) throw Error(ErrorKind::DimensionMismatch, "box dimension");
  if (periodic_wrap && dynamic_cast<const PeriodicOracle*>(&oracle) == nullptr) {
    throw Error(ErrorKind::InvalidArgument, "periodic wrap needs an unperturbed periodic graph");
  }
  const int d = box.dim();

  std::vector<Vertex> candidates;
  for_each_cell(box, [&](const Cell& c) {
    for (const auto& v : oracle.vertices_in_cell(c)) candidates.push_back(v);
  });
  std::unordered_map<Vertex, std::size_t, VertexHash> candidate_index;
  for (std::size_t i = 0; i < candidates.size(); ++i) candidate_index.emplace(candidates[i], i);

  std::vector<std::vector<BoxGraph::Neighbor>> adjacency(candidates.size());
  std::vector<int> degrees(candidates.size(), 0);
  std::vector<int> full(candidates.size(), 0);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto targets = oracle.out_edges(candidates[i]);
    full[i] = static_cast<int>(targets.size());
    std::map<std::pair<std::size_t, Cell>, int> merged;
    for (Vertex t : targets) {
      Cell shift(d);
      if (periodic_wrap) {
        for (int a = 0; a < d; ++a) {
          const std::int64_t off = t.cell[a] - box.lo[a];
          shift[a] = floor_div(off, box.extent(a));
          t.cell[a] = box.lo[a] + floor_mod(off, box.extent(a));
        }
      }
      auto it = candidate_index.find(t);
      if (it == candidate_index.end()) continue;
      ++merged[{it->second, shift}];
    }
    for (const auto& [key, mult] : merged) {
      adjacency[i].push_back({key.first, mult, key.second});
      degrees[i] += mult;
    }
  }

  BoxGraph b;
  b.box_ = box;
  b.wrapped_ = periodic_wrap;
  std::vector<std::size_t> remap(candidates.size(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (degrees[i] == 0) {
      ++b.dropped_;
      continue;
    }
    remap[i] = b.vertices_.size();
    b.index_.emplace(candidates[i], b.vertices_.size());
    b.vertices_.push_back(candidates[i]);
    b.degrees_.push_back(degrees[i]);
    b.full_degrees_.push_back(full[i]);
  }
  b.adjacency_.resize(b.vertices_.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (remap[i] == static_cast<std::size_t>(-1)) continue;
    for (auto nb : adjacency[i]) {
      nb.index = remap[nb.index];
      b.adjacency_[remap[i]].push_back(nb);
    }
  }
  return b;
}

std::vector<double> spectrum_of_box(const BoxGraph& b, int threads) {
  if (b.size() == 0) throw Error(ErrorKind::EmptyBox, "box graph has no vertices");
  std::vector<double> values;
  if (b.size() <= kDenseLimit) {
    values = dense_spectrum(b);
  } else {
    if (!b.wrapped()) {
      throw Error(ErrorKind::InvalidArgument, "box has " + std::to_string(b.size()) +
                                                  " vertices; the dense limit is " +
                                                  std::to_string(kDenseLimit));
    }
    const int d = b.box().dim();
    std::size_t slab = b.size();
    int axes = 0;
    while (slab > kDenseLimit && axes < d) {
      slab /= static_cast<std::size_t>(b.box().extent(axes));
      ++axes;
    }
    if (slab > kDenseLimit) {
      throw Error(ErrorKind::InvalidArgument, "fundamental cell too large for the dense solver");
    }
    values = reduced_spectrum(b, axes, threads);
  }
  std::sort(values.begin(), values.end());
  check_unit_range(values);
  for (double& v : values) v = std::clamp(v, -1.0, 1.0);
  return values;
}

BoxEigensystem eigensystem_of_box(const BoxGraph& b) {
  if (b.size() == 0) throw Error(ErrorKind::EmptyBox, "box graph has no vertices");
  if (b.size() > kDenseLimit) {
    throw Error(ErrorKind::InvalidArgument, "eigenvectors are limited to " +
                                                std::to_string(kDenseLimit) + " vertices");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense_operator(b));
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::InvariantViolation, "dense eigensolver did not converge");
  }
  BoxEigensystem out;
  out.values = solver.eigenvalues();
  check_unit_range({out.values.data(), static_cast<std::size_t>(out.values.size())});
  out.vectors = solver.eigenvectors();
  for (std::size_t i = 0; i < b.size(); ++i) {
    out.vectors.row(static_cast<Eigen::Index>(i)) /= std::sqrt(static_cast<double>(b.degree(i)));
  }
  return out;
}

TruncationReport compare_spectra(std::span<const double> eigs, const SpectrumApprox& s, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
  TruncationReport r;
  r.eigenvalues.assign(eigs.begin(), eigs.end());
  for (double v : eigs) {
    const double dist = s.distance(v);
    r.max_distance = std::max(r.max_distance, dist);
    if (dist > eps) ++r.outside_count;
  }
  r.inside_fraction =
      eigs.empty() ? 1.0 : 1.0 - static_cast<double>(r.outside_count) / static_cast<double>(eigs.size());
  return r;
}

TruncationReport compare_spectra(const BoxGraph& b, const SpectrumApprox& s, double eps) {
  const auto sys = eigensystem_of_box(b);
  std::vector<double> values(sys.values.data(), sys.values.data() + sys.values.size());
  for (double& v : values) v = std::clamp(v, -1.0, 1.0);
  TruncationReport r = compare_spectra(values, s, eps);

  // Graph distance to the nearest vertex that lost edges in the truncation.
  std::vector<int> dist(b.size(), -1);
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b.degree(i) != b.full_degree(i)) {
      dist[i] = 0;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    if (dist[u] >= 2) continue;
    for (const auto& nb : b.neighbors(u)) {
      if (dist[nb.index] < 0) {
        dist[nb.index] = dist[u] + 1;
        queue.push_back(nb.index);
      }
    }
  }

  for (Eigen::Index k = 0; k < sys.vectors.cols(); ++k) {
    double near = 0.0, total = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      const double x = sys.vectors(static_cast<Eigen::Index>(i), k);
      const double w = x * x * b.degree(i);
      total += w;
      if (dist[i] >= 0) near += w;
    }
    const bool localized = total > 0.0 && near >= 0.5 * total;
    if (localized) ++r.boundary_count;
    if (localized && s.distance(values[static_cast<std::size_t>(k)]) > eps) ++r.outside_on_boundary;
  }
  return r;
}

std::size_t zero_mode_count(const BoxGraph& b, double tol, int threads) {
  if (!(tol >= 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be nonnegative");
  const auto values = spectrum_of_box(b, threads);
  return static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [&](double v) { return std::abs(v) <= tol; }));
}

}  // namespace pspec
