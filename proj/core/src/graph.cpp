#include "pspec/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <unordered_set>

#include "pspec/error.hpp"

namespace pspec {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IsolatedVertex: return "IsolatedVertex";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::VertexNotInGraph: return "VertexNotInGraph";
    case ErrorKind::VertexNotInCommonSubgraph: return "VertexNotInCommonSubgraph";
    case ErrorKind::EmptySupport: return "EmptySupport";
    case ErrorKind::EmptyBox: return "EmptyBox";
    case ErrorKind::NonHermitian: return "NonHermitian";
    case ErrorKind::BadEigenpair: return "BadEigenpair";
    case ErrorKind::NotInSpectrum: return "NotInSpectrum";
    case ErrorKind::ConditionPFailed: return "ConditionPFailed";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// Cell / Vertex / Box

Cell::Cell(int dim) : dim_(dim) {
  if (dim < 0 || dim > kMaxDimension) {
    throw Error(ErrorKind::DimensionMismatch,
                "dimension " + std::to_string(dim) + " outside [0," +
                    std::to_string(kMaxDimension) + "]");
  }
}

Cell::Cell(std::initializer_list<std::int64_t> coords)
    : Cell(std::span<const std::int64_t>(coords.begin(), coords.size())) {}

Cell::Cell(std::span<const std::int64_t> coords) : Cell(static_cast<int>(coords.size())) {
  std::copy(coords.begin(), coords.end(), c_.begin());
}

Cell Cell::unit(int dim, int axis) {
  Cell c(dim);
  c[axis] = 1;
  return c;
}

bool Cell::is_zero() const noexcept {
  return std::all_of(c_.begin(), c_.end(), [](std::int64_t x) { return x == 0; });
}

std::int64_t Cell::max_abs() const noexcept {
  std::int64_t m = 0;
  for (auto x : c_) m = std::max<std::int64_t>(m, std::llabs(x));
  return m;
}

Cell Cell::operator+(const Cell& o) const {
  if (o.dim_ != dim_) throw Error(ErrorKind::DimensionMismatch, "cell addition");
  Cell r(*this);
  for (int i = 0; i < dim_; ++i) r[i] += o[i];
  return r;
}

Cell Cell::operator-(const Cell& o) const {
  if (o.dim_ != dim_) throw Error(ErrorKind::DimensionMismatch, "cell subtraction");
  Cell r(*this);
  for (int i = 0; i < dim_; ++i) r[i] -= o[i];
  return r;
}

Cell Cell::operator-() const {
  Cell r(*this);
  for (int i = 0; i < dim_; ++i) r[i] = -r[i];
  return r;
}

std::string Cell::to_string() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < dim_; ++i) os << (i ? "," : "") << c_[static_cast<std::size_t>(i)];
  os << ')';
  return os.str();
}

std::string Vertex::to_string() const { return cell.to_string() + ":" + std::to_string(label + 1); }

std::size_t VertexHash::operator()(const Vertex& v) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(v.label);
  for (auto x : v.cell.coords()) {
    h ^= static_cast<std::uint64_t>(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

bool Box::empty() const noexcept {
  if (lo.dim() == 0 || lo.dim() != hi.dim()) return true;
  for (int i = 0; i < lo.dim(); ++i)
    if (hi[i] < lo[i]) return true;
  return false;
}

bool Box::contains(const Cell& c) const noexcept {
  if (c.dim() != lo.dim()) return false;
  for (int i = 0; i < c.dim(); ++i)
    if (c[i] < lo[i] || c[i] > hi[i]) return false;
  return true;
}

std::uint64_t Box::cell_count() const noexcept {
  if (empty()) return 0;
  std::uint64_t n = 1;
  for (int i = 0; i < dim(); ++i) n *= static_cast<std::uint64_t>(extent(i));
  return n;
}

Box Box::cube(const Cell& center, std::int64_t radius) {
  Box b{center, center};
  for (int i = 0; i < center.dim(); ++i) {
    b.lo[i] -= radius;
    b.hi[i] += radius;
  }
  return b;
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 8;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

// ---------------------------------------------------------------------------
// PeriodicGraph

PeriodicGraph PeriodicGraph::build(int dim, int cell_size, std::vector<FundEdge> edges) {
  if (dim < 1 || dim > kMaxDimension) {
    throw Error(ErrorKind::DimensionMismatch,
                "dimension must lie in [1," + std::to_string(kMaxDimension) + "]");
  }
  if (cell_size < 1) throw Error(ErrorKind::InvalidArgument, "cell size must be >= 1");

  PeriodicGraph g;
  g.dim_ = dim;
  g.cell_size_ = cell_size;
  g.degrees_.assign(static_cast<std::size_t>(cell_size), 0);
  g.templates_.resize(static_cast<std::size_t>(cell_size));

  for (auto& e : edges) {
    if (e.index.dim() != dim) {
      throw Error(ErrorKind::DimensionMismatch, "edge index " + e.index.to_string() +
                                                    " does not have length " +
                                                    std::to_string(dim));
    }
    if (e.origin < 0 || e.origin >= cell_size || e.target < 0 || e.target >= cell_size) {
      throw Error(ErrorKind::InvalidArgument, "edge label outside [1," +
                                                  std::to_string(cell_size) + "]");
    }
    e = std::min(e, e.reversed());
  }
  std::sort(edges.begin(), edges.end());
  g.edges_ = std::move(edges);

  for (const auto& e : g.edges_) {
    ++g.degrees_[static_cast<std::size_t>(e.origin)];
    ++g.degrees_[static_cast<std::size_t>(e.target)];
    g.templates_[static_cast<std::size_t>(e.origin)].emplace_back(e.index, e.target);
    g.templates_[static_cast<std::size_t>(e.target)].emplace_back(-e.index, e.origin);
    g.propagation_length_ =
        std::max(g.propagation_length_, static_cast<int>(e.index.max_abs()));
  }
  for (int i = 0; i < cell_size; ++i) {
    if (g.degrees_[static_cast<std::size_t>(i)] == 0) {
      throw Error(ErrorKind::IsolatedVertex,
                  "label " + std::to_string(i + 1) + " has no incident edge");
    }
  }
  return g;
}

std::size_t PeriodicGraph::bridge_count() const noexcept {
  return 2 * static_cast<std::size_t>(
                 std::count_if(edges_.begin(), edges_.end(),
                               [](const FundEdge& e) { return e.is_bridge(); }));
}

// ---------------------------------------------------------------------------
// Oracles

std::vector<Vertex> PeriodicOracle::out_edges(const Vertex& v) const {
  if (!contains(v)) throw Error(ErrorKind::VertexNotInGraph, v.to_string());
  const auto templ = graph_.neighbor_templates(v.label);
  std::vector<Vertex> out;
  out.reserve(templ.size());
  for (const auto& [offset, label] : templ) out.push_back({v.cell + offset, label});
  return out;
}

int PeriodicOracle::degree(const Vertex& v) const {
  if (!contains(v)) throw Error(ErrorKind::VertexNotInGraph, v.to_string());
  return graph_.degree(v.label);
}

std::vector<Vertex> PeriodicOracle::vertices_in_cell(const Cell& c) const {
  std::vector<Vertex> out;
  if (c.dim() != graph_.dimension()) return out;
  for (int i = 0; i < graph_.cell_size(); ++i) out.push_back({c, i});
  return out;
}

std::shared_ptr<const PeriodicOracle> periodic_oracle(const PeriodicGraph& g) {
  return std::make_shared<const PeriodicOracle>(g);
}

Cell edge_index(const Vertex& o, const Vertex& t) {
  if (o.cell.dim() != t.cell.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "edge_index between " + o.to_string() + " and " +
                                                  t.to_string());
  }
  return t.cell - o.cell;
}

// ---------------------------------------------------------------------------
// Functions on vertices

double weighted_norm(const VertexFunction& psi, const GraphOracle& oracle) {
  std::vector<double> terms;
  terms.reserve(psi.size());
  for (const auto& [x, value] : psi) {
    if (!oracle.contains(x)) throw Error(ErrorKind::VertexNotInGraph, x.to_string());
    terms.push_back(std::norm(value) * oracle.degree(x));
  }
  return std::sqrt(pairwise_sum(terms));
}

Complex weighted_inner(const VertexFunction& psi, const VertexFunction& phi,
                       const GraphOracle& oracle) {
  std::vector<double> re;
  std::vector<double> im;
  const auto& smaller = psi.size() <= phi.size() ? psi : phi;
  for (const auto& [x, unused] : smaller) {
    (void)unused;
    const Complex a = value_at(psi, x);
    const Complex b = value_at(phi, x);
    if (a == Complex{} || b == Complex{}) continue;
    if (!oracle.contains(x)) throw Error(ErrorKind::VertexNotInGraph, x.to_string());
    const Complex t = std::conj(a) * b * static_cast<double>(oracle.degree(x));
    re.push_back(t.real());
    im.push_back(t.imag());
  }
  return {pairwise_sum(re), pairwise_sum(im)};
}

VertexFunction apply_laplacian(const VertexFunction& psi, const GraphOracle& oracle) {
  std::vector<Vertex> candidates;
  candidates.reserve(psi.size() * 5);
  for (const auto& [x, value] : psi) {
    (void)value;
    if (!oracle.contains(x)) throw Error(ErrorKind::VertexNotInGraph, x.to_string());
    candidates.push_back(x);
    for (auto& t : oracle.out_edges(x)) candidates.push_back(std::move(t));
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  VertexFunction out;
  for (const auto& x : candidates) {
    const auto targets = oracle.out_edges(x);
    Complex sum{};
    for (const auto& t : targets) sum += value_at(psi, t);
    out.emplace_hint(out.end(), x, sum / static_cast<double>(targets.size()));
  }
  return out;
}

VertexFunction axpy(Complex a, const VertexFunction& x, const VertexFunction& y) {
  VertexFunction out = y;
  for (const auto& [v, value] : x) out[v] += a * value;
  return out;
}

double sup_norm(const VertexFunction& psi) {
  double m = 0.0;
  for (const auto& [x, value] : psi) {
    (void)x;
    m = std::max(m, std::abs(value));
  }
  return m;
}

std::size_t symmetry_violations(const GraphOracle& oracle, std::span<const Vertex> samples) {
  std::size_t violations = 0;
  for (const auto& v : samples) {
    if (!oracle.contains(v)) continue;
    auto out = oracle.out_edges(v);
    std::sort(out.begin(), out.end());
    for (std::size_t i = 0; i < out.size();) {
      std::size_t j = i;
      while (j < out.size() && out[j] == out[i]) ++j;
      const auto forward = static_cast<std::ptrdiff_t>(j - i);
      const auto& u = out[i];
      std::ptrdiff_t backward = 0;
      if (oracle.contains(u)) {
        const auto back = oracle.out_edges(u);
        backward = std::count(back.begin(), back.end(), v);
      }
      if (forward != backward) ++violations;
      i = j;
    }
  }
  return violations;
}

}  // namespace pspec
