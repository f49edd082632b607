#include "pspec/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pspec/error.hpp"

namespace pspec {

namespace {

std::pair<Vertex, Vertex> ordered(const Vertex& a, const Vertex& b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

// Base out-edges of x restricted to G_0: targets kept and removed copies skipped.
std::vector<Vertex> common_out_edges(const PeriodicOracle& base, const Perturbation& pert,
                                     const Vertex& x) {
  std::vector<Vertex> out;
  const auto targets = base.out_edges(x);
  std::map<Vertex, int> skip;
  for (const auto& y : targets) {
    if (!pert.keeps(y)) continue;
    auto [it, inserted] = skip.try_emplace(y, 0);
    if (inserted) {
      const int r = pert.removed_copies(x, y);
      it->second = (y == x) ? 2 * r : r;  // a removed loop drops both orientations
    }
    if (it->second > 0) {
      --it->second;
      continue;
    }
    out.push_back(y);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Perturbation kinds

PredicatePatch::PredicatePatch(Rules rules) : rules_(std::move(rules)) {
  if (!rules_.keep || !rules_.added || !rules_.added_in_cell || !rules_.extra_edges) {
    throw Error(ErrorKind::InvalidArgument, "predicate patch '" + rules_.name +
                                                "' is missing a rule");
  }
  if (rules_.influence_radius < 0) {
    throw Error(ErrorKind::InvalidArgument, "influence radius must be nonnegative");
  }
}

ExplicitPatch::ExplicitPatch(const PeriodicGraph& base, const PatchSpec& spec) : base_(base) {
  const PeriodicOracle oracle(base);
  auto check_dim = [&](const Vertex& v) {
    if (v.cell.dim() != base.dimension()) {
      throw Error(ErrorKind::DimensionMismatch, "patch vertex " + v.to_string());
    }
  };

  for (const auto& v : spec.removed_vertices) {
    check_dim(v);
    if (!base.is_base_vertex(v)) {
      throw Error(ErrorKind::InvalidArgument, "removed vertex " + v.to_string() +
                                                  " is not a base vertex");
    }
    removed_.insert(v);
  }
  for (const auto& [a, b] : spec.removed_edges) {
    check_dim(a);
    check_dim(b);
    if (!base.is_base_vertex(a) || !base.is_base_vertex(b)) {
      throw Error(ErrorKind::InvalidArgument, "removed edge endpoint is not a base vertex");
    }
    ++removed_edges_[ordered(a, b)];
  }
  for (const auto& [key, copies] : removed_edges_) {
    const auto targets = oracle.out_edges(key.first);
    auto present = std::count(targets.begin(), targets.end(), key.second);
    if (key.first == key.second) present /= 2;
    if (copies > present) {
      throw Error(ErrorKind::InvalidArgument, "cannot remove " + std::to_string(copies) +
                                                  " copies of edge " + key.first.to_string() +
                                                  "-" + key.second.to_string());
    }
  }
  for (const auto& v : spec.added_vertices) {
    check_dim(v);
    if (v.label < 0) throw Error(ErrorKind::InvalidArgument, "negative vertex label");
    if (base.is_base_vertex(v) && !removed_.count(v)) {
      throw Error(ErrorKind::InvalidArgument, "added vertex " + v.to_string() +
                                                  " already exists in the base graph");
    }
    if (added_.insert(v).second) added_by_cell_[v.cell].push_back(v);
  }
  for (auto& [cell, list] : added_by_cell_) std::sort(list.begin(), list.end());

  auto present_after = [&](const Vertex& v) { return added_.count(v) || keeps(v); };
  for (const auto& [a, b] : spec.added_edges) {
    check_dim(a);
    check_dim(b);
    if (!present_after(a) || !present_after(b)) {
      throw Error(ErrorKind::InvalidArgument, "added edge " + a.to_string() + "-" +
                                                  b.to_string() +
                                                  " touches a vertex absent from G'");
    }
    added_adjacency_[a].push_back(b);
    added_adjacency_[b].push_back(a);
  }

  // Only vertices touched by the patch can change degree.
  std::set<Vertex> affected(added_.begin(), added_.end());
  for (const auto& v : removed_) {
    for (const auto& y : oracle.out_edges(v)) affected.insert(y);
  }
  for (const auto& [key, copies] : removed_edges_) {
    (void)copies;
    affected.insert(key.first);
    affected.insert(key.second);
  }
  for (const auto& v : affected) {
    if (!present_after(v)) continue;
    if (degree_after(v) == 0) {
      throw Error(ErrorKind::IsolatedVertex, "patch isolates " + v.to_string());
    }
  }
}

bool ExplicitPatch::keeps(const Vertex& x) const {
  return base_.is_base_vertex(x) && !removed_.count(x);
}

int ExplicitPatch::removed_copies(const Vertex& x, const Vertex& y) const {
  auto it = removed_edges_.find(ordered(x, y));
  return it == removed_edges_.end() ? 0 : it->second;
}

std::vector<Vertex> ExplicitPatch::added_in_cell(const Cell& c) const {
  auto it = added_by_cell_.find(c);
  return it == added_by_cell_.end() ? std::vector<Vertex>{} : it->second;
}

std::vector<Vertex> ExplicitPatch::added_neighbors(const Vertex& v) const {
  auto it = added_adjacency_.find(v);
  return it == added_adjacency_.end() ? std::vector<Vertex>{} : it->second;
}

int ExplicitPatch::degree_after(const Vertex& x) const {
  int deg = 0;
  if (keeps(x)) deg += static_cast<int>(common_out_edges(PeriodicOracle(base_), *this, x).size());
  deg += static_cast<int>(added_neighbors(x).size());
  return deg;
}

// ---------------------------------------------------------------------------
// Identification map

VertexPermutation::VertexPermutation(const std::vector<std::pair<Vertex, Vertex>>& pairs) {
  for (const auto& [name, base] : pairs) {
    if (name == base) continue;
    if (!forward_.emplace(name, base).second || !backward_.emplace(base, name).second) {
      throw Error(ErrorKind::InvalidArgument, "identification map is not injective at " +
                                                  name.to_string());
    }
  }
  for (const auto& [name, base] : forward_) {
    (void)base;
    if (!backward_.count(name)) {
      throw Error(ErrorKind::InvalidArgument,
                  "identification map must permute a finite vertex set; " + name.to_string() +
                      " has no preimage");
    }
  }
}

Vertex VertexPermutation::forward(const Vertex& name) const {
  auto it = forward_.find(name);
  return it == forward_.end() ? name : it->second;
}

Vertex VertexPermutation::backward(const Vertex& base) const {
  auto it = backward_.find(base);
  return it == backward_.end() ? base : it->second;
}

// ---------------------------------------------------------------------------
// Oracle of G'

PerturbedOracle::PerturbedOracle(std::shared_ptr<const PeriodicOracle> base,
                                 std::shared_ptr<const Perturbation> perturbation,
                                 VertexPermutation phi)
    : base_(std::move(base)), perturbation_(std::move(perturbation)), phi_(std::move(phi)) {}

bool PerturbedOracle::contains_internal(const Vertex& x) const {
  if (x.cell.dim() != base_->dimension()) return false;
  if (base_->contains(x) && perturbation_->keeps(x)) return true;
  return perturbation_->is_added(x);
}

bool PerturbedOracle::contains(const Vertex& v) const { return contains_internal(phi_.forward(v)); }

std::vector<Vertex> PerturbedOracle::out_edges_internal(const Vertex& x) const {
  std::vector<Vertex> out;
  if (base_->contains(x) && perturbation_->keeps(x)) out = common_out_edges(*base_, *perturbation_, x);
  auto extra = perturbation_->added_neighbors(x);
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

std::vector<Vertex> PerturbedOracle::out_edges(const Vertex& v) const {
  const Vertex x = phi_.forward(v);
  if (!contains_internal(x)) throw Error(ErrorKind::VertexNotInGraph, v.to_string());
  auto out = out_edges_internal(x);
  if (!phi_.is_identity()) {
    for (auto& t : out) t = phi_.backward(t);
  }
  return out;
}

int PerturbedOracle::degree(const Vertex& v) const {
  return static_cast<int>(out_edges(v).size());
}

std::vector<Vertex> PerturbedOracle::vertices_in_cell(const Cell& c) const {
  std::vector<Vertex> candidates;
  if (c.dim() != base_->dimension()) return candidates;
  for (const auto& v : base_->vertices_in_cell(c)) candidates.push_back(v);
  for (const auto& v : perturbation_->added_in_cell(c)) candidates.push_back(v);
  for (const auto& [name, base] : phi_.table()) {
    (void)base;
    if (name.cell == c) candidates.push_back(name);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  std::erase_if(candidates, [&](const Vertex& v) { return !contains(v); });
  return candidates;
}

// ---------------------------------------------------------------------------
// PerturbedGraph

PerturbedGraph::PerturbedGraph(PeriodicGraph base, std::shared_ptr<const Perturbation> perturbation,
                               VertexPermutation phi)
    : base_oracle_(std::make_shared<const PeriodicOracle>(std::move(base))),
      perturbation_(std::move(perturbation)),
      phi_(std::move(phi)) {
  if (!perturbation_) perturbation_ = std::make_shared<const NoPerturbation>();
  if (!phi_.is_identity() && !perturbation_->is_finite()) {
    throw Error(ErrorKind::InvalidArgument,
                "a non-identity identification map requires an explicit finite patch");
  }
  oracle_ = std::make_shared<const PerturbedOracle>(base_oracle_, perturbation_, phi_);
}

bool PerturbedGraph::in_common(const Vertex& x) const {
  return base().is_base_vertex(x) && perturbation_->keeps(x);
}

bool lambda_contains(const PerturbedGraph& p, const Vertex& x) {
  if (!p.in_common(x)) throw Error(ErrorKind::VertexNotInCommonSubgraph, x.to_string());
  if (p.oracle().degree(p.phi_inverse(x)) != p.base().degree(x.label)) return false;
  const auto& pert = p.perturbation();
  for (const auto& y : p.base_oracle().out_edges(x)) {
    if (!pert.keeps(y) || pert.removed_copies(x, y) > 0) return false;
  }
  return true;
}

bool LambdaSet::contains(const Vertex& x) const {
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(x);
    if (it != cache_.end()) return it->second;
  }
  const bool member = p_->in_common(x) && lambda_contains(*p_, x);
  std::lock_guard lock(mutex_);
  cache_.emplace(x, member);
  return member;
}

// ---------------------------------------------------------------------------
// Condition (P)

WindowReport check_condition_P(const PerturbedGraph& p, int n, const Box& window) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "box radius n must be >= 1");
  const int d = p.base().dimension();
  if (window.dim() != d) throw Error(ErrorKind::DimensionMismatch, "search window dimension");

  const std::int64_t reach = n + p.base().propagation_length() - 1;
  WindowReport report;
  report.n = n;
  report.box_lo = -reach;
  report.box_hi = reach;

  const int s = p.base().cell_size();
  LambdaSet lambda(p);
  bool found = false;
  for_each_cell(window, [&](const Cell& center) {
    if (found) return;
    ++report.searched;
    bool ok = true;
    for_each_cell(Box::cube(center, reach), [&](const Cell& c) {
      if (!ok) return;
      for (int i = 0; i < s && ok; ++i) ok = lambda.contains({c, i});
    });
    if (ok) {
      found = true;
      report.center = Vertex{center, 0};
    }
  });
  return report;
}

// ---------------------------------------------------------------------------
// U_0 and K_Lambda

VertexFunction embed_u0(const PerturbedGraph& p, const VertexFunction& psi) {
  VertexFunction out;
  for (const auto& [x, value] : psi) {
    if (p.in_common(x)) out.emplace(p.phi_inverse(x), value);
  }
  return out;
}

U0Constants u0_constants(const PerturbedGraph& p, std::span<const Vertex> support) {
  if (support.empty()) throw Error(ErrorKind::EmptySupport, "u0_constants needs a support");
  int min_dp = std::numeric_limits<int>::max(), max_dp = 0;
  int min_d = std::numeric_limits<int>::max(), max_d = 0;
  for (const auto& x : support) {
    if (!p.in_common(x)) throw Error(ErrorKind::VertexNotInCommonSubgraph, x.to_string());
    const int dp = p.oracle().degree(p.phi_inverse(x));
    const int dg = p.base().degree(x.label);
    min_dp = std::min(min_dp, dp);
    max_dp = std::max(max_dp, dp);
    min_d = std::min(min_d, dg);
    max_d = std::max(max_d, dg);
  }
  U0Constants k;
  k.c0_literal = static_cast<double>(min_dp) / max_d;
  k.C0_literal = static_cast<double>(max_dp) / min_d;
  k.c0 = std::sqrt(k.c0_literal);
  k.C0 = std::sqrt(k.C0_literal);
  return k;
}

VertexFunction apply_k_lambda(const PerturbedGraph& p, const VertexFunction& psi) {
  const auto lifted = apply_laplacian(embed_u0(p, psi), p.oracle());
  const auto transported = embed_u0(p, apply_laplacian(psi, p.base_oracle()));
  auto diff = axpy(Complex{-1.0, 0.0}, transported, lifted);

  LambdaSet lambda(p);
  std::erase_if(diff, [&](const auto& entry) {
    const Vertex x = p.phi(entry.first);
    return lambda.contains(x);
  });
  return diff;
}

}  // namespace pspec
