#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pspec/catalog.hpp"
#include "pspec/error.hpp"
#include "pspec/parallel.hpp"
#include "pspec/perturbation.hpp"

using namespace pspec;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no exception";
  return ErrorKind::InvariantViolation;
}

// Z with a pendant on every vertex: the pendant chain seen over Z.
PerturbedGraph pendants_over_z() {
  const auto z = make_lattice(1);
  return PerturbedGraph(z, random_pendant_perturbation(z, 1.0, 0));
}

Vertex v1(std::int64_t x, int label = 0) { return {Cell{x}, label}; }
Vertex v2(std::int64_t x, std::int64_t y, int label = 0) { return {Cell{x, y}, label}; }

}  // namespace

TEST(LambdaContains, ConeAndHalfPlane) {
  const auto cone = make_cone().perturbed();
  EXPECT_TRUE(lambda_contains(cone, v2(1, 1)));
  EXPECT_FALSE(lambda_contains(cone, v2(3, 0)));
  EXPECT_FALSE(lambda_contains(cone, v2(0, 5)));
  const auto half = make_half_plane().perturbed();
  EXPECT_TRUE(lambda_contains(half, v2(0, 1)));
  EXPECT_FALSE(lambda_contains(half, v2(5, 0)));
  EXPECT_EQ(kind_of([&] { lambda_contains(half, v2(0, -1)); }), ErrorKind::VertexNotInCommonSubgraph);
}

TEST(LambdaContains, RandomPendantReducesToEmptySites) {
  const std::uint64_t seed = 17;
  const auto p = make_random_pendant(0.5, seed).perturbed();
  int with = 0, without = 0;
  for_each_cell(Box{Cell{-20, -20}, Cell{20, 20}}, [&](const Cell& c) {
    const bool q = bernoulli_site(seed, c, 0.5);
    EXPECT_EQ(lambda_contains(p, {c, 0}), !q);
    (q ? with : without)++;
  });
  EXPECT_GT(with, 0);
  EXPECT_GT(without, 0);
}

TEST(LambdaContains, CounterexampleFollowsFormalDefinition) {
  const auto p = make_counterexample().perturbed();
  EXPECT_TRUE(lambda_contains(p, v1(-3, 0)));
  EXPECT_TRUE(lambda_contains(p, v1(-1, 0)));
  EXPECT_FALSE(lambda_contains(p, v1(0, 0)));
  // The original pendant keeps degree 1 and its only edge.
  EXPECT_TRUE(lambda_contains(p, v1(2, 1)));
}

TEST(LambdaClosedForms, HundredByHundredWindow) {
  for (const auto& entry : {make_cone(), make_half_plane()}) {
    const auto p = entry.perturbed();
    std::size_t mismatches = 0;
    for_each_cell(Box{Cell{-50, -50}, Cell{49, 49}}, [&](const Cell& c) {
      const Vertex x{c, 0};
      const bool computed = p.in_common(x) && lambda_contains(p, x);
      if (computed != entry.reference_lambda(x)) ++mismatches;
    });
    EXPECT_EQ(mismatches, 0u) << entry.name;
  }
}

TEST(LambdaSet, CachedAndConcurrentAgreeWithDirect) {
  const auto p = make_random_pendant(0.3, 5).perturbed();
  LambdaSet cache(p);
  std::vector<Vertex> xs;
  for_each_cell(Box{Cell{-30, -30}, Cell{30, 30}}, [&](const Cell& c) { xs.push_back({c, 0}); });
  std::vector<unsigned char> got(xs.size());
  parallel_for(xs.size(), 4, [&](std::size_t i) { got[i] = cache.contains(xs[i]); });
  for (std::size_t i = 0; i < xs.size(); ++i) ASSERT_EQ(got[i] != 0, lambda_contains(p, xs[i]));
  EXPECT_FALSE(LambdaSet(make_half_plane().perturbed()).contains(v2(0, -3)));
}

TEST(ConditionP, ConeFirstHitIsDiagonal) {
  const auto r = check_condition_P(make_cone().perturbed(), 3, Box{Cell{0, 0}, Cell{20, 20}});
  ASSERT_TRUE(r.center.has_value());
  EXPECT_EQ(r.center->cell, (Cell{4, 4}));
  EXPECT_EQ(r.box_lo, -3);
  EXPECT_EQ(r.box_hi, 3);
}

TEST(ConditionP, HalfPlaneHeightIsNPlusOne) {
  const auto r = check_condition_P(make_half_plane().perturbed(), 5, Box{Cell{-10, 0}, Cell{10, 20}});
  ASSERT_TRUE(r.center.has_value());
  EXPECT_EQ(r.center->cell[1], 6);
  EXPECT_EQ(r.center->cell[0], -10);
}

TEST(ConditionP, PendantsEverywhereNeverSatisfied) {
  const auto p = pendants_over_z();
  for (int n : {1, 2, 5}) {
    const auto r = check_condition_P(p, n, Box{Cell{-50}, Cell{50}});
    EXPECT_FALSE(r.center.has_value());
    EXPECT_EQ(r.searched, 101u);
  }
}

TEST(ConditionP, CounterexampleCenterLiesLeft) {
  const auto r = check_condition_P(make_counterexample().perturbed(), 4, Box{Cell{-30}, Cell{30}});
  ASSERT_TRUE(r.center.has_value());
  EXPECT_LE(r.center->cell[0], -(4 + 1));
}

TEST(ConditionP, BadArguments) {
  const auto p = make_half_plane().perturbed();
  EXPECT_EQ(kind_of([&] { check_condition_P(p, 0, Box{Cell{0, 0}, Cell{1, 1}}); }),
            ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([&] { check_condition_P(p, 1, Box{Cell{0}, Cell{1}}); }),
            ErrorKind::DimensionMismatch);
}

TEST(ConditionP, MonotoneInN) {
  for (const auto& entry : {make_cone(), make_half_plane(), make_random_pendant(0.05, 3)}) {
    const auto p = entry.perturbed();
    for (int n : {2, 4, 6}) {
      const auto r = check_condition_P(p, n, Box{Cell{0, 0}, Cell{60, 60}});
      if (!r.center) continue;
      for (int m = 1; m < n; ++m) {
        const auto smaller = check_condition_P(p, m, Box{r.center->cell, r.center->cell});
        EXPECT_TRUE(smaller.center.has_value()) << entry.name << " n=" << n << " m=" << m;
      }
    }
  }
}

TEST(EmbedU0, DeltaAndDropOutsideCommonSubgraph) {
  const auto half = make_half_plane().perturbed();
  const auto moved = embed_u0(half, {{v2(2, 3), 1.5}});
  ASSERT_EQ(moved.size(), 1u);
  EXPECT_EQ(moved.begin()->first, v2(2, 3));
  EXPECT_TRUE(embed_u0(half, {{v2(2, -3), 1.0}, {v2(0, -1), 2.0}}).empty());
}

TEST(EmbedU0, PendantChainNormRatio) {
  const auto p = pendants_over_z();
  VertexFunction psi;
  for (int x = -5; x <= 5; ++x) psi[v1(x)] = Complex(std::sin(x + 0.3), x * 0.1);
  const double a = weighted_norm(psi, p.base_oracle());
  const double b = weighted_norm(embed_u0(p, psi), p.oracle());
  EXPECT_NEAR(b * b, 1.5 * a * a, 1e-12);
}

TEST(U0Constants, Examples) {
  const auto half = make_half_plane().perturbed();
  const std::vector<Vertex> deep{v2(0, 5), v2(1, 5)};
  auto k = u0_constants(half, deep);
  EXPECT_EQ(k.c0, 1.0);
  EXPECT_EQ(k.C0, 1.0);

  const auto p = pendants_over_z();
  const std::vector<Vertex> any{v1(0), v1(3)};
  k = u0_constants(p, any);
  EXPECT_NEAR(k.c0, std::sqrt(1.5), 1e-15);
  EXPECT_NEAR(k.C0, std::sqrt(1.5), 1e-15);
  EXPECT_NEAR(k.c0_literal, 1.5, 1e-15);

  const auto z = make_lattice(1);
  const PerturbedGraph right(z, pendant_right_perturbation(z));
  const std::vector<Vertex> mixed{v1(-3), v1(3)};
  k = u0_constants(right, mixed);
  EXPECT_NEAR(k.c0, 1.0, 1e-15);
  EXPECT_NEAR(k.C0, std::sqrt(1.5), 1e-15);

  EXPECT_EQ(kind_of([&] { u0_constants(half, std::vector<Vertex>{}); }), ErrorKind::EmptySupport);
  const std::vector<Vertex> outside{v2(0, -1)};
  EXPECT_EQ(kind_of([&] { u0_constants(half, outside); }), ErrorKind::VertexNotInCommonSubgraph);
}

TEST(U0, InjectiveWithLowerBound) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> coord(-6, 6);
  const auto right = make_counterexample().perturbed();
  for (int trial = 0; trial < 1000; ++trial) {
    VertexFunction psi;
    std::vector<Vertex> support;
    for (int j = 0; j < 4; ++j) {
      const Vertex x = v1(coord(rng), j % 2);
      psi[x] = Complex(normal(rng), normal(rng));
    }
    for (const auto& [x, v] : psi) support.push_back(x);
    const auto k = u0_constants(right, support);
    const double a = weighted_norm(psi, right.base_oracle());
    const double b = weighted_norm(embed_u0(right, psi), right.oracle());
    ASSERT_GT(b, 0.0);
    ASSERT_GE(b, k.c0 * a * (1.0 - 1e-12));
    ASSERT_LE(b, k.C0 * a * (1.0 + 1e-12));
  }
}

TEST(ApplyKLambda, VanishesOnLambdaAndOnInteriorDeltas) {
  for (const auto& entry : {make_cone(), make_half_plane(), make_counterexample()}) {
    const auto p = entry.perturbed();
    const int d = p.base().dimension();
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> coord(-8, 8);
    for (int trial = 0; trial < 200; ++trial) {
      Cell c(d);
      for (int j = 0; j < d; ++j) c[j] = coord(rng);
      const Vertex x{c, 0};
      const auto k = apply_k_lambda(p, {{x, 1.0}});
      LambdaSet lambda(p);
      for (const auto& [y, v] : k) {
        ASSERT_FALSE(lambda.contains(p.phi(y))) << entry.name;
        (void)v;
      }
      bool deep = lambda.contains(x);
      for (const auto& y : p.base_oracle().out_edges(x)) deep = deep && lambda.contains(y);
      if (deep) {
        for (const auto& [y, v] : k) ASSERT_EQ(v, Complex(0.0)) << entry.name << " " << x.to_string();
      }
    }
  }
}

TEST(Intertwining, InteriorVerticesPerCatalogGraph) {
  for (const auto& entry : catalog_entries()) {
    const auto p = entry.perturbed();
    const int d = p.base().dimension();
    const int s = p.base().cell_size();
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> coord(-30, 30);
    std::uniform_int_distribution<int> label(0, s - 1);
    LambdaSet lambda(p);
    int audited = 0;
    for (int trial = 0; trial < 20000 && audited < 1000; ++trial) {
      Cell c(d);
      for (int j = 0; j < d; ++j) c[j] = coord(rng);
      const Vertex x{c, label(rng)};
      if (!lambda.contains(x)) continue;
      ++audited;
      // Unit tests within two adjacency layers of x.
      std::vector<Vertex> tests{x};
      for (const auto& y : p.base_oracle().out_edges(x)) {
        tests.push_back(y);
        for (const auto& z : p.base_oracle().out_edges(y)) tests.push_back(z);
      }
      for (const auto& t : tests) {
        const VertexFunction delta{{t, 1.0}};
        const auto lhs = embed_u0(p, apply_laplacian(delta, p.base_oracle()));
        const auto rhs = apply_laplacian(embed_u0(p, delta), p.oracle());
        const Vertex xp = p.phi_inverse(x);
        ASSERT_EQ(value_at(lhs, xp), value_at(rhs, xp)) << entry.name;
      }
    }
    if (entry.name != "random_pendant") EXPECT_EQ(audited, 1000) << entry.name;
  }
}

TEST(ExplicitPatch, RemovalAndAdditionReshapeTheOracle) {
  const auto z = make_lattice(1);
  PatchSpec spec;
  spec.removed_edges = {{v1(0), v1(1)}};
  spec.added_vertices = {v1(0, 1)};
  spec.added_edges = {{v1(0), v1(0, 1)}, {v1(1), v1(0, 1)}};
  const PerturbedGraph p(z, std::make_shared<const ExplicitPatch>(z, spec));
  EXPECT_EQ(p.oracle().degree(v1(0)), 2);
  EXPECT_EQ(p.oracle().degree(v1(0, 1)), 2);
  EXPECT_FALSE(lambda_contains(p, v1(0)));
  EXPECT_FALSE(lambda_contains(p, v1(1)));
  EXPECT_TRUE(lambda_contains(p, v1(2)));
  const std::vector<Vertex> cell0{v1(0), v1(0, 1)};
  EXPECT_EQ(p.oracle().vertices_in_cell(Cell{0}), cell0);
  std::vector<Vertex> samples;
  for (int x = -3; x <= 3; ++x)
    for (const auto& v : p.oracle().vertices_in_cell(Cell{x})) samples.push_back(v);
  EXPECT_EQ(symmetry_violations(p.oracle(), samples), 0u);
}

TEST(ExplicitPatch, RemovedVertexDropsIncidentEdges) {
  const auto z = make_lattice(1);
  PatchSpec spec;
  spec.removed_vertices = {v1(0)};
  const PerturbedGraph p(z, std::make_shared<const ExplicitPatch>(z, spec));
  EXPECT_FALSE(p.oracle().contains(v1(0)));
  EXPECT_EQ(p.oracle().degree(v1(1)), 1);
  EXPECT_FALSE(p.in_common(v1(0)));
}

TEST(ExplicitPatch, ValidationErrors) {
  const auto g = make_g11_graph();
  auto build = [&](PatchSpec spec) { ExplicitPatch patch(g, spec); };
  PatchSpec isolate;
  isolate.removed_vertices = {v1(0, 0)};
  EXPECT_EQ(kind_of([&] { build(isolate); }), ErrorKind::IsolatedVertex);
  PatchSpec cut;
  cut.removed_edges = {{v1(0, 0), v1(0, 1)}};
  EXPECT_EQ(kind_of([&] { build(cut); }), ErrorKind::IsolatedVertex);
  PatchSpec missing;
  missing.removed_edges = {{v1(0, 0), v1(5, 0)}};
  EXPECT_EQ(kind_of([&] { build(missing); }), ErrorKind::InvalidArgument);
  PatchSpec dangling;
  dangling.added_edges = {{v1(0, 0), v1(0, 7)}};
  EXPECT_EQ(kind_of([&] { build(dangling); }), ErrorKind::InvalidArgument);
  PatchSpec duplicate;
  duplicate.added_vertices = {v1(0, 1)};
  EXPECT_EQ(kind_of([&] { build(duplicate); }), ErrorKind::InvalidArgument);
  PatchSpec wrong_dim;
  wrong_dim.removed_vertices = {v2(0, 0)};
  EXPECT_EQ(kind_of([&] { build(wrong_dim); }), ErrorKind::DimensionMismatch);
}

TEST(VertexPermutationMap, RelabelsNamesConsistently) {
  const auto g = make_g11_graph();
  // G' calls the chain site at cell 0 "(0):2" and its pendant "(0):1".
  VertexPermutation phi({{v1(0, 1), v1(0, 0)}, {v1(0, 0), v1(0, 1)}});
  const PerturbedGraph p(g, std::make_shared<const ExplicitPatch>(g, PatchSpec{}), phi);
  EXPECT_EQ(p.oracle().degree(v1(0, 1)), 3);
  EXPECT_EQ(p.oracle().degree(v1(0, 0)), 1);
  const auto moved = embed_u0(p, {{v1(0, 0), 2.0}});
  EXPECT_EQ(moved.begin()->first, v1(0, 1));
  EXPECT_TRUE(lambda_contains(p, v1(0, 0)));
  std::vector<Vertex> samples;
  for (int x = -2; x <= 2; ++x)
    for (const auto& v : p.oracle().vertices_in_cell(Cell{x})) samples.push_back(v);
  EXPECT_EQ(samples.size(), 10u);
  EXPECT_EQ(symmetry_violations(p.oracle(), samples), 0u);
  // Every delta commutes through U_0 because nothing was perturbed.
  for (const auto& x : samples) {
    const auto k = apply_k_lambda(p, {{p.phi(x), 1.0}});
    for (const auto& [y, v] : k) EXPECT_EQ(v, Complex(0.0));
  }
}

TEST(VertexPermutationMap, Errors) {
  EXPECT_EQ(kind_of([] { VertexPermutation({{v1(0), v1(1)}}); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { VertexPermutation({{v1(0), v1(1)}, {v1(2), v1(1)}}); }),
            ErrorKind::InvalidArgument);
  const auto z = make_lattice(1);
  VertexPermutation swap({{v1(0), v1(1)}, {v1(1), v1(0)}});
  EXPECT_EQ(kind_of([&] { PerturbedGraph(z, half_plane_perturbation(z), swap); }),
            ErrorKind::InvalidArgument);
}
