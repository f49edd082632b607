#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "pspec/catalog.hpp"
#include "pspec/error.hpp"
#include "pspec/graph.hpp"

using namespace pspec;

namespace {

std::vector<Vertex> sorted(std::vector<Vertex> v) {
  std::sort(v.begin(), v.end());
  return v;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no exception";
  return ErrorKind::InvariantViolation;
}

}  // namespace

TEST(Cell, ArithmeticAndOrdering) {
  const Cell a{1, -2}, b{0, 5};
  EXPECT_EQ(a + b, (Cell{1, 3}));
  EXPECT_EQ(a - b, (Cell{1, -7}));
  EXPECT_EQ(-a, (Cell{-1, 2}));
  EXPECT_LT(b, a);
  EXPECT_EQ(a.max_abs(), 2);
  EXPECT_TRUE(Cell(3).is_zero());
  EXPECT_EQ((Vertex{Cell{3, -1}, 1}).to_string(), "(3,-1):2");
}

TEST(BoxCells, LexicographicOrderLastAxisFastest) {
  std::vector<Cell> seen;
  for_each_cell(Box{Cell{0, 0}, Cell{1, 2}}, [&](const Cell& c) { seen.push_back(c); });
  ASSERT_EQ(seen.size(), 6u);
  EXPECT_EQ(seen[0], (Cell{0, 0}));
  EXPECT_EQ(seen[1], (Cell{0, 1}));
  EXPECT_EQ(seen[3], (Cell{1, 0}));
  EXPECT_TRUE(std::is_sorted(seen.begin(), seen.end()));
  EXPECT_TRUE((Box{Cell{1}, Cell{0}}).empty());
}

TEST(BuildPeriodic, LatticeAndPendantDegrees) {
  auto z = build_periodic(1, 1, {{0, 0, Cell{1}}});
  EXPECT_EQ(std::vector<int>(z.degrees().begin(), z.degrees().end()), std::vector<int>{2});
  auto z2 = build_periodic(2, 1, {{0, 0, Cell{1, 0}}, {0, 0, Cell{0, 1}}});
  EXPECT_EQ(z2.degree(0), 4);
  auto g11 = build_periodic(1, 2, {{0, 0, Cell{1}}, {0, 1, Cell{0}}});
  EXPECT_EQ(g11.degree(0), 3);
  EXPECT_EQ(g11.degree(1), 1);
  EXPECT_EQ(g11.bridge_count(), 2u);
}

TEST(BuildPeriodic, Errors) {
  EXPECT_EQ(kind_of([] { build_periodic(1, 2, {{0, 0, Cell{1}}}); }), ErrorKind::IsolatedVertex);
  EXPECT_EQ(kind_of([] { build_periodic(2, 1, {{0, 0, Cell{1}}}); }), ErrorKind::DimensionMismatch);
  EXPECT_EQ(kind_of([] { build_periodic(1, 1, {{0, 3, Cell{1}}}); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { build_periodic(0, 1, {}); }), ErrorKind::DimensionMismatch);
}

TEST(BuildPeriodic, ReverseOrientationIsTheSameEdgeRecord) {
  // Listing an edge in either orientation yields the same graph.
  auto a = build_periodic(1, 2, {{0, 1, Cell{1}}, {0, 0, Cell{1}}});
  auto b = build_periodic(1, 2, {{1, 0, Cell{-1}}, {0, 0, Cell{-1}}});
  EXPECT_TRUE(std::equal(a.edges().begin(), a.edges().end(), b.edges().begin(), b.edges().end()));
  EXPECT_EQ(a.degree(0), 3);
  EXPECT_EQ(a.degree(1), 1);
}

TEST(BuildPeriodic, ZeroIndexLoopCountsTwice) {
  auto g = build_periodic(1, 1, {{0, 0, Cell{0}}, {0, 0, Cell{1}}});
  EXPECT_EQ(g.degree(0), 4);
  auto oracle = periodic_oracle(g);
  const auto out = oracle->out_edges({Cell{0}, 0});
  EXPECT_EQ(std::count(out.begin(), out.end(), Vertex{Cell{0}, 0}), 2);
}

TEST(PropagationLength, Examples) {
  EXPECT_EQ(propagation_length(make_lattice(1)), 1);
  EXPECT_EQ(propagation_length(make_lattice(2)), 1);
  EXPECT_EQ(propagation_length(build_periodic(1, 1, {{0, 0, Cell{3}}})), 3);
  auto flat = build_periodic(1, 2, {{0, 1, Cell{0}}});
  EXPECT_EQ(propagation_length(flat), 0);
  EXPECT_FALSE(flat.has_translation());
}

TEST(PeriodicOracle, OutEdges) {
  auto z = periodic_oracle(make_lattice(1));
  EXPECT_EQ(sorted(z->out_edges({Cell{5}, 0})), sorted({{Cell{6}, 0}, {Cell{4}, 0}}));
  auto g11 = periodic_oracle(make_g11_graph());
  EXPECT_EQ(sorted(g11->out_edges({Cell{0}, 0})), sorted({{Cell{1}, 0}, {Cell{-1}, 0}, {Cell{0}, 1}}));
  EXPECT_EQ(g11->degree({Cell{0}, 0}), 3);
  auto z2 = periodic_oracle(make_lattice(2));
  EXPECT_EQ(z2->out_edges({Cell{0, 0}, 0}).size(), 4u);
  EXPECT_EQ(kind_of([&] { z->out_edges({Cell{0}, 1}); }), ErrorKind::VertexNotInGraph);
  EXPECT_EQ(kind_of([&] { z->out_edges({Cell{0, 0}, 0}); }), ErrorKind::VertexNotInGraph);
}

TEST(EdgeIndex, DifferenceOfCellsAndShiftInvariance) {
  EXPECT_EQ(edge_index({Cell{0}, 0}, {Cell{1}, 0}), Cell{1});
  EXPECT_EQ(edge_index({Cell{2, 3}, 0}, {Cell{2, 4}, 0}), (Cell{0, 1}));
  const Cell a{7, -4};
  EXPECT_EQ(edge_index({Cell{2, 3} + a, 0}, {Cell{2, 4} + a, 0}), (Cell{0, 1}));
  EXPECT_EQ(kind_of([] { edge_index({Cell{0}, 0}, {Cell{0, 0}, 0}); }), ErrorKind::DimensionMismatch);
}

TEST(WeightedNorm, Examples) {
  auto g11 = periodic_oracle(make_g11_graph());
  EXPECT_DOUBLE_EQ(weighted_norm({{{Cell{0}, 0}, 1.0}}, *g11), std::sqrt(3.0));
  auto ce = make_counterexample().perturbed();
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(weighted_norm({{{Cell{4}, 1}, r}, {{Cell{4}, 2}, -r}}, ce.oracle()), 1.0, 1e-15);
  EXPECT_EQ(weighted_norm({}, *g11), 0.0);
  EXPECT_EQ(kind_of([&] { weighted_norm({{{Cell{0}, 2}, 1.0}}, *g11); }), ErrorKind::VertexNotInGraph);
}

TEST(ApplyLaplacian, Examples) {
  auto z = periodic_oracle(make_lattice(1));
  auto phi = apply_laplacian({{{Cell{0}, 0}, 1.0}}, *z);
  EXPECT_EQ(value_at(phi, {Cell{1}, 0}), Complex(0.5));
  EXPECT_EQ(value_at(phi, {Cell{-1}, 0}), Complex(0.5));
  EXPECT_EQ(value_at(phi, {Cell{0}, 0}), Complex(0.0));

  auto g11 = periodic_oracle(make_g11_graph());
  auto psi = apply_laplacian({{{Cell{0}, 1}, 1.0}}, *g11);
  EXPECT_NEAR(std::abs(value_at(psi, {Cell{0}, 0}) - 1.0 / 3.0), 0.0, 1e-15);
  EXPECT_EQ(value_at(psi, {Cell{0}, 1}), Complex(0.0));
}

TEST(ApplyLaplacian, RowStochasticOnConstants) {
  for (const auto& entry : catalog_entries()) {
    const auto p = entry.perturbed();
    const int d = p.base().dimension();
    VertexFunction ones;
    const Box window = Box::cube(Cell(d), d == 1 ? 6 : 3);
    for_each_cell(window, [&](const Cell& c) {
      for (const auto& v : p.oracle().vertices_in_cell(c)) ones[v] = 1.0;
    });
    const auto l = apply_laplacian(ones, p.oracle());
    for_each_cell(Box::cube(Cell(d), 1), [&](const Cell& c) {
      for (const auto& v : p.oracle().vertices_in_cell(c)) {
        EXPECT_NEAR(std::abs(value_at(l, v) - 1.0), 0.0, 1e-14) << entry.name << " " << v.to_string();
      }
    });
  }
}

TEST(ApplyLaplacian, SelfAdjointInWeightedProduct) {
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> normal;
  for (const auto& entry : catalog_entries()) {
    const auto p = entry.perturbed();
    const int d = p.base().dimension();
    auto random_function = [&] {
      VertexFunction f;
      for_each_cell(Box::cube(Cell(d), 2), [&](const Cell& c) {
        for (const auto& v : p.oracle().vertices_in_cell(c)) f[v] = Complex(normal(rng), normal(rng));
      });
      return f;
    };
    const auto psi = random_function();
    const auto phi = random_function();
    const Complex lhs = weighted_inner(psi, apply_laplacian(phi, p.oracle()), p.oracle());
    const Complex rhs = weighted_inner(apply_laplacian(psi, p.oracle()), phi, p.oracle());
    EXPECT_LT(std::abs(lhs - rhs), 1e-12) << entry.name;
  }
}

TEST(OracleSymmetry, TenThousandSampledVerticesPerCatalogGraph) {
  std::mt19937_64 rng(2024);
  for (const auto& entry : catalog_entries()) {
    const auto p = entry.perturbed();
    const int d = p.base().dimension();
    std::uniform_int_distribution<std::int64_t> coord(-40, 40);
    std::vector<Vertex> samples;
    while (samples.size() < 10000) {
      Cell c(d);
      for (int j = 0; j < d; ++j) c[j] = coord(rng);
      const auto vs = p.oracle().vertices_in_cell(c);
      if (vs.empty()) continue;
      samples.push_back(vs[samples.size() % vs.size()]);
    }
    EXPECT_EQ(symmetry_violations(p.oracle(), samples), 0u) << entry.name;
    for (const auto& v : samples) ASSERT_GE(p.oracle().degree(v), 1) << entry.name;
  }
}

TEST(PairwiseSum, MatchesExactSmallIntegers) {
  std::vector<double> v(1001);
  std::iota(v.begin(), v.end(), 0.0);
  EXPECT_EQ(pairwise_sum(v), 500500.0);
  EXPECT_EQ(pairwise_sum({}), 0.0);
}
