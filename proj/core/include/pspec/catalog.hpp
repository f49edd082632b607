#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pspec/floquet.hpp"
#include "pspec/perturbation.hpp"

namespace pspec {

/// Z^d with one vertex per cell and an edge along every axis.
PeriodicGraph make_lattice(int d);

/// Chain with one pendant per cell: s = 2, edges {0,0,+1}, {0,1,0}.
PeriodicGraph make_g11_graph();

/// Alternating chain (even, odd) with a pendant on the even site: s = 3,
/// edges {0,1,0}, {1,0,+1}, {0,2,0}; degrees [3,2,1].
PeriodicGraph make_g21_graph();

/// Counter-based Bernoulli field: q(seed, cell) = 1 with probability p.
/// A pure function of its arguments.
bool bernoulli_site(std::uint64_t seed, const Cell& cell, double p);

// Perturbations of an arbitrary base graph. Added vertices use label s.
std::shared_ptr<const Perturbation> half_plane_perturbation(const PeriodicGraph& base);
std::shared_ptr<const Perturbation> cone_perturbation(const PeriodicGraph& base);
std::shared_ptr<const Perturbation> pendant_right_perturbation(const PeriodicGraph& base);
std::shared_ptr<const Perturbation> random_pendant_perturbation(const PeriodicGraph& base, double p,
                                                                std::uint64_t seed);

struct CatalogEntry {
  std::string name;
  std::string description;
  PeriodicGraph base;
  std::shared_ptr<const Perturbation> perturbation;
  std::optional<std::vector<Interval>> reference_spectrum;
  std::function<bool(const Vertex&)> reference_lambda;  // empty when unknown

  PerturbedGraph perturbed() const { return PerturbedGraph(base, perturbation); }
};

CatalogEntry make_lattice_entry(int d);
CatalogEntry make_g11();
CatalogEntry make_g21();
CatalogEntry make_random_pendant(double p, std::uint64_t seed, int d = 2);
CatalogEntry make_cone();
CatalogEntry make_half_plane();
CatalogEntry make_counterexample();

/// P(I_n(x) in Lambda) for the random pendant graph: (1 - p)^((2n+1)^d).
double p_window_probability(int n, double p, int d = 2);

struct MonteCarloEstimate {
  std::uint64_t samples = 0;
  std::uint64_t hits = 0;
  double estimate = 0.0;
  double standard_error = 0.0;
};

/// Checks I_n boxes of the random pendant graph against Lambda at pairwise
/// disjoint centers. Hit counts are summed in a fixed order for any thread count.
MonteCarloEstimate monte_carlo_window_probability(int n, double p, std::uint64_t seed,
                                                  std::uint64_t samples, int d = 2,
                                                  int threads = 1);

/// Builtin graph names: lattice1..lattice4, g11, g21.
std::vector<std::string> builtin_graph_names();
PeriodicGraph builtin_graph(const std::string& name);

/// Builtin perturbation names: none, half_plane, cone, counterexample,
/// random_pendant (parameters p, seed).
std::vector<std::string> builtin_perturbation_names();
std::shared_ptr<const Perturbation> builtin_perturbation(
    const std::string& name, const PeriodicGraph& base,
    const std::map<std::string, std::string>& params = {});

/// All entries, for listing.
std::vector<CatalogEntry> catalog_entries();

}  // namespace pspec
