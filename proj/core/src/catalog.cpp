#include "pspec/catalog.hpp"

#include <cmath>
#include <string>

#include "pspec/error.hpp"
#include "pspec/parallel.hpp"

namespace pspec {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double param_double(const std::map<std::string, std::string>& params, const std::string& key,
                    double fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != it->second.size()) {
    throw Error(ErrorKind::ParseError, "parameter " + key + "=" + it->second + " is not a number");
  }
  return v;
}

std::uint64_t param_seed(const std::map<std::string, std::string>& params, std::uint64_t fallback) {
  auto it = params.find("seed");
  if (it == params.end()) return fallback;
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != it->second.size() || it->second.empty() || it->second[0] == '-') {
    throw Error(ErrorKind::ParseError, "seed=" + it->second + " is not a nonnegative integer");
  }
  return v;
}

// Pendant vertex with label s attached to (c, 0) wherever `where(c)` holds.
std::shared_ptr<const Perturbation> pendant_perturbation(const PeriodicGraph& base, std::string name,
                                                         std::function<bool(const Cell&)> where) {
  const int s = base.cell_size();
  const int d = base.dimension();
  PredicatePatch::Rules rules;
  rules.name = std::move(name);
  rules.keep = [](const Vertex&) { return true; };
  rules.added = [=](const Vertex& v) { return v.label == s && v.cell.dim() == d && where(v.cell); };
  rules.added_in_cell = [=](const Cell& c) {
    return where(c) ? std::vector<Vertex>{{c, s}} : std::vector<Vertex>{};
  };
  rules.extra_edges = [=](const Vertex& v) {
    if ((v.label != 0 && v.label != s) || !where(v.cell)) return std::vector<Vertex>{};
    return std::vector<Vertex>{{v.cell, v.label == 0 ? s : 0}};
  };
  rules.influence_radius = 1;
  return std::make_shared<const PredicatePatch>(std::move(rules));
}

std::vector<Interval> full_interval() { return {{-1.0, 1.0, false}}; }

}  // namespace

PeriodicGraph make_lattice(int d) {
  if (d < 1 || d > kMaxDimension) {
    throw Error(ErrorKind::InvalidArgument, "lattice dimension must be in [1, " +
                                                std::to_string(kMaxDimension) + "]");
  }
  std::vector<FundEdge> edges;
  for (int j = 0; j < d; ++j) edges.push_back({0, 0, Cell::unit(d, j)});
  return PeriodicGraph::build(d, 1, std::move(edges));
}

PeriodicGraph make_g11_graph() {
  return PeriodicGraph::build(1, 2, {{0, 0, Cell{1}}, {0, 1, Cell{0}}});
}

PeriodicGraph make_g21_graph() {
  return PeriodicGraph::build(1, 3, {{0, 1, Cell{0}}, {1, 0, Cell{1}}, {0, 2, Cell{0}}});
}

bool bernoulli_site(std::uint64_t seed, const Cell& cell, double p) {
  std::uint64_t h = splitmix64(seed);
  for (int j = 0; j < cell.dim(); ++j) h = splitmix64(h ^ static_cast<std::uint64_t>(cell[j]));
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return u < p;
}

std::shared_ptr<const Perturbation> half_plane_perturbation(const PeriodicGraph& base) {
  const int d = base.dimension();
  PredicatePatch::Rules rules;
  rules.name = "half_plane";
  rules.keep = [=](const Vertex& x) { return x.cell[d - 1] >= 0; };
  rules.added = [](const Vertex&) { return false; };
  rules.added_in_cell = [](const Cell&) { return std::vector<Vertex>{}; };
  rules.extra_edges = [](const Vertex&) { return std::vector<Vertex>{}; };
  rules.influence_radius = 1;
  return std::make_shared<const PredicatePatch>(std::move(rules));
}

std::shared_ptr<const Perturbation> cone_perturbation(const PeriodicGraph& base) {
  if (base.dimension() != 2) throw Error(ErrorKind::DimensionMismatch, "the cone needs d = 2");
  PredicatePatch::Rules rules;
  rules.name = "cone";
  rules.keep = [](const Vertex& x) { return x.cell[0] >= 0 && x.cell[1] >= 0; };
  rules.added = [](const Vertex&) { return false; };
  rules.added_in_cell = [](const Cell&) { return std::vector<Vertex>{}; };
  // Folds the two boundary rays together: (a, 0) ~ (0, a) for a >= 1.
  rules.extra_edges = [](const Vertex& v) {
    if (v.label != 0) return std::vector<Vertex>{};
    const auto a = v.cell[0], b = v.cell[1];
    if (a >= 1 && b == 0) return std::vector<Vertex>{{Cell{0, a}, 0}};
    if (a == 0 && b >= 1) return std::vector<Vertex>{{Cell{b, 0}, 0}};
    return std::vector<Vertex>{};
  };
  rules.influence_radius = 1;
  return std::make_shared<const PredicatePatch>(std::move(rules));
}

std::shared_ptr<const Perturbation> pendant_right_perturbation(const PeriodicGraph& base) {
  return pendant_perturbation(base, "counterexample", [](const Cell& c) { return c[0] >= 0; });
}

std::shared_ptr<const Perturbation> random_pendant_perturbation(const PeriodicGraph& base, double p,
                                                                std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidArgument, "p must lie in [0, 1]");
  return pendant_perturbation(base, "random_pendant",
                              [=](const Cell& c) { return bernoulli_site(seed, c, p); });
}

CatalogEntry make_lattice_entry(int d) {
  CatalogEntry e;
  e.name = "lattice" + std::to_string(d);
  e.description = "Z^" + std::to_string(d) + " lattice; spectrum [-1,1]";
  e.base = make_lattice(d);
  e.perturbation = std::make_shared<const NoPerturbation>();
  e.reference_spectrum = full_interval();
  e.reference_lambda = [](const Vertex&) { return true; };
  return e;
}

CatalogEntry make_g11() {
  CatalogEntry e;
  e.name = "g11";
  e.description = "chain with one pendant per site; spectrum [-1,-1/3] u [1/3,1]";
  e.base = make_g11_graph();
  e.perturbation = std::make_shared<const NoPerturbation>();
  e.reference_spectrum = std::vector<Interval>{{-1.0, -1.0 / 3.0, false}, {1.0 / 3.0, 1.0, false}};
  e.reference_lambda = [](const Vertex&) { return true; };
  return e;
}

CatalogEntry make_g21() {
  CatalogEntry e;
  e.name = "g21";
  e.description = "chain with a pendant on every second site; spectrum [-1,-1/sqrt3] u {0} u [1/sqrt3,1]";
  e.base = make_g21_graph();
  e.perturbation = std::make_shared<const NoPerturbation>();
  const double r = 1.0 / std::sqrt(3.0);
  e.reference_spectrum = std::vector<Interval>{{-1.0, -r, false}, {0.0, 0.0, true}, {r, 1.0, false}};
  e.reference_lambda = [](const Vertex&) { return true; };
  return e;
}

CatalogEntry make_random_pendant(double p, std::uint64_t seed, int d) {
  CatalogEntry e;
  e.name = "random_pendant";
  e.description = "Z^" + std::to_string(d) +
                  " with a pendant at each site independently with probability p; "
                  "Lambda = sites without a pendant";
  e.base = make_lattice(d);
  e.perturbation = random_pendant_perturbation(e.base, p, seed);
  if (p < 1.0) e.reference_spectrum = full_interval();
  e.reference_lambda = [=](const Vertex& x) {
    return x.label != 0 || !bernoulli_site(seed, x.cell, p);
  };
  return e;
}

CatalogEntry make_cone() {
  CatalogEntry e;
  e.name = "cone";
  e.description = "quadrant of Z^2 with its boundary rays glued by edges (a,0)-(0,a); "
                  "Lambda = {x1 >= 1, x2 >= 1}";
  e.base = make_lattice(2);
  e.perturbation = cone_perturbation(e.base);
  e.reference_spectrum = full_interval();
  e.reference_lambda = [](const Vertex& x) { return x.cell[0] >= 1 && x.cell[1] >= 1; };
  return e;
}

CatalogEntry make_half_plane() {
  CatalogEntry e;
  e.name = "half_plane";
  e.description = "upper half plane x2 >= 0 of Z^2; Lambda = {x2 >= 1}";
  e.base = make_lattice(2);
  e.perturbation = half_plane_perturbation(e.base);
  e.reference_spectrum = full_interval();
  e.reference_lambda = [](const Vertex& x) { return x.cell[1] >= 1; };
  return e;
}

CatalogEntry make_counterexample() {
  CatalogEntry e;
  e.name = "counterexample";
  e.description = "g11 with a second pendant at every site x >= 0; 0 joins the essential spectrum";
  e.base = make_g11_graph();
  e.perturbation = pendant_right_perturbation(e.base);
  e.reference_spectrum = std::vector<Interval>{
      {-1.0, -1.0 / 3.0, false}, {0.0, 0.0, true}, {1.0 / 3.0, 1.0, false}};
  // The original pendants keep their single edge, so they stay in Lambda.
  e.reference_lambda = [](const Vertex& x) { return x.cell[0] < 0 || x.label == 1; };
  return e;
}

double p_window_probability(int n, double p, int d) {
  if (n < 1 || d < 1) throw Error(ErrorKind::InvalidArgument, "n and d must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidArgument, "p must lie in [0, 1]");
  return std::pow(1.0 - p, std::pow(2.0 * n + 1.0, d));
}

MonteCarloEstimate monte_carlo_window_probability(int n, double p, std::uint64_t seed,
                                                  std::uint64_t samples, int d, int threads) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
  if (samples == 0) throw Error(ErrorKind::InvalidArgument, "samples must be positive");
  const auto entry = make_random_pendant(p, seed, d);
  const PerturbedGraph graph = entry.perturbed();
  const std::int64_t reach = n + graph.base().propagation_length() - 1;
  const std::int64_t stride = 2 * reach + 1;

  std::vector<unsigned char> hit(samples, 0);
  parallel_for(samples, threads, [&](std::size_t i) {
    Cell center(d);
    center[0] = static_cast<std::int64_t>(i) * stride;
    bool inside = true;
    for_each_cell(Box::cube(center, reach), [&](const Cell& c) {
      for (int label = 0; label < graph.base().cell_size() && inside; ++label) {
        inside = lambda_contains(graph, {c, label});
      }
    });
    hit[i] = inside ? 1 : 0;
  });

  MonteCarloEstimate out;
  out.samples = samples;
  for (unsigned char h : hit) out.hits += h;
  const double ns = static_cast<double>(samples);
  out.estimate = static_cast<double>(out.hits) / ns;
  out.standard_error = std::sqrt(out.estimate * (1.0 - out.estimate) / ns);
  return out;
}

std::vector<std::string> builtin_graph_names() {
  return {"lattice1", "lattice2", "lattice3", "lattice4", "g11", "g21"};
}

PeriodicGraph builtin_graph(const std::string& name) {
  if (name == "g11") return make_g11_graph();
  if (name == "g21") return make_g21_graph();
  if (name.size() == 8 && name.rfind("lattice", 0) == 0 && name[7] >= '1' && name[7] <= '4') {
    return make_lattice(name[7] - '0');
  }
  throw Error(ErrorKind::ParseError, "unknown builtin graph '" + name + "'");
}

std::vector<std::string> builtin_perturbation_names() {
  return {"none", "half_plane", "cone", "counterexample", "random_pendant"};
}

std::shared_ptr<const Perturbation> builtin_perturbation(
    const std::string& name, const PeriodicGraph& base,
    const std::map<std::string, std::string>& params) {
  auto no_params = [&] {
    if (!params.empty()) {
      throw Error(ErrorKind::ParseError, "builtin perturbation '" + name + "' takes no parameters");
    }
  };
  if (name == "none") {
    no_params();
    return std::make_shared<const NoPerturbation>();
  }
  if (name == "half_plane") {
    no_params();
    return half_plane_perturbation(base);
  }
  if (name == "cone") {
    no_params();
    return cone_perturbation(base);
  }
  if (name == "counterexample") {
    no_params();
    return pendant_right_perturbation(base);
  }
  if (name == "random_pendant") {
    for (const auto& [key, value] : params) {
      (void)value;
      if (key != "p" && key != "seed") {
        throw Error(ErrorKind::ParseError, "random_pendant has no parameter '" + key + "'");
      }
    }
    return random_pendant_perturbation(base, param_double(params, "p", 0.5), param_seed(params, 0));
  }
  throw Error(ErrorKind::ParseError, "unknown builtin perturbation '" + name + "'");
}

std::vector<CatalogEntry> catalog_entries() {
  return {make_lattice_entry(1), make_lattice_entry(2), make_lattice_entry(3), make_g11(),
          make_g21(),            make_random_pendant(0.5, 0), make_cone(), make_half_plane(),
          make_counterexample()};
}

}  // namespace pspec
