#include "pspec/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "pspec/catalog.hpp"
#include "pspec/error.hpp"
#include "pspec/floquet.hpp"
#include "pspec/parallel.hpp"
#include "pspec/truncation.hpp"
#include "pspec/version.hpp"
#include "pspec/weyl.hpp"

namespace pspec::cli {

using nlohmann::json;

namespace {

constexpr double kZeroModeTol = 1e-12;

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorKind::ParseError, what); }

// ---------------------------------------------------------------------------
// Serialization

void dump_value(const json& j, int indent, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(it.key()).dump() + ": ";
        dump_value(it.value(), indent, depth + 1, out);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      out += flat ? "[" : "[\n";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",\n";
        first = false;
        if (!flat) out += pad;
        dump_value(e, indent, depth + 1, out);
      }
      out += flat ? "]" : "\n" + close_pad + "]";
      return;
    }
    case json::value_t::number_float:
      out += std::isfinite(j.get<double>()) ? format_double(j.get<double>()) : "null";
      return;
    default:
      out += j.dump();
  }
}

std::string dump_json(const json& j) {
  std::string out;
  dump_value(j, 2, 0, out);
  out += "\n";
  return out;
}

json cell_json(const Cell& c) {
  json a = json::array();
  for (auto x : c.coords()) a.push_back(x);
  return a;
}

json vertex_json(const Vertex& v) { return {{"cell", cell_json(v.cell)}, {"label", v.label + 1}}; }

json graph_json(const PeriodicGraph& g) {
  json edges = json::array();
  for (const auto& e : g.edges()) {
    edges.push_back({{"origin", e.origin + 1}, {"target", e.target + 1}, {"index", cell_json(e.index)}});
  }
  return {{"dimension", g.dimension()}, {"cell_size", g.cell_size()}, {"edges", edges}};
}

std::string csv_quote(const std::string& s) { return "\"" + s + "\""; }

// ---------------------------------------------------------------------------
// Input parsing

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) parse_fail("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    parse_fail("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::int64_t as_int(const json& j, const std::string& what) {
  if (!j.is_number_integer()) parse_fail(what + " must be an integer");
  return j.get<std::int64_t>();
}

Cell cell_from(const json& j, int d, const std::string& what) {
  if (!j.is_array()) parse_fail(what + " must be an array of integers");
  if (static_cast<int>(j.size()) != d) {
    throw Error(ErrorKind::DimensionMismatch, what + " has length " + std::to_string(j.size()) +
                                                  ", expected " + std::to_string(d));
  }
  Cell c(d);
  for (int i = 0; i < d; ++i) c[i] = as_int(j[static_cast<std::size_t>(i)], what);
  return c;
}

// {"cell": [...], "label": L} or [[...], L]; labels are 1-based.
Vertex vertex_from(const json& j, int d) {
  json cell, label;
  if (j.is_object()) {
    if (!j.contains("cell") || !j.contains("label")) parse_fail("vertex needs 'cell' and 'label'");
    cell = j["cell"];
    label = j["label"];
  } else if (j.is_array() && j.size() == 2) {
    cell = j[0];
    label = j[1];
  } else {
    parse_fail("vertex must be {\"cell\":[...],\"label\":L} or [[...],L]");
  }
  const auto l = as_int(label, "vertex label");
  if (l < 1) parse_fail("vertex labels are 1-based");
  return {cell_from(cell, d, "vertex cell"), static_cast<int>(l - 1)};
}

std::pair<Vertex, Vertex> pair_from(const json& j, int d) {
  if (!j.is_array() || j.size() != 2) parse_fail("edge must be a pair of vertices");
  return {vertex_from(j[0], d), vertex_from(j[1], d)};
}

std::vector<std::pair<Vertex, Vertex>> pairs_from(const json& parent, const char* key, int d) {
  std::vector<std::pair<Vertex, Vertex>> out;
  if (!parent.contains(key)) return out;
  if (!parent[key].is_array()) parse_fail(std::string(key) + " must be an array");
  for (const auto& e : parent[key]) out.push_back(pair_from(e, d));
  return out;
}

std::vector<Vertex> vertices_from(const json& parent, const char* key, int d) {
  std::vector<Vertex> out;
  if (!parent.contains(key)) return out;
  if (!parent[key].is_array()) parse_fail(std::string(key) + " must be an array");
  for (const auto& e : parent[key]) out.push_back(vertex_from(e, d));
  return out;
}

Box box_from(const std::vector<std::int64_t>& flat, int d, const std::string& what) {
  if (flat.size() != static_cast<std::size_t>(2 * d)) {
    throw Error(ErrorKind::DimensionMismatch, what + " needs " + std::to_string(2 * d) +
                                                  " numbers lo_1,hi_1,...,lo_d,hi_d");
  }
  Box b{Cell(d), Cell(d)};
  for (int j = 0; j < d; ++j) {
    b.lo[j] = flat[static_cast<std::size_t>(2 * j)];
    b.hi[j] = flat[static_cast<std::size_t>(2 * j + 1)];
  }
  if (b.empty()) throw Error(ErrorKind::EmptyBox, what + " is empty");
  return b;
}

int resolve_thread_count(int requested) {
  if (requested >= 1) return requested;
  if (const char* env = std::getenv("PERIODIC_SPECTRA_THREADS"); env != nullptr && *env != '\0') {
    int v = 0;
    const char* end = env + std::char_traits<char>::length(env);
    auto [ptr, ec] = std::from_chars(env, end, v);
    if (ec != std::errc() || ptr != end) {
      parse_fail(std::string("PERIODIC_SPECTRA_THREADS='") + env + "' is not an integer");
    }
    if (v >= 1) return v;
  }
  return resolve_threads(0);
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotInSpectrum:
    case ErrorKind::ConditionPFailed:
      return kExitDomain;
    case ErrorKind::InvariantViolation:
    case ErrorKind::NonHermitian:
    case ErrorKind::BadEigenpair:
      return kExitInternal;
    default:
      return kExitParse;
  }
}

// ---------------------------------------------------------------------------
// Output

class Outputs {
 public:
  Outputs(std::string dir, std::string hash) : dir_(std::move(dir)), hash_(std::move(hash)) {}

  void csv(const std::string& name, const std::string& header, const std::string& body) {
    write(name, "# manifest " + hash_ + "\n" + header + "\n" + body);
  }
  void json_file(const std::string& name, json j) {
    j["manifest_hash"] = hash_;
    write(name, dump_json(j));
  }
  void plot(const std::string& name, const std::string& body) {
    write(name, "# manifest " + hash_ + "\n" + body);
  }
  void write(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::path(dir_) / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path.string() + "'");
    files_.push_back(path.string());
  }
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::string dir_;
  std::string hash_;
  std::vector<std::string> files_;
};

std::string join_doubles(std::initializer_list<double> values, char sep) {
  std::string out;
  for (double v : values) {
    if (!out.empty()) out += sep;
    out += format_double(v);
  }
  return out;
}

json resolved_parameters(const RunConfig& c) {
  json p = {{"grid", c.grid},
            {"flat_tol", c.flat_tol},
            {"n", c.n},
            {"n_list", c.n_list},
            {"window", c.window},
            {"box", c.box},
            {"wrap", c.wrap},
            {"eps", c.eps},
            {"lambda", c.lambda},
            {"p", c.p},
            {"seed", c.seed},
            {"samples", c.samples},
            {"dimension", c.dimension},
            {"emit_plot_data", c.emit_plot_data}};
  if (!c.subcommand.empty()) p["subcommand"] = c.subcommand;
  if (!c.graph.empty()) p["graph"] = c.graph;
  p["perturbation"] = c.perturbation;
  return p;
}

// ---------------------------------------------------------------------------
// Commands

void cmd_bands(const RunConfig& c, const PeriodicGraph& g, int threads, Outputs& out) {
  const auto samples = sample_bands(g, c.grid, threads);
  std::string header;
  for (int j = 1; j <= g.dimension(); ++j) header += (j > 1 ? "," : "") + std::string("k_") + std::to_string(j);
  for (int h = 1; h <= g.cell_size(); ++h) header += ",lambda_" + std::to_string(h);
  std::string body, plot;
  for (const auto& s : samples) {
    std::string row;
    for (double k : s.k) row += (row.empty() ? "" : ",") + format_double(k);
    for (Eigen::Index h = 0; h < s.lambdas.size(); ++h) row += "," + format_double(s.lambdas(h));
    body += row + "\n";
    std::replace(row.begin(), row.end(), ',', ' ');
    plot += row + "\n";
  }
  out.csv("bands.csv", header, body);
  if (c.emit_plot_data) out.plot("bands.dat", plot);
}

json spectrum_json(const SpectrumApprox& s) {
  json intervals = json::array();
  for (const auto& iv : s.intervals) intervals.push_back({{"lo", iv.lo}, {"hi", iv.hi}, {"flat", iv.flat}});
  return {{"intervals", intervals},
          {"flat_points", s.flat_points},
          {"resolution", s.resolution},
          {"flat_tol", s.flat_tol}};
}

void cmd_sigma_ess(const RunConfig& c, const PeriodicGraph& g, int threads, Outputs& out) {
  const auto s = essential_spectrum(g, c.grid, c.flat_tol, threads);
  out.json_file("sigma_ess.json", spectrum_json(s));
  if (c.emit_plot_data) {
    std::string plot;
    for (const auto& iv : s.intervals) plot += join_doubles({iv.lo, iv.hi}, ' ') + "\n";
    out.plot("sigma_ess.dat", plot);
  }
}

void cmd_lambda_set(const RunConfig& c, const PerturbedGraph& p, Outputs& out) {
  const int d = p.base().dimension();
  const Box window = box_from(c.window, d, "--window");
  std::string header;
  for (int j = 1; j <= d; ++j) header += "x_" + std::to_string(j) + ",";
  header += "label,in_common,in_lambda";
  LambdaSet lambda(p);
  std::string body, plot;
  std::uint64_t members = 0, total = 0;
  std::int64_t last_row = 0;
  bool first_cell = true;
  for_each_cell(window, [&](const Cell& cell) {
    std::string coords;
    for (auto x : cell.coords()) coords += std::to_string(x) + ",";
    int cell_members = 0;
    for (int i = 0; i < p.base().cell_size(); ++i) {
      const Vertex v{cell, i};
      const bool common = p.in_common(v);
      const bool in = common && lambda.contains(v);
      body += coords + std::to_string(i + 1) + "," + (common ? "1" : "0") + "," + (in ? "1" : "0") + "\n";
      ++total;
      if (in) {
        ++members;
        ++cell_members;
      }
    }
    if (d == 2) {
      if (!first_cell && cell[0] != last_row) plot += "\n";
      if (!first_cell && cell[0] == last_row) plot += " ";
      plot += std::to_string(cell_members);
      last_row = cell[0];
      first_cell = false;
    }
  });
  out.csv("lambda_set.csv", header, body);
  json summary = {{"window", c.window}, {"vertices", total}, {"in_lambda", members}};
  out.json_file("lambda_set.json", summary);
  if (c.emit_plot_data && d == 2) out.plot("lambda_set.dat", plot + "\n");
}

void cmd_condition_p(const RunConfig& c, const PerturbedGraph& p, Outputs& out) {
  const Box window = box_from(c.window, p.base().dimension(), "--window");
  const auto report = check_condition_P(p, c.n, window);
  json j = {{"n", report.n},
            {"searched", report.searched},
            {"box_bounds", {report.box_lo, report.box_hi}},
            {"window", c.window},
            {"x_n", report.center ? vertex_json(*report.center) : json(nullptr)}};
  out.json_file("condition_p.json", j);
}

void cmd_weyl_check(const RunConfig& c, const PerturbedGraph& p, int threads, Outputs& out) {
  if (c.n_list.empty()) parse_fail("weyl-check needs --n-list");
  const Box window = box_from(c.window, p.base().dimension(), "--window");
  const auto report = weyl_sweep(p, c.lambda, c.n_list, window, c.grid, threads);
  std::string body, plot;
  json rows = json::array();
  bool below_bound = true;
  for (const auto& r : report.rows) {
    body += std::to_string(r.n) + "," + csv_quote(r.center.to_string()) + "," +
            join_doubles({r.residual, r.sup_norm, r.bound, r.sup_bound, r.via_base, r.defect_max}, ',') +
            "\n";
    plot += std::to_string(r.n) + " " + join_doubles({r.residual, r.bound}, ' ') + "\n";
    rows.push_back({{"n", r.n},
                    {"x_n", vertex_json(r.center)},
                    {"residual", r.residual},
                    {"bound", r.bound},
                    {"sup_norm", r.sup_norm},
                    {"sup_bound", r.sup_bound},
                    {"defect_max", r.defect_max}});
    below_bound = below_bound && r.residual <= r.bound && r.sup_norm <= r.sup_bound;
  }
  out.csv("weyl_check.csv", "n,x_n,residual,sup_norm,bound,sup_bound,via_base,defect_max", body);
  json xi = json::array();
  for (Eigen::Index i = 0; i < report.state.xi0.size(); ++i) {
    xi.push_back({report.state.xi0(i).real(), report.state.xi0(i).imag()});
  }
  json summary = {{"lambda", c.lambda},
                  {"band", report.state.band + 1},
                  {"k0", report.state.k0},
                  {"lambda_band", report.state.lambda},
                  {"xi0", xi},
                  {"slope", report.rows.size() >= 2 ? json(report.slope) : json(nullptr)},
                  {"within_bounds", below_bound},
                  {"rows", rows}};
  out.json_file("weyl_check.json", summary);
  if (c.emit_plot_data) out.plot("weyl_check.dat", plot);
}

void cmd_truncate(const RunConfig& c, const PerturbedGraph& p, int threads, Outputs& out) {
  const int d = p.base().dimension();
  const Box box = box_from(c.box, d, "--box");
  const bool unperturbed = dynamic_cast<const NoPerturbation*>(&p.perturbation()) != nullptr;
  if (c.wrap && !unperturbed) {
    throw Error(ErrorKind::InvalidArgument, "--wrap needs an unperturbed periodic graph");
  }
  const auto b = c.wrap ? truncate(p.base_oracle(), box, true) : truncate(p.oracle(), box, false);
  const auto reference = essential_spectrum(p.base(), c.grid, c.flat_tol, threads);
  TruncationReport report;
  bool localized = false;
  if (b.size() <= kDenseLimit) {
    report = compare_spectra(b, reference, c.eps);
    localized = true;
  } else {
    const auto values = spectrum_of_box(b, threads);
    report = compare_spectra(values, reference, c.eps);
  }
  std::string body, plot;
  for (std::size_t i = 0; i < report.eigenvalues.size(); ++i) {
    body += std::to_string(i) + "," + format_double(report.eigenvalues[i]) + "\n";
    plot += std::to_string(i) + " " + format_double(report.eigenvalues[i]) + "\n";
  }
  out.csv("eigenvalues.csv", "index,eigenvalue", body);
  const auto zeros = std::count_if(report.eigenvalues.begin(), report.eigenvalues.end(),
                                   [](double v) { return std::abs(v) <= kZeroModeTol; });
  json j = {{"box", c.box},
            {"wrap", c.wrap},
            {"eps", c.eps},
            {"vertices", b.size()},
            {"dropped", b.dropped()},
            {"inside_fraction", report.inside_fraction},
            {"outside_count", report.outside_count},
            {"max_distance", report.max_distance},
            {"zero_modes", zeros},
            {"zero_mode_tol", kZeroModeTol},
            {"reference", spectrum_json(reference)}};
  if (localized) {
    j["boundary_count"] = report.boundary_count;
    j["outside_on_boundary"] = report.outside_on_boundary;
  } else {
    j["boundary_count"] = nullptr;
  }
  out.json_file("truncation.json", j);
  if (c.emit_plot_data) out.plot("eigenvalues.dat", plot);
}

void cmd_random_trial(const RunConfig& c, int threads, Outputs& out) {
  const auto est = monte_carlo_window_probability(c.n, c.p, c.seed, c.samples, c.dimension, threads);
  const double exact = p_window_probability(c.n, c.p, c.dimension);
  const double z = est.standard_error > 0.0 ? (est.estimate - exact) / est.standard_error : 0.0;
  json j = {{"n", c.n},
            {"p", c.p},
            {"dimension", c.dimension},
            {"seed", c.seed},
            {"samples", est.samples},
            {"hits", est.hits},
            {"estimate", est.estimate},
            {"standard_error", est.standard_error},
            {"exact", exact},
            {"z_score", z}};
  out.json_file("random_trial.json", j);
}

void cmd_catalog(const RunConfig& c, std::ostream& log, Outputs& out) {
  if (c.subcommand != "list") parse_fail("catalog supports only 'list'");
  json entries = json::array();
  for (const auto& e : catalog_entries()) {
    log << e.name << "\t" << e.description << "\n";
    json ref = nullptr;
    if (e.reference_spectrum) {
      ref = json::array();
      for (const auto& iv : *e.reference_spectrum) ref.push_back({iv.lo, iv.hi});
    }
    entries.push_back({{"name", e.name},
                       {"description", e.description},
                       {"graph", graph_json(e.base)},
                       {"perturbation", e.perturbation->name()},
                       {"reference_spectrum", ref}});
  }
  json graphs = builtin_graph_names();
  json perts = builtin_perturbation_names();
  out.json_file("catalog.json", {{"entries", entries}, {"graphs", graphs}, {"perturbations", perts}});
}

}  // namespace

std::string format_double(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc()) throw Error(ErrorKind::InvariantViolation, "number formatting failed");
  return std::string(buf, ptr);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::pair<std::string, std::map<std::string, std::string>> parse_builtin(const std::string& spec) {
  std::map<std::string, std::string> params;
  std::stringstream ss(spec);
  std::string name, item;
  std::getline(ss, name, ',');
  if (name.empty()) parse_fail("empty builtin name");
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) parse_fail("builtin parameter '" + item + "' is not key=value");
    if (!params.emplace(item.substr(0, eq), item.substr(eq + 1)).second) {
      parse_fail("duplicate builtin parameter '" + item.substr(0, eq) + "'");
    }
  }
  return {name, params};
}

PeriodicGraph load_graph(const std::string& source) {
  constexpr std::string_view kBuiltin = "builtin:";
  if (source.empty()) parse_fail("--graph is required");
  if (source.rfind(kBuiltin, 0) == 0) return builtin_graph(source.substr(kBuiltin.size()));

  const json j = read_json_file(source);
  if (!j.is_object() || !j.contains("dimension") || !j.contains("cell_size") || !j.contains("edges")) {
    parse_fail("graph file needs 'dimension', 'cell_size' and 'edges'");
  }
  const auto d = static_cast<int>(as_int(j["dimension"], "dimension"));
  const auto s = static_cast<int>(as_int(j["cell_size"], "cell_size"));
  if (d < 1 || d > kMaxDimension) parse_fail("dimension must be in [1, 4]");
  if (!j["edges"].is_array()) parse_fail("edges must be an array");
  std::vector<FundEdge> edges;
  for (const auto& e : j["edges"]) {
    json o, t, idx;
    if (e.is_object()) {
      if (!e.contains("origin") || !e.contains("target") || !e.contains("index")) {
        parse_fail("edge needs 'origin', 'target' and 'index'");
      }
      o = e["origin"];
      t = e["target"];
      idx = e["index"];
    } else if (e.is_array() && e.size() == 3) {
      o = e[0];
      t = e[1];
      idx = e[2];
    } else {
      parse_fail("edge must be {\"origin\",\"target\",\"index\"} or [o,t,[...]]");
    }
    const auto oo = as_int(o, "edge origin");
    const auto tt = as_int(t, "edge target");
    if (oo < 1 || tt < 1) parse_fail("edge labels are 1-based");
    edges.push_back({static_cast<int>(oo - 1), static_cast<int>(tt - 1), cell_from(idx, d, "edge index")});
  }
  return PeriodicGraph::build(d, s, std::move(edges));
}

std::unique_ptr<PerturbedGraph> load_perturbed(const PeriodicGraph& base, const std::string& source) {
  constexpr std::string_view kBuiltin = "builtin:";
  if (source.empty() || source == "none") {
    return std::make_unique<PerturbedGraph>(base, std::make_shared<const NoPerturbation>());
  }
  if (source.rfind(kBuiltin, 0) == 0) {
    auto [name, params] = parse_builtin(source.substr(kBuiltin.size()));
    return std::make_unique<PerturbedGraph>(base, builtin_perturbation(name, base, params));
  }

  const json j = read_json_file(source);
  if (!j.is_object()) parse_fail("perturbation file must be a JSON object");
  const int d = base.dimension();
  if (j.contains("builtin")) {
    if (!j["builtin"].is_string()) parse_fail("'builtin' must be a string");
    std::map<std::string, std::string> params;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.key() == "builtin") continue;
      params[it.key()] = it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
    }
    return std::make_unique<PerturbedGraph>(
        base, builtin_perturbation(j["builtin"].get<std::string>(), base, params));
  }
  if (!j.contains("patch")) parse_fail("perturbation file needs 'builtin' or 'patch'");
  const json& patch = j["patch"];
  if (!patch.is_object()) parse_fail("'patch' must be an object");
  PatchSpec spec;
  spec.removed_vertices = vertices_from(patch, "removed_vertices", d);
  spec.removed_edges = pairs_from(patch, "removed_edges", d);
  spec.added_vertices = vertices_from(patch, "added_vertices", d);
  spec.added_edges = pairs_from(patch, "added_edges", d);
  VertexPermutation phi;
  if (j.contains("phi")) phi = VertexPermutation(pairs_from(j, "phi", d));
  return std::make_unique<PerturbedGraph>(base, std::make_shared<const ExplicitPatch>(base, spec),
                                          std::move(phi));
}

bool parse_command_line(int argc, const char* const* argv, RunConfig& config, std::ostream& out) {
  CLI::App app{"Spectra of periodic graph Laplacians and their perturbations", "periodic-spectra"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--threads", config.threads, "Worker threads (default: PERIODIC_SPECTRA_THREADS or all cores)");
    sub->add_option("--out", config.out_dir, "Output directory")->capture_default_str();
    sub->add_flag("--emit-plot-data", config.emit_plot_data, "Also write gnuplot-ready .dat files");
  };
  auto graph_opts = [&](CLI::App* sub, bool with_perturbation) {
    sub->add_option("--graph", config.graph, "builtin:<name> or a graph JSON file")->required();
    if (with_perturbation) {
      sub->add_option("--perturbation", config.perturbation,
                      "builtin:<name>[,key=value...] or a perturbation JSON file")
          ->capture_default_str();
    }
  };
  auto grid_opt = [&](CLI::App* sub) {
    sub->add_option("--grid", config.grid, "Quasimomentum grid points per axis")->capture_default_str();
  };

  auto* bands = app.add_subcommand("bands", "Band energies on a uniform quasimomentum grid");
  graph_opts(bands, false);
  grid_opt(bands);
  common(bands);

  auto* sigma = app.add_subcommand("sigma-ess", "Essential spectrum as a union of intervals");
  graph_opts(sigma, false);
  grid_opt(sigma);
  sigma->add_option("--flat-tol", config.flat_tol, "Width below which a band is flat")->capture_default_str();
  common(sigma);

  auto* lambda_set = app.add_subcommand("lambda-set", "Membership of the unperturbed set on a window");
  graph_opts(lambda_set, true);
  lambda_set->add_option("--window", config.window, "lo_1,hi_1,...,lo_d,hi_d")->delimiter(',')->required();
  common(lambda_set);

  auto* cond = app.add_subcommand("condition-p", "Search a window for a box inside the unperturbed set");
  graph_opts(cond, true);
  cond->add_option("--n", config.n, "Box radius")->required();
  cond->add_option("--window", config.window, "lo_1,hi_1,...,lo_d,hi_d")->delimiter(',')->required();
  common(cond);

  auto* weyl = app.add_subcommand("weyl-check", "Residuals of Weyl states for a sequence of box sizes");
  graph_opts(weyl, true);
  grid_opt(weyl);
  weyl->add_option("--lambda", config.lambda, "Target energy")->required();
  weyl->add_option("--n-list", config.n_list, "Comma separated box radii")->delimiter(',')->required();
  weyl->add_option("--window", config.window, "lo_1,hi_1,...,lo_d,hi_d")->delimiter(',')->required();
  common(weyl);

  auto* trunc = app.add_subcommand("truncate", "Eigenvalues of a finite box restriction");
  graph_opts(trunc, true);
  grid_opt(trunc);
  trunc->add_option("--box", config.box, "lo_1,hi_1,...,lo_d,hi_d")->delimiter(',')->required();
  trunc->add_flag("--wrap", config.wrap, "Close the box periodically (unperturbed graphs only)");
  trunc->add_option("--eps", config.eps, "Distance tolerance to the reference spectrum")->capture_default_str();
  trunc->add_option("--flat-tol", config.flat_tol, "Width below which a band is flat")->capture_default_str();
  common(trunc);

  auto* trial = app.add_subcommand("random-trial", "Monte Carlo estimate for the random pendant graph");
  trial->add_option("--n", config.n, "Box radius")->capture_default_str();
  trial->add_option("--p", config.p, "Pendant probability")->capture_default_str();
  trial->add_option("--seed", config.seed, "Random field seed")->capture_default_str();
  trial->add_option("--samples", config.samples, "Number of disjoint boxes")->capture_default_str();
  trial->add_option("--dimension", config.dimension, "Lattice dimension")->capture_default_str();
  common(trial);

  auto* catalog = app.add_subcommand("catalog", "Builtin graphs and perturbations");
  catalog->add_option("action", config.subcommand, "list")->required()->check(CLI::IsMember({"list"}));
  common(catalog);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return false;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return false;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return false;
  } catch (const CLI::ParseError& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  config.command = app.get_subcommands().front()->get_name();
  return true;
}

RunResult run(const RunConfig& config, std::ostream& log) {
  RunResult result;
  try {
    const int threads = resolve_thread_count(config.threads);
    const bool needs_graph = config.command != "random-trial" && config.command != "catalog";
    const bool needs_perturbation = config.command == "lambda-set" || config.command == "condition-p" ||
                                    config.command == "weyl-check" || config.command == "truncate";

    json manifest = {{"version", kVersion}, {"command", config.command},
                     {"parameters", resolved_parameters(config)}};
    std::optional<PeriodicGraph> graph;
    std::unique_ptr<PerturbedGraph> perturbed;
    if (needs_graph) {
      graph = load_graph(config.graph);
      manifest["parameters"]["resolved_graph"] = graph_json(*graph);
      if (!graph->has_translation()) {
        log << "warning: no edge has a nonzero index; every band is flat\n";
      }
      if (needs_perturbation) perturbed = load_perturbed(*graph, config.perturbation);
    }
    result.manifest_hash = fnv1a_hex(manifest.dump());

    std::filesystem::create_directories(config.out_dir);
    Outputs out(config.out_dir, result.manifest_hash);
    json full = manifest;
    full["hash"] = result.manifest_hash;
    full["runtime"] = {{"threads", threads}};
    out.write("manifest.json", dump_json(full));

    const auto& cmd = config.command;
    if (cmd == "bands") {
      cmd_bands(config, *graph, threads, out);
    } else if (cmd == "sigma-ess") {
      cmd_sigma_ess(config, *graph, threads, out);
    } else if (cmd == "lambda-set") {
      cmd_lambda_set(config, *perturbed, out);
    } else if (cmd == "condition-p") {
      cmd_condition_p(config, *perturbed, out);
    } else if (cmd == "weyl-check") {
      cmd_weyl_check(config, *perturbed, threads, out);
    } else if (cmd == "truncate") {
      cmd_truncate(config, *perturbed, threads, out);
    } else if (cmd == "random-trial") {
      cmd_random_trial(config, threads, out);
    } else if (cmd == "catalog") {
      cmd_catalog(config, log, out);
    } else {
      parse_fail("unknown command '" + cmd + "'");
    }
    result.files = out.files();
    result.exit_code = kExitOk;
  } catch (const Error& e) {
    result.exit_code = exit_code_for(e.kind());
    result.message = config.command + ": " + e.what();
  } catch (const std::filesystem::filesystem_error& e) {
    result.exit_code = kExitParse;
    result.message = config.command + ": " + e.what();
  } catch (const std::exception& e) {
    result.exit_code = kExitInternal;
    result.message = config.command + ": " + e.what();
  }
  return result;
}

}  // namespace pspec::cli
