#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "pspec/perturbation.hpp"

namespace pspec::cli {

struct RunConfig {
  std::string command;  // bands, sigma-ess, lambda-set, condition-p, weyl-check,
                        // truncate, random-trial, catalog
  std::string subcommand;                     // catalog: "list"
  std::string graph;                          // "builtin:<name>" or a JSON file
  std::string perturbation = "builtin:none";  // "builtin:<name>[,k=v...]" or a JSON file
  int grid = 64;
  double flat_tol = 1e-8;
  int n = 1;
  std::vector<int> n_list;
  std::vector<std::int64_t> window;  // lo_1,hi_1,...,lo_d,hi_d
  std::vector<std::int64_t> box;     // same layout
  bool wrap = false;
  double eps = 0.02;
  double lambda = 0.0;
  double p = 0.5;
  std::uint64_t seed = 0;
  std::uint64_t samples = 1000000;
  int dimension = 2;
  int threads = 0;  // < 1: PERIODIC_SPECTRA_THREADS, then all cores
  std::string out_dir = "pspec-out";
  bool emit_plot_data = false;
};

struct RunResult {
  int exit_code = 0;
  std::string manifest_hash;
  std::vector<std::string> files;  // written, in order
  std::string message;
};

enum ExitCode : int {
  kExitOk = 0,
  kExitParse = 2,
  kExitDomain = 3,
  kExitInternal = 4,
};

/// Parses argv into a RunConfig. Throws Error(ParseError) on bad usage.
/// Returns false when only help or version output was requested.
bool parse_command_line(int argc, const char* const* argv, RunConfig& config, std::ostream& out);

/// Executes the command and writes its outputs into config.out_dir. Errors from
/// the library are caught and mapped to exit codes.
RunResult run(const RunConfig& config, std::ostream& log);

/// Input loaders, exposed for testing. Labels in files are 1-based.
PeriodicGraph load_graph(const std::string& source);
std::unique_ptr<PerturbedGraph> load_perturbed(const PeriodicGraph& base, const std::string& source);

/// "name,k=v,..." split into name and parameters.
std::pair<std::string, std::map<std::string, std::string>> parse_builtin(const std::string& spec);

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Decimal text of a double with 17 significant digits; locale independent.
std::string format_double(double v);

}  // namespace pspec::cli
