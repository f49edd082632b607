#include <iostream>

#include "pspec/cli.hpp"
#include "pspec/error.hpp"

int main(int argc, char** argv) {
  pspec::cli::RunConfig config;
  try {
    if (!pspec::cli::parse_command_line(argc, argv, config, std::cout)) return pspec::cli::kExitOk;
  } catch (const pspec::Error& e) {
    std::cerr << "periodic-spectra: " << e.what() << "\n";
    return pspec::cli::kExitParse;
  }
  const auto result = pspec::cli::run(config, std::cout);
  if (result.exit_code != pspec::cli::kExitOk) {
    std::cerr << "periodic-spectra " << result.message << "\n";
    return result.exit_code;
  }
  for (const auto& f : result.files) std::cerr << "wrote " << f << "\n";
  return pspec::cli::kExitOk;
}
