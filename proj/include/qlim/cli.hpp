#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace qlim {

enum class Command { Qfi, Cfi, Design, Saturate, QfiMatrix, Simulate };

struct RunConfig {
  Command command = Command::Qfi;
  std::string scenario_path;
  std::string direction = "separation-x";
  std::string interferometer = "optimal";  // identity | qft | bs_phase[:alpha] | optimal | path to JSON
  std::string output_path;  // stdout when empty
  std::string csv_path;
  std::string gnuplot_path;
  std::string target = "separation";
  std::uint64_t seed = 1;
  std::int64_t n_photons = 100000;
  int trials = 500;
  unsigned threads = 1;
  double step = 1e-4;
  double theta = 0.0;
  bool angular = false;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

// Runs one command; errors are reported on `err` and mapped to exit codes.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// Parses argv and runs; --help and parse errors return without touching any scenario.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace qlim
