#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "star/forward.hpp"
#include "star/geometry.hpp"
#include "star/phantom.hpp"
#include "star/solver.hpp"

namespace star {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ErrorCategory { none, config, geometry, solver, io };

const char* to_string(ErrorCategory c);
/// Classifies an exception thrown by the library.
ErrorCategory categorize(const std::exception& e);

struct GeometrySpec {
  std::string reference;  // "1a" .. "3b"; empty when angles are given
  std::vector<double> angles_over_pi;
  std::vector<double> weights;
};

struct PhantomSpec {
  std::string kind = "square";  // square | shepp_logan
  double scatter = 0.0;         // amplitude of a centred scattering-contrast disc
};

struct NoiseSpec {
  double photons = 1e4;
  std::uint64_t seed = 1;
};

struct SolverSpec {
  std::string method = "direct";  // direct | recursive | local
  double lambda = 0.0;
  int nmax = -1;
  int nsum = 200;
  std::string truncation = "zero_data";
  bool use_projection = false;
  int threads = 0;
  std::vector<int> zero_set;  // local method only
};

struct OutputSpec {
  std::string dir = ".";
  std::string prefix = "star";
};

struct ExperimentConfig {
  double width = 1.0;
  int n = 125;
  GeometrySpec geometry;
  PhantomSpec phantom;
  std::optional<NoiseSpec> noise;
  SolverSpec solver;
  OutputSpec output;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string dump_config(const ExperimentConfig& c);

StarGeometry build_geometry(const GeometrySpec& g, double width);
Phantom build_phantom(const PhantomSpec& p, double width);

/// Pairwise measurements for a configuration, noisy when noise is set.
std::vector<PairwiseField> measure(const ExperimentConfig& c, const StarGeometry& g, const Phantom& p,
                                   const SamplingGrid& grid, NoiseReport* report = nullptr);

struct RunResult {
  int exit_code = 0;
  ErrorCategory category = ErrorCategory::none;
  std::string message;
  double interior_error = 0.0;
  int failures = 0;
  std::vector<std::string> outputs;
};

/// Forward model, reconstruction and outputs; files are written only after
/// every step succeeded.
RunResult run(const ExperimentConfig& c);

}  // namespace star
