#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "star/forward.hpp"
#include "star/phantom.hpp"
#include "star/solver.hpp"
#include "star/spectral.hpp"

namespace star {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kDataFieldFormat = "star-datafield v1";
inline constexpr const char* kImageFormat = "star-image v1";
inline constexpr const char* kCoefficientFormat = "star-coefficients v1";
inline constexpr const char* kBallisticFormat = "star-ballistic v1";
inline constexpr const char* kDiagnosticsFormat = "star-diagnostics v1";
inline constexpr const char* kCurveFormat = "star-ftheta v1";

/// Shortest round-trip text for a double (17 significant digits).
std::string format_double(double v);

/// Header `# star-datafield v1 n=.. ny=.. h=.. y0=.. width=.. [pair=j,k]`,
/// then one line per Z row (j = 0 .. n + 1) holding ny values.
void write_datafield(const std::string& path, const DataField& f,
                     std::optional<std::pair<int, int>> pair = std::nullopt);
DataField read_datafield(const std::string& path, std::optional<std::pair<int, int>>* pair = nullptr);

/// Header `# star-image v1 ny=.. nz=.. h=.. y0=..`, then one line per z node.
void write_image_csv(const std::string& path, const ImageGrid& img);
ImageGrid read_image_csv(const std::string& path);

/// 8-bit binary graymap of mu L clipped to [-2, 6]; rows run from z = L down to z = 0.
void write_pgm(const std::string& path, const ImageGrid& img, double width);

/// Header then `n,q,re,im` lines.
void write_coefficients_csv(const std::string& path, const CoefficientTable& t);

/// Header `# star-ballistic v1 ny=.. h=.. y0=..`, then `y,value` lines with
/// value = int mu(y, z) dz.
void write_ballistic(const std::string& path, const SamplingGrid& g, const std::vector<double>& p);
std::vector<double> read_ballistic(const std::string& path, const SamplingGrid& g);

/// Per-q slice log.
void write_diagnostics(const std::string& path, const Reconstruction& r);

/// Ballistic projections int mu dz of a phantom at the grid's Y nodes.
std::vector<double> ballistic_projections(const Phantom& p, const SamplingGrid& g);

}  // namespace star
