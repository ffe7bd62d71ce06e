#pragma once

#include <cstdint>
#include <vector>

#include "star/geometry.hpp"
#include "star/phantom.hpp"

namespace star {

/// Vertex sampling: Y_i = y0 + i h (i < ny), Z_j = j h (j = 0 .. n + 1).
/// Rows j = 0 and j = n + 1 are the strip boundaries.
struct SamplingGrid {
  int n = 125;
  int ny = 125;
  double h = 1.0 / 126.0;
  double y0 = 0.0;
  double width = 1.0;

  int rows() const { return n + 2; }
  double y(int i) const { return y0 + i * h; }
  double z(int j) const { return j * h; }
};

/// Centred window wide enough to contain every vertex whose rays reach the
/// phantom. The column count is odd, at least n, and coprime with n + 1.
SamplingGrid make_sampling_grid(const Phantom& p, const StarGeometry& g, int n);
SamplingGrid make_sampling_grid(double width, int n, int ny);

/// Scalar field on a SamplingGrid, boundary rows included.
struct DataField {
  SamplingGrid grid;
  std::vector<double> values;  // values[i * rows + j]

  DataField() = default;
  explicit DataField(const SamplingGrid& g)
      : grid(g), values(static_cast<std::size_t>(g.ny) * g.rows(), 0.0) {}

  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * grid.rows() + j]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * grid.rows() + j]; }
};

struct PairwiseField {
  int j = 0;
  int k = 1;
  DataField field;
};

class ForwardError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Integral of the phantom along ray k from vertex (y, z) to the strip boundary.
double ray_integral(const Phantom& p, const StarGeometry& g, int k, double y, double z);

/// sum_k s_k I_k on every node of the grid.
DataField star_transform(const Phantom& p, const StarGeometry& g, const SamplingGrid& grid);

/// Single-ray integral field I_k.
DataField ray_field(const Phantom& p, const StarGeometry& g, int k, const SamplingGrid& grid);

/// phi_jk = I_j + I_k + eta for all j < k; eta from the phantom's scatter contrast.
std::vector<PairwiseField> pairwise_fields(const Phantom& p, const StarGeometry& g,
                                           const SamplingGrid& grid, bool with_scatter = true);

struct NoiseReport {
  long long samples = 0;
  long long resampled = 0;  // draws that returned zero counts
  long long clamped = 0;    // samples left at one count after 100 retries
};

/// Photon-count noise: M ~ Poisson(nint(N exp(-phi))), phi' = -log(M / N).
/// Draws depend only on (seed, pair, node).
PairwiseField add_poisson_noise(const PairwiseField& f, double photons, std::uint64_t seed,
                                NoiseReport* report = nullptr);

/// Phi = sum_{j<k} c_jk phi_jk.
DataField combine_pairs(const std::vector<PairwiseField>& fields, const CoefficientMatrix& c);

}  // namespace star
