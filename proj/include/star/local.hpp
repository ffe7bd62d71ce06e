#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "star/forward.hpp"
#include "star/geometry.hpp"
#include "star/phantom.hpp"

namespace star {

using Vec2 = std::array<double, 2>;  // (y, z)

class LocalError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Vector coefficients c_jk with sum_j c_jk = sigma_k u_k and sum_k sigma_k u_k = 0.
struct VectorScheme {
  std::vector<Vec2> directions;  // u_k
  std::vector<double> sigma;
  double zeta = 0.0;
  std::vector<std::vector<Vec2>> c;  // c[j][k]

  int size() const { return static_cast<int>(sigma.size()); }
};

/// Least-norm sigma in the null space of [u_1 .. u_K] scaled to zeta = number
/// of active rays. Rays in `zero_set` get sigma = 0; a single zero ray selects
/// the arrangement where every measured pair contains that ray.
VectorScheme solve_sigmas(const StarGeometry& g, const std::vector<int>& zero_set = {});

/// Checks the four vector-coefficient conditions; throws LocalError.
void validate_vector_scheme(const VectorScheme& s, double tol = 1e-12);

struct VectorField {
  DataField y;
  DataField z;
};

/// sum_{j<k} c_jk phi_jk
VectorField vector_combine(const std::vector<PairwiseField>& fields, const VectorScheme& s);

/// sum_k sigma_k u_k I_k from single-ray fields.
VectorField vector_from_rays(const std::vector<DataField>& rays, const VectorScheme& s);

/// -div(Phi) / zeta on interior rows; central differences, one-sided at the Y edges.
ImageGrid divergence_reconstruct(const VectorField& f, double zeta);

}  // namespace star
