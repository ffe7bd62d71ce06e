#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace star {

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One ray of a star. Unit vector is (sin theta, cos theta) with theta
/// measured from the +Z axis, counter-clockwise positive.
struct Ray {
  double theta = 0.0;
  double uy = 0.0;
  double uz = 1.0;
  double weight = 1.0;
};

class StarGeometry {
 public:
  StarGeometry() = default;
  StarGeometry(const std::vector<double>& angles, const std::vector<double>& weights, double width);

  int size() const { return static_cast<int>(rays_.size()); }
  double width() const { return width_; }
  const Ray& ray(int k) const { return rays_.at(static_cast<std::size_t>(k)); }
  const std::vector<Ray>& rays() const { return rays_; }

  /// Z-coordinate of the strip boundary the ray exits through.
  double exit_boundary(int k) const { return ray(k).uz > 0.0 ? width_ : 0.0; }

  /// Largest |u_y / u_z| over the rays.
  double max_slope() const;

  StarGeometry with_extra_ray(double angle, double weight) const;

 private:
  std::vector<Ray> rays_;
  double width_ = 1.0;
};

inline constexpr double kHorizontalTolerance = 1e-9;

StarGeometry make_geometry(const std::vector<double>& angles, const std::vector<double>& weights,
                           double width);

/// Same as make_geometry with angles given in units of pi.
StarGeometry make_geometry_pi(const std::vector<double>& angles_over_pi,
                              const std::vector<double>& weights, double width);

/// Vertex-to-boundary distance along ray k from height z.
double exit_distance(const StarGeometry& g, int k, double z);

enum class CoefficientCondition { shape, zero_sum, zero_diagonal, symmetry, nonzero_weights };

const char* to_string(CoefficientCondition c);

class CoefficientError : public std::invalid_argument {
 public:
  CoefficientError(CoefficientCondition c, const std::string& what)
      : std::invalid_argument(what), condition_(c) {}
  CoefficientCondition condition() const { return condition_; }

 private:
  CoefficientCondition condition_;
};

/// Symmetric pair coefficients c_jk combining pairwise measurements into a
/// star transform with weights s_k = sum_j c_jk.
struct CoefficientMatrix {
  std::vector<std::vector<double>> c;
  std::vector<double> weights;

  int size() const { return static_cast<int>(c.size()); }
  /// True when the scheme cancels the scattering contrast (entries sum to zero).
  bool excludes_scatter() const;
};

/// Checks zero diagonal, symmetry and nonzero column sums, plus the zero total
/// sum when `exclude_scatter` is set. Throws CoefficientError naming the first
/// violated condition.
CoefficientMatrix validate_coefficients(const std::vector<std::vector<double>>& c,
                                        bool exclude_scatter = true);

enum class SchemeKind { uniform, zero_sum };

/// uniform: cyclic pairing giving s_k = 1 (does not cancel the scattering
/// contrast). zero_sum: the built-in K = 3 and K = 4 tables.
CoefficientMatrix default_scheme(int k, SchemeKind kind);

/// Least-norm symmetric zero-diagonal c with column sums equal to `weights`.
/// Cancels the scattering contrast whenever the weights sum to zero.
CoefficientMatrix scheme_for_weights(const std::vector<double>& weights);

struct NamedGeometry {
  std::string name;
  std::vector<double> angles_over_pi;
  std::vector<double> weights;
};

/// The six reference geometries 1a, 1b, 2a, 2b, 3a, 3b.
const std::vector<NamedGeometry>& reference_geometries();
StarGeometry reference_geometry(const std::string& name, double width = 1.0);

}  // namespace star
