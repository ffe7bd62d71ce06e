#include "star/geometry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

namespace star {

StarGeometry::StarGeometry(const std::vector<double>& angles, const std::vector<double>& weights,
                           double width)
    : width_(width) {
  if (angles.empty()) throw GeometryError("geometry needs at least one ray");
  if (angles.size() != weights.size())
    throw GeometryError("angle and weight lists differ in length");
  if (!(width > 0.0) || !std::isfinite(width)) throw GeometryError("strip width must be positive");
  rays_.reserve(angles.size());
  for (std::size_t k = 0; k < angles.size(); ++k) {
    const double th = angles[k];
    if (!std::isfinite(th)) throw GeometryError("non-finite ray angle");
    Ray r{th, std::sin(th), std::cos(th), weights[k]};
    if (std::abs(r.uz) < kHorizontalTolerance) {
      std::ostringstream os;
      os << "ray " << k << " is parallel to the strip (|cos theta| < 1e-9)";
      throw GeometryError(os.str());
    }
    if (r.weight == 0.0 || !std::isfinite(r.weight)) {
      std::ostringstream os;
      os << "ray " << k << " has zero weight";
      throw GeometryError(os.str());
    }
    rays_.push_back(r);
  }
}

double StarGeometry::max_slope() const {
  double m = 0.0;
  for (const auto& r : rays_) m = std::max(m, std::abs(r.uy / r.uz));
  return m;
}

StarGeometry StarGeometry::with_extra_ray(double angle, double weight) const {
  std::vector<double> a, w;
  for (const auto& r : rays_) {
    a.push_back(r.theta);
    w.push_back(r.weight);
  }
  a.push_back(angle);
  w.push_back(weight);
  return StarGeometry(a, w, width_);
}

StarGeometry make_geometry(const std::vector<double>& angles, const std::vector<double>& weights,
                           double width) {
  return StarGeometry(angles, weights, width);
}

StarGeometry make_geometry_pi(const std::vector<double>& angles_over_pi,
                              const std::vector<double>& weights, double width) {
  std::vector<double> a;
  a.reserve(angles_over_pi.size());
  for (double t : angles_over_pi) a.push_back(t * std::numbers::pi);
  return StarGeometry(a, weights, width);
}

double exit_distance(const StarGeometry& g, int k, double z) {
  if (z < 0.0 || z > g.width()) throw GeometryError("vertex height outside the strip");
  const double d = (g.exit_boundary(k) - z) / g.ray(k).uz;
  return d < 0.0 ? 0.0 : d;
}

const char* to_string(CoefficientCondition c) {
  switch (c) {
    case CoefficientCondition::shape: return "shape";
    case CoefficientCondition::zero_sum: return "zero-sum";
    case CoefficientCondition::zero_diagonal: return "zero-diagonal";
    case CoefficientCondition::symmetry: return "symmetry";
    case CoefficientCondition::nonzero_weights: return "nonzero column sums";
  }
  return "unknown";
}

bool CoefficientMatrix::excludes_scatter() const {
  double total = 0.0, scale = 0.0;
  for (const auto& row : c)
    for (double v : row) {
      total += v;
      scale += std::abs(v);
    }
  return std::abs(total) <= 1e-12 * std::max(scale, 1.0);
}

CoefficientMatrix validate_coefficients(const std::vector<std::vector<double>>& c,
                                        bool exclude_scatter) {
  const std::size_t n = c.size();
  if (n == 0) throw CoefficientError(CoefficientCondition::shape, "empty coefficient matrix");
  for (const auto& row : c)
    if (row.size() != n)
      throw CoefficientError(CoefficientCondition::shape, "coefficient matrix is not square");

  double scale = 0.0;
  for (const auto& row : c)
    for (double v : row) scale = std::max(scale, std::abs(v));
  const double tol = 1e-12 * std::max(scale, 1.0);

  CoefficientMatrix out{c, std::vector<double>(n, 0.0)};
  if (exclude_scatter && !out.excludes_scatter())
    throw CoefficientError(CoefficientCondition::zero_sum, "coefficients do not sum to zero");
  for (std::size_t k = 0; k < n; ++k)
    if (std::abs(c[k][k]) > tol)
      throw CoefficientError(CoefficientCondition::zero_diagonal, "nonzero diagonal coefficient");
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j + 1; k < n; ++k)
      if (std::abs(c[j][k] - c[k][j]) > tol)
        throw CoefficientError(CoefficientCondition::symmetry, "coefficient matrix not symmetric");
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += c[j][k];
    if (std::abs(s) <= tol) {
      std::ostringstream os;
      os << "column " << k << " sums to zero";
      throw CoefficientError(CoefficientCondition::nonzero_weights, os.str());
    }
    out.weights[k] = s;
  }
  return out;
}

CoefficientMatrix default_scheme(int k, SchemeKind kind) {
  if (kind == SchemeKind::uniform) {
    if (k < 2) throw GeometryError("cyclic scheme needs at least two rays");
    std::vector<std::vector<double>> c(k, std::vector<double>(k, 0.0));
    for (int i = 0; i < k; ++i) {
      const int j = (i + 1) % k;
      c[i][j] += 0.5;
      c[j][i] += 0.5;
    }
    return validate_coefficients(c, false);
  }
  if (k == 3) return validate_coefficients({{0, 1, 1}, {1, 0, -2}, {1, -2, 0}});
  if (k == 4)
    return validate_coefficients({{0, 1, 1, -1}, {1, 0, -1, -1}, {1, -1, 0, 1}, {-1, -1, 1, 0}});
  throw GeometryError("no built-in zero-sum table for this ray count");
}

CoefficientMatrix scheme_for_weights(const std::vector<double>& weights) {
  const int k = static_cast<int>(weights.size());
  if (k < 2) throw GeometryError("pair schemes need at least two rays");
  const int pairs = k * (k - 1) / 2;
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(k, pairs);
  int p = 0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j, ++p) e(i, p) = e(j, p) = 1.0;
  const Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(weights.data(), k);
  const Eigen::VectorXd x = e.completeOrthogonalDecomposition().solve(s);
  const double scale = s.cwiseAbs().maxCoeff();
  if ((e * x - s).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw CoefficientError(CoefficientCondition::nonzero_weights, "no pair scheme reproduces these weights");
  std::vector<std::vector<double>> c(k, std::vector<double>(k, 0.0));
  p = 0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j, ++p) c[i][j] = c[j][i] = std::abs(x(p)) < 1e-14 * scale ? 0.0 : x(p);
  return validate_coefficients(c, std::abs(s.sum()) <= 1e-12 * scale * k);
}

const std::vector<NamedGeometry>& reference_geometries() {
  static const std::vector<NamedGeometry> cases = {
      {"1a", {1.0, 0.25}, {1, 1}},
      {"1b", {0.82, 0.23}, {1, 1}},
      {"2a", {1.0, 0.25, -0.25}, {1, 1, 1}},
      {"2b", {1.0, 0.25, -1.0 / 6.0}, {1, 1, 1}},
      {"3a", {0.25, 1.1, -0.2}, {1, 1, -2}},
      {"3b", {0.25, 1.1, 0.8}, {1, 1, -2}},
  };
  return cases;
}

StarGeometry reference_geometry(const std::string& name, double width) {
  for (const auto& c : reference_geometries())
    if (c.name == name) return make_geometry_pi(c.angles_over_pi, c.weights, width);
  throw GeometryError("unknown reference geometry '" + name + "'");
}

}  // namespace star
