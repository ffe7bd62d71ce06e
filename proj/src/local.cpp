#include "star/local.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace star {

VectorScheme solve_sigmas(const StarGeometry& g, const std::vector<int>& zero_set) {
  const int k = g.size();
  for (int z : zero_set)
    if (z < 0 || z >= k) throw LocalError("zero-set index out of range");
  std::vector<int> active;
  for (int i = 0; i < k; ++i)
    if (std::find(zero_set.begin(), zero_set.end(), i) == zero_set.end()) active.push_back(i);
  const int ka = static_cast<int>(active.size());
  if (ka < 3) throw LocalError("vector schemes need at least three active rays");

  VectorScheme s;
  for (const auto& r : g.rays()) s.directions.push_back({r.uy, r.uz});
  Eigen::MatrixXd u(2, ka);
  for (int i = 0; i < ka; ++i) {
    u(0, i) = s.directions[active[i]][0];
    u(1, i) = s.directions[active[i]][1];
  }
  const Eigen::MatrixXd pinv = u.completeOrthogonalDecomposition().pseudoInverse();
  const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(ka, ka) - pinv * u;
  const Eigen::VectorXd p1 = proj * Eigen::VectorXd::Ones(ka);
  const double norm = p1.sum();
  if (norm < 1e-10 * ka) throw LocalError("every admissible sigma has zeta = 0");

  s.sigma.assign(k, 0.0);
  for (int i = 0; i < ka; ++i) s.sigma[active[i]] = ka * p1(i) / norm;
  s.zeta = 0.0;
  for (double v : s.sigma) s.zeta += v;

  auto su = [&](int i) { return Vec2{s.sigma[i] * s.directions[i][0], s.sigma[i] * s.directions[i][1]}; };
  s.c.assign(k, std::vector<Vec2>(k, Vec2{0.0, 0.0}));
  if (zero_set.size() == 1) {
    const int z = zero_set.front();
    for (int i : active) s.c[z][i] = s.c[i][z] = su(i);
  } else {
    const double f = 1.0 / (ka - 2);
    for (int a : active)
      for (int b : active)
        if (a != b) {
          const Vec2 x = su(a), y = su(b);
          s.c[a][b] = {f * (x[0] + y[0]), f * (x[1] + y[1])};
        }
  }
  validate_vector_scheme(s);
  return s;
}

void validate_vector_scheme(const VectorScheme& s, double tol) {
  const int k = s.size();
  double scale = 0.0;
  for (const auto& row : s.c)
    for (const auto& v : row) scale = std::max({scale, std::abs(v[0]), std::abs(v[1])});
  const double eps = tol * std::max(scale, 1.0);
  Vec2 total{0.0, 0.0}, moment{0.0, 0.0};
  for (int j = 0; j < k; ++j) {
    if (std::abs(s.c[j][j][0]) > eps || std::abs(s.c[j][j][1]) > eps)
      throw LocalError("vector scheme has a nonzero diagonal");
    Vec2 col{0.0, 0.0};
    for (int i = 0; i < k; ++i) {
      if (std::abs(s.c[i][j][0] - s.c[j][i][0]) > eps || std::abs(s.c[i][j][1] - s.c[j][i][1]) > eps)
        throw LocalError("vector scheme is not symmetric");
      col[0] += s.c[i][j][0];
      col[1] += s.c[i][j][1];
    }
    for (int d = 0; d < 2; ++d) {
      if (std::abs(col[d] - s.sigma[j] * s.directions[j][d]) > k * eps)
        throw LocalError("vector scheme column sums differ from sigma_k u_k");
      total[d] += col[d];
      moment[d] += s.sigma[j] * s.directions[j][d];
    }
  }
  for (int d = 0; d < 2; ++d)
    if (std::abs(total[d]) > k * k * eps || std::abs(moment[d]) > k * eps)
      throw LocalError("vector scheme does not sum to zero");
  if (std::abs(s.zeta) < eps) throw LocalError("zeta = 0");
}

VectorField vector_combine(const std::vector<PairwiseField>& fields, const VectorScheme& s) {
  if (fields.empty()) throw LocalError("no pairwise fields");
  const auto& grid = fields.front().field.grid;
  VectorField out{DataField(grid), DataField(grid)};
  const int k = s.size();
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) {
      const Vec2 c = s.c[a][b];
      if (c[0] == 0.0 && c[1] == 0.0) continue;
      const PairwiseField* found = nullptr;
      for (const auto& f : fields)
        if ((f.j == a && f.k == b) || (f.j == b && f.k == a)) found = &f;
      if (!found) throw LocalError("missing pairwise field");
      for (std::size_t m = 0; m < out.y.values.size(); ++m) {
        out.y.values[m] += c[0] * found->field.values[m];
        out.z.values[m] += c[1] * found->field.values[m];
      }
    }
  return out;
}

VectorField vector_from_rays(const std::vector<DataField>& rays, const VectorScheme& s) {
  if (static_cast<int>(rays.size()) != s.size()) throw LocalError("one field per ray required");
  VectorField out{DataField(rays.front().grid), DataField(rays.front().grid)};
  for (int k = 0; k < s.size(); ++k) {
    const double wy = s.sigma[k] * s.directions[k][0], wz = s.sigma[k] * s.directions[k][1];
    for (std::size_t m = 0; m < out.y.values.size(); ++m) {
      out.y.values[m] += wy * rays[k].values[m];
      out.z.values[m] += wz * rays[k].values[m];
    }
  }
  return out;
}

ImageGrid divergence_reconstruct(const VectorField& f, double zeta) {
  if (std::abs(zeta) < 1e-12) throw LocalError("zeta = 0");
  const auto& g = f.y.grid;
  if (g.ny < 2) throw LocalError("window needs at least two columns");
  ImageGrid img(g.ny, g.n, g.h, g.y0);
  for (int i = 0; i < g.ny; ++i) {
    const int lo = std::max(i - 1, 0), hi = std::min(i + 1, g.ny - 1);
    for (int j = 1; j <= g.n; ++j) {
      const double dy = (f.y.at(hi, j) - f.y.at(lo, j)) / ((hi - lo) * g.h);
      const double dz = (f.z.at(i, j + 1) - f.z.at(i, j - 1)) / (2.0 * g.h);
      img.at(i, j - 1) = -(dy + dz) / zeta;
    }
  }
  return img;
}

}  // namespace star
