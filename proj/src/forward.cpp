#include "star/forward.hpp"

#include <cmath>
#include <numeric>
#include <random>

namespace star {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t node_seed(std::uint64_t seed, int j, int k, std::size_t node) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ (static_cast<std::uint64_t>(j) << 32 | static_cast<std::uint32_t>(k)));
  return splitmix64(s ^ static_cast<std::uint64_t>(node));
}

}  // namespace

SamplingGrid make_sampling_grid(double width, int n, int ny) {
  if (n < 1 || n % 2 == 0) throw ForwardError("grid size must be odd");
  if (ny < 1 || ny % 2 == 0) throw ForwardError("window column count must be odd");
  SamplingGrid g;
  g.n = n;
  g.ny = ny;
  g.width = width;
  g.h = width / (n + 1);
  g.y0 = -0.5 * (ny - 1) * g.h;
  return g;
}

SamplingGrid make_sampling_grid(const Phantom& p, const StarGeometry& g, int n) {
  const auto [lo, hi] = p.y_extent();
  const double h = p.width / (n + 1);
  const double reach = std::max(std::abs(lo), std::abs(hi)) + p.width * g.max_slope();
  int ny = 2 * static_cast<int>(std::ceil(reach / h)) + 1 + 8;
  ny = std::max(ny, n);
  if (ny % 2 == 0) ++ny;
  while (std::gcd(ny, n + 1) != 1) ny += 2;
  return make_sampling_grid(p.width, n, ny);
}

double ray_integral(const Phantom& p, const StarGeometry& g, int k, double y, double z) {
  if (z < -1e-12 * p.width || z > p.width * (1 + 1e-12))
    throw ForwardError("vertex outside the strip");
  const double zc = std::clamp(z, 0.0, p.width);
  const auto& r = g.ray(k);
  const double len = std::max((g.exit_boundary(k) - zc) / r.uz, 0.0);
  return line_integral(p, {y, zc}, {r.uy, r.uz}, len);
}

DataField ray_field(const Phantom& p, const StarGeometry& g, int k, const SamplingGrid& grid) {
  DataField f(grid);
  for (int i = 0; i < grid.ny; ++i)
    for (int j = 0; j < grid.rows(); ++j) f.at(i, j) = ray_integral(p, g, k, grid.y(i), grid.z(j));
  return f;
}

DataField star_transform(const Phantom& p, const StarGeometry& g, const SamplingGrid& grid) {
  DataField f(grid);
  for (int k = 0; k < g.size(); ++k) {
    const auto ik = ray_field(p, g, k, grid);
    const double s = g.ray(k).weight;
    for (std::size_t m = 0; m < f.values.size(); ++m) f.values[m] += s * ik.values[m];
  }
  return f;
}

std::vector<PairwiseField> pairwise_fields(const Phantom& p, const StarGeometry& g,
                                           const SamplingGrid& grid, bool with_scatter) {
  if (g.size() < 2) throw ForwardError("pairwise measurements need at least two rays");
  std::vector<DataField> rays;
  for (int k = 0; k < g.size(); ++k) rays.push_back(ray_field(p, g, k, grid));
  DataField eta(grid);
  if (with_scatter)
    for (int i = 0; i < grid.ny; ++i)
      for (int j = 0; j < grid.rows(); ++j)
        eta.at(i, j) = point_value(p.scatter_contrast, grid.y(i), grid.z(j));
  std::vector<PairwiseField> out;
  for (int j = 0; j < g.size(); ++j)
    for (int k = j + 1; k < g.size(); ++k) {
      PairwiseField pf{j, k, DataField(grid)};
      for (std::size_t m = 0; m < pf.field.values.size(); ++m)
        pf.field.values[m] = rays[j].values[m] + rays[k].values[m] + eta.values[m];
      out.push_back(std::move(pf));
    }
  return out;
}

PairwiseField add_poisson_noise(const PairwiseField& f, double photons, std::uint64_t seed,
                                NoiseReport* report) {
  if (!(photons >= 1.0)) throw ForwardError("photon count must be at least 1");
  PairwiseField out = f;
  NoiseReport local;
  for (std::size_t m = 0; m < f.field.values.size(); ++m) {
    const double mean = std::nearbyint(photons * std::exp(-f.field.values[m]));
    std::mt19937_64 rng(node_seed(seed, f.j, f.k, m));
    long long count = 0;
    if (mean > 0.0) {
      std::poisson_distribution<long long> dist(mean);
      count = dist(rng);
      for (int retry = 0; count == 0 && retry < 100; ++retry) {
        ++local.resampled;
        count = dist(rng);
      }
    }
    if (count == 0) {
      ++local.clamped;
      count = 1;
    }
    out.field.values[m] = -std::log(static_cast<double>(count) / photons);
    ++local.samples;
  }
  if (report) {
    report->samples += local.samples;
    report->resampled += local.resampled;
    report->clamped += local.clamped;
  }
  return out;
}

DataField combine_pairs(const std::vector<PairwiseField>& fields, const CoefficientMatrix& c) {
  const int k = c.size();
  if (fields.empty()) throw ForwardError("no pairwise fields");
  DataField out(fields.front().field.grid);
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) {
      const PairwiseField* found = nullptr;
      for (const auto& f : fields)
        if ((f.j == a && f.k == b) || (f.j == b && f.k == a)) found = &f;
      if (!found) throw ForwardError("missing pairwise field");
      const double w = c.c[a][b];
      if (w == 0.0) continue;
      for (std::size_t m = 0; m < out.values.size(); ++m) out.values[m] += w * found->field.values[m];
    }
  return out;
}

}  // namespace star
