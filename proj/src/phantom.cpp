#include "star/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace star {

namespace {

using cplx = std::complex<double>;

struct Extent {
  double y, z;  // half-extents of the bounding box
  double cy, cz;
};

Extent extent(const Primitive& p) {
  return std::visit(
      [](const auto& s) -> Extent {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Rectangle>) {
          return {s.half_y, s.half_z, s.cy, s.cz};
        } else {
          const double c = std::cos(s.angle), sn = std::sin(s.angle);
          return {std::hypot(s.semi_y * c, s.semi_z * sn), std::hypot(s.semi_y * sn, s.semi_z * c),
                  s.cy, s.cz};
        }
      },
      p.shape);
}

bool inside(const Rectangle& r, double y, double z) {
  return std::abs(y - r.cy) <= r.half_y && std::abs(z - r.cz) <= r.half_z;
}

bool inside(const Ellipse& e, double y, double z) {
  const double c = std::cos(e.angle), s = std::sin(e.angle);
  const double dy = y - e.cy, dz = z - e.cz;
  const double u = (c * dy + s * dz) / e.semi_y;
  const double v = (-s * dy + c * dz) / e.semi_z;
  return u * u + v * v <= 1.0;
}

double chord(const Rectangle& r, Point o, Point d, double len) {
  double t0 = 0.0, t1 = len;
  const double p[2] = {o.y, o.z}, dir[2] = {d.y, d.z};
  const double lo[2] = {r.cy - r.half_y, r.cz - r.half_z};
  const double hi[2] = {r.cy + r.half_y, r.cz + r.half_z};
  for (int a = 0; a < 2; ++a) {
    if (std::abs(dir[a]) < 1e-15) {
      if (p[a] < lo[a] || p[a] > hi[a]) return 0.0;
      continue;
    }
    double ta = (lo[a] - p[a]) / dir[a], tb = (hi[a] - p[a]) / dir[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  return std::max(t1 - t0, 0.0);
}

double chord(const Ellipse& e, Point o, Point d, double len) {
  const double c = std::cos(e.angle), s = std::sin(e.angle);
  const double dy = o.y - e.cy, dz = o.z - e.cz;
  const double py = (c * dy + s * dz) / e.semi_y, pz = (-s * dy + c * dz) / e.semi_z;
  const double vy = (c * d.y + s * d.z) / e.semi_y, vz = (-s * d.y + c * d.z) / e.semi_z;
  const double a = vy * vy + vz * vz;
  const double b = py * vy + pz * vz;
  const double cc = py * py + pz * pz - 1.0;
  const double disc = b * b - a * cc;
  if (disc <= 0.0) return 0.0;
  const double sq = std::sqrt(disc);
  // stable roots of a t^2 + 2 b t + cc = 0
  const double qq = -(b + std::copysign(sq, b));
  double ta = qq / a, tb = (qq != 0.0) ? cc / qq : -ta;
  if (ta > tb) std::swap(ta, tb);
  const double t0 = std::max(ta, 0.0), t1 = std::min(tb, len);
  return std::max(t1 - t0, 0.0);
}

cplx slab_transform(double k, double centre, double half) {
  const double x = k * half;
  const double sinc = std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
  return std::polar(2.0 * half * sinc, -k * centre);
}

cplx transform(const Rectangle& r, double q, double w) {
  return slab_transform(q, r.cy, r.half_y) * slab_transform(w, r.cz, r.half_z);
}

cplx transform(const Ellipse& e, double q, double w) {
  const double c = std::cos(e.angle), s = std::sin(e.angle);
  const double ku = (c * q + s * w) * e.semi_y, kv = (-s * q + c * w) * e.semi_z;
  const double rho = std::hypot(ku, kv);
  const double disk = rho < 1e-8 ? std::numbers::pi * (1.0 - rho * rho / 8.0)
                                 : 2.0 * std::numbers::pi * std::cyl_bessel_j(1.0, rho) / rho;
  return std::polar(e.semi_y * e.semi_z * disk, -(q * e.cy + w * e.cz));
}

}  // namespace

void Phantom::validate() const {
  if (!(width > 0.0)) throw PhantomError("strip width must be positive");
  if (background < 0.0) throw PhantomError("negative background attenuation");
  auto check = [&](const std::vector<Primitive>& list) {
    for (const auto& p : list) {
      const bool ok = std::visit(
          [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Rectangle>)
              return s.half_y > 0.0 && s.half_z > 0.0;
            else
              return s.semi_y > 0.0 && s.semi_z > 0.0;
          },
          p.shape);
      if (!ok) throw PhantomError("primitive extents must be positive");
      const auto e = extent(p);
      if (e.cz - e.z <= 0.0 || e.cz + e.z >= width)
        throw PhantomError("primitive support leaves the open strip");
    }
  };
  check(primitives);
  check(scatter_contrast);
}

std::pair<double, double> Phantom::y_extent() const {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto* list : {&primitives, &scatter_contrast})
    for (const auto& p : *list) {
      const auto e = extent(p);
      lo = std::min(lo, e.cy - e.y);
      hi = std::max(hi, e.cy + e.y);
    }
  if (lo > hi) return {0.0, 0.0};
  return {lo, hi};
}

double point_value(const std::vector<Primitive>& prims, double y, double z) {
  double v = 0.0;
  for (const auto& p : prims)
    if (std::visit([&](const auto& s) { return inside(s, y, z); }, p.shape)) v += p.amplitude;
  return v;
}

double point_value(const Phantom& p, double y, double z) { return point_value(p.primitives, y, z); }

double chord_length(const Primitive& prim, Point origin, Point dir, double length) {
  return std::visit([&](const auto& s) { return chord(s, origin, dir, length); }, prim.shape);
}

double line_integral(const std::vector<Primitive>& prims, Point origin, Point dir, double length) {
  const double n = std::hypot(dir.y, dir.z);
  if (std::abs(n - 1.0) > 1e-9) throw PhantomError("line direction must be a unit vector");
  if (length < 0.0) throw PhantomError("negative integration length");
  double v = 0.0;
  for (const auto& p : prims) v += p.amplitude * chord_length(p, origin, dir, length);
  return v;
}

double line_integral(const Phantom& p, Point origin, Point dir, double length) {
  return line_integral(p.primitives, origin, dir, length);
}

std::complex<double> fourier_transform(const std::vector<Primitive>& prims, double q, double w) {
  cplx v = 0.0;
  for (const auto& p : prims)
    v += p.amplitude * std::visit([&](const auto& s) { return transform(s, q, w); }, p.shape);
  return v;
}

std::complex<double> fourier_transform(const Phantom& p, double q, double w) {
  return fourier_transform(p.primitives, q, w);
}

Phantom make_square_phantom(double width) {
  if (!(width > 0.0)) throw PhantomError("strip width must be positive");
  Phantom p;
  p.width = width;
  const double half = 21.5 / 126.0 * width;
  p.primitives.push_back({Rectangle{0.0, 0.5 * width, half, half}, 5.0 / width});
  return p;
}

Phantom make_shepp_logan(double width) {
  if (!(width > 0.0)) throw PhantomError("strip width must be positive");
  struct Row {
    double a, sx, sy, x, y, deg;
  };
  // Modified head: region values span [0, 1] before rescaling.
  static const Row rows[] = {
      {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},         {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
      {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},     {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
      {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},        {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
      {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},      {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
      {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},    {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
  };
  constexpr double lo = 0.0, hi = 1.0;
  const double gain = 4.0 / (hi - lo);
  const double offset = 1.0 - gain * lo;
  const double scale = 0.48 * width;
  Phantom p;
  p.width = width;
  bool first = true;
  for (const auto& r : rows) {
    const double amp = (gain * r.a + (first ? offset : 0.0)) / width;
    first = false;
    p.primitives.push_back({Ellipse{scale * r.x, 0.5 * width + scale * r.y, scale * r.sx,
                                    scale * r.sy, r.deg * std::numbers::pi / 180.0},
                            amp});
  }
  return p;
}

double ImageGrid::max_value() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, v);
  return m;
}

ImageGrid ImageGrid::crop_y(int cols) const {
  if (cols > ny || (ny - cols) % 2 != 0) throw std::invalid_argument("bad crop width");
  const int off = (ny - cols) / 2;
  ImageGrid out(cols, nz, h, y(off));
  for (int i = 0; i < cols; ++i)
    for (int j = 0; j < nz; ++j) out.at(i, j) = at(i + off, j);
  return out;
}

ImageGrid rasterize(const Phantom& p, int n, int ny) {
  if (n < 1 || n % 2 == 0) throw PhantomError("grid size must be odd");
  if (ny < 1) throw PhantomError("window must have at least one column");
  const double h = p.width / (n + 1);
  ImageGrid g(ny, n, h, -0.5 * (ny - 1) * h);
  for (int i = 0; i < ny; ++i)
    for (int j = 0; j < n; ++j) g.at(i, j) = point_value(p, g.y(i), g.z(j));
  return g;
}

ImageGrid rasterize(const Phantom& p, int n) { return rasterize(p, n, n); }

double interior_error(const ImageGrid& image, const ImageGrid& reference, int margin) {
  if (image.nz != reference.nz || std::abs(image.h - reference.h) > 1e-12 * image.h)
    throw std::invalid_argument("images are on different grids");
  const int n = image.nz;
  const ImageGrid a = image.crop_y(n), b = reference.crop_y(n);
  double num = 0.0, den = 0.0;
  for (int i = margin; i < n - margin; ++i)
    for (int j = margin; j < n - margin; ++j) {
      num += std::pow(a.at(i, j) - b.at(i, j), 2);
      den += std::pow(b.at(i, j), 2);
    }
  if (den == 0.0) throw std::invalid_argument("reference image is zero on the interior");
  return std::sqrt(num / den);
}

}  // namespace star
