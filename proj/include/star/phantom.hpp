#pragma once

#include <complex>
#include <stdexcept>
#include <variant>
#include <vector>

namespace star {

struct Point {
  double y = 0.0;
  double z = 0.0;
};

/// Axis-aligned rectangle given by centre and half-widths.
struct Rectangle {
  double cy, cz, half_y, half_z;
};

/// Ellipse with semi-axes along its own frame, rotated by `angle` (radians,
/// counter-clockwise in the (y, z) plane).
struct Ellipse {
  double cy, cz, semi_y, semi_z, angle;
};

struct Primitive {
  std::variant<Rectangle, Ellipse> shape;
  double amplitude = 0.0;
};

class PhantomError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Background-subtracted attenuation model on the strip 0 < z < width.
struct Phantom {
  double width = 1.0;
  double background = 0.0;
  double background_scatter = 0.0;
  std::vector<Primitive> primitives;
  std::vector<Primitive> scatter_contrast;  // ln(mu_s / mean mu_s)

  /// Throws PhantomError on nonpositive extents or support touching the strip edges.
  void validate() const;
  /// [y_min, y_max] covering all primitives.
  std::pair<double, double> y_extent() const;
};

double point_value(const std::vector<Primitive>& prims, double y, double z);
double point_value(const Phantom& p, double y, double z);

/// Length of the segment origin + t*dir, t in [0, length], inside the primitive.
double chord_length(const Primitive& prim, Point origin, Point dir, double length);

/// Integral of the attenuation along origin + t*dir for t in [0, length].
double line_integral(const Phantom& p, Point origin, Point dir, double length);
double line_integral(const std::vector<Primitive>& prims, Point origin, Point dir, double length);

/// Integral over the plane of prims(y, z) exp(-i(q y + w z)).
std::complex<double> fourier_transform(const std::vector<Primitive>& prims, double q, double w);
std::complex<double> fourier_transform(const Phantom& p, double q, double w);

/// Square of amplitude 5/L centred in the strip, side 43 h with h = L/126.
Phantom make_square_phantom(double width);
/// Modified ten-ellipse Shepp-Logan head scaled into the strip, values in [1/L, 5/L].
Phantom make_shepp_logan(double width);

/// Samples on nodes y_i = y0 + i h (i < ny) and z_j = (j + 1) h (j < nz).
struct ImageGrid {
  int ny = 0;
  int nz = 0;
  double h = 0.0;
  double y0 = 0.0;
  std::vector<double> values;  // row-major in y: values[i * nz + j]

  ImageGrid() = default;
  ImageGrid(int ny_, int nz_, double h_, double y0_)
      : ny(ny_), nz(nz_), h(h_), y0(y0_), values(static_cast<std::size_t>(ny_) * nz_, 0.0) {}

  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * nz + j]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * nz + j]; }
  double y(int i) const { return y0 + i * h; }
  double z(int j) const { return (j + 1) * h; }
  double max_value() const;
  /// Centred ny x nz window; `cols` must not exceed ny and keep parity.
  ImageGrid crop_y(int cols) const;
};

/// Point sampling on the centred N x N interior grid, h = L/(N+1).
ImageGrid rasterize(const Phantom& p, int n);
/// Same with an explicit y window of `ny` columns centred on y = 0.
ImageGrid rasterize(const Phantom& p, int n, int ny);

/// Relative L2 difference on the centred nz x nz square of both images with
/// `margin` rows and columns dropped on every side.
double interior_error(const ImageGrid& image, const ImageGrid& reference, int margin = 2);

}  // namespace star
