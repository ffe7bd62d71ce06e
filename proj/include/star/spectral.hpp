#pragma once

#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "star/forward.hpp"
#include "star/geometry.hpp"
#include "star/phantom.hpp"
#include "star/separable.hpp"

namespace star {

inline double kappa(int n, double width) { return 2.0 * std::numbers::pi * n / width; }

/// X_n(q_m) for n in [-nmax, nmax] and q_m on the FFT grid of the window.
struct CoefficientTable {
  int nmax = 0;
  SamplingGrid grid;
  std::vector<cplx> values;  // values[m * (2 nmax + 1) + n + nmax]

  CoefficientTable() = default;
  CoefficientTable(const SamplingGrid& g, int nmax_);

  int cols() const { return 2 * nmax + 1; }
  int rows() const { return grid.ny; }
  double dq() const { return 2.0 * std::numbers::pi / (grid.ny * grid.h); }
  /// Signed frequency of FFT row m.
  double q(int m) const { return dq() * (2 * m < grid.ny ? m : m - grid.ny); }
  /// Row holding -q(m).
  int mirror(int m) const { return m == 0 ? 0 : grid.ny - m; }
  cplx& at(int m, int n) { return values[static_cast<std::size_t>(m) * cols() + n + nmax]; }
  cplx at(int m, int n) const { return values[static_cast<std::size_t>(m) * cols() + n + nmax]; }
  std::vector<cplx> row(int m) const;
  void set_row(int m, const std::vector<cplx>& r);
};

enum class Quadrature {
  linear,     // exact for the piecewise-linear interpolant of the samples
  trapezoid,  // plain periodic sum
};

/// Fourier coefficients int dy e^{-iqy} int_0^L dz e^{-i kappa_n z} f.
CoefficientTable field_to_coefficients(const DataField& f, int nmax,
                                       Quadrature quad = Quadrature::linear);
/// Image samples with zero rows at z = 0 and z = L; always trapezoid.
CoefficientTable field_to_coefficients(const ImageGrid& img, int nmax);

/// Inverse transform onto the interior nodes of the table's grid.
/// `imag_residue` receives max |Im| / max |Re|.
ImageGrid coefficients_to_image(const CoefficientTable& t, double* imag_residue = nullptr);

struct BoundaryAverage {
  std::vector<double> samples;  // (Phi(Y, 0) + Phi(Y, L)) / 2
  std::vector<cplx> transform;  // by FFT row
};

BoundaryAverage boundary_average(const DataField& f, Quadrature quad = Quadrature::linear);

/// 1-D transform int dy e^{-iqy} g(y) of samples on the grid's Y nodes.
std::vector<cplx> y_transform(const std::vector<double>& samples, const SamplingGrid& g,
                              Quadrature quad = Quadrature::linear);

/// Coefficient vector either concentrated on n = 0 or of the form
/// coef / (beta + kappa_n), optionally with the n = 0 entry removed.
struct SpectralVector {
  enum class Kind { unit_zero, lattice };
  Kind kind = Kind::lattice;
  cplx coef = 1.0;
  double beta = 0.0;
  bool skip_zero = false;

  cplx at(int n, double width) const;
};

struct SeparableTerm {
  SpectralVector left;   // column vector b
  SpectralVector right;  // row vector a, enters as <a|
  int ray = 0;
};

class ResonanceError : public std::domain_error {
 public:
  ResonanceError(int ray, int n, const std::string& what)
      : std::domain_error(what), ray_(ray), n_(n) {}
  int ray() const { return ray_; }
  int order() const { return n_; }

 private:
  int ray_, n_;
};

/// The per-q system Phi_n = d_n mu_n + sum_k s_k alpha_k a_kn <a_k|mu>.
/// Rays with u_y = 0 (and every ray at q = 0) have beta = 0; their term is
/// replaced by the finite limit |e_0><c*| + |c><e_0|, c_n = -i s / (u_z kappa_n).
struct SpectralSystem {
  StarGeometry geometry;
  double q = 0.0;
  int nmax = 0;
  std::vector<double> beta;
  std::vector<cplx> alpha;
  std::vector<bool> axial;
  std::vector<cplx> diag;  // d_n, n = -nmax .. nmax
  std::vector<SeparableTerm> terms;
  std::vector<cplx> rhs;

  double width() const { return geometry.width(); }
  int size() const { return 2 * nmax + 1; }
  /// d_n for any n.
  cplx diagonal(int n) const;
  /// Entries 1 / (beta_k + kappa_n) for |n| <= nmax.
  std::vector<cplx> a_vector(int k) const;
  /// A mu with truncated inner products.
  std::vector<cplx> apply(const std::vector<cplx>& mu) const;
  /// A mu with the inner products <a_t|mu> supplied per term.
  std::vector<cplx> apply(const std::vector<cplx>& mu, const std::vector<cplx>& projections) const;
  DiagPlusSeparable matrix() const;
};

cplx diagonal_entry(const StarGeometry& g, double q, int n);

SpectralSystem assemble(const StarGeometry& g, double q, int nmax, std::vector<cplx> rhs = {});

/// Overdetermined system for mu_n, n != 0, given mu_0. Rows are ordered
/// n = -nmax..-1, 1..nmax, 0 so that the diagonal fills the leading block.
struct ReducedSystem {
  int nmax = 0;
  cplx mu0;
  std::vector<cplx> rhs;  // Psi_n in natural order n = -nmax .. nmax
  DiagPlusSeparable matrix;
  CVector ordered_rhs() const;
  /// Expand a solution over n != 0 back to n = -nmax .. nmax with mu_0 inserted.
  std::vector<cplx> expand(const CVector& x) const;
};

ReducedSystem projection_reduce(const SpectralSystem& s, cplx mu0);

}  // namespace star
