#include "star/spectral.hpp"

#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

namespace star {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Batched 1-D complex transforms of length n; planning is not thread safe.
class Fft {
 public:
  Fft(int n, int sign) : n_(n) {
    in_ = fftw_alloc_complex(n);
    out_ = fftw_alloc_complex(n);
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(n, in_, out_, sign, FFTW_ESTIMATE);
  }
  ~Fft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  std::vector<cplx> run(const std::vector<cplx>& x) {
    for (int i = 0; i < n_; ++i) {
      in_[i][0] = x[i].real();
      in_[i][1] = x[i].imag();
    }
    fftw_execute(plan_);
    std::vector<cplx> y(n_);
    for (int i = 0; i < n_; ++i) y[i] = {out_[i][0], out_[i][1]};
    return y;
  }

 private:
  int n_;
  fftw_complex* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

// int_0^1 e^{-i t s} ds and int_0^1 s e^{-i t s} ds
cplx moment0(double t) {
  if (std::abs(t) < 1e-4) return {1.0 - t * t / 6.0, -t / 2.0};
  const cplx it(0.0, t);
  return (1.0 - std::exp(-it)) / it;
}

cplx moment1(double t) {
  if (std::abs(t) < 1e-4) return {0.5 - t * t / 8.0, -t / 3.0};
  const cplx it(0.0, t);
  return (moment0(t) - std::exp(-it)) / it;
}

// Y transform of every Z row; result[m][j] for FFT row m and data row j.
std::vector<std::vector<cplx>> y_rows(const std::vector<double>& v, int ny, int rows,
                                      const SamplingGrid& g, Quadrature quad) {
  Fft fft(ny, FFTW_FORWARD);
  std::vector<std::vector<cplx>> out(ny, std::vector<cplx>(rows));
  std::vector<cplx> col(ny);
  const double dq = 2.0 * std::numbers::pi / (ny * g.h);
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < ny; ++i) col[i] = v[static_cast<std::size_t>(i) * rows + j];
    const auto f = fft.run(col);
    for (int m = 0; m < ny; ++m) {
      const double q = dq * (2 * m < ny ? m : m - ny);
      double w = g.h;
      if (quad == Quadrature::linear) w *= std::pow(sinc(0.5 * q * g.h), 2);
      out[m][j] = w * std::exp(cplx(0.0, -q * g.y0)) * f[m];
    }
  }
  return out;
}

}  // namespace

CoefficientTable::CoefficientTable(const SamplingGrid& g, int nmax_)
    : nmax(nmax_), grid(g), values(static_cast<std::size_t>(g.ny) * (2 * nmax_ + 1)) {
  if (nmax_ < 0) throw std::invalid_argument("nmax must be non-negative");
}

std::vector<cplx> CoefficientTable::row(int m) const {
  const auto b = values.begin() + static_cast<std::ptrdiff_t>(m) * cols();
  return {b, b + cols()};
}

void CoefficientTable::set_row(int m, const std::vector<cplx>& r) {
  if (static_cast<int>(r.size()) != cols()) throw std::invalid_argument("row has wrong length");
  std::copy(r.begin(), r.end(), values.begin() + static_cast<std::ptrdiff_t>(m) * cols());
}

CoefficientTable field_to_coefficients(const DataField& f, int nmax, Quadrature quad) {
  const SamplingGrid& g = f.grid;
  if (2 * nmax + 1 > g.n + 1) throw std::invalid_argument("nmax exceeds the Z sampling");
  const int rows = g.rows();
  const int m_int = g.n + 1;  // intervals on [0, L]
  auto yr = y_rows(f.values, g.ny, rows, g, quad);
  CoefficientTable t(g, nmax);

  std::vector<cplx> phase(m_int);
  for (int n = -nmax; n <= nmax; ++n) {
    for (int j = 0; j < m_int; ++j)
      phase[j] = std::exp(cplx(0.0, -2.0 * std::numbers::pi * n * j / m_int));
    const double th = kappa(n, g.width) * g.h;
    const double interior = std::pow(sinc(0.5 * th), 2);
    const cplx left = moment0(th) - moment1(th);
    const cplx right = moment1(th) * phase[m_int - 1];
    for (int m = 0; m < g.ny; ++m) {
      const auto& r = yr[m];
      cplx s = 0.0;
      if (quad == Quadrature::linear) {
        for (int j = 1; j < m_int; ++j) s += r[j] * phase[j];
        s = interior * s + left * r[0] + right * r[m_int];
      } else {
        s = 0.5 * (r[0] + r[m_int]);
        for (int j = 1; j < m_int; ++j) s += r[j] * phase[j];
      }
      t.at(m, n) = g.h * s;
    }
  }
  return t;
}

CoefficientTable field_to_coefficients(const ImageGrid& img, int nmax) {
  SamplingGrid g;
  g.n = img.nz;
  g.ny = img.ny;
  g.h = img.h;
  g.y0 = img.y0;
  g.width = (img.nz + 1) * img.h;
  DataField f(g);
  for (int i = 0; i < img.ny; ++i)
    for (int j = 0; j < img.nz; ++j) f.at(i, j + 1) = img.at(i, j);
  return field_to_coefficients(f, nmax, Quadrature::trapezoid);
}

ImageGrid coefficients_to_image(const CoefficientTable& t, double* imag_residue) {
  const SamplingGrid& g = t.grid;
  const int nz = g.n, ny = g.ny;
  const double w = ny * g.h;
  // Z synthesis per row, then the Y inverse per z.
  std::vector<std::vector<cplx>> zs(ny, std::vector<cplx>(nz));
  for (int m = 0; m < ny; ++m) {
    const cplx ph = std::exp(cplx(0.0, t.q(m) * g.y0));
    for (int j = 0; j < nz; ++j) {
      const double z = (j + 1) * g.h;
      cplx s = 0.0;
      for (int n = -t.nmax; n <= t.nmax; ++n) s += t.at(m, n) * std::exp(cplx(0.0, kappa(n, g.width) * z));
      zs[m][j] = ph * s / g.width;
    }
  }
  Fft fft(ny, FFTW_BACKWARD);
  ImageGrid img(ny, nz, g.h, g.y0);
  double max_re = 0.0, max_im = 0.0;
  std::vector<cplx> col(ny);
  for (int j = 0; j < nz; ++j) {
    for (int m = 0; m < ny; ++m) col[m] = zs[m][j];
    const auto y = fft.run(col);
    for (int i = 0; i < ny; ++i) {
      const cplx v = y[i] / w;
      img.at(i, j) = v.real();
      max_re = std::max(max_re, std::abs(v.real()));
      max_im = std::max(max_im, std::abs(v.imag()));
    }
  }
  if (imag_residue) *imag_residue = max_re > 0.0 ? max_im / max_re : max_im;
  return img;
}

std::vector<cplx> y_transform(const std::vector<double>& samples, const SamplingGrid& g,
                              Quadrature quad) {
  if (static_cast<int>(samples.size()) != g.ny) throw std::invalid_argument("sample count must equal ny");
  auto r = y_rows(samples, g.ny, 1, g, quad);
  std::vector<cplx> out(g.ny);
  for (int m = 0; m < g.ny; ++m) out[m] = r[m][0];
  return out;
}

BoundaryAverage boundary_average(const DataField& f, Quadrature quad) {
  BoundaryAverage b;
  const int last = f.grid.rows() - 1;
  b.samples.resize(f.grid.ny);
  for (int i = 0; i < f.grid.ny; ++i) b.samples[i] = 0.5 * (f.at(i, 0) + f.at(i, last));
  b.transform = y_transform(b.samples, f.grid, quad);
  return b;
}

cplx SpectralVector::at(int n, double width) const {
  if (kind == Kind::unit_zero) return n == 0 ? coef : cplx(0.0);
  if (n == 0 && skip_zero) return 0.0;
  return coef / (beta + kappa(n, width));
}

namespace {

bool is_axial(const Ray& r, double q) { return q == 0.0 || std::abs(r.uy) < 1e-14; }

double resonance_tolerance(double width) { return 1e-12 * 2.0 * std::numbers::pi / width; }

}  // namespace

cplx diagonal_entry(const StarGeometry& g, double q, int n) {
  const double w = g.width();
  const cplx i(0.0, 1.0);
  cplx d = 0.0;
  for (int k = 0; k < g.size(); ++k) {
    const auto& r = g.ray(k);
    if (is_axial(r, q)) {
      if (n == 0)
        d += r.weight * (g.exit_boundary(k) - 0.5 * w) / r.uz;
      else
        d += i * r.weight / (r.uz * kappa(n, w));
      continue;
    }
    const double den = q * r.uy / r.uz + kappa(n, w);
    if (std::abs(den) < resonance_tolerance(w))
      throw ResonanceError(k, n, "resonant ray: beta + kappa_n = 0");
    d += i * r.weight / (r.uz * den);
  }
  return d;
}

cplx SpectralSystem::diagonal(int n) const { return diagonal_entry(geometry, q, n); }

std::vector<cplx> SpectralSystem::a_vector(int k) const {
  std::vector<cplx> a(size());
  for (int n = -nmax; n <= nmax; ++n) a[n + nmax] = 1.0 / (beta[k] + kappa(n, width()));
  return a;
}

std::vector<cplx> SpectralSystem::apply(const std::vector<cplx>& mu) const {
  if (static_cast<int>(mu.size()) != size()) throw SolverError("coefficient vector has wrong length");
  std::vector<cplx> proj(terms.size());
  for (std::size_t t = 0; t < terms.size(); ++t) {
    cplx s = 0.0;
    for (int n = -nmax; n <= nmax; ++n) s += std::conj(terms[t].right.at(n, width())) * mu[n + nmax];
    proj[t] = s;
  }
  return apply(mu, proj);
}

std::vector<cplx> SpectralSystem::apply(const std::vector<cplx>& mu,
                                        const std::vector<cplx>& projections) const {
  if (static_cast<int>(mu.size()) != size() || projections.size() != terms.size())
    throw SolverError("dimension mismatch in system apply");
  std::vector<cplx> out(size());
  for (int n = -nmax; n <= nmax; ++n) {
    cplx v = diag[n + nmax] * mu[n + nmax];
    for (std::size_t t = 0; t < terms.size(); ++t) v += terms[t].left.at(n, width()) * projections[t];
    out[n + nmax] = v;
  }
  return out;
}

DiagPlusSeparable SpectralSystem::matrix() const {
  const int n = size();
  CVector d(n);
  for (int i = 0; i < n; ++i) d(i) = diag[i];
  DiagPlusSeparable a(n, n, d);
  for (const auto& t : terms) {
    CVector b(n), r(n);
    for (int m = -nmax; m <= nmax; ++m) {
      b(m + nmax) = t.left.at(m, width());
      r(m + nmax) = t.right.at(m, width());
    }
    a.add_term(b, r);
  }
  return a;
}

SpectralSystem assemble(const StarGeometry& g, double q, int nmax, std::vector<cplx> rhs) {
  if (nmax < 0) throw SolverError("nmax must be non-negative");
  SpectralSystem s;
  s.geometry = g;
  s.q = q;
  s.nmax = nmax;
  const double w = g.width();
  const cplx i(0.0, 1.0);
  for (int k = 0; k < g.size(); ++k) {
    const auto& r = g.ray(k);
    const bool ax = is_axial(r, q);
    const double b = ax ? 0.0 : q * r.uy / r.uz;
    s.beta.push_back(b);
    s.axial.push_back(ax);
    if (ax) {
      s.alpha.push_back(0.0);
      const cplx c = -i * r.weight / r.uz;
      s.terms.push_back({{SpectralVector::Kind::unit_zero, 1.0, 0.0, false},
                         {SpectralVector::Kind::lattice, std::conj(c), 0.0, true}, k});
      s.terms.push_back({{SpectralVector::Kind::lattice, c, 0.0, true},
                         {SpectralVector::Kind::unit_zero, 1.0, 0.0, false}, k});
    } else {
      const double xi = g.exit_boundary(k);
      const cplx a = std::exp(i * (b * xi)) * (std::exp(-i * (b * w)) - 1.0) / (w * r.uz);
      s.alpha.push_back(a);
      s.terms.push_back({{SpectralVector::Kind::lattice, r.weight * a, b, false},
                         {SpectralVector::Kind::lattice, 1.0, b, false}, k});
    }
  }
  s.diag.resize(2 * nmax + 1);
  for (int n = -nmax; n <= nmax; ++n) s.diag[n + nmax] = diagonal_entry(g, q, n);
  if (rhs.empty()) rhs.assign(2 * nmax + 1, 0.0);
  if (static_cast<int>(rhs.size()) != 2 * nmax + 1) throw SolverError("right-hand side has wrong length");
  s.rhs = std::move(rhs);
  return s;
}

namespace {

int reduced_index(int n, int nmax) {
  if (n < 0) return n + nmax;
  if (n > 0) return n + nmax - 1;
  return 2 * nmax;
}

}  // namespace

CVector ReducedSystem::ordered_rhs() const {
  CVector r(2 * nmax + 1);
  for (int n = -nmax; n <= nmax; ++n) r(reduced_index(n, nmax)) = rhs[n + nmax];
  return r;
}

std::vector<cplx> ReducedSystem::expand(const CVector& x) const {
  if (x.size() != 2 * nmax) throw SolverError("reduced solution has wrong length");
  std::vector<cplx> mu(2 * nmax + 1);
  for (int n = -nmax; n <= nmax; ++n) mu[n + nmax] = n == 0 ? mu0 : x(reduced_index(n, nmax));
  return mu;
}

ReducedSystem projection_reduce(const SpectralSystem& s, cplx mu0) {
  if (s.q == 0.0) throw SolverError("projection reduction needs q != 0");
  const int nm = s.nmax, n = s.size();
  const double w = s.width();
  ReducedSystem r;
  r.nmax = nm;
  r.mu0 = mu0;
  r.rhs = s.rhs;
  for (int m = -nm; m <= nm; ++m) {
    cplx col0 = m == 0 ? s.diag[nm] : cplx(0.0);
    for (const auto& t : s.terms) col0 += t.left.at(m, w) * std::conj(t.right.at(0, w));
    r.rhs[m + nm] -= mu0 * col0;
  }
  CVector d(2 * nm);
  for (int m = -nm; m <= nm; ++m)
    if (m != 0) d(reduced_index(m, nm)) = s.diag[m + nm];
  r.matrix = DiagPlusSeparable(n, 2 * nm, d);
  for (const auto& t : s.terms) {
    CVector b(n), a(2 * nm);
    for (int m = -nm; m <= nm; ++m) {
      b(reduced_index(m, nm)) = t.left.at(m, w);
      if (m != 0) a(reduced_index(m, nm)) = t.right.at(m, w);
    }
    r.matrix.add_term(b, a);
  }
  return r;
}

}  // namespace star
