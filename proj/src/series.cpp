#include <cmath>
#include <numbers>

#include "star/solver.hpp"
#include "star/stability.hpp"

namespace star {

namespace {

double moment_scale(const StarGeometry& g) {
  double s = 0.0;
  for (const auto& r : g.rays()) s += std::abs(r.weight / r.uz);
  return s;
}

}  // namespace

SeriesEvaluator::SeriesEvaluator(const SpectralSystem& s, int nsum) : sys_(&s), nsum_(nsum) {
  if (nsum < 1) throw SolverError("n_sum must be at least 1");
  const auto m = sigma_moments(s.geometry);
  if (std::abs(m.sigma1) < 1e-12 * moment_scale(s.geometry))
    throw SolverError("Sigma1 = 0: the series asymptote is undefined");
  sigma1_ = m.sigma1;
  sigma2_ = m.sigma2;
  const int top = std::max(nsum, s.nmax);
  nsum_ = top;
  inv_d_.resize(2 * top + 1);
  for (int n = -top; n <= top; ++n) inv_d_[n + top] = 1.0 / diagonal_entry(s.geometry, s.q, n);
}

cplx SeriesEvaluator::inverse_diagonal(int n) const {
  if (std::abs(n) <= nsum_) return inv_d_[n + nsum_];
  return 1.0 / diagonal_entry(sys_->geometry, sys_->q, n);
}

cplx SeriesEvaluator::partial(const SpectralVector& u, const SpectralVector& v, int nmax) const {
  const double w = sys_->width();
  cplx s = 0.0;
  for (int n = nmax; n >= 1; --n)
    s += std::conj(u.at(n, w)) * v.at(n, w) * inverse_diagonal(n) +
         std::conj(u.at(-n, w)) * v.at(-n, w) * inverse_diagonal(-n);
  return s + std::conj(u.at(0, w)) * v.at(0, w) * inverse_diagonal(0);
}

cplx SeriesEvaluator::asymptote(const SpectralVector& u, const SpectralVector& v) const {
  return cplx(0.0, 2.0) * ((u.beta + v.beta) * sigma1_ + sys_->q * sigma2_) / (sigma1_ * sigma1_);
}

// sum_{n = from}^{nsum} (t_n - tau / kappa_n^2), smallest terms first
cplx SeriesEvaluator::shifted_sum(const SpectralVector& u, const SpectralVector& v, int from) const {
  const double w = sys_->width(), bu = u.beta, bv = v.beta;
  const cplx tau = asymptote(u, v);
  cplx s = 0.0;
  for (int n = nsum_; n >= from; --n) {
    const double k = kappa(n, w);
    const cplx t = inv_d_[n + nsum_] / ((bu + k) * (bv + k)) +
                   inv_d_[-n + nsum_] / ((bu - k) * (bv - k));
    s += t - tau / (k * k);
  }
  return s;
}

cplx SeriesEvaluator::inner(const SpectralVector& u, const SpectralVector& v) const {
  using Kind = SpectralVector::Kind;
  const double w = sys_->width();
  if (u.kind == Kind::unit_zero || v.kind == Kind::unit_zero)
    return std::conj(u.at(0, w)) * v.at(0, w) * inv_d_[nsum_];

  cplx s = shifted_sum(u, v, 1) + w * w * asymptote(u, v) / 24.0;
  if (!u.skip_zero && !v.skip_zero) {
    if (u.beta == 0.0 || v.beta == 0.0) throw SolverError("lattice vector with beta = 0 must skip n = 0");
    s += inv_d_[nsum_] / (u.beta * v.beta);
  }
  return std::conj(u.coef) * v.coef * s;
}

namespace {

double trigamma(double x) {
  double acc = 0.0;
  while (x < 10.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double x2 = 1.0 / (x * x);
  return acc + 1.0 / x + 0.5 * x2 +
         x2 / x * (1.0 / 6.0 - x2 * (1.0 / 30.0 - x2 * (1.0 / 42.0 - x2 / 30.0)));
}

}  // namespace

cplx SeriesEvaluator::tail(const SpectralVector& u, const SpectralVector& v, int nmax) const {
  using Kind = SpectralVector::Kind;
  if (u.kind == Kind::unit_zero || v.kind == Kind::unit_zero) return 0.0;
  const double w = sys_->width();
  const double inv_k2 = w * w / (4.0 * std::numbers::pi * std::numbers::pi) * trigamma(nmax + 1.0);
  const cplx s = shifted_sum(u, v, nmax + 1) + asymptote(u, v) * inv_k2;
  return std::conj(u.coef) * v.coef * s;
}

cplx series_mjk(const StarGeometry& g, double q, int j, int k, int nsum) {
  if (q == 0.0) throw SolverError("series element needs q != 0");
  if (j < 0 || k < 0 || j >= g.size() || k >= g.size()) throw SolverError("ray index out of range");
  const auto s = assemble(g, q, 0);
  if (s.axial[j] || s.axial[k]) throw SolverError("series element needs rays with u_y != 0");
  const SeriesEvaluator ev(s, nsum);
  return ev.inner({SpectralVector::Kind::lattice, 1.0, s.beta[j], false},
                  {SpectralVector::Kind::lattice, 1.0, s.beta[k], false});
}

cplx brute_mjk(const StarGeometry& g, double q, int j, int k, long nterms) {
  const double w = g.width();
  const double bj = q * g.ray(j).uy / g.ray(j).uz;
  const double bk = q * g.ray(k).uy / g.ray(k).uz;
  cplx s = 0.0;
  for (long n = nterms; n >= 1; --n) {
    const int ni = static_cast<int>(n);
    const double kp = kappa(ni, w);
    s += 1.0 / ((bj + kp) * (bk + kp) * diagonal_entry(g, q, ni)) +
         1.0 / ((bj - kp) * (bk - kp) * diagonal_entry(g, q, -ni));
  }
  return s + 1.0 / (bj * bk * diagonal_entry(g, q, 0));
}

}  // namespace star
