#include <cmath>

#include "star/separable.hpp"

namespace star {

namespace {

// The recursion subtracts nearly equal matrices at small lambda; it runs in
// extended precision and rounds once at the end.
using xcplx = std::complex<long double>;
using XVector = Eigen::Matrix<xcplx, Eigen::Dynamic, 1>;
using XMatrix = Eigen::Matrix<xcplx, Eigen::Dynamic, Eigen::Dynamic>;

XVector widen(const CVector& v) { return v.cast<xcplx>(); }

long double norm2(const XVector& v) {
  long double s = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::norm(v(i));
  return s;
}

xcplx dot(const XVector& a, const XVector& b) {
  xcplx s = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) s += std::conj(a(i)) * b(i);
  return s;
}

// S <- S - (1/den) [g Su Sv* + conj(g) Sv Su* + cu Su Su* - cv Sv Sv*]
void rank_two_update(XMatrix& s, const XVector& u, const XVector& v, xcplx g, long double cu,
                     long double cv, long double den) {
  const XVector su = s * u;
  const XVector sv = s * v;
  const Eigen::Index n = s.rows();
  for (Eigen::Index c = 0; c < n; ++c) {
    const xcplx su_c = std::conj(su(c)), sv_c = std::conj(sv(c));
    for (Eigen::Index r = 0; r < n; ++r) {
      const xcplx t = g * su(r) * sv_c + std::conj(g) * sv(r) * su_c + cu * su(r) * su_c -
                      cv * sv(r) * sv_c;
      s(r, c) -= t / den;
    }
  }
  // keep exactly Hermitian
  for (Eigen::Index c = 0; c < n; ++c) {
    s(c, c) = xcplx(s(c, c).real(), 0);
    for (Eigen::Index r = c + 1; r < n; ++r) {
      const xcplx m = 0.5L * (s(r, c) + std::conj(s(c, r)));
      s(r, c) = m;
      s(c, r) = std::conj(m);
    }
  }
}

}  // namespace

DiagPlusSeparable::DiagPlusSeparable(int r, int c, CVector d) : rows(r), cols(c), diag(std::move(d)) {
  if (diag.size() != std::min(r, c)) throw SolverError("diagonal length must be min(rows, cols)");
}

void DiagPlusSeparable::add_term(CVector b, CVector a) {
  if (b.size() != rows || a.size() != cols) throw SolverError("separable term has wrong length");
  left.push_back(std::move(b));
  right.push_back(std::move(a));
}

CVector DiagPlusSeparable::apply(const CVector& x) const {
  if (x.size() != cols) throw SolverError("dimension mismatch in apply");
  CVector y = CVector::Zero(rows);
  const Eigen::Index m = diag.size();
  y.head(m) = diag.cwiseProduct(x.head(m));
  for (int k = 0; k < terms(); ++k) y += left[k] * right[k].dot(x);
  return y;
}

CVector DiagPlusSeparable::apply_adjoint(const CVector& y) const {
  if (y.size() != rows) throw SolverError("dimension mismatch in adjoint apply");
  CVector x = CVector::Zero(cols);
  const Eigen::Index m = diag.size();
  x.head(m) = diag.conjugate().cwiseProduct(y.head(m));
  for (int k = 0; k < terms(); ++k) x += right[k] * left[k].dot(y);
  return x;
}

CMatrix DiagPlusSeparable::dense() const {
  CMatrix a = CMatrix::Zero(rows, cols);
  for (Eigen::Index i = 0; i < diag.size(); ++i) a(i, i) = diag(i);
  for (int k = 0; k < terms(); ++k) a += left[k] * right[k].adjoint();
  return a;
}

PseudoInverseState recursive_pinv(const DiagPlusSeparable& a, double lambda) {
  if (!(lambda > 0.0)) throw SolverError("recursive pseudo-inverse needs lambda > 0");
  const int n = a.rows, m = a.cols, mn = std::min(n, m);
  const long double lam2 = static_cast<long double>(lambda) * lambda;

  // Track the side whose starting matrix has no 1/lambda^2 padding; the
  // other side's scalar comes from (D D* + l^2)^-1 = (1 - D (D* D + l^2)^-1 D*) / l^2.
  const bool track_rows = n <= m;
  const bool track_cols = m <= n;

  XMatrix d = XMatrix::Zero(n, m);
  for (int i = 0; i < mn; ++i) d(i, i) = a.diag(i);
  XMatrix sr, sc;
  if (track_rows) {
    sr = XMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
      sr(i, i) = i < mn ? 1.0L / (std::norm(xcplx(a.diag(i))) + lam2) : 1.0L / lam2;
  }
  if (track_cols) {
    sc = XMatrix::Zero(m, m);
    for (int i = 0; i < m; ++i)
      sc(i, i) = i < mn ? 1.0L / (std::norm(xcplx(a.diag(i))) + lam2) : 1.0L / lam2;
  }

  PseudoInverseState st;
  st.lambda = lambda;
  for (int k = 0; k < a.terms(); ++k) {
    const XVector b = widen(a.left[k]);
    const XVector av = widen(a.right[k]);
    const XVector w = d.adjoint() * b;  // D* b
    const XVector v = d * av;           // D a

    xcplx gamma;
    long double p, q;
    if (track_cols) {
      const XVector sa = sc * av;
      gamma = 1.0L + dot(sa, w);  // <a| S_M D* |b>
      q = dot(av, sa).real();
      p = track_rows ? dot(b, sr * b).real() : (norm2(b) - dot(w, sc * w).real()) / lam2;
    } else {
      const XVector sb = sr * b;
      gamma = 1.0L + dot(v, sb);  // <a| D* S_N |b>
      p = dot(b, sb).real();
      q = (norm2(av) - dot(v, sr * v).real()) / lam2;
    }
    const long double den = std::norm(gamma) + lam2 * p * q;
    st.trace.push_back({cplx(static_cast<double>(gamma.real()), static_cast<double>(gamma.imag())),
                        static_cast<double>(p), static_cast<double>(q), static_cast<double>(den)});
    if (!(den > 0.0L)) throw SolverError("pseudo-T denominator is not positive");

    if (track_cols) rank_two_update(sc, av, w, gamma, lam2 * p, q, den);
    if (track_rows) rank_two_update(sr, b, v, std::conj(gamma), lam2 * q, p, den);
    d += b * av.adjoint();
  }
  st.steps = a.terms();

  XMatrix pinv;
  if (track_cols) {
    pinv = sc * d.adjoint();
    if (!track_rows) sr = (XMatrix::Identity(n, n) - d * pinv) / lam2;
  } else {
    pinv = d.adjoint() * sr;
    sc = (XMatrix::Identity(m, m) - pinv * d) / lam2;
  }
  st.s_rows = sr.cast<cplx>();
  st.s_cols = sc.cast<cplx>();
  st.pinv = pinv.cast<cplx>();
  return st;
}

CVector apply_pinv(const PseudoInverseState& state, const CVector& rhs) {
  if (rhs.size() != state.pinv.cols()) throw SolverError("dimension mismatch in apply_pinv");
  return state.pinv * rhs;
}

}  // namespace star
