#include <cmath>
#include <limits>

#include "star/solver.hpp"
#include "star/stability.hpp"

namespace star {

namespace {

double condition_number(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double lo = s(s.size() - 1);
  return lo > 0.0 ? s(0) / lo : std::numeric_limits<double>::infinity();
}

constexpr double kConditionLimit = 1e13;

}  // namespace

cplx DirectSolution::mu(int n) const {
  const int nm = system.nmax;
  const double w = system.width();
  cplx v = std::abs(n) <= nm ? rhs[n + nm] : cplx(0.0);
  for (std::size_t t = 0; t < system.terms.size(); ++t) v -= x(static_cast<Eigen::Index>(t)) * system.terms[t].left.at(n, w);
  return v / (std::abs(n) <= nm ? system.diag[n + nm] : system.diagonal(n));
}

std::vector<cplx> DirectSolution::coefficients() const {
  std::vector<cplx> out;
  for (int n = -system.nmax; n <= system.nmax; ++n) out.push_back(mu(n));
  return out;
}

DirectSolution direct_solve(const SpectralSystem& s, int nsum) {
  DirectSolution out;
  out.system = s;
  out.rhs = s.rhs;
  const int nm = s.nmax;
  const int kt = static_cast<int>(s.terms.size());
  out.x = CVector::Zero(kt);

  double dmax = 0.0;
  for (const auto& d : s.diag) dmax = std::max(dmax, std::abs(d));
  for (int n = -nm; n <= nm; ++n)
    if (std::abs(s.diag[n + nm]) < 1e-12 * dmax) {
      out.flagged = true;
      out.reason = "near-zero diagonal entry d_" + std::to_string(n);
      return out;
    }
  if (kt == 0) {
    out.condition = 1.0;
    return out;
  }

  const SeriesEvaluator ev(s, nsum);
  const double w = s.width();
  out.m = CMatrix(kt, kt);
  out.r = CVector(kt);
  for (int j = 0; j < kt; ++j) {
    const auto& aj = s.terms[j].right;
    for (int t = 0; t < kt; ++t) out.m(j, t) = ev.inner(aj, s.terms[t].left);
    cplx r = 0.0;
    for (int n = -nm; n <= nm; ++n) r += std::conj(aj.at(n, w)) * s.rhs[n + nm] / s.diag[n + nm];
    out.r(j) = r;
  }
  const CMatrix sys = CMatrix::Identity(kt, kt) + out.m;
  out.condition = condition_number(sys);
  if (!std::isfinite(out.condition) || out.condition > kConditionLimit) {
    out.flagged = true;
    out.reason = "singular reduced system";
    return out;
  }
  out.x = sys.fullPivLu().solve(out.r);
  return out;
}

std::vector<cplx> regularized_direct(const DiagPlusSeparable& a, const CVector& rhs, double lambda,
                                     double* condition) {
  if (rhs.size() != a.rows) throw SolverError("dimension mismatch in regularized solve");
  const int m = a.cols, mn = static_cast<int>(a.diag.size());
  const double lam2 = lambda * lambda;
  CVector g = CVector::Constant(m, lam2);
  for (int i = 0; i < mn; ++i) g(i) += std::norm(a.diag(i));
  for (int i = 0; i < m; ++i)
    if (std::abs(g(i)) == 0.0) throw SolverError("normal equations are singular at lambda = 0");

  // A*A + l^2 = G + sum_t |D* b_t><a_t| + |a_t><w_t|, w_t = D* b_t + sum_s <b_s|b_t> a_s
  const int k = a.terms();
  std::vector<CVector> dtb(k), lefts, rights;
  for (int t = 0; t < k; ++t) {
    dtb[t] = CVector::Zero(m);
    for (int i = 0; i < mn; ++i) dtb[t](i) = std::conj(a.diag(i)) * a.left[t](i);
  }
  for (int t = 0; t < k; ++t) {
    lefts.push_back(dtb[t]);
    rights.push_back(a.right[t]);
  }
  for (int t = 0; t < k; ++t) {
    CVector wt = dtb[t];
    for (int s = 0; s < k; ++s) wt += a.left[s].dot(a.left[t]) * a.right[s];
    lefts.push_back(a.right[t]);
    rights.push_back(wt);
  }

  const CVector b = a.apply_adjoint(rhs);
  const CVector y = b.cwiseQuotient(g);
  const int kt = static_cast<int>(lefts.size());
  std::vector<CVector> gl(kt);
  for (int t = 0; t < kt; ++t) gl[t] = lefts[t].cwiseQuotient(g);
  CMatrix sys = CMatrix::Identity(kt, kt);
  CVector r(kt);
  for (int j = 0; j < kt; ++j) {
    for (int t = 0; t < kt; ++t) sys(j, t) += rights[j].dot(gl[t]);
    r(j) = rights[j].dot(y);
  }
  if (condition) *condition = condition_number(sys);
  const CVector x = kt ? CVector(sys.fullPivLu().solve(r)) : CVector();
  CVector mu = y;
  for (int t = 0; t < kt; ++t) mu -= x(t) * gl[t];
  return {mu.data(), mu.data() + mu.size()};
}

DiagPlusSeparable folded_matrix(const SpectralSystem& s, int nsum) {
  const int nm = s.nmax, n = s.size();
  const int kt = static_cast<int>(s.terms.size());
  DiagPlusSeparable base = s.matrix();
  if (kt == 0) return base;

  const SeriesEvaluator ev(s, nsum);
  CMatrix t(kt, kt);
  for (int i = 0; i < kt; ++i)
    for (int j = 0; j < kt; ++j) t(i, j) = ev.tail(s.terms[i].right, s.terms[j].left, nm);
  const CMatrix wm = (CMatrix::Identity(kt, kt) + t).fullPivLu().inverse();

  DiagPlusSeparable out(n, n, base.diag);
  for (int j = 0; j < kt; ++j) {
    CVector b = CVector::Zero(n);
    for (int i = 0; i < kt; ++i) b += base.left[i] * wm(i, j);
    out.add_term(b, base.right[j]);
  }
  return out;
}

Q0Solution solve_q0(const StarGeometry& g, const std::vector<cplx>& phi, cplx delta0,
                    std::optional<cplx> external_mu0) {
  if (phi.size() % 2 == 0) throw SolverError("q = 0 column must have odd length");
  const int nm = static_cast<int>(phi.size() - 1) / 2;
  const auto m = sigma_moments(g);
  double scale = 0.0;
  for (const auto& r : g.rays()) scale += std::abs(r.weight / r.uz);
  if (std::abs(m.sigma1) < 1e-12 * scale) throw SolverError("Sigma1 = 0: q = 0 slice cannot be inverted");

  Q0Solution out;
  const double width = g.width();
  out.amplification = m.sigma0 != 0.0 ? 2.0 / (width * m.sigma0) : std::numeric_limits<double>::infinity();
  out.poorly_conditioned = std::abs(m.sigma0) < 1e-2 * scale;
  cplx mu0;
  if (external_mu0) {
    mu0 = *external_mu0;
  } else {
    if (std::abs(m.sigma0) < 1e-12 * scale)
      throw SolverError("Sigma0 = 0: mu_0(0) needs ballistic data");
    mu0 = 2.0 * delta0 / m.sigma0;
  }
  out.mu.resize(phi.size());
  const cplx i(0.0, 1.0);
  for (int n = -nm; n <= nm; ++n)
    out.mu[n + nm] = n == 0 ? mu0 : mu0 - i * kappa(n, width) * phi[n + nm] / m.sigma1;
  return out;
}

}  // namespace star
