#pragma once

#include <optional>
#include <string>
#include <vector>

#include "star/forward.hpp"
#include "star/geometry.hpp"
#include "star/phantom.hpp"
#include "star/separable.hpp"
#include "star/spectral.hpp"

namespace star {

/// Infinite sums <u|D^-1|v> over all n for lattice vectors of one q-slice,
/// accelerated by subtracting the 1/kappa_n^2 asymptote.
class SeriesEvaluator {
 public:
  SeriesEvaluator(const SpectralSystem& s, int nsum);

  int nsum() const { return nsum_; }
  cplx inverse_diagonal(int n) const;
  cplx inner(const SpectralVector& u, const SpectralVector& v) const;
  /// sum over |n| <= nmax of conj(u_n) v_n / d_n
  cplx partial(const SpectralVector& u, const SpectralVector& v, int nmax) const;
  /// sum over |n| > nmax, accelerated the same way as `inner`
  cplx tail(const SpectralVector& u, const SpectralVector& v, int nmax) const;

 private:
  const SpectralSystem* sys_;
  int nsum_;
  double sigma1_, sigma2_;
  cplx asymptote(const SpectralVector& u, const SpectralVector& v) const;
  cplx shifted_sum(const SpectralVector& u, const SpectralVector& v, int from) const;
  std::vector<cplx> inv_d_;  // 1 / d_n, n = -nsum .. nsum
};

/// <a_j|D^-1|a_k> for rays with u_y != 0.
cplx series_mjk(const StarGeometry& g, double q, int j, int k, int nsum);
/// Plain partial sum of the same element over |n| <= nterms.
cplx brute_mjk(const StarGeometry& g, double q, int j, int k, long nterms);

struct DirectSolution {
  SpectralSystem system;
  std::vector<cplx> rhs;  // Phi_n, |n| <= nmax; zero beyond
  CMatrix m;              // M_jt = <a_j|D^-1|b_t>
  CVector r;              // R_j = <a_j|D^-1|Phi>
  CVector x;              // <a_t|mu>
  double condition = 0.0;
  bool flagged = false;
  std::string reason;

  cplx mu(int n) const;
  std::vector<cplx> coefficients() const;  // |n| <= nmax
};

/// Exact inverse of the infinite system with Phi_n = 0 for |n| > nmax.
DirectSolution direct_solve(const SpectralSystem& s, int nsum);

/// Tikhonov solution of the truncated system via its normal equations,
/// themselves diagonal plus 2K separable terms.
std::vector<cplx> regularized_direct(const DiagPlusSeparable& a, const CVector& rhs, double lambda,
                                     double* condition = nullptr);

/// Truncated matrix whose separable terms absorb the |n| > nmax tail of the
/// infinite system under zero-extended data.
DiagPlusSeparable folded_matrix(const SpectralSystem& s, int nsum);

struct Q0Solution {
  std::vector<cplx> mu;  // |n| <= nmax
  double amplification = 0.0;  // 2 / (L Sigma0)
  bool poorly_conditioned = false;
};

/// q = 0 solution; `external_mu0` replaces 2 Delta(0) / Sigma0.
Q0Solution solve_q0(const StarGeometry& g, const std::vector<cplx>& phi, cplx delta0,
                    std::optional<cplx> external_mu0 = std::nullopt);

enum class Method { recursive, direct };
enum class Truncation { zero_data, truncate_matrix };

std::string to_string(Method m);
Method parse_method(const std::string& s);
std::string to_string(Truncation t);
Truncation parse_truncation(const std::string& s);

struct ReconstructOptions {
  Method method = Method::direct;
  double lambda = 0.0;
  int nmax = -1;  // -1: (N - 1) / 2
  int nsum = 200;
  Truncation truncation = Truncation::zero_data;
  bool use_projection = false;
  std::vector<double> ballistic;  // int mu dz at the grid's Y nodes
  int threads = 0;                // 0: STAR_THREADS or hardware concurrency
  Quadrature quadrature = Quadrature::linear;
};

struct SliceDiagnostic {
  int row = 0;
  double q = 0.0;
  double q_solved = 0.0;  // shifted off a resonance
  double condition = 0.0;
  bool flagged = false;
  std::string reason;
};

struct Reconstruction {
  ImageGrid image;
  CoefficientTable coefficients;
  std::vector<SliceDiagnostic> slices;  // solved half-spectrum rows
  int failures = 0;
  double imag_residue = 0.0;
  double lambda_used = 0.0;
  std::vector<std::string> warnings;
};

/// Reconstructs mu on the interior nodes of the data grid.
Reconstruction reconstruct(const DataField& data, const StarGeometry& g, const ReconstructOptions& opt);

/// Worker count from STAR_THREADS, else hardware concurrency.
int default_threads();

}  // namespace star
