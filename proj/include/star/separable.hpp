#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace star {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// rows x cols matrix D + sum_k |b_k><a_k|, with D diagonal on its leading
/// min(rows, cols) block.
struct DiagPlusSeparable {
  int rows = 0;
  int cols = 0;
  CVector diag;
  std::vector<CVector> left;   // b_k, length rows
  std::vector<CVector> right;  // a_k, length cols

  DiagPlusSeparable() = default;
  DiagPlusSeparable(int r, int c, CVector d);

  void add_term(CVector b, CVector a);
  int terms() const { return static_cast<int>(left.size()); }
  CVector apply(const CVector& x) const;
  CVector apply_adjoint(const CVector& y) const;
  CMatrix dense() const;
};

struct PinvStep {
  cplx gamma;
  double p = 0.0;
  double q = 0.0;
  double denominator = 0.0;
};

/// Tikhonov pseudo-inverse A* (A A* + lambda^2)^-1 built by adding the
/// separable terms one at a time.
struct PseudoInverseState {
  double lambda = 0.0;
  int steps = 0;
  CMatrix s_rows;  // (D_k D_k* + lambda^2)^-1, rows x rows
  CMatrix s_cols;  // (D_k* D_k + lambda^2)^-1, cols x cols
  CMatrix pinv;    // cols x rows
  std::vector<PinvStep> trace;
};

PseudoInverseState recursive_pinv(const DiagPlusSeparable& a, double lambda);

CVector apply_pinv(const PseudoInverseState& state, const CVector& rhs);

}  // namespace star
