#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "star/solver.hpp"

namespace star {

std::string to_string(Method m) { return m == Method::direct ? "direct" : "recursive"; }

Method parse_method(const std::string& s) {
  if (s == "direct") return Method::direct;
  if (s == "recursive") return Method::recursive;
  throw SolverError("unknown method: " + s);
}

std::string to_string(Truncation t) {
  return t == Truncation::zero_data ? "zero_data" : "truncate_matrix";
}

Truncation parse_truncation(const std::string& s) {
  if (s == "zero_data") return Truncation::zero_data;
  if (s == "truncate_matrix") return Truncation::truncate_matrix;
  throw SolverError("unknown truncation: " + s);
}

int default_threads() {
  if (const char* env = std::getenv("STAR_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct SliceInput {
  std::vector<cplx> phi;
  double q = 0.0;
  double dq = 0.0;
  cplx delta0;
  std::optional<cplx> mu0;
};

struct SliceOutput {
  std::vector<cplx> mu;
  SliceDiagnostic diag;
  double lambda = 0.0;
};

CVector to_eigen(const std::vector<cplx>& v) { return Eigen::Map<const CVector>(v.data(), v.size()); }

std::vector<cplx> from_eigen(const CVector& v) { return {v.data(), v.data() + v.size()}; }

double recursive_lambda(const SpectralSystem& s, double lambda) {
  if (lambda > 0.0) return lambda;
  double dmax = 0.0;
  for (const auto& d : s.diag) dmax = std::max(dmax, std::abs(d));
  return 1e-12 * dmax;
}

SliceOutput solve_slice(const StarGeometry& g, const SliceInput& in, int nmax,
                        const ReconstructOptions& opt) {
  SliceOutput out;
  out.diag.q = in.q;
  out.diag.q_solved = in.q;
  if (in.q == 0.0) {
    const auto r = solve_q0(g, in.phi, in.delta0, in.mu0);
    out.mu = r.mu;
    out.diag.condition = std::abs(r.amplification) * g.width();
    if (r.poorly_conditioned) out.diag.reason = "small Sigma0";
    return out;
  }

  SpectralSystem s;
  try {
    s = assemble(g, in.q, nmax, in.phi);
  } catch (const ResonanceError&) {
    out.diag.q_solved = in.q + 0.5 * in.dq;
    s = assemble(g, out.diag.q_solved, nmax, in.phi);
  }

  if (opt.use_projection) {
    const auto red = projection_reduce(s, *in.mu0);
    out.lambda = recursive_lambda(s, opt.lambda);
    const auto st = recursive_pinv(red.matrix, out.lambda);
    out.mu = red.expand(apply_pinv(st, red.ordered_rhs()));
    return out;
  }

  if (opt.method == Method::direct && opt.lambda == 0.0) {
    const auto sol = direct_solve(s, opt.nsum);
    out.diag.condition = sol.condition;
    if (sol.flagged) {
      out.diag.flagged = true;
      out.diag.reason = sol.reason;
      return out;
    }
    out.mu = sol.coefficients();
    return out;
  }

  const DiagPlusSeparable a =
      opt.truncation == Truncation::zero_data ? folded_matrix(s, opt.nsum) : s.matrix();
  if (opt.method == Method::direct) {
    out.lambda = opt.lambda;
    out.mu = regularized_direct(a, to_eigen(in.phi), opt.lambda, &out.diag.condition);
  } else {
    out.lambda = recursive_lambda(s, opt.lambda);
    out.mu = from_eigen(apply_pinv(recursive_pinv(a, out.lambda), to_eigen(in.phi)));
  }
  return out;
}

}  // namespace

Reconstruction reconstruct(const DataField& data, const StarGeometry& g, const ReconstructOptions& opt) {
  const SamplingGrid& grid = data.grid;
  if (std::abs(grid.width - g.width()) > 1e-12 * g.width())
    throw SolverError("data grid width does not match the geometry");
  const int nmax = opt.nmax < 0 ? (grid.n - 1) / 2 : opt.nmax;
  if (opt.nsum < 1) throw SolverError("n_sum must be at least 1");
  if (opt.lambda < 0.0) throw SolverError("lambda must be non-negative");
  if (opt.use_projection) {
    if (opt.method != Method::recursive) throw SolverError("projection reduction requires method = recursive");
    if (static_cast<int>(opt.ballistic.size()) != grid.ny)
      throw SolverError("ballistic data must have one sample per Y node");
  }

  Reconstruction rec;
  const auto table = field_to_coefficients(data, nmax, opt.quadrature);
  const auto boundary = boundary_average(data, opt.quadrature);
  std::vector<cplx> ballistic;
  if (opt.use_projection) ballistic = y_transform(opt.ballistic, grid, opt.quadrature);

  const int half = (grid.ny - 1) / 2;
  std::vector<SliceOutput> outs(half + 1);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int m = next++; m <= half; m = next++) {
      SliceInput in;
      in.phi = table.row(m);
      in.q = table.q(m);
      in.dq = table.dq();
      in.delta0 = boundary.transform[0];
      if (opt.use_projection) in.mu0 = ballistic[m];
      try {
        outs[m] = solve_slice(g, in, nmax, opt);
      } catch (const std::exception& e) {
        outs[m].mu.clear();
        outs[m].diag.q = in.q;
        outs[m].diag.q_solved = in.q;
        outs[m].diag.flagged = true;
        outs[m].diag.reason = e.what();
      }
      outs[m].diag.row = m;
      bool finite = !outs[m].mu.empty();
      for (const auto& v : outs[m].mu) finite = finite && std::isfinite(v.real()) && std::isfinite(v.imag());
      if (!finite && !outs[m].diag.flagged) {
        outs[m].diag.flagged = true;
        outs[m].diag.reason = "non-finite solution";
      }
      if (outs[m].diag.flagged) outs[m].mu.assign(2 * nmax + 1, 0.0);
    }
  };
  const int nthreads = std::max(1, std::min(opt.threads > 0 ? opt.threads : default_threads(), half + 1));
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  rec.coefficients = CoefficientTable(grid, nmax);
  for (int m = 0; m <= half; ++m) {
    const auto& mu = outs[m].mu;
    rec.coefficients.set_row(m, mu);
    if (m > 0) {
      const int mm = rec.coefficients.mirror(m);
      for (int n = -nmax; n <= nmax; ++n) rec.coefficients.at(mm, n) = std::conj(mu[-n + nmax]);
    }
    rec.slices.push_back(outs[m].diag);
    if (outs[m].diag.flagged) ++rec.failures;
    if (outs[m].diag.q_solved != outs[m].diag.q)
      rec.warnings.push_back("q = " + std::to_string(outs[m].diag.q) + " shifted off a resonance");
    rec.lambda_used = std::max(rec.lambda_used, outs[m].lambda);
  }
  if (opt.method == Method::recursive && opt.lambda == 0.0)
    rec.warnings.push_back("lambda = 0 replaced by 1e-12 max|d_n| per slice");
  if (!outs.empty() && !outs[0].diag.reason.empty() && !outs[0].diag.flagged)
    rec.warnings.push_back("q = 0 slice: " + outs[0].diag.reason);
  rec.image = coefficients_to_image(rec.coefficients, &rec.imag_residue);
  return rec;
}

}  // namespace star
