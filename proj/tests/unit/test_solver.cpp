#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "star/forward.hpp"
#include "star/solver.hpp"
#include "star/stability.hpp"

using namespace star;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

CVector random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  CVector v(n);
  for (int i = 0; i < n; ++i) v(i) = cplx(nd(rng), nd(rng));
  return v;
}

std::vector<cplx> random_rhs(std::mt19937_64& rng, int n) {
  const auto v = random_vector(rng, n);
  return {v.data(), v.data() + n};
}

}  // namespace

TEST_CASE("recursive pseudo-inverse matches the SVD") {
  std::mt19937_64 rng(1);
  for (auto [n, m, k] : {std::tuple{12, 12, 3}, std::tuple{20, 20, 6}, std::tuple{15, 11, 4}, std::tuple{9, 14, 2}}) {
    const auto a = oracle::random_dps(rng, n, m, k);
    for (double lambda : {1e-3, 0.1, 2.0}) {
      const auto st = recursive_pinv(a, lambda);
      CHECK(oracle::max_rel(st.pinv, oracle::tikhonov_svd(a.dense(), lambda)) < 1e-9);
      for (const auto& t : st.trace) {
        CHECK(t.p > 0.0);
        CHECK(t.q > 0.0);
        CHECK(t.denominator > 0.0);
      }
      // A*(AA* + l^2)^-1 = (A*A + l^2)^-1 A*, up to the conditioning of the Gram matrices
      const CMatrix ad = a.dense().adjoint();
      Eigen::JacobiSVD<CMatrix> svd(ad);
      const double tol = 1e-14 * std::pow(svd.singularValues()(0) / lambda, 2) + 1e-12;
      CHECK(oracle::max_rel(st.s_cols * ad, st.pinv) < tol);
      CHECK(oracle::max_rel(ad * st.s_rows, st.pinv) < tol);
    }
  }
}

TEST_CASE("pseudo-inverse of a diagonal and term order") {
  std::mt19937_64 rng(2);
  const auto a = oracle::random_dps(rng, 10, 10, 0);
  const auto st = recursive_pinv(a, 0.5);
  for (int i = 0; i < 10; ++i)
    CHECK(std::abs(st.pinv(i, i) - std::conj(a.diag(i)) / (std::norm(a.diag(i)) + 0.25)) < 1e-14);

  const auto b = oracle::random_dps(rng, 16, 16, 5);
  auto rev = b;
  std::reverse(rev.left.begin(), rev.left.end());
  std::reverse(rev.right.begin(), rev.right.end());
  CHECK(oracle::max_rel(recursive_pinv(rev, 0.05).pinv, recursive_pinv(b, 0.05).pinv) < 1e-10);

  const CVector y = random_vector(rng, 16);
  const auto s2 = recursive_pinv(b, 0.05);
  CHECK(oracle::max_rel(apply_pinv(s2, y), s2.pinv * y) < 1e-14);
  CHECK_THROWS_AS(recursive_pinv(b, 0.0), SolverError);
}

TEST_CASE("regularized direct solve matches the SVD") {
  std::mt19937_64 rng(3);
  for (auto [n, m, k] : {std::tuple{20, 20, 3}, std::tuple{21, 20, 4}}) {
    const auto a = oracle::random_dps(rng, n, m, k);
    const CVector y = random_vector(rng, n);
    for (double lambda : {1e-2, 0.3}) {
      double cond = 0.0;
      const auto x = regularized_direct(a, y, lambda, &cond);
      const CVector ref = oracle::tikhonov_svd(a.dense(), lambda) * y;
      CHECK(oracle::max_rel(Eigen::Map<const CVector>(x.data(), m), ref) < 1e-9);
      CHECK(cond >= 1.0);
    }
  }
}

TEST_CASE("accelerated series") {
  const auto g = reference_geometry("3b");
  const double q = 2 * kPi + 0.37;
  const cplx m01 = series_mjk(g, q, 0, 1, 200);
  CHECK(std::abs(m01 - series_mjk(g, q, 1, 0, 200)) < 1e-14 * std::abs(m01));
  // raising nsum changes little
  CHECK(std::abs(series_mjk(g, q, 0, 1, 2000) - m01) < 1e-7 * std::abs(m01));
  // plain partial sums approach it like 1/N
  const double e1 = std::abs(brute_mjk(g, q, 0, 1, 10000) - m01);
  const double e2 = std::abs(brute_mjk(g, q, 0, 1, 40000) - m01);
  CHECK(e1 / e2 == Approx(4.0).epsilon(0.05));
  CHECK(std::abs(brute_mjk(g, q, 0, 1, 1000000) - m01) < 1e-5 * std::abs(m01));
  CHECK_THROWS(series_mjk(g, 0.0, 0, 1, 200));
  CHECK_THROWS(series_mjk(reference_geometry("2a"), q, 0, 1, 200));
}

TEST_CASE("series tail splits the infinite sum") {
  const auto g = reference_geometry("2b");
  const auto s = assemble(g, 4.2, 10);
  const SeriesEvaluator ev(s, 300);
  for (const auto& u : s.terms)
    for (const auto& v : s.terms) {
      const cplx full = ev.inner(u.right, v.left);
      for (int nm : {3, 10, 50})
        CHECK(std::abs(ev.partial(u.right, v.left, nm) + ev.tail(u.right, v.left, nm) - full) <
              1e-11 * std::max(1.0, std::abs(full)));
    }
}

TEST_CASE("direct solve agrees with a long Sherman-Morrison sum for one ray") {
  const auto g = make_geometry_pi({0.2}, {1.3}, 1.0);
  const double q = 5.0;
  const int nmax = 8;
  std::mt19937_64 rng(4);
  const auto phi = random_rhs(rng, 2 * nmax + 1);
  const auto s = assemble(g, q, nmax, phi);
  const auto sol = direct_solve(s, 400);
  REQUIRE_FALSE(sol.flagged);

  const long big = 2000000;
  const auto& b = s.terms[0].left;
  const auto& a = s.terms[0].right;
  cplx ab = 0.0, aphi = 0.0;
  for (long n = -big; n <= big; ++n) {
    const int ni = static_cast<int>(n);
    const cplx d = diagonal_entry(g, q, ni);
    ab += std::conj(a.at(ni, 1.0)) * b.at(ni, 1.0) / d;
    if (std::abs(n) <= nmax) aphi += std::conj(a.at(ni, 1.0)) * phi[n + nmax] / d;
  }
  const cplx x = aphi / (1.0 + ab);
  CHECK(std::abs(sol.x(0) - x) < 1e-5 * std::abs(x));
  for (int n = -nmax; n <= nmax; ++n) {
    const cplx mu = (phi[n + nmax] - b.at(n, 1.0) * x) / diagonal_entry(g, q, n);
    CHECK(std::abs(sol.mu(n) - mu) < 1e-5 * std::abs(mu));
  }
}

TEST_CASE("direct solution satisfies the truncated rows") {
  const auto g = reference_geometry("2b");
  const int nmax = 6;
  std::mt19937_64 rng(5);
  const auto s = assemble(g, 3.3, nmax, random_rhs(rng, 2 * nmax + 1));
  const auto sol = direct_solve(s, 300);
  REQUIRE_FALSE(sol.flagged);
  const CVector res = (CMatrix::Identity(sol.m.rows(), sol.m.cols()) + sol.m) * sol.x - sol.r;
  CHECK(res.cwiseAbs().maxCoeff() < 1e-12 * sol.r.cwiseAbs().maxCoeff());
  const auto mu = sol.coefficients();
  std::vector<cplx> xs(sol.x.data(), sol.x.data() + sol.x.size());
  const auto row = s.apply(mu, xs);
  for (int i = 0; i < s.size(); ++i) CHECK(std::abs(row[i] - s.rhs[i]) < 1e-12 * std::abs(s.rhs[i]) + 1e-14);
}

TEST_CASE("folded matrix reproduces the direct solution") {
  const auto g = reference_geometry("2a");
  const int nmax = 7;
  std::mt19937_64 rng(6);
  const auto s = assemble(g, 2.9, nmax, random_rhs(rng, 2 * nmax + 1));
  const auto sol = direct_solve(s, 300);
  const auto f = folded_matrix(s, 300);
  const CVector rhs = Eigen::Map<const CVector>(s.rhs.data(), s.size());
  const CVector mu = f.dense().fullPivLu().solve(rhs);
  const auto ref = sol.coefficients();
  for (int i = 0; i < s.size(); ++i) CHECK(std::abs(mu(i) - ref[i]) < 1e-9 * std::abs(ref[i]));
  const CVector rec = apply_pinv(recursive_pinv(f, 1e-10), rhs);
  for (int i = 0; i < s.size(); ++i) CHECK(std::abs(rec(i) - ref[i]) < 1e-6 * std::abs(ref[i]));
}

TEST_CASE("q = 0 slice") {
  const auto g = reference_geometry("2a");
  const auto z = solve_q0(g, std::vector<cplx>(9, 0.0), 0.0);
  for (const auto& v : z.mu) CHECK(v == cplx(0.0));
  CHECK_FALSE(z.poorly_conditioned);
  CHECK(solve_q0(reference_geometry("3b"), std::vector<cplx>(9, 0.0), 0.0).poorly_conditioned);
  CHECK_THROWS_AS(solve_q0(make_geometry_pi({0.25, -0.25}, {1, -1}, 1.0), std::vector<cplx>(9, 0.0), 0.0),
                  SolverError);
  CHECK(solve_q0(g, std::vector<cplx>(9, 0.0), 0.0, cplx(2.0)).mu[4] == cplx(2.0));

  // exact data of an off-centre rectangle
  Phantom p;
  p.primitives.push_back({Rectangle{0.05, 0.41, 0.12, 0.1}, 3.0});
  const int nmax = 5;
  const auto phi = oracle::star_coefficients(p, g, {0.0}, nmax)[0];
  auto edge = [&](double zv) {
    const auto& rect = std::get<Rectangle>(p.primitives[0].shape);
    return oracle::integrate(
        [&](double y) {
          double s = 0.0;
          for (int k = 0; k < g.size(); ++k) s += g.ray(k).weight * ray_integral(p, g, k, y, zv);
          return s;
        },
        -2.0, 2.0, oracle::kink_positions(g, rect, zv), 12, 4);
  };
  const cplx delta0 = 0.5 * (edge(0.0) + edge(1.0));
  const auto sol = solve_q0(g, phi, delta0);
  for (int n = -nmax; n <= nmax; ++n) {
    const cplx ref = fourier_transform(p, 0.0, kappa(n, 1.0));
    CHECK(std::abs(sol.mu[n + nmax] - ref) < 1e-8);
  }
  CHECK(sol.amplification == Approx(2.0 / sigma_moments(g).sigma0));
}

TEST_CASE("small reconstruction") {
  const auto p = make_square_phantom(1.0);
  const auto g = reference_geometry("2a");
  const auto grid = make_sampling_grid(p, g, 63);
  const auto phi = star_transform(p, g, grid);
  const auto ref = rasterize(p, 63, grid.ny);

  ReconstructOptions opt;
  opt.threads = 1;
  const auto one = reconstruct(phi, g, opt);
  CHECK(one.failures == 0);
  CHECK(one.image.nz == 63);
  // edge pixels of the square dominate the error at this size
  CHECK(interior_error(one.image, ref) < 0.2);
  CHECK(one.imag_residue < 1e-10);
  opt.threads = 4;
  CHECK(reconstruct(phi, g, opt).image.values == one.image.values);

  opt.method = Method::recursive;
  opt.lambda = 1e-6;
  const auto rec = reconstruct(phi, g, opt);
  CHECK(interior_error(rec.image, ref) < 0.2);

  opt.use_projection = true;
  opt.ballistic.clear();
  CHECK_THROWS(reconstruct(phi, g, opt));
  opt.method = Method::direct;
  opt.ballistic = std::vector<double>(grid.ny, 0.0);
  CHECK_THROWS(reconstruct(phi, g, opt));
}

TEST_CASE("two rays across one boundary reconstruct worse than three") {
  const auto p = make_square_phantom(1.0);
  auto error = [&](const std::string& name, double lambda) {
    const auto g = reference_geometry(name);
    const auto grid = make_sampling_grid(p, g, 63);
    ReconstructOptions opt;
    opt.threads = 1;
    opt.lambda = lambda;
    return interior_error(reconstruct(star_transform(p, g, grid), g, opt).image, rasterize(p, 63, grid.ny));
  };
  CHECK(error("1a", 1e-2) > error("2a", 0.0));
}

TEST_CASE("method and truncation names") {
  CHECK(parse_method("direct") == Method::direct);
  CHECK(to_string(Method::recursive) == "recursive");
  CHECK(parse_truncation("truncate_matrix") == Truncation::truncate_matrix);
  CHECK_THROWS(parse_method("cg"));
  CHECK_THROWS(parse_truncation("none"));
}
