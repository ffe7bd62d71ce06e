#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "star/stability.hpp"

using namespace star;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

StarGeometry random_geometry(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> ang(-kPi, kPi), mag(0.2, 2.0);
  std::bernoulli_distribution sign;
  std::vector<double> a, w;
  for (int i = 0; i < k; ++i) {
    double t;
    do t = ang(rng);
    while (std::abs(std::cos(t)) < 1e-3);
    a.push_back(t);
    w.push_back(sign(rng) ? mag(rng) : -mag(rng));
  }
  return make_geometry(a, w, 1.0);
}

}  // namespace

TEST_CASE("moments of reference cases") {
  const auto m1 = sigma_moments(reference_geometry("1a"));
  CHECK(m1.sigma0 == Approx(2.41).epsilon(0.002));
  CHECK(m1.sigma1 == Approx(0.41).epsilon(0.01));
  const auto m3 = sigma_moments(reference_geometry("3b"));
  CHECK(std::abs(m3.sigma0 - (-0.01)) < 0.005);
  CHECK(m3.sigma1 == Approx(2.83).epsilon(0.002));
  const auto mirror = sigma_moments(make_geometry_pi({0.25, -0.25}, {1, -1}, 1.0));
  CHECK(std::abs(mirror.sigma0) < 1e-15);
  CHECK(std::abs(mirror.sigma1) < 1e-15);
}

TEST_CASE("sigma2 formula") {
  const auto g = make_geometry_pi({0.25, 0.9}, {2, -1}, 1.0);
  double s2 = 0.0;
  for (const auto& r : g.rays()) s2 -= r.weight * r.uy / (r.uz * r.uz);
  CHECK(sigma_moments(g).sigma2 == Approx(s2));
}

TEST_CASE("f(theta) values and identities") {
  CHECK(f_theta(reference_geometry("2a"), 0.0) == Approx(sigma_moments(reference_geometry("2a")).sigma1));
  CHECK(f_theta(make_geometry_pi({0.0}, {1}, 1.0), kPi / 3) == Approx(2.0));
  CHECK_THROWS_AS(f_theta(make_geometry_pi({0.0}, {1}, 1.0), kPi / 2), SingularAngle);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> th(0.0, kPi);
  for (int i = 0; i < 1000; ++i) {
    const auto g = random_geometry(rng, 1 + i % 6);
    const double f0 = f_theta(g, 0.0);
    CHECK(std::abs(f0 - sigma_moments(g).sigma1) <= 1e-10 * std::max(1.0, std::abs(f0)));
    const double t = th(rng);
    try {
      const double a = f_theta(g, t), b = f_theta(g, t + kPi);
      CHECK(std::abs(a + b) <= 1e-10 * std::max(1.0, std::abs(a)));
    } catch (const SingularAngle&) {
    }
  }
}

TEST_CASE("zero counts of reference cases") {
  CHECK(count_zeros(reference_geometry("3a")).count == 2);
  CHECK(count_zeros(reference_geometry("3b")).count == 0);
  CHECK(count_zeros(reference_geometry("2a")).count == 0);
  CHECK(count_zeros(reference_geometry("2b")).count == 0);
  const auto z = count_zeros(reference_geometry("1a"));
  REQUIRE(z.count == 1);
  CHECK(z.locations[0] / kPi == Approx(0.125).epsilon(1e-9));
  // zero direction is perpendicular to s2 u1 + s1 u2
  const auto g = reference_geometry("1a");
  const double vy = g.ray(1).weight * g.ray(0).uy + g.ray(0).weight * g.ray(1).uy;
  const double vz = g.ray(1).weight * g.ray(0).uz + g.ray(0).weight * g.ray(1).uz;
  CHECK(std::abs(std::sin(z.locations[0]) * vy + std::cos(z.locations[0]) * vz) < 1e-9);
}

TEST_CASE("adding two weak rays to Case 3b creates zeros") {
  const auto g = reference_geometry("3b").with_extra_ray(kPi, -0.1).with_extra_ray(0.6 * kPi, 0.1);
  CHECK(g.size() == 5);
  CHECK(count_zeros(g).count > 0);
}

TEST_CASE("half-plane test") {
  CHECK(halfplane_confined(reference_geometry("3a")));
  CHECK_FALSE(halfplane_confined(reference_geometry("3b")));
  CHECK(halfplane_confined(make_geometry_pi({0.3}, {1}, 1.0)));
}

TEST_CASE("classification") {
  const auto r = classify(reference_geometry("2a"));
  CHECK(r.low_q_stable);
  CHECK(r.high_q_stable);
  CHECK(r.odd_ray_count);
  const auto m = classify(make_geometry_pi({0.25, -0.25}, {1, -1}, 1.0));
  CHECK_FALSE(m.low_q_stable);
  CHECK(classify(reference_geometry("3b")).low_q_stable);
  CHECK_FALSE(classify(reference_geometry("1a")).high_q_stable);
  const auto text = format_report(r);
  CHECK(text.find("zero_count 0") != std::string::npos);
  CHECK(text.find("sigma1") != std::string::npos);
}

TEST_CASE("necessary conditions on random geometries") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto g = random_geometry(rng, 2 * (1 + i % 3));
    CHECK(count_zeros(g).count >= 1);
    CHECK_FALSE(classify(g).high_q_stable);
  }
  int confined = 0;
  while (confined < 200) {
    const auto g = random_geometry(rng, 2 + confined % 4);
    if (!halfplane_confined(g)) continue;
    ++confined;
    CHECK(count_zeros(g).count >= 1);
  }
}

TEST_CASE("f(theta) curve samples") {
  const auto s = sample_f_theta(reference_geometry("3a"));
  CHECK(s.size() == 2000);
  CHECK(s.front().first == 0.0);
  CHECK(s.back().first == Approx(1.0));
}
