#include "star/stability.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

namespace star {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_pi(double t) {
  double r = std::fmod(t, kPi);
  if (r < 0.0) r += kPi;
  if (r >= kPi) r -= kPi;
  return r;
}

// f without the pole guard; callers stay strictly between poles.
double f_raw(const StarGeometry& g, double theta) {
  double f = 0.0;
  for (const auto& r : g.rays()) f += r.weight / std::cos(theta - r.theta);
  return f;
}

}  // namespace

SigmaMoments sigma_moments(const StarGeometry& g) {
  SigmaMoments m;
  for (const auto& r : g.rays()) {
    m.sigma0 += r.weight / std::abs(r.uz);
    m.sigma1 += r.weight / r.uz;
    m.sigma2 -= r.weight * r.uy / (r.uz * r.uz);
  }
  return m;
}

double f_theta(const StarGeometry& g, double theta) {
  for (const auto& r : g.rays()) {
    const double d = wrap_pi(theta - r.theta - kPi / 2);
    if (std::min(d, kPi - d) < 1e-12) throw SingularAngle("f(theta) evaluated at a pole");
  }
  const double f = f_raw(g, theta);
  if (!std::isfinite(f)) throw std::overflow_error("f(theta) overflowed");
  return f;
}

ZeroSet count_zeros(const StarGeometry& g) {
  std::vector<double> poles;
  for (const auto& r : g.rays()) poles.push_back(wrap_pi(r.theta + kPi / 2));
  std::sort(poles.begin(), poles.end());
  std::vector<double> uniq;
  for (double p : poles)
    if (uniq.empty() || p - uniq.back() > 1e-12) uniq.push_back(p);
  if (uniq.size() > 1 && uniq.front() + kPi - uniq.back() <= 1e-12) uniq.pop_back();

  ZeroSet out;
  constexpr int kSamples = 4096;
  for (std::size_t i = 0; i < uniq.size(); ++i) {
    const double a = uniq[i];
    const double b = (i + 1 < uniq.size()) ? uniq[i + 1] : uniq[0] + kPi;
    const double step = (b - a) / (kSamples + 1);
    // uniform samples plus log-spaced ones towards both poles
    std::vector<double> ts;
    for (int s = 1; s <= kSamples; ++s) ts.push_back(a + step * s);
    for (double d = step / 4; d > 1e-11; d /= 4) {
      ts.push_back(a + d);
      ts.push_back(b - d);
    }
    std::sort(ts.begin(), ts.end());
    double t_prev = ts[0];
    double f_prev = f_raw(g, t_prev);
    for (std::size_t s = 1; s < ts.size(); ++s) {
      const double t = ts[s];
      const double f = f_raw(g, t);
      if (f_prev == 0.0) {
        out.locations.push_back(wrap_pi(t_prev));
      } else if (f != 0.0 && std::signbit(f) != std::signbit(f_prev)) {
        double lo = t_prev, hi = t, flo = f_prev;
        while (hi - lo > 1e-11) {
          const double mid = 0.5 * (lo + hi);
          const double fm = f_raw(g, mid);
          if (fm == 0.0) {
            lo = hi = mid;
            break;
          }
          if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        out.locations.push_back(wrap_pi(0.5 * (lo + hi)));
      }
      t_prev = t;
      f_prev = f;
    }
  }
  std::sort(out.locations.begin(), out.locations.end());
  out.count = static_cast<int>(out.locations.size());
  return out;
}

bool halfplane_confined(const StarGeometry& g) {
  std::vector<double> ang;
  for (const auto& r : g.rays()) ang.push_back(std::atan2(r.weight * r.uz, r.weight * r.uy));
  std::sort(ang.begin(), ang.end());
  double gap = ang.front() + 2 * kPi - ang.back();
  for (std::size_t i = 1; i < ang.size(); ++i) gap = std::max(gap, ang[i] - ang[i - 1]);
  return gap >= kPi - 1e-12;
}

double moment_tolerance(const StarGeometry& g) {
  double scale = 0.0;
  for (const auto& r : g.rays()) scale += std::abs(r.weight) / std::abs(r.uz);
  return 1e-9 * scale;
}

StabilityReport classify(const StarGeometry& g) {
  StabilityReport r;
  r.sigma = sigma_moments(g);
  const auto zeros = count_zeros(g);
  r.zero_count = zeros.count;
  r.zero_locations = zeros.locations;
  r.odd_ray_count = g.size() % 2 == 1;
  r.halfplane_confined = halfplane_confined(g);
  const double tol = moment_tolerance(g);
  r.low_q_stable = std::abs(r.sigma.sigma0) > tol && std::abs(r.sigma.sigma1) > tol;
  r.high_q_stable = r.zero_count == 0;
  return r;
}

std::string format_report(const StabilityReport& r) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "sigma0 " << r.sigma.sigma0 << "\n";
  os << "sigma1 " << r.sigma.sigma1 << "\n";
  os << "sigma2 " << r.sigma.sigma2 << "\n";
  os << "zero_count " << r.zero_count << "\n";
  os << "zero_locations_over_pi";
  for (double z : r.zero_locations) os << ' ' << z / kPi;
  os << "\n";
  os << "odd_ray_count " << (r.odd_ray_count ? "true" : "false") << "\n";
  os << "halfplane_confined " << (r.halfplane_confined ? "true" : "false") << "\n";
  os << "low_q_stable " << (r.low_q_stable ? "true" : "false") << "\n";
  os << "high_q_stable " << (r.high_q_stable ? "true" : "false") << "\n";
  return os.str();
}

std::vector<std::pair<double, double>> sample_f_theta(const StarGeometry& g, int samples) {
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const double t = kPi * i / (samples - 1);
    double f;
    try {
      f = f_theta(g, t);
    } catch (const std::exception&) {
      f = std::numeric_limits<double>::quiet_NaN();
    }
    out.emplace_back(t / kPi, f);
  }
  return out;
}

}  // namespace star
