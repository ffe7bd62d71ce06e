#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "star/geometry.hpp"

namespace star {

struct SigmaMoments {
  double sigma0 = 0.0;  // sum s_k / |u_kz|
  double sigma1 = 0.0;  // sum s_k / u_kz
  double sigma2 = 0.0;  // -sum s_k u_ky / u_kz^2
};

SigmaMoments sigma_moments(const StarGeometry& g);

/// Thrown when f(theta) is requested within 1e-12 of a pole.
class SingularAngle : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// f(theta) = sum_k s_k / cos(theta - theta_k).
double f_theta(const StarGeometry& g, double theta);

struct ZeroSet {
  int count = 0;
  std::vector<double> locations;  // radians in [0, pi)
};

/// Sign changes of f on [0, pi) away from its poles. Tangential zeros are not
/// detected.
ZeroSet count_zeros(const StarGeometry& g);

/// True iff all s_k u_k fit in one closed half-plane.
bool halfplane_confined(const StarGeometry& g);

struct StabilityReport {
  SigmaMoments sigma;
  int zero_count = 0;
  std::vector<double> zero_locations;
  bool odd_ray_count = false;
  bool halfplane_confined = false;
  bool low_q_stable = false;
  bool high_q_stable = false;
};

StabilityReport classify(const StarGeometry& g);

/// Relative threshold below which a moment counts as zero.
double moment_tolerance(const StarGeometry& g);

std::string format_report(const StabilityReport& r);

/// (theta/pi, f) pairs on [0, pi]; poles give non-finite values.
std::vector<std::pair<double, double>> sample_f_theta(const StarGeometry& g, int samples = 2000);

}  // namespace star
