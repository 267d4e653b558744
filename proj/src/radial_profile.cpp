#include "admshell/radial_profile.hpp"

#include <cmath>
#include <stdexcept>

namespace admshell {

RadialProfile::RadialProfile(double a, double b) : a_(a), b_(b) {
  if (!(1.0 <= a && a < b && b <= 2.0)) throw std::invalid_argument("RadialProfile: need 1 <= a < b <= 2");
  double wmax = 0.25 * (b - a) * (b - a);  // w(r) at the midpoint
  norm_ = std::exp(1.0 / wmax);
}

std::array<double, 4> RadialProfile::jet(double r) const {
  if (r <= a_ || r >= b_) return {0.0, 0.0, 0.0, 0.0};
  double w = (r - a_) * (b_ - r);
  double w1 = a_ + b_ - 2.0 * r;  // w'
  const double w2 = -2.0;        // w''
  // m = -1/w, p = N e^m
  double iw = 1.0 / w;
  double m1 = w1 * iw * iw;
  double m2 = w2 * iw * iw - 2.0 * w1 * w1 * iw * iw * iw;
  double m3 = -6.0 * w2 * w1 * iw * iw * iw + 6.0 * w1 * w1 * w1 * iw * iw * iw * iw;
  double p = norm_ * std::exp(-iw);
  double p1 = p * m1;
  double p2 = p * (m1 * m1 + m2);
  double p3 = p * (m1 * m1 * m1 + 3.0 * m1 * m2 + m3);
  return {p, p1, p2, p3};
}

double RadialProfile::value(double r) const { return jet(r)[0]; }
double RadialProfile::deriv1(double r) const { return jet(r)[1]; }
double RadialProfile::deriv2(double r) const { return jet(r)[2]; }
double RadialProfile::deriv3(double r) const { return jet(r)[3]; }

}  // namespace admshell
