#ifndef ADMSHELL_RADIAL_PROFILE_HPP
#define ADMSHELL_RADIAL_PROFILE_HPP

#include <array>

namespace admshell {

// Smooth compactly supported bump on (a,b) in (1,2):
//   p(r) = N exp(-1/((r-a)(b-r))),  p == 0 outside,
// normalized so sup p = 1. Closed-form derivatives up to third order.
class RadialProfile {
 public:
  RadialProfile(double a, double b);

  double a() const { return a_; }
  double b() const { return b_; }

  double value(double r) const;
  double deriv1(double r) const;
  double deriv2(double r) const;
  double deriv3(double r) const;

  // value and first three derivatives in one evaluation
  std::array<double, 4> jet(double r) const;

 private:
  double a_, b_, norm_;
};

}  // namespace admshell

#endif
