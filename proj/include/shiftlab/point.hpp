#pragma once

#include <Eigen/Dense>

namespace shiftlab {

/// A point of the domain X; coordinates are finite reals.
using Point = Eigen::VectorXd;

/// sign into {+1, -1}; zero maps to +1.
inline int sign_pm(double v) { return v >= 0.0 ? +1 : -1; }

struct LabeledExample {
  Point x;
  int y = +1;  // in {+1, -1}
};

}  // namespace shiftlab
