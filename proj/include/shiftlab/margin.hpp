#pragma once

#include <functional>

#include "shiftlab/point.hpp"
#include "shiftlab/rng.hpp"

namespace shiftlab {

/// Margin-gated halfspace classifier: h(x) = sign(w_hat . x),
/// g(x) = 1{|w_hat . x| >= 2 gamma / 3}. Both deterministic; the guarantees
/// are stated for unit x (callers normalize).
struct MarginClassifier {
  Eigen::VectorXd w_hat;
  double gamma = 0.0;

  int h(const Point& x) const { return sign_pm(w_hat.dot(x)); }
  bool g(const Point& x) const {
    return std::abs(w_hat.dot(x)) >= 2.0 * gamma / 3.0;
  }
};

/// ceil((2000 d / gamma^2) ln(d / delta)).
long long margin_sample_count(int dim, double gamma, double delta);

/// Recover a homogeneous halfspace direction from Gaussian membership
/// queries: w_hat = (1/l) sum f(x) x with x ~ N(0, (pi/2) I_dim). With
/// probability >= 1 - delta, ||w_hat - w|| <= gamma/3 for the unit normal w
/// the oracle is consistent with.
MarginClassifier learn_high_margin_halfspace(
    const std::function<int(const Point&)>& oracle, int dim, double gamma,
    double delta, Rng& rng);

}  // namespace shiftlab
