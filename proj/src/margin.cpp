#include "shiftlab/margin.hpp"

#include <cmath>
#include <stdexcept>

namespace shiftlab {

long long margin_sample_count(int dim, double gamma, double delta) {
  const double l =
      std::ceil(2000.0 * dim / (gamma * gamma) * std::log(dim / delta));
  return static_cast<long long>(l);
}

MarginClassifier learn_high_margin_halfspace(
    const std::function<int(const Point&)>& oracle, int dim, double gamma,
    double delta, Rng& rng) {
  if (dim < 1) throw std::invalid_argument("margin learner: dim >= 1");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("margin learner: gamma in (0,1)");
  if (!(delta > 0.0 && delta < 1.0 / 3.0))
    throw std::invalid_argument("margin learner: delta in (0,1/3)");

  const long long count = margin_sample_count(dim, gamma, delta);
  const double sigma = std::sqrt(3.14159265358979323846 / 2.0);

  // Compensated accumulation keeps the reduction order-independent in
  // exact arithmetic and per-seed deterministic in floating point.
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd comp = Eigen::VectorXd::Zero(dim);
  Point x(dim);
  for (long long i = 0; i < count; ++i) {
    for (int j = 0; j < dim; ++j) x[j] = sigma * rng.gaussian();
    const double f = static_cast<double>(oracle(x));
    for (int j = 0; j < dim; ++j) {
      const double term = f * x[j] - comp[j];
      const double next = sum[j] + term;
      comp[j] = (next - sum[j]) - term;
      sum[j] = next;
    }
  }

  MarginClassifier mc;
  mc.w_hat = sum / static_cast<double>(count);
  mc.gamma = gamma;
  return mc;
}

}  // namespace shiftlab
