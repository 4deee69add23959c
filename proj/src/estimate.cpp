#include "shiftlab/estimate.hpp"

#include <cmath>
#include <stdexcept>

namespace shiftlab {

EstimateSpec::EstimateSpec(double gamma_, double delta_)
    : gamma(gamma_), delta(delta_) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("EstimateSpec: gamma must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("EstimateSpec: delta must lie in (0,1)");
}

long long EstimateSpec::sample_count() const {
  const double n = std::ceil(std::log(2.0 / delta) / (2.0 * gamma * gamma));
  return n < 1.0 ? 1 : static_cast<long long>(n);
}

double estimate_probability(const std::function<bool(Rng&)>& event,
                            const EstimateSpec& spec, Rng& rng) {
  const long long n = spec.sample_count();
  long long hits = 0;
  for (long long i = 0; i < n; ++i)
    if (event(rng)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(n);
}

std::optional<Point> rejection_sample(
    const Sampler& base, const std::function<bool(const Point&, Rng&)>& keep,
    long long cap, Rng& rng) {
  if (cap < 1) throw std::invalid_argument("rejection_sample: cap must be >= 1");
  for (long long attempt = 0; attempt < cap; ++attempt) {
    Point x = base(rng);
    if (keep(x, rng)) return x;
  }
  return std::nullopt;
}

}  // namespace shiftlab
