#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "shiftlab/point.hpp"
#include "shiftlab/rng.hpp"
#include "shiftlab/samplers.hpp"

namespace shiftlab {

/// Parameters of a (gamma, delta)-estimate: with probability >= 1 - delta
/// the empirical mean over sample_count() draws is within gamma of the
/// truth (two-sided Hoeffding).
struct EstimateSpec {
  double gamma;
  double delta;

  EstimateSpec(double gamma_, double delta_);

  long long sample_count() const;  // ceil(ln(2/delta) / (2 gamma^2)), >= 1
};

/// Empirical mean of a {0,1} event over spec.sample_count() draws.
double estimate_probability(const std::function<bool(Rng&)>& event,
                            const EstimateSpec& spec, Rng& rng);

/// First draw of `base` accepted by `keep` (fresh predicate randomness per
/// draw), or nullopt after `cap` consecutive rejections. cap >= 1.
std::optional<Point> rejection_sample(
    const Sampler& base, const std::function<bool(const Point&, Rng&)>& keep,
    long long cap, Rng& rng);

}  // namespace shiftlab
