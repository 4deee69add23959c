#pragma once

#include <functional>
#include <memory>
#include <utility>

#include "shiftlab/point.hpp"
#include "shiftlab/rng.hpp"

namespace shiftlab {

/// Unlabeled sample access: one independent draw per call on the given
/// stream; deterministic given a fixed stream.
using Sampler = std::function<Point(Rng&)>;

/// Labeled sample access (joint law over (x, y)).
using LabeledSampler = std::function<LabeledExample(Rng&)>;

/// A target concept X -> {+1, -1}.
using Concept = std::function<int(const Point&)>;

/// Realizable pairing: label the marginal sampler with a concept.
inline LabeledSampler label_with(Sampler marginal, Concept target) {
  return [marginal = std::move(marginal), target = std::move(target)](Rng& rng) {
    Point x = marginal(rng);
    const int y = target(x);
    return LabeledExample{std::move(x), y};
  };
}

/// Drop labels: view a labeled sampler as its marginal.
inline Sampler marginal_of(LabeledSampler labeled) {
  return [labeled = std::move(labeled)](Rng& rng) { return labeled(rng).x; };
}

/// Membership-query oracle. Answers are consistent (the wrapped function is
/// deterministic) and the query counter increments by exactly one per call.
class MembershipOracle {
 public:
  explicit MembershipOracle(std::function<int(const Point&)> f)
      : f_(std::move(f)) {}

  int query(const Point& x) {
    ++count_;
    return f_(x);
  }

  long long query_count() const { return count_; }
  void reset_count() { count_ = 0; }

 private:
  std::function<int(const Point&)> f_;
  long long count_ = 0;
};

}  // namespace shiftlab
