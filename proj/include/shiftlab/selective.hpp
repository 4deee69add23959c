#pragma once

#include <span>

#include "shiftlab/point.hpp"
#include "shiftlab/rng.hpp"
#include "shiftlab/samplers.hpp"

namespace shiftlab {

struct SelectiveDecision {
  bool selected = false;  // g(x)
  int label = +1;         // h(x); the default +1 when not selected
};

/// A hypothesis h: X -> {+-1} paired with a selector g: X -> {0,1}, possibly
/// randomized. evaluate() yields both from a single draw of internal
/// randomness so that g and h of one decision refer to the same coin flips.
class SelectiveClassifier {
 public:
  virtual ~SelectiveClassifier() = default;

  virtual SelectiveDecision evaluate(const Point& x, Rng& rng) const = 0;

  int h(const Point& x, Rng& rng) const { return evaluate(x, rng).label; }
  int g(const Point& x, Rng& rng) const {
    return evaluate(x, rng).selected ? 1 : 0;
  }
};

/// Empirical frequency of {y != h(x) and g(x) = 1} over n_eval test draws.
double selective_error(const SelectiveClassifier& c, const LabeledSampler& test,
                       long long n_eval, Rng& rng);

/// Empirical frequency of {g(x) = 0} over n_eval training draws.
double rejection_rate(const SelectiveClassifier& c, const Sampler& train,
                      long long n_eval, Rng& rng);

/// Exact counterparts on fixed finite lists (zero variance for
/// deterministic classifiers).
double selective_error(const SelectiveClassifier& c,
                       std::span<const LabeledExample> test, Rng& rng);
double rejection_rate(const SelectiveClassifier& c, std::span<const Point> train,
                      Rng& rng);

}  // namespace shiftlab
