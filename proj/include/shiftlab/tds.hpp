#pragma once

#include <functional>
#include <span>

#include "shiftlab/point.hpp"
#include "shiftlab/rng.hpp"

namespace shiftlab {

/// An evaluable hypothesis X -> {+1, -1}.
using Hypothesis = std::function<int(const Point&)>;

/// Accept(hypothesis) or Reject.
struct TdsResult {
  bool accepted = false;
  Hypothesis hypothesis;  // set iff accepted
};

/// Black-box oracle: labeled training samples in, unlabeled test samples in,
/// Accept(h) or Reject out. Consumes at most sample_complexity(eps) points
/// from the test list and train_size(eps) from the train list.
class TdsLearner {
 public:
  virtual ~TdsLearner() = default;

  /// Number m of test samples one run consumes.
  virtual int sample_complexity(double eps) const = 0;

  /// Number of labeled training examples one run consumes.
  virtual int train_size(double eps) const { return sample_complexity(eps); }

  /// Accuracy constant A >= 1 in agnostic mode (reported, never assumed).
  virtual double accuracy_constant() const { return 1.0; }

  virtual TdsResult run(std::span<const LabeledExample> train,
                        std::span<const Point> test, double eps, double delta,
                        Rng& rng) const = 0;
};

}  // namespace shiftlab
