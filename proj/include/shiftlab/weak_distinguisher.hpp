#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "shiftlab/point.hpp"
#include "shiftlab/rng.hpp"
#include "shiftlab/samplers.hpp"
#include "shiftlab/tds.hpp"

namespace shiftlab {

/// Tunables of the distinguisher extraction. c and c_prime are the
/// "sufficiently large constants" of the search; eval_budget caps the total
/// number of Phase-2 evaluations; learner_delta is the failure parameter the
/// TDS learner is invoked with inside the search.
struct WdParams {
  double c = 8.0;
  double c_prime = 4.0;
  long long eval_budget = 1'000'000;
  double learner_delta = 0.01;
};

/// Single-sample distinguisher extracted from a rejecting TDS learner: a
/// frozen training set, a frozen hybrid context (i-1 test points before the
/// input slot, m-i train points after), and the hybrid position. Each
/// evaluation consumes exactly one fresh point (the input) and re-draws the
/// learner's internal randomness.
class WeakDistinguisher {
 public:
  WeakDistinguisher(const TdsLearner& learner, double eps, double learner_delta,
                    std::vector<LabeledExample> frozen_train,
                    std::vector<Point> test_context,
                    std::vector<Point> train_context, int position)
      : learner_(&learner),
        eps_(eps),
        learner_delta_(learner_delta),
        frozen_train_(std::move(frozen_train)),
        test_context_(std::move(test_context)),
        train_context_(std::move(train_context)),
        position_(position) {}

  /// 1 iff the learner accepts with x inserted at the hybrid position.
  int evaluate(const Point& x, Rng& rng) const;

  std::function<int(const Point&, Rng&)> as_function() const {
    return [wd = *this](const Point& x, Rng& rng) { return wd.evaluate(x, rng); };
  }

  int position() const { return position_; }
  const std::vector<LabeledExample>& frozen_train() const { return frozen_train_; }
  const std::vector<Point>& test_context() const { return test_context_; }
  const std::vector<Point>& train_context() const { return train_context_; }

 private:
  const TdsLearner* learner_;
  double eps_;
  double learner_delta_;
  std::vector<LabeledExample> frozen_train_;
  std::vector<Point> test_context_;   // precede the input slot
  std::vector<Point> train_context_;  // follow the input slot
  int position_;
};

enum class WdFailReason { NoGap, BudgetExhausted };

struct WdFail {
  WdFailReason reason = WdFailReason::NoGap;
};

using WdResult = std::variant<WeakDistinguisher, WdFail>;

/// Phase 1 searches for a frozen training set witnessing an m-sample
/// acceptance gap (threshold 0.004); Phase 2 sweeps hybrid positions for a
/// single-sample distinguisher with estimated advantage >= 1/(5000 m).
WdResult get_weak_distinguisher(const TdsLearner& learner,
                                const LabeledSampler& train, const Sampler& test,
                                double eps, double delta, Rng& rng,
                                const WdParams& params = {});

struct AdvantageReport {
  double estimate = 0.0;  // acceptance(D) - acceptance(D'), in [-1, 1]
  long long n_eval_each = 0;
  int direction = +1;  // sign of the estimate
};

/// Difference of empirical single-sample acceptance frequencies.
AdvantageReport measure_advantage(
    const std::function<int(const Point&, Rng&)>& alg, const Sampler& d,
    const Sampler& d_prime, long long n_eval, Rng& rng);

}  // namespace shiftlab
