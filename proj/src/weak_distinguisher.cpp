#include "shiftlab/weak_distinguisher.hpp"

#include <cmath>
#include <stdexcept>

namespace shiftlab {

namespace {

std::vector<Point> draw_points(const Sampler& s, int count, Rng& rng) {
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(s(rng));
  return out;
}

std::vector<LabeledExample> draw_labeled(const LabeledSampler& s, int count,
                                         Rng& rng) {
  std::vector<LabeledExample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(s(rng));
  return out;
}

}  // namespace

int WeakDistinguisher::evaluate(const Point& x, Rng& rng) const {
  std::vector<Point> test;
  test.reserve(test_context_.size() + 1 + train_context_.size());
  test.insert(test.end(), test_context_.begin(), test_context_.end());
  test.push_back(x);
  test.insert(test.end(), train_context_.begin(), train_context_.end());
  return learner_->run(frozen_train_, test, eps_, learner_delta_, rng).accepted
             ? 1
             : 0;
}

WdResult get_weak_distinguisher(const TdsLearner& learner,
                                const LabeledSampler& train, const Sampler& test,
                                double eps, double delta, Rng& rng,
                                const WdParams& params) {
  if (!(delta > 0.0 && delta < 1.0 / 3.0))
    throw std::invalid_argument("get_weak_distinguisher: delta in (0,1/3)");

  const int m = learner.sample_complexity(eps);
  const int m_train = learner.train_size(eps);
  const Sampler train_marginal = marginal_of(train);
  const double log_inv_delta = std::log(1.0 / delta);

  // Phase 1: a training set witnessing a noticeable acceptance gap.
  std::vector<LabeledExample> frozen;
  {
    const long long outer =
        static_cast<long long>(std::ceil(params.c_prime * log_inv_delta));
    const long long reps =
        static_cast<long long>(std::ceil(params.c * log_inv_delta));
    for (long long t = 0; t < outer && frozen.empty(); ++t) {
      std::vector<LabeledExample> cand = draw_labeled(train, m_train, rng);
      long long gap = 0;
      for (long long i = 0; i < reps; ++i) {
        const auto x_train = draw_points(train_marginal, m, rng);
        const auto x_test = draw_points(test, m, rng);
        gap += learner.run(cand, x_train, eps, params.learner_delta, rng).accepted;
        gap -= learner.run(cand, x_test, eps, params.learner_delta, rng).accepted;
      }
      if (static_cast<double>(gap) / static_cast<double>(reps) >= 0.004)
        frozen = std::move(cand);
    }
  }

  // Phase 2: sweep hybrid positions for a single-sample distinguisher.
  const long long ell = static_cast<long long>(
      std::ceil(params.c * m * m * std::log(m / delta)));
  const long long attempts =
      static_cast<long long>(std::ceil(params.c_prime * m * log_inv_delta));
  const double threshold = 1.0 / (5000.0 * m);
  long long budget = params.eval_budget;

  for (int position = 1; position <= m; ++position) {
    for (long long attempt = 0; attempt < attempts; ++attempt) {
      if (budget < 2 * ell) return WdFail{WdFailReason::BudgetExhausted};
      std::vector<Point> test_ctx = draw_points(test, position - 1, rng);
      std::vector<Point> train_ctx = draw_points(train_marginal, m - position, rng);
      WeakDistinguisher wd(learner, eps, params.learner_delta, frozen,
                           std::move(test_ctx), std::move(train_ctx), position);
      long long gap = 0;
      for (long long j = 0; j < ell; ++j) {
        gap += wd.evaluate(train_marginal(rng), rng);
        gap -= wd.evaluate(test(rng), rng);
      }
      budget -= 2 * ell;
      if (static_cast<double>(gap) / static_cast<double>(ell) >= threshold)
        return wd;
    }
  }
  return WdFail{WdFailReason::NoGap};
}

AdvantageReport measure_advantage(
    const std::function<int(const Point&, Rng&)>& alg, const Sampler& d,
    const Sampler& d_prime, long long n_eval, Rng& rng) {
  if (n_eval < 1)
    throw std::invalid_argument("measure_advantage: n_eval >= 1");
  long long acc_d = 0;
  long long acc_dp = 0;
  for (long long i = 0; i < n_eval; ++i) {
    acc_d += alg(d(rng), rng) != 0;
    acc_dp += alg(d_prime(rng), rng) != 0;
  }
  AdvantageReport report;
  report.estimate = (static_cast<double>(acc_d) - static_cast<double>(acc_dp)) /
                    static_cast<double>(n_eval);
  report.n_eval_each = n_eval;
  report.direction = report.estimate >= 0.0 ? +1 : -1;
  return report;
}

}  // namespace shiftlab
