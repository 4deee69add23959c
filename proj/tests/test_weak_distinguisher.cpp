#include <doctest.h>

#include <array>
#include <cmath>
#include <functional>

#include "shiftlab/toy.hpp"
#include "shiftlab/weak_distinguisher.hpp"
#include "util.hpp"

using namespace shiftlab;
using testutil::scalar_point;

namespace {

DiscreteDomain disjoint_domain() {
  DiscreteDomain d;
  d.k = 4;
  d.train_p = {0.5, 0.5, 0.0, 0.0};
  d.test_p = {0.0, 0.0, 0.5, 0.5};
  d.concept_labels = {-1, -1, -1, +1};
  d.validate();
  return d;
}

DiscreteDomain identical_domain() {
  DiscreteDomain d;
  d.k = 4;
  d.train_p = {0.25, 0.25, 0.25, 0.25};
  d.test_p = {0.25, 0.25, 0.25, 0.25};
  d.concept_labels = {-1, -1, +1, +1};
  d.validate();
  return d;
}

/// Deterministic order-sensitive m-sample algorithm wrapped as a TdsLearner;
/// exercises the hybrid position conventions exactly.
class TupleLearner : public TdsLearner {
 public:
  using Fn = std::function<bool(std::span<const Point>)>;
  TupleLearner(int m, Fn fn) : m_(m), fn_(std::move(fn)) {}
  int sample_complexity(double) const override { return m_; }
  int train_size(double) const override { return 0; }
  TdsResult run(std::span<const LabeledExample>, std::span<const Point> test,
                double, double, Rng&) const override {
    TdsResult res;
    res.accepted = fn_(test.first(static_cast<std::size_t>(m_)));
    if (res.accepted) res.hypothesis = [](const Point&) { return +1; };
    return res;
  }

 private:
  int m_;
  Fn fn_;
};

}  // namespace

TEST_CASE("disjoint supports yield a strong single-sample distinguisher") {
  const DiscreteDomain domain = disjoint_domain();
  const auto learner = support_tds(domain.k, 4);
  const int m = learner->sample_complexity(0.1);

  Rng rng(51);
  int successes = 0;
  const int runs = 8;
  for (int r = 0; r < runs; ++r) {
    WdResult res =
        get_weak_distinguisher(*learner, domain.labeled_train(),
                               domain.test_sampler(), 0.1, 0.1, rng);
    if (std::holds_alternative<WdFail>(res)) continue;
    ++successes;
    const auto& wd = std::get<WeakDistinguisher>(res);

    // Exact enumerated advantage clears the return threshold 1/(5000m).
    const double exact =
        exact_single_sample_advantage(domain, wd.as_function(), rng);
    CHECK(exact >= 1.0 / (5000.0 * m));
    CHECK(exact >= 0.5);

    const AdvantageReport rep =
        measure_advantage(wd.as_function(), domain.train_sampler(),
                          domain.test_sampler(), 20000, rng);
    CHECK(rep.estimate >= 0.5);
    CHECK(rep.direction == +1);

    // The frozen training set reproduces the acceptance gap on fresh sets.
    double gap = 0.0;
    const int reps = 30;
    for (int i = 0; i < reps; ++i) {
      std::vector<Point> fresh_train, fresh_test;
      for (int j = 0; j < m; ++j) {
        fresh_train.push_back(domain.train_sampler()(rng));
        fresh_test.push_back(domain.test_sampler()(rng));
      }
      gap += learner->run(wd.frozen_train(), fresh_train, 0.1, 0.01, rng).accepted;
      gap -= learner->run(wd.frozen_train(), fresh_test, 0.1, 0.01, rng).accepted;
    }
    CHECK(gap / reps >= 0.003);
  }
  CHECK(successes >= 7);
}

TEST_CASE("identical distributions produce Fail") {
  const DiscreteDomain domain = identical_domain();
  const auto learner = support_tds(domain.k, 4);
  Rng rng(52);
  WdParams params;
  params.eval_budget = 50000;
  int fails = 0;
  for (int r = 0; r < 5; ++r) {
    WdResult res =
        get_weak_distinguisher(*learner, domain.labeled_train(),
                               domain.test_sampler(), 0.1, 0.1, rng, params);
    if (std::holds_alternative<WdFail>(res)) ++fails;
  }
  CHECK(fails == 5);
}

TEST_CASE("a tiny budget fails with the budget reason code") {
  const DiscreteDomain domain = identical_domain();
  const auto learner = support_tds(domain.k, 4);
  Rng rng(53);
  WdParams params;
  params.eval_budget = 100;  // below one attempt's evaluation bill
  const WdResult res =
      get_weak_distinguisher(*learner, domain.labeled_train(),
                             domain.test_sampler(), 0.1, 0.1, rng, params);
  REQUIRE(std::holds_alternative<WdFail>(res));
  CHECK(std::get<WdFail>(res).reason == WdFailReason::BudgetExhausted);
}

TEST_CASE("evaluation consumes no fresh distribution samples") {
  const DiscreteDomain domain = disjoint_domain();
  const auto learner = support_tds(domain.k, 4);
  Rng rng(54);

  long long train_draws = 0, test_draws = 0;
  const LabeledSampler train = [&](Rng& g) {
    ++train_draws;
    return domain.labeled_train()(g);
  };
  const Sampler test = [&](Rng& g) {
    ++test_draws;
    return domain.test_sampler()(g);
  };

  const WdResult res =
      get_weak_distinguisher(*learner, train, test, 0.1, 0.1, rng);
  REQUIRE(std::holds_alternative<WeakDistinguisher>(res));
  const auto& wd = std::get<WeakDistinguisher>(res);

  const long long train_before = train_draws;
  const long long test_before = test_draws;
  for (int i = 0; i < 50; ++i)
    wd.evaluate(scalar_point(i % domain.k), rng);
  CHECK(train_draws == train_before);
  CHECK(test_draws == test_before);
}

TEST_CASE("measure_advantage degenerate cases") {
  Rng rng(55);
  const DiscreteDomain domain = identical_domain();
  const auto same = [](const Point&, Rng&) { return 1; };
  const AdvantageReport zero = measure_advantage(
      same, domain.train_sampler(), domain.test_sampler(), 20000, rng);
  CHECK(std::abs(zero.estimate) <= 0.03);

  const DiscreteDomain dis = disjoint_domain();
  const auto support_indicator = [](const Point& x, Rng&) {
    return x[0] <= 1.0 ? 1 : 0;
  };
  const AdvantageReport one = measure_advantage(
      support_indicator, dis.train_sampler(), dis.test_sampler(), 20000, rng);
  CHECK(one.estimate == doctest::Approx(1.0));
}

TEST_CASE("hybrid telescoping is exact on a 4-point domain with m = 3") {
  // D = train over {0..3} with probabilities p, D' = test with q. The
  // acceptance function is deterministic and order sensitive.
  const std::array<double, 4> p{0.1, 0.4, 0.2, 0.3};
  const std::array<double, 4> q{0.3, 0.1, 0.45, 0.15};
  const int m = 3, k = 4;
  const auto accepts = [](std::span<const Point> t) {
    const int a = static_cast<int>(t[0][0]);
    const int b = static_cast<int>(t[1][0]);
    const int c = static_cast<int>(t[2][0]);
    return (a <= 1 && b != 2 && c % 2 == 1) || (a == 3 && b == 0);
  };

  // P[accept] when the first `i` coordinates follow q and the rest follow p.
  const auto hybrid = [&](int i) {
    double total = 0.0;
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        for (int c = 0; c < k; ++c) {
          const std::array<int, 3> tup{a, b, c};
          double w = 1.0;
          for (int pos = 0; pos < m; ++pos)
            w *= pos < i ? q[static_cast<std::size_t>(tup[static_cast<std::size_t>(pos)])]
                         : p[static_cast<std::size_t>(tup[static_cast<std::size_t>(pos)])];
          std::vector<Point> pts{scalar_point(a), scalar_point(b), scalar_point(c)};
          if (accepts(pts)) total += w;
        }
    return total;
  };

  const double gap = hybrid(0) - hybrid(m);
  double telescoped = 0.0;
  for (int i = 1; i <= m; ++i) telescoped += hybrid(i - 1) - hybrid(i);
  CHECK(std::abs(telescoped - gap) <= 1e-12);

  // Each per-position advantage equals the expected advantage of the
  // frozen-context distinguisher at that position, enumerated exactly.
  const TupleLearner learner(m, accepts);
  Rng rng(56);
  for (int position = 1; position <= m; ++position) {
    double expected_adv = 0.0;
    // Contexts: position-1 test points before, m-position train points after.
    const int n_test_ctx = position - 1;
    const int n_train_ctx = m - position;
    std::vector<int> ctx(static_cast<std::size_t>(m - 1), 0);
    const int combos = static_cast<int>(std::pow(k, m - 1));
    for (int code = 0; code < combos; ++code) {
      int rest = code;
      double weight = 1.0;
      std::vector<Point> test_ctx, train_ctx;
      for (int j = 0; j < n_test_ctx; ++j) {
        const int v = rest % k;
        rest /= k;
        weight *= q[static_cast<std::size_t>(v)];
        test_ctx.push_back(scalar_point(v));
      }
      for (int j = 0; j < n_train_ctx; ++j) {
        const int v = rest % k;
        rest /= k;
        weight *= p[static_cast<std::size_t>(v)];
        train_ctx.push_back(scalar_point(v));
      }
      const WeakDistinguisher wd(learner, 0.1, 0.01, {}, test_ctx, train_ctx,
                                 position);
      double adv = 0.0;
      for (int v = 0; v < k; ++v)
        adv += (p[static_cast<std::size_t>(v)] - q[static_cast<std::size_t>(v)]) *
               wd.evaluate(scalar_point(v), rng);
      expected_adv += weight * adv;
    }
    CHECK(std::abs(expected_adv - (hybrid(position - 1) - hybrid(position))) <=
          1e-12);
  }
}
