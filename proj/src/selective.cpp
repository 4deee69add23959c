#include "shiftlab/selective.hpp"

#include <stdexcept>

namespace shiftlab {

double selective_error(const SelectiveClassifier& c, const LabeledSampler& test,
                       long long n_eval, Rng& rng) {
  if (n_eval < 1) throw std::invalid_argument("selective_error: n_eval >= 1");
  long long bad = 0;
  for (long long i = 0; i < n_eval; ++i) {
    const LabeledExample e = test(rng);
    const SelectiveDecision d = c.evaluate(e.x, rng);
    if (d.selected && d.label != e.y) ++bad;
  }
  return static_cast<double>(bad) / static_cast<double>(n_eval);
}

double rejection_rate(const SelectiveClassifier& c, const Sampler& train,
                      long long n_eval, Rng& rng) {
  if (n_eval < 1) throw std::invalid_argument("rejection_rate: n_eval >= 1");
  long long rejected = 0;
  for (long long i = 0; i < n_eval; ++i) {
    const Point x = train(rng);
    if (!c.evaluate(x, rng).selected) ++rejected;
  }
  return static_cast<double>(rejected) / static_cast<double>(n_eval);
}

double selective_error(const SelectiveClassifier& c,
                       std::span<const LabeledExample> test, Rng& rng) {
  if (test.empty()) throw std::invalid_argument("selective_error: empty list");
  long long bad = 0;
  for (const auto& e : test) {
    const SelectiveDecision d = c.evaluate(e.x, rng);
    if (d.selected && d.label != e.y) ++bad;
  }
  return static_cast<double>(bad) / static_cast<double>(test.size());
}

double rejection_rate(const SelectiveClassifier& c, std::span<const Point> train,
                      Rng& rng) {
  if (train.empty()) throw std::invalid_argument("rejection_rate: empty list");
  long long rejected = 0;
  for (const auto& x : train)
    if (!c.evaluate(x, rng).selected) ++rejected;
  return static_cast<double>(rejected) / static_cast<double>(train.size());
}

}  // namespace shiftlab
