#pragma once

#include <functional>

#include "shiftlab/selective.hpp"

namespace shiftlab::testutil {

/// Selective classifier built from a plain function, for test fixtures.
class FnClassifier : public SelectiveClassifier {
 public:
  using Fn = std::function<SelectiveDecision(const Point&, Rng&)>;
  explicit FnClassifier(Fn fn) : fn_(std::move(fn)) {}
  SelectiveDecision evaluate(const Point& x, Rng& rng) const override {
    return fn_(x, rng);
  }

 private:
  Fn fn_;
};

inline Point scalar_point(double v) {
  Point x(1);
  x[0] = v;
  return x;
}

}  // namespace shiftlab::testutil
