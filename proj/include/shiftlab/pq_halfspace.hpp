#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <json.hpp>

#include "shiftlab/errors.hpp"
#include "shiftlab/forster.hpp"
#include "shiftlab/margin.hpp"
#include "shiftlab/point.hpp"
#include "shiftlab/samplers.hpp"
#include "shiftlab/selective.hpp"

namespace shiftlab {

/// Homogenizing lift: x in R^n -> (1, x) in R^{n+1}. The lift coordinate
/// comes first; a general halfspace sign(w.x - theta) becomes the
/// homogeneous sign((-theta, w) . (1, x)).
Point homogenize(const Point& x);

/// Answer a membership query for the lifted concept at p = (c, x):
/// f(x/c) * sign(c) for c != 0; throws DegenerateQuery when c == 0 exactly.
int lifted_query(const std::function<int(const Point&)>& f, const Point& p);

/// One decision-list entry: a Forster stage paired with a margin classifier
/// acting in the stage's transformed coordinates. Accepts x only if x lies
/// in V (tolerance 1e-9), the transformed image has non-negligible norm, and
/// the margin selector fires on the normalized image.
struct StageClassifier {
  ForsterStage stage;
  MarginClassifier mc;

  bool accepts(const Point& x) const;
  int label(const Point& x) const;
};

/// Decision list of stage classifiers; h returns the first accepting
/// stage's label, g = 1 iff some stage accepts, default label +1.
/// Evaluation is deterministic.
class HalfspacePqClassifier : public SelectiveClassifier {
 public:
  HalfspacePqClassifier() = default;
  HalfspacePqClassifier(int dim, std::vector<StageClassifier> stages)
      : dim_(dim), stages_(std::move(stages)) {}

  SelectiveDecision evaluate(const Point& x) const;
  SelectiveDecision evaluate(const Point& x, Rng&) const override {
    return evaluate(x);
  }

  int dim() const { return dim_; }
  const std::vector<StageClassifier>& stages() const { return stages_; }

 private:
  int dim_ = 0;
  std::vector<StageClassifier> stages_;
};

enum class LearnExit { MassThreshold, RoundCap, EmptyIntersection };

struct PqLearnResult {
  HalfspacePqClassifier classifier;
  LearnExit exit = LearnExit::MassThreshold;
  int rounds = 0;
  double residual_fraction = 0.0;
};

/// Membership-query PQ learner for homogeneous halfspaces over the unit
/// sphere: repeat {Forster stage -> margin learner on the transformed
/// oracle with gamma = 1/(2 sqrt(n)) -> remove accepted points} until the
/// residual falls below eps/2 of the training set or the round cap
/// 4 n log(2/eps) is hit.
PqLearnResult learn_halfspace(const std::vector<Point>& train, double eps,
                              double delta, MembershipOracle& oracle,
                              Rng& rng);

/// Composition with the homogenizing lift for general (non-homogeneous)
/// targets: evaluation lifts, normalizes, and defers to the inner
/// classifier over R^{n+1}.
class GeneralPqClassifier : public SelectiveClassifier {
 public:
  GeneralPqClassifier() = default;
  GeneralPqClassifier(int input_dim, HalfspacePqClassifier inner)
      : input_dim_(input_dim), inner_(std::move(inner)) {}

  SelectiveDecision evaluate(const Point& x) const;
  SelectiveDecision evaluate(const Point& x, Rng&) const override {
    return evaluate(x);
  }

  int dim() const { return input_dim_; }
  const HalfspacePqClassifier& inner() const { return inner_; }

 private:
  int input_dim_ = 0;
  HalfspacePqClassifier inner_;
};

struct GeneralLearnResult {
  GeneralPqClassifier classifier;
  LearnExit exit = LearnExit::MassThreshold;
  int rounds = 0;
  double residual_fraction = 0.0;
  long long degenerate_queries = 0;
};

/// Lift the training set and the oracle, learn in R^{n+1}, and compose the
/// outputs with the lift.
GeneralLearnResult learn_general_halfspace(const std::vector<Point>& train,
                                           double eps, double delta,
                                           MembershipOracle& oracle, Rng& rng);

nlohmann::json to_json(const HalfspacePqClassifier& c);
HalfspacePqClassifier halfspace_classifier_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GeneralPqClassifier& c);
GeneralPqClassifier general_classifier_from_json(const nlohmann::json& j);

}  // namespace shiftlab
