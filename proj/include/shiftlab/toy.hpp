#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shiftlab/samplers.hpp"
#include "shiftlab/tds.hpp"
#include "shiftlab/tds_boost.hpp"

namespace shiftlab {

/// Finite domain of k points (encoded as 1-dimensional Points holding the
/// bucket index) with explicit train/test probability tables and a concept
/// table. Enables exact enumeration oracles.
struct DiscreteDomain {
  int k = 2;
  std::vector<double> train_p;
  std::vector<double> test_p;
  std::vector<int> concept_labels;  // f: [k] -> {+1,-1}
  std::optional<double> lambda;     // label-flip rate, agnostic experiments

  void validate() const;  // tables sum to 1 within 1e-12

  Point point(int bucket) const;
  int bucket(const Point& x) const;

  Sampler train_sampler() const;
  Sampler test_sampler() const;
  Concept target() const;
  LabeledSampler labeled_train() const;  // concept labels, flipped at lambda
  LabeledSampler labeled_test() const;

  nlohmann::json to_json() const;
  static DiscreteDomain from_json(const nlohmann::json& j);
};

/// A paired (train, test, concept, lambda?) generator for experiments.
struct ShiftScenario {
  std::string name;
  int dim = 1;
  Sampler train;
  Sampler test;
  Concept target;
  std::optional<double> lambda;
  std::optional<DiscreteDomain> discrete;

  // Set when the target is a halfspace sign(w.x - theta).
  std::optional<Eigen::VectorXd> target_w;
  std::optional<double> target_theta;

  LabeledSampler labeled_train() const;
  LabeledSampler labeled_test() const;
};

/// TDS learner over a k-bucket domain: accepts iff the empirical total
/// variation between train and test histograms is at most eps/4, then
/// outputs the empirical-risk-minimizing threshold over [k].
std::shared_ptr<TdsLearner> histogram_tds(int k);

/// TDS learner rejecting iff any test point falls outside the empirical
/// train support; accepts with the train-ERM threshold otherwise.
std::shared_ptr<TdsLearner> support_tds(int k, int m = 8);

struct LeafMass {
  int i = 0;
  int t = 0;
  int label = 0;
  NodeKind kind = NodeKind::Unset;
  double train_mass = 0.0;
  double test_mass = 0.0;
};

struct ExactMetrics {
  double selective_error = 0.0;
  double rejection_rate = 0.0;
  std::vector<LeafMass> leaves;
};

/// Exact metrics by summing over all domain points and, for randomized
/// programs, all routing paths. Distinguishers and hypotheses must be
/// deterministic (the toy learners are); `rng` only feeds their interface.
ExactMetrics exact_metrics(const DiscreteDomain& domain,
                           const BranchingProgram& program, Rng& rng);

/// Exact metrics of a deterministic classifier on the domain.
ExactMetrics exact_metrics(const DiscreteDomain& domain,
                           const SelectiveClassifier& classifier, Rng& rng);

/// Exact benchmark lambda of the threshold class: min over thresholds of
/// summed train and test label errors.
double exact_benchmark_lambda(const DiscreteDomain& domain);

/// Exact single-sample advantage of a deterministic algorithm on the
/// domain: sum_j (train_p[j] - test_p[j]) * alg(x_j).
double exact_single_sample_advantage(
    const DiscreteDomain& domain,
    const std::function<int(const Point&, Rng&)>& alg, Rng& rng);

}  // namespace shiftlab
