#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "shiftlab/point.hpp"
#include "shiftlab/rng.hpp"
#include "shiftlab/samplers.hpp"
#include "shiftlab/selective.hpp"
#include "shiftlab/tds.hpp"
#include "shiftlab/weak_distinguisher.hpp"

namespace shiftlab {

/// Keep probability of the rebalancing coin: 1 / (2 max(q, 1-q)).
double balance_keep_prob(double q_hat);

/// Rebalance a bit: with the keep probability output w unchanged, otherwise
/// output the bit farther from q_hat (tie at q_hat = 1/2 resolved towards
/// b = 1, irrelevant since the keep probability is then 1). If w ~
/// Bernoulli(q) and q_hat = q, the output is Bernoulli(1/2) exactly.
int balance(double q_hat, int w, Rng& rng);

/// Analytic P[balance(q_hat, w) = 1] for a fixed input bit.
double balance_prob_one(double q_hat, int w);

/// Construction parameters of the booster. theory() fills them from the
/// asymptotic formulas (levels clamped for desk scale); experiments may set
/// fields directly.
struct BoostParams {
  int levels = 8;             // T
  double delta_node = 0.01;   // per-estimate failure budget (delta')
  int majority_runs = 5;      // r
  double p_min = 0.02;        // rare-visit threshold
  double a_min = 0.95;        // acceptance threshold
  double gamma1 = 0.02;       // visit-mass estimate accuracy
  double gamma2 = 0.05;       // q_hat estimate accuracy
  double accept_acc = 0.01;   // acceptance estimate accuracy
  std::optional<double> eta;  // agnostic threshold; absent = realizable mode
  double rejection_cap_factor = 50.0;  // conditional-draw cap = factor / p_min
  WdParams wd;

  static BoostParams theory(int m, double eps, double delta,
                            std::optional<double> eta = std::nullopt,
                            double c = 4.0, int level_clamp = 64);
};

enum class NodeKind {
  Unset,
  Internal,
  LeafRare,
  LeafAccepted,
  LeafLevelT,
  LeafAgnostic,
};

/// Randomized routing bit of an internal node.
using BitFunction = std::function<int(const Point&, Rng&)>;

struct ProgramNode {
  NodeKind kind = NodeKind::Unset;
  int label = 0;              // selector value at leaves
  double q_hat = 0.5;         // internal nodes
  BitFunction distinguisher;  // internal nodes
  Hypothesis hypothesis;      // LeafAccepted; +1 elsewhere
};

struct NodeId {
  int i = 1;
  int t = 1;
  bool operator==(const NodeId&) const = default;
};

/// Triangular grid of nodes (i,t), 1 <= i <= t <= T. Internal nodes exist
/// only at t < T; routing moves (i,t) -> (i + bit, t+1) with a fresh
/// balanced bit per step.
class BranchingProgram {
 public:
  BranchingProgram() = default;
  explicit BranchingProgram(int levels);

  int levels() const { return levels_; }
  ProgramNode& at(int i, int t) { return nodes_[index(i, t)]; }
  const ProgramNode& at(int i, int t) const { return nodes_[index(i, t)]; }

  /// Route to a leaf with fresh coins.
  NodeId route(const Point& x, Rng& rng) const;

  /// Route until `max_level` is reached or a leaf stops the walk earlier.
  NodeId route_partial(const Point& x, Rng& rng, int max_level) const;

  /// Serializable description (hypotheses and distinguishers by reference).
  nlohmann::json describe() const;

 private:
  std::size_t index(int i, int t) const;

  int levels_ = 0;
  std::vector<ProgramNode> nodes_;
};

/// Routes x to a leaf and reads off the decision: g = leaf label, h = leaf
/// hypothesis (+1 unless the leaf carries one). Both are randomized through
/// the routing coins; one evaluate() call performs one routing.
class BoostedSelectiveClassifier : public SelectiveClassifier {
 public:
  BoostedSelectiveClassifier() = default;
  explicit BoostedSelectiveClassifier(BranchingProgram program)
      : program_(std::move(program)) {}

  SelectiveDecision evaluate(const Point& x, Rng& rng) const override;

  const BranchingProgram& program() const { return program_; }

 private:
  BranchingProgram program_;
};

struct BoostDiagnostics {
  long long learner_runs = 0;
  int wd_calls = 0;
  int wd_failures = 0;
  int nodes_internal = 0;
  int nodes_rare = 0;
  int nodes_accepted = 0;
  int nodes_agnostic = 0;
  int exhausted_conversions = 0;
  int built_levels = 0;
};

/// Pointwise majority over the hypotheses of accepting runs (ties -> +1).
/// Throws AllRunsRejected when no run accepts.
Hypothesis majority_vote_tds(const TdsLearner& learner,
                             const LabeledSampler& cond_train,
                             const Sampler& cond_test, double eps, double delta,
                             int runs, Rng& rng);

/// Level-by-level construction of the branching program. Agnostic mode is
/// active iff params.eta is set.
BranchingProgram build_program(const TdsLearner& learner,
                               const LabeledSampler& train, const Sampler& test,
                               double eps, double delta,
                               const BoostParams& params, Rng& rng,
                               BoostDiagnostics* diag = nullptr);

/// build_program wrapped as a selective classifier.
BoostedSelectiveClassifier boost(const TdsLearner& learner,
                                 const LabeledSampler& train,
                                 const Sampler& test, double eps, double delta,
                                 const BoostParams& params, Rng& rng,
                                 BoostDiagnostics* diag = nullptr);

}  // namespace shiftlab
