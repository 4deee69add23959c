#include "shiftlab/tds_boost.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "shiftlab/errors.hpp"
#include "shiftlab/estimate.hpp"

namespace shiftlab {

double balance_keep_prob(double q_hat) {
  return 1.0 / (1.0 + 2.0 * std::abs(q_hat - 0.5));
}

int balance(double q_hat, int w, Rng& rng) {
  const int b = q_hat >= 0.5 ? 1 : 0;
  return rng.bernoulli(balance_keep_prob(q_hat)) ? w : 1 - b;
}

double balance_prob_one(double q_hat, int w) {
  const double keep = balance_keep_prob(q_hat);
  const int b = q_hat >= 0.5 ? 1 : 0;
  return keep * w + (1.0 - keep) * (1 - b);
}

BoostParams BoostParams::theory(int m, double eps, double delta,
                                std::optional<double> eta, double c,
                                int level_clamp) {
  if (m < 1) throw std::invalid_argument("BoostParams: m >= 1");
  BoostParams p;
  const double t_raw = std::ceil(c * m * m * std::log(1.0 / eps));
  p.levels = static_cast<int>(std::clamp(t_raw, 2.0, static_cast<double>(level_clamp)));
  const double t = p.levels;
  p.delta_node = delta / (c * std::pow(t, 10.0));
  p.majority_runs =
      static_cast<int>(std::ceil(c * std::log(t / (eps * delta))));
  p.p_min = 3.0 * eps / (4.0 * t * (t + 1.0));
  p.a_min = 0.95;
  p.gamma1 = (eta ? eps * *eta : eps) / (4.0 * t * (t + 1.0));
  p.gamma2 = 1.0 / (c * m);
  p.accept_acc = 0.01;
  p.eta = eta;
  return p;
}

BranchingProgram::BranchingProgram(int levels) : levels_(levels) {
  if (levels < 2) throw std::invalid_argument("BranchingProgram: levels >= 2");
  nodes_.resize(static_cast<std::size_t>(levels) * (levels + 1) / 2);
  // Level-T nodes are always leaves with label 1{i >= T/2}.
  for (int i = 1; i <= levels; ++i) {
    ProgramNode& node = at(i, levels);
    node.kind = NodeKind::LeafLevelT;
    node.label = 2 * i >= levels ? 1 : 0;
  }
}

std::size_t BranchingProgram::index(int i, int t) const {
  if (t < 1 || t > levels_ || i < 1 || i > t)
    throw std::out_of_range("BranchingProgram: node (" + std::to_string(i) +
                            "," + std::to_string(t) + ") out of range");
  return static_cast<std::size_t>(t - 1) * t / 2 + static_cast<std::size_t>(i - 1);
}

NodeId BranchingProgram::route(const Point& x, Rng& rng) const {
  return route_partial(x, rng, levels_);
}

NodeId BranchingProgram::route_partial(const Point& x, Rng& rng,
                                       int max_level) const {
  NodeId cur;
  while (cur.t < max_level) {
    const ProgramNode& node = at(cur.i, cur.t);
    if (node.kind != NodeKind::Internal) break;
    const int w = node.distinguisher(x, rng) != 0 ? 1 : 0;
    cur.i += balance(node.q_hat, w, rng);
    cur.t += 1;
  }
  return cur;
}

nlohmann::json BranchingProgram::describe() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (int t = 1; t <= levels_; ++t) {
    for (int i = 1; i <= t; ++i) {
      const ProgramNode& node = at(i, t);
      const char* kind = "unset";
      switch (node.kind) {
        case NodeKind::Internal: kind = "internal"; break;
        case NodeKind::LeafRare: kind = "rare"; break;
        case NodeKind::LeafAccepted: kind = "accepted"; break;
        case NodeKind::LeafLevelT: kind = "level-T"; break;
        case NodeKind::LeafAgnostic: kind = "agnostic"; break;
        case NodeKind::Unset: break;
      }
      nlohmann::json entry{{"i", i}, {"t", t}, {"kind", kind}};
      if (node.kind == NodeKind::Internal) {
        entry["q_hat"] = node.q_hat;
        entry["distinguisher"] = "wd@(" + std::to_string(i) + "," +
                                 std::to_string(t) + ")";
      } else {
        entry["label"] = node.label;
        entry["hypothesis"] = node.hypothesis
                                  ? "majority@(" + std::to_string(i) + "," +
                                        std::to_string(t) + ")"
                                  : "+1";
      }
      nodes.push_back(std::move(entry));
    }
  }
  return {{"levels", levels_}, {"nodes", std::move(nodes)}};
}

SelectiveDecision BoostedSelectiveClassifier::evaluate(const Point& x,
                                                       Rng& rng) const {
  const NodeId leaf = program_.route(x, rng);
  const ProgramNode& node = program_.at(leaf.i, leaf.t);
  const int label = node.hypothesis ? node.hypothesis(x) : +1;
  return {node.label == 1, label};
}

Hypothesis majority_vote_tds(const TdsLearner& learner,
                             const LabeledSampler& cond_train,
                             const Sampler& cond_test, double eps, double delta,
                             int runs, Rng& rng) {
  if (runs < 1) throw std::invalid_argument("majority_vote_tds: runs >= 1");
  const int m_train = learner.train_size(eps);
  const int m_test = learner.sample_complexity(eps);
  auto accepted = std::make_shared<std::vector<Hypothesis>>();
  for (int r = 0; r < runs; ++r) {
    std::vector<LabeledExample> train_set;
    train_set.reserve(static_cast<std::size_t>(m_train));
    for (int k = 0; k < m_train; ++k) train_set.push_back(cond_train(rng));
    std::vector<Point> test_set;
    test_set.reserve(static_cast<std::size_t>(m_test));
    for (int k = 0; k < m_test; ++k) test_set.push_back(cond_test(rng));
    TdsResult res = learner.run(train_set, test_set, eps, delta, rng);
    if (res.accepted) accepted->push_back(std::move(res.hypothesis));
  }
  if (accepted->empty())
    throw AllRunsRejected("majority_vote_tds: zero accepting runs");
  return [accepted](const Point& x) {
    int sum = 0;
    for (const auto& h : *accepted) sum += h(x);
    return sum >= 0 ? +1 : -1;
  };
}

namespace {

/// Conditional-draw failure: the node's visiting mass is below the working
/// threshold for distribution b.
struct CondExhausted {
  int b;
};

class NodeConditionals {
 public:
  NodeConditionals(const BranchingProgram& program, NodeId node,
                   const LabeledSampler& train, const Sampler& test,
                   long long cap)
      : program_(program), node_(node), train_(train), test_(test), cap_(cap) {}

  bool reaches(const Point& x, Rng& rng) const {
    return program_.route_partial(x, rng, node_.t) == node_;
  }

  LabeledExample draw_train(Rng& rng) const {
    for (long long a = 0; a < cap_; ++a) {
      LabeledExample e = train_(rng);
      if (reaches(e.x, rng)) return e;
    }
    throw CondExhausted{1};
  }

  Point draw_test(Rng& rng) const {
    for (long long a = 0; a < cap_; ++a) {
      Point x = test_(rng);
      if (reaches(x, rng)) return x;
    }
    throw CondExhausted{0};
  }

  LabeledSampler train_sampler() const {
    return [this](Rng& rng) { return draw_train(rng); };
  }

  Sampler test_sampler() const {
    return [this](Rng& rng) { return draw_test(rng); };
  }

 private:
  const BranchingProgram& program_;
  NodeId node_;
  const LabeledSampler& train_;
  const Sampler& test_;
  long long cap_;
};

void make_rare_leaf(ProgramNode& node, int label) {
  node.kind = NodeKind::LeafRare;
  node.label = label;
  node.distinguisher = nullptr;
  node.hypothesis = nullptr;
}

}  // namespace

BranchingProgram build_program(const TdsLearner& learner,
                               const LabeledSampler& train, const Sampler& test,
                               double eps, double delta,
                               const BoostParams& params, Rng& rng,
                               BoostDiagnostics* diag) {
  BoostDiagnostics local;
  BoostDiagnostics& d = diag ? *diag : local;
  const int t_max = params.levels;
  BranchingProgram program(t_max);

  const long long n_visit =
      EstimateSpec(params.gamma1, params.delta_node).sample_count();
  const long long n_accept =
      EstimateSpec(params.accept_acc, params.delta_node).sample_count();
  const long long n_qhat =
      EstimateSpec(params.gamma2, params.delta_node).sample_count();
  const long long cap = static_cast<long long>(
      std::ceil(params.rejection_cap_factor / params.p_min));
  const int m_train = learner.train_size(eps);
  const int m_test = learner.sample_complexity(eps);
  const Sampler train_marginal = marginal_of(train);

  for (int t = 1; t < t_max; ++t) {
    // A level is live only if something can route into it.
    bool live = t == 1;
    for (int i = 1; i <= t - 1 && !live; ++i)
      live = program.at(i, t - 1).kind == NodeKind::Internal;
    if (!live) {
      for (int tt = t; tt < t_max; ++tt)
        for (int i = 1; i <= tt; ++i)
          if (program.at(i, tt).kind == NodeKind::Unset)
            make_rare_leaf(program.at(i, tt), 0);
      break;
    }
    d.built_levels = t;

    // Visit-mass estimates, one batch of routed draws per distribution.
    std::vector<double> p_hat[2];
    p_hat[0].assign(static_cast<std::size_t>(t) + 1, 0.0);
    p_hat[1].assign(static_cast<std::size_t>(t) + 1, 0.0);
    if (t == 1) {
      p_hat[0][1] = p_hat[1][1] = 1.0;
    } else {
      for (int b = 0; b < 2; ++b) {
        for (long long k = 0; k < n_visit; ++k) {
          const Point x = b == 1 ? train_marginal(rng) : test(rng);
          const NodeId where = program.route_partial(x, rng, t);
          if (where.t == t) p_hat[b][static_cast<std::size_t>(where.i)] += 1.0;
        }
        for (int i = 1; i <= t; ++i)
          p_hat[b][static_cast<std::size_t>(i)] /= static_cast<double>(n_visit);
      }
    }

    for (int i = 1; i <= t; ++i) {
      ProgramNode& node = program.at(i, t);
      bool reachable = t == 1;
      if (i <= t - 1 && t > 1)
        reachable = reachable || program.at(i, t - 1).kind == NodeKind::Internal;
      if (i - 1 >= 1 && t > 1)
        reachable =
            reachable || program.at(i - 1, t - 1).kind == NodeKind::Internal;
      if (!reachable) {
        make_rare_leaf(node, 0);
        continue;
      }

      const double p1 = p_hat[1][static_cast<std::size_t>(i)];
      const double p0 = p_hat[0][static_cast<std::size_t>(i)];
      if (p1 < params.p_min) {  // train rarely visits: assign to test side
        make_rare_leaf(node, 0);
        ++d.nodes_rare;
        continue;
      }
      if (p0 < params.p_min) {  // test rarely visits: assign to train side
        make_rare_leaf(node, 1);
        ++d.nodes_rare;
        continue;
      }
      if (params.eta && p1 <= *params.eta * p0) {
        node.kind = NodeKind::LeafAgnostic;
        node.label = 0;
        ++d.nodes_agnostic;
        continue;
      }

      const NodeConditionals cond(program, NodeId{i, t}, train, test, cap);
      try {
        // Acceptance probability of the learner on the conditionals.
        long long accepted = 0;
        for (long long k = 0; k < n_accept; ++k) {
          std::vector<LabeledExample> train_set;
          train_set.reserve(static_cast<std::size_t>(m_train));
          for (int j = 0; j < m_train; ++j) train_set.push_back(cond.draw_train(rng));
          std::vector<Point> test_set;
          test_set.reserve(static_cast<std::size_t>(m_test));
          for (int j = 0; j < m_test; ++j) test_set.push_back(cond.draw_test(rng));
          accepted +=
              learner.run(train_set, test_set, eps, delta, rng).accepted ? 1 : 0;
          ++d.learner_runs;
        }
        const double a_hat =
            static_cast<double>(accepted) / static_cast<double>(n_accept);

        if (a_hat >= params.a_min) {
          try {
            node.hypothesis = majority_vote_tds(learner, cond.train_sampler(),
                                                cond.test_sampler(), eps, delta,
                                                params.majority_runs, rng);
            d.learner_runs += params.majority_runs;
            node.kind = NodeKind::LeafAccepted;
            node.label = 1;
            ++d.nodes_accepted;
            continue;
          } catch (const AllRunsRejected&) {
            // Unlucky acceptance estimate; fall through to the WD branch.
          }
        }

        ++d.wd_calls;
        WdResult wd_res =
            get_weak_distinguisher(learner, cond.train_sampler(),
                                   cond.test_sampler(), eps,
                                   std::min(params.delta_node, 0.33), rng,
                                   params.wd);
        if (std::holds_alternative<WdFail>(wd_res)) {
          // The analysis excludes this event; abstaining is the error-safe
          // direction.
          ++d.wd_failures;
          make_rare_leaf(node, 0);
          ++d.nodes_rare;
          continue;
        }
        const auto& wd = std::get<WeakDistinguisher>(wd_res);

        long long ones = 0;
        for (long long k = 0; k < n_qhat; ++k) {
          const Point x = rng.bernoulli(0.5) ? cond.draw_train(rng).x
                                             : cond.draw_test(rng);
          ones += wd.evaluate(x, rng);
        }
        node.q_hat = static_cast<double>(ones) / static_cast<double>(n_qhat);
        node.distinguisher = wd.as_function();
        node.kind = NodeKind::Internal;
        ++d.nodes_internal;
      } catch (const CondExhausted& e) {
        // Conditional mass below the working threshold: same handling as an
        // estimated p_hat below p_min.
        make_rare_leaf(node, 1 - e.b);
        ++d.nodes_rare;
        ++d.exhausted_conversions;
      }
    }
  }
  return program;
}

BoostedSelectiveClassifier boost(const TdsLearner& learner,
                                 const LabeledSampler& train,
                                 const Sampler& test, double eps, double delta,
                                 const BoostParams& params, Rng& rng,
                                 BoostDiagnostics* diag) {
  return BoostedSelectiveClassifier(
      build_program(learner, train, test, eps, delta, params, rng, diag));
}

}  // namespace shiftlab
