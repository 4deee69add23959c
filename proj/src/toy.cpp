#include "shiftlab/toy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "shiftlab/errors.hpp"

namespace shiftlab {

namespace {

void check_table(const std::vector<double>& p, int k, const char* what) {
  if (static_cast<int>(p.size()) != k)
    throw std::invalid_argument(std::string("DiscreteDomain: ") + what +
                                " table size != k");
  double sum = 0.0;
  for (const double v : p) {
    if (v < 0.0)
      throw std::invalid_argument(std::string("DiscreteDomain: negative ") + what);
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument(std::string("DiscreteDomain: ") + what +
                                " table does not sum to 1");
}

Sampler categorical(std::vector<double> p) {
  return [p = std::move(p)](Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    int j = 0;
    for (; j < static_cast<int>(p.size()) - 1; ++j) {
      acc += p[static_cast<std::size_t>(j)];
      if (u < acc) break;
    }
    Point x(1);
    x[0] = static_cast<double>(j);
    return x;
  };
}

int bucket_of(const Point& x, int k) {
  if (x.size() != 1)
    throw DimensionMismatch("DiscreteDomain: points are 1-dimensional");
  const long long j = std::llround(x[0]);
  if (j < 0 || j >= k)
    throw std::invalid_argument("DiscreteDomain: bucket out of range");
  return static_cast<int>(j);
}

/// ERM over thresholds h(j) = s * sign(j >= theta), theta in 0..k,
/// s in {+1,-1}, via bucket prefix counts. Ties resolve to the
/// lexicographically first (s=+1, small theta) so the learner stays
/// deterministic.
Hypothesis threshold_erm(std::span<const LabeledExample> examples, int k) {
  std::vector<long long> pos(static_cast<std::size_t>(k), 0);
  std::vector<long long> neg(static_cast<std::size_t>(k), 0);
  for (const auto& e : examples) {
    const std::size_t j = static_cast<std::size_t>(bucket_of(e.x, k));
    (e.y > 0 ? pos : neg)[j] += 1;
  }
  long long total_pos = 0, total_neg = 0;
  for (int j = 0; j < k; ++j) {
    total_pos += pos[static_cast<std::size_t>(j)];
    total_neg += neg[static_cast<std::size_t>(j)];
  }
  int best_theta = 0;
  int best_sign = +1;
  long long best_err = std::numeric_limits<long long>::max();
  for (const int s : {+1, -1}) {
    long long pos_below = 0, neg_below = 0;
    for (int theta = 0; theta <= k; ++theta) {
      // h = s on buckets >= theta, -s below.
      const long long err =
          s > 0 ? pos_below + (total_neg - neg_below)
                : neg_below + (total_pos - pos_below);
      if (err < best_err) {
        best_err = err;
        best_theta = theta;
        best_sign = s;
      }
      if (theta < k) {
        pos_below += pos[static_cast<std::size_t>(theta)];
        neg_below += neg[static_cast<std::size_t>(theta)];
      }
    }
  }
  return [theta = best_theta, s = best_sign](const Point& x) {
    const int j = static_cast<int>(std::llround(x[0]));
    return j >= theta ? s : -s;
  };
}

class HistogramTdsLearner : public TdsLearner {
 public:
  explicit HistogramTdsLearner(int k) : k_(k) {}

  int sample_complexity(double eps) const override {
    return static_cast<int>(std::ceil(24.0 * k_ / (eps * eps)));
  }

  TdsResult run(std::span<const LabeledExample> train,
                std::span<const Point> test, double eps, double /*delta*/,
                Rng& /*rng*/) const override {
    const std::size_t m_train =
        std::min(train.size(), static_cast<std::size_t>(train_size(eps)));
    const std::size_t m_test =
        std::min(test.size(), static_cast<std::size_t>(sample_complexity(eps)));
    std::vector<double> ht(static_cast<std::size_t>(k_), 0.0);
    std::vector<double> hs(static_cast<std::size_t>(k_), 0.0);
    for (std::size_t i = 0; i < m_train; ++i)
      ht[static_cast<std::size_t>(bucket_of(train[i].x, k_))] += 1.0;
    for (std::size_t i = 0; i < m_test; ++i)
      hs[static_cast<std::size_t>(bucket_of(test[i], k_))] += 1.0;
    double tv = 0.0;
    for (int j = 0; j < k_; ++j) {
      const double pt = m_train ? ht[static_cast<std::size_t>(j)] / m_train : 0.0;
      const double ps = m_test ? hs[static_cast<std::size_t>(j)] / m_test : 0.0;
      tv += std::abs(pt - ps);
    }
    tv /= 2.0;
    if (m_train == 0 || m_test == 0) tv = 1.0;
    if (tv > eps / 4.0) return {};
    return {true, threshold_erm(train.first(m_train), k_)};
  }

 private:
  int k_;
};

class SupportTdsLearner : public TdsLearner {
 public:
  SupportTdsLearner(int k, int m) : k_(k), m_(m) {}

  int sample_complexity(double /*eps*/) const override { return m_; }

  // Enough training draws that the empirical support is essentially exact;
  // a support-deficient training set turns the Phase-2 advantage threshold
  // into a coin flip against estimation noise.
  int train_size(double /*eps*/) const override { return std::max(m_, 8 * k_); }

  TdsResult run(std::span<const LabeledExample> train,
                std::span<const Point> test, double eps, double /*delta*/,
                Rng& /*rng*/) const override {
    const std::size_t m_train =
        std::min(train.size(), static_cast<std::size_t>(train_size(eps)));
    const std::size_t m_test =
        std::min(test.size(), static_cast<std::size_t>(m_));
    std::vector<bool> support(static_cast<std::size_t>(k_), false);
    for (std::size_t i = 0; i < m_train; ++i)
      support[static_cast<std::size_t>(bucket_of(train[i].x, k_))] = true;
    for (std::size_t i = 0; i < m_test; ++i)
      if (!support[static_cast<std::size_t>(bucket_of(test[i], k_))]) return {};
    if (m_train == 0) return {};
    return {true, threshold_erm(train.first(m_train), k_)};
  }

 private:
  int k_;
  int m_;
};

double label_error_prob(int h, int f, double lambda) {
  return h == f ? lambda : 1.0 - lambda;
}

}  // namespace

void DiscreteDomain::validate() const {
  if (k < 2) throw std::invalid_argument("DiscreteDomain: k >= 2");
  check_table(train_p, k, "train");
  check_table(test_p, k, "test");
  if (static_cast<int>(concept_labels.size()) != k)
    throw std::invalid_argument("DiscreteDomain: concept table size != k");
  for (const int y : concept_labels)
    if (y != +1 && y != -1)
      throw std::invalid_argument("DiscreteDomain: concept labels in {+1,-1}");
  if (lambda && !(*lambda >= 0.0 && *lambda < 0.5))
    throw std::invalid_argument("DiscreteDomain: lambda in [0, 1/2)");
}

Point DiscreteDomain::point(int bucket) const {
  if (bucket < 0 || bucket >= k)
    throw std::invalid_argument("DiscreteDomain: bucket out of range");
  Point x(1);
  x[0] = static_cast<double>(bucket);
  return x;
}

int DiscreteDomain::bucket(const Point& x) const { return bucket_of(x, k); }

Sampler DiscreteDomain::train_sampler() const { return categorical(train_p); }
Sampler DiscreteDomain::test_sampler() const { return categorical(test_p); }

Concept DiscreteDomain::target() const {
  return [labels = concept_labels, k = k](const Point& x) {
    return labels[static_cast<std::size_t>(bucket_of(x, k))];
  };
}

LabeledSampler DiscreteDomain::labeled_train() const {
  auto base = label_with(train_sampler(), target());
  if (!lambda) return base;
  return [base, rate = *lambda](Rng& rng) {
    LabeledExample e = base(rng);
    if (rng.bernoulli(rate)) e.y = -e.y;
    return e;
  };
}

LabeledSampler DiscreteDomain::labeled_test() const {
  auto base = label_with(test_sampler(), target());
  if (!lambda) return base;
  return [base, rate = *lambda](Rng& rng) {
    LabeledExample e = base(rng);
    if (rng.bernoulli(rate)) e.y = -e.y;
    return e;
  };
}

nlohmann::json DiscreteDomain::to_json() const {
  nlohmann::json j{{"k", k},
                   {"train", train_p},
                   {"test", test_p},
                   {"concept", concept_labels}};
  if (lambda) j["lambda"] = *lambda;
  return j;
}

DiscreteDomain DiscreteDomain::from_json(const nlohmann::json& j) {
  DiscreteDomain d;
  d.k = j.at("k").get<int>();
  d.train_p = j.at("train").get<std::vector<double>>();
  d.test_p = j.at("test").get<std::vector<double>>();
  d.concept_labels = j.at("concept").get<std::vector<int>>();
  if (j.contains("lambda")) d.lambda = j.at("lambda").get<double>();
  d.validate();
  return d;
}

LabeledSampler ShiftScenario::labeled_train() const {
  auto base = label_with(train, target);
  if (!lambda) return base;
  return [base, rate = *lambda](Rng& rng) {
    LabeledExample e = base(rng);
    if (rng.bernoulli(rate)) e.y = -e.y;
    return e;
  };
}

LabeledSampler ShiftScenario::labeled_test() const {
  auto base = label_with(test, target);
  if (!lambda) return base;
  return [base, rate = *lambda](Rng& rng) {
    LabeledExample e = base(rng);
    if (rng.bernoulli(rate)) e.y = -e.y;
    return e;
  };
}

std::shared_ptr<TdsLearner> histogram_tds(int k) {
  if (k < 2) throw std::invalid_argument("histogram_tds: k >= 2");
  return std::make_shared<HistogramTdsLearner>(k);
}

std::shared_ptr<TdsLearner> support_tds(int k, int m) {
  if (k < 2 || m < 1) throw std::invalid_argument("support_tds: k >= 2, m >= 1");
  return std::make_shared<SupportTdsLearner>(k, m);
}

ExactMetrics exact_metrics(const DiscreteDomain& domain,
                           const BranchingProgram& program, Rng& rng) {
  domain.validate();
  const int t_max = program.levels();
  const double lambda = domain.lambda.value_or(0.0);
  std::map<std::pair<int, int>, LeafMass> leaves;
  ExactMetrics out;

  for (int j = 0; j < domain.k; ++j) {
    const Point x = domain.point(j);
    const double pt = domain.train_p[static_cast<std::size_t>(j)];
    const double ps = domain.test_p[static_cast<std::size_t>(j)];

    // Forward pass over the grid; each cell keeps the probability that x's
    // routing visits it.
    std::vector<std::vector<double>> reach(
        static_cast<std::size_t>(t_max) + 2,
        std::vector<double>(static_cast<std::size_t>(t_max) + 2, 0.0));
    reach[1][1] = 1.0;
    for (int t = 1; t <= t_max; ++t) {
      for (int i = 1; i <= t; ++i) {
        const double mass = reach[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
        if (mass <= 0.0) continue;
        const ProgramNode& node = program.at(i, t);
        if (node.kind == NodeKind::Internal) {
          const int w = node.distinguisher(x, rng) != 0 ? 1 : 0;
          const double p1 = balance_prob_one(node.q_hat, w);
          reach[static_cast<std::size_t>(t) + 1][static_cast<std::size_t>(i) + 1] += mass * p1;
          reach[static_cast<std::size_t>(t) + 1][static_cast<std::size_t>(i)] += mass * (1.0 - p1);
          continue;
        }
        LeafMass& lm = leaves[{i, t}];
        lm.i = i;
        lm.t = t;
        lm.label = node.label;
        lm.kind = node.kind;
        lm.train_mass += pt * mass;
        lm.test_mass += ps * mass;
        if (node.label == 0) {
          out.rejection_rate += pt * mass;
        } else {
          const int h = node.hypothesis ? node.hypothesis(x) : +1;
          const int f = domain.concept_labels[static_cast<std::size_t>(j)];
          out.selective_error += ps * mass * label_error_prob(h, f, lambda);
        }
      }
    }
  }
  for (auto& [key, lm] : leaves) out.leaves.push_back(lm);
  return out;
}

ExactMetrics exact_metrics(const DiscreteDomain& domain,
                           const SelectiveClassifier& classifier, Rng& rng) {
  domain.validate();
  const double lambda = domain.lambda.value_or(0.0);
  ExactMetrics out;
  for (int j = 0; j < domain.k; ++j) {
    const SelectiveDecision d = classifier.evaluate(domain.point(j), rng);
    const double pt = domain.train_p[static_cast<std::size_t>(j)];
    const double ps = domain.test_p[static_cast<std::size_t>(j)];
    if (!d.selected) {
      out.rejection_rate += pt;
    } else {
      const int f = domain.concept_labels[static_cast<std::size_t>(j)];
      out.selective_error += ps * label_error_prob(d.label, f, lambda);
    }
  }
  return out;
}

double exact_single_sample_advantage(
    const DiscreteDomain& domain,
    const std::function<int(const Point&, Rng&)>& alg, Rng& rng) {
  domain.validate();
  double adv = 0.0;
  for (int j = 0; j < domain.k; ++j) {
    const int v = alg(domain.point(j), rng) != 0 ? 1 : 0;
    adv += (domain.train_p[static_cast<std::size_t>(j)] -
            domain.test_p[static_cast<std::size_t>(j)]) *
           v;
  }
  return adv;
}

double exact_benchmark_lambda(const DiscreteDomain& domain) {
  domain.validate();
  const double lambda = domain.lambda.value_or(0.0);
  double best = 2.0;
  for (const int s : {+1, -1}) {
    for (int theta = 0; theta <= domain.k; ++theta) {
      double err = 0.0;
      for (int j = 0; j < domain.k; ++j) {
        const int h = j >= theta ? s : -s;
        const int f = domain.concept_labels[static_cast<std::size_t>(j)];
        const double pe = label_error_prob(h, f, lambda);
        err += domain.train_p[static_cast<std::size_t>(j)] * pe +
               domain.test_p[static_cast<std::size_t>(j)] * pe;
      }
      best = std::min(best, err);
    }
  }
  return best;
}

}  // namespace shiftlab
