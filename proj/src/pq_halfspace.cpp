#include "shiftlab/pq_halfspace.hpp"

#include <cmath>
#include <memory>

namespace shiftlab {

namespace {

constexpr double kMemberTol = 1e-9;
constexpr double kZeroNormTol = 1e-12;

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows > 0 ? static_cast<int>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  return m;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) v[i] = j.at(i).get<double>();
  return v;
}

}  // namespace

Point homogenize(const Point& x) {
  Point lifted(x.size() + 1);
  lifted[0] = 1.0;
  lifted.tail(x.size()) = x;
  return lifted;
}

int lifted_query(const std::function<int(const Point&)>& f, const Point& p) {
  if (p.size() < 2)
    throw DimensionMismatch("lifted_query: point must have dimension >= 2");
  const double c = p[0];
  if (c == 0.0) throw DegenerateQuery("lifted_query: lift coordinate is zero");
  const Point x = p.tail(p.size() - 1) / c;
  return f(x) * sign_pm(c);
}

bool StageClassifier::accepts(const Point& x) const {
  const Eigen::VectorXd coords = stage.to_subspace(x);
  const Eigen::VectorXd residual = x - stage.basis * coords;
  if (residual.norm() > kMemberTol) return false;
  Eigen::VectorXd y = stage.transform * coords;
  const double norm = y.norm();
  if (norm < kZeroNormTol) return false;  // no margin information near zero
  return mc.g(y / norm);
}

int StageClassifier::label(const Point& x) const {
  return mc.h(stage.transformed_unit(x));
}

SelectiveDecision HalfspacePqClassifier::evaluate(const Point& x) const {
  if (x.size() != dim_)
    throw DimensionMismatch("HalfspacePqClassifier: wrong input dimension");
  for (const auto& sc : stages_)
    if (sc.accepts(x)) return {true, sc.label(x)};
  return {false, +1};
}

PqLearnResult learn_halfspace(const std::vector<Point>& train, double eps,
                              double delta, MembershipOracle& oracle,
                              Rng& rng) {
  if (train.empty())
    throw std::invalid_argument("learn_halfspace: empty training set");
  if (!(eps > 0.0 && eps < 1.0 / 3.0))
    throw std::invalid_argument("learn_halfspace: eps in (0,1/3)");
  if (!(delta > 0.0 && delta < 1.0 / 3.0))
    throw std::invalid_argument("learn_halfspace: delta in (0,1/3)");

  const int n = static_cast<int>(train.front().size());
  const double log_term = std::log(2.0 / eps);
  const int round_cap = static_cast<int>(std::ceil(4.0 * n * log_term));
  const double sub_delta = delta / (24.0 * n * log_term);
  const double gamma = 1.0 / (2.0 * std::sqrt(static_cast<double>(n)));

  std::vector<Point> residual;
  residual.reserve(train.size());
  for (const auto& x : train) {
    const double norm = x.norm();
    if (!(norm >= kZeroNormTol))
      throw NonUnitInput("learn_halfspace: training point with near-zero norm");
    residual.push_back(x / norm);
  }

  const double total = static_cast<double>(train.size());
  std::vector<StageClassifier> stages;
  LearnExit exit = LearnExit::MassThreshold;
  int round = 0;

  while (static_cast<double>(residual.size()) / total >= eps / 2.0) {
    if (round >= round_cap) {
      exit = LearnExit::RoundCap;
      break;
    }
    ForsterStage stage = forster_decompose(residual, sub_delta, rng);
    const std::vector<int> members =
        subspace_members(residual, stage.basis, kMemberTol);
    if (members.empty()) {
      exit = LearnExit::EmptyIntersection;  // only reachable on certificate failure
      break;
    }

    const int d = stage.dim();
    const Eigen::MatrixXd back_map = stage.basis * stage.transform_inv;
    const auto transformed_oracle = [&oracle, &back_map](const Point& z) {
      return oracle.query(back_map * z);
    };
    MarginClassifier mc =
        learn_high_margin_halfspace(transformed_oracle, d, gamma, sub_delta, rng);

    StageClassifier sc{std::move(stage), std::move(mc)};
    std::vector<Point> next;
    next.reserve(residual.size());
    for (const auto& x : residual)
      if (!sc.accepts(x)) next.push_back(x);
    residual = std::move(next);
    stages.push_back(std::move(sc));
    ++round;
  }

  PqLearnResult result;
  result.classifier = HalfspacePqClassifier(n, std::move(stages));
  result.exit = exit;
  result.rounds = round;
  result.residual_fraction = static_cast<double>(residual.size()) / total;
  return result;
}

SelectiveDecision GeneralPqClassifier::evaluate(const Point& x) const {
  if (x.size() != input_dim_)
    throw DimensionMismatch("GeneralPqClassifier: wrong input dimension");
  Point lifted = homogenize(x);
  lifted /= lifted.norm();
  return inner_.evaluate(lifted);
}

GeneralLearnResult learn_general_halfspace(const std::vector<Point>& train,
                                           double eps, double delta,
                                           MembershipOracle& oracle, Rng& rng) {
  if (train.empty())
    throw std::invalid_argument("learn_general_halfspace: empty training set");
  const int n = static_cast<int>(train.front().size());

  auto degenerate = std::make_shared<long long>(0);
  MembershipOracle lifted_oracle([&oracle, degenerate](const Point& p) {
    const double c = p[0];
    if (c == 0.0) {
      ++*degenerate;
      throw DegenerateQuery("lifted oracle: lift coordinate is zero");
    }
    const Point x = p.tail(p.size() - 1) / c;
    return oracle.query(x) * sign_pm(c);
  });

  std::vector<Point> lifted_train;
  lifted_train.reserve(train.size());
  for (const auto& x : train) {
    Point p = homogenize(x);
    lifted_train.push_back(p / p.norm());
  }

  PqLearnResult inner = learn_halfspace(lifted_train, eps, delta, lifted_oracle, rng);

  GeneralLearnResult result;
  result.classifier = GeneralPqClassifier(n, std::move(inner.classifier));
  result.exit = inner.exit;
  result.rounds = inner.rounds;
  result.residual_fraction = inner.residual_fraction;
  result.degenerate_queries = *degenerate;
  return result;
}

nlohmann::json to_json(const HalfspacePqClassifier& c) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& sc : c.stages()) {
    stages.push_back({{"basis", matrix_to_json(sc.stage.basis)},
                      {"transform", matrix_to_json(sc.stage.transform)},
                      {"w_hat", vector_to_json(sc.mc.w_hat)},
                      {"gamma", sc.mc.gamma}});
  }
  return {{"kind", "halfspace-pq"}, {"dim", c.dim()}, {"stages", stages}};
}

HalfspacePqClassifier halfspace_classifier_from_json(const nlohmann::json& j) {
  std::vector<StageClassifier> stages;
  for (const auto& js : j.at("stages")) {
    StageClassifier sc;
    sc.stage.basis = matrix_from_json(js.at("basis"));
    sc.stage.transform = matrix_from_json(js.at("transform"));
    sc.stage.transform_inv = sc.stage.transform.inverse();
    sc.mc.w_hat = vector_from_json(js.at("w_hat"));
    sc.mc.gamma = js.at("gamma").get<double>();
    stages.push_back(std::move(sc));
  }
  return HalfspacePqClassifier(j.at("dim").get<int>(), std::move(stages));
}

nlohmann::json to_json(const GeneralPqClassifier& c) {
  nlohmann::json j = to_json(c.inner());
  return {{"kind", "general-pq"}, {"dim", c.dim()}, {"inner", std::move(j)}};
}

GeneralPqClassifier general_classifier_from_json(const nlohmann::json& j) {
  return GeneralPqClassifier(j.at("dim").get<int>(),
                             halfspace_classifier_from_json(j.at("inner")));
}

}  // namespace shiftlab
