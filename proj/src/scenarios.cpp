#include "shiftlab/scenarios.hpp"

#include <cmath>
#include <set>
#include <string>

#include "shiftlab/errors.hpp"

namespace shiftlab {

namespace {

void reject_unknown_fields(const nlohmann::json& params,
                           const std::set<std::string>& allowed,
                           const std::string& name) {
  for (const auto& [key, value] : params.items()) {
    if (!allowed.count(key))
      throw ConfigInvalid("scenario '" + name + "': unknown field '" + key + "'");
  }
}

Point gaussian_point(int n, Rng& rng) {
  Point x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.gaussian();
  return x;
}

struct HalfspaceTarget {
  Eigen::VectorXd w;  // unit
  double theta = 0.0;
};

HalfspaceTarget make_target(const nlohmann::json& params, int n, Rng& rng) {
  HalfspaceTarget t;
  t.w = uniform_sphere_point(n, rng);
  if (params.contains("theta")) {
    t.theta = params.at("theta").get<double>();
  } else if (params.contains("theta_range")) {
    const double r = params.at("theta_range").get<double>();
    t.theta = (2.0 * rng.uniform() - 1.0) * r;
  }
  return t;
}

Concept halfspace_concept(const HalfspaceTarget& t) {
  return [w = t.w, theta = t.theta](const Point& x) {
    return sign_pm(w.dot(x) - theta);
  };
}

}  // namespace

Point uniform_sphere_point(int n, Rng& rng) {
  for (;;) {
    Point x = gaussian_point(n, rng);
    const double norm = x.norm();
    if (norm > 1e-12) return x / norm;
  }
}

ShiftScenario generate_scenario(const std::string& name,
                                const nlohmann::json& params, Rng& rng) {
  ShiftScenario s;
  s.name = name;

  if (name == "sphere-uniform" || name == "gaussian-normalized") {
    reject_unknown_fields(params, {"n", "theta", "theta_range", "scales"}, name);
    const int n = params.at("n").get<int>();
    s.dim = n;
    Eigen::VectorXd scales = Eigen::VectorXd::Ones(n);
    if (params.contains("scales")) {
      const auto v = params.at("scales").get<std::vector<double>>();
      if (static_cast<int>(v.size()) != n)
        throw ConfigInvalid("scenario: scales size != n");
      for (int i = 0; i < n; ++i) scales[i] = v[i];
    }
    Sampler draw = [n, scales](Rng& r) {
      Point x(n);
      for (int i = 0; i < n; ++i) x[i] = scales[i] * r.gaussian();
      const double norm = x.norm();
      return norm > 1e-12 ? Point(x / norm) : Point(Eigen::VectorXd::Unit(n, 0));
    };
    s.train = draw;
    s.test = draw;
    const HalfspaceTarget t = make_target(params, n, rng);
    s.target = halfspace_concept(t);
    s.target_w = t.w;
    s.target_theta = t.theta;
    return s;
  }

  if (name == "subspace-concentrated") {
    reject_unknown_fields(params, {"n", "subspace_dim", "mass", "theta", "theta_range"},
                          name);
    const int n = params.at("n").get<int>();
    const int d = params.at("subspace_dim").get<int>();
    const double mass = params.at("mass").get<double>();
    if (d < 1 || d >= n) throw ConfigInvalid("scenario: subspace_dim in [1, n)");
    if (!(mass >= 0.0 && mass <= 1.0)) throw ConfigInvalid("scenario: mass in [0,1]");
    s.dim = n;
    // Fixed random orthonormal basis of the concentration subspace.
    Eigen::MatrixXd g(n, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) g(i, j) = rng.gaussian();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd basis =
        Eigen::MatrixXd(qr.householderQ()).leftCols(d);
    Sampler draw = [n, d, mass, basis](Rng& r) {
      if (r.bernoulli(mass)) {
        Point z = uniform_sphere_point(d, r);
        return Point(basis * z);
      }
      return uniform_sphere_point(n, r);
    };
    s.train = draw;
    s.test = draw;
    const HalfspaceTarget t = make_target(params, n, rng);
    s.target = halfspace_concept(t);
    s.target_w = t.w;
    s.target_theta = t.theta;
    return s;
  }

  if (name == "boundary-concentrated") {
    reject_unknown_fields(params, {"n", "margin", "theta", "theta_range"}, name);
    const int n = params.at("n").get<int>();
    const double margin = params.at("margin").get<double>();
    if (!(margin > 0.0 && margin < 0.5))
      throw ConfigInvalid("scenario: margin in (0, 0.5)");
    s.dim = n;
    const HalfspaceTarget t = make_target(params, n, rng);
    s.target = halfspace_concept(t);
    s.target_w = t.w;
    s.target_theta = t.theta;
    s.train = [n](Rng& r) { return uniform_sphere_point(n, r); };
    // Test points on the sphere within `margin` of the decision surface:
    // x = (theta + u) w + sqrt(1 - (theta+u)^2) v with v a unit vector
    // orthogonal to w and |u| <= margin.
    s.test = [n, w = t.w, theta = t.theta, margin](Rng& r) {
      for (;;) {
        const double u = (2.0 * r.uniform() - 1.0) * margin;
        const double c = theta + u;
        if (std::abs(c) >= 1.0 || u == 0.0) continue;
        Point g(n);
        for (int i = 0; i < n; ++i) g[i] = r.gaussian();
        Point v = g - w.dot(g) * w;
        const double norm = v.norm();
        if (norm < 1e-12) continue;
        v /= norm;
        return Point(c * w + std::sqrt(1.0 - c * c) * v);
      }
    };
    return s;
  }

  if (name == "discrete-k") {
    reject_unknown_fields(params, {"k", "train", "test", "concept", "lambda"}, name);
    DiscreteDomain domain = DiscreteDomain::from_json(params);
    s.dim = 1;
    s.train = domain.train_sampler();
    s.test = domain.test_sampler();
    s.target = domain.target();
    s.lambda = domain.lambda;
    s.discrete = std::move(domain);
    return s;
  }

  throw UnknownScenario("unknown scenario '" + name + "'");
}

}  // namespace shiftlab
