#include "shiftlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <thread>

#include "shiftlab/csv.hpp"
#include "shiftlab/errors.hpp"
#include "shiftlab/forster.hpp"
#include "shiftlab/pq_halfspace.hpp"
#include "shiftlab/scenarios.hpp"
#include "shiftlab/selective.hpp"
#include "shiftlab/tds_boost.hpp"
#include "shiftlab/toy.hpp"
#include "shiftlab/weak_distinguisher.hpp"

namespace shiftlab {

namespace {

using Clock = std::chrono::steady_clock;
using Deadline = std::optional<Clock::time_point>;

/// Cooperative per-trial wall budget; checked between pipeline phases.
struct TrialBudgetHit : std::runtime_error {
  TrialBudgetHit() : std::runtime_error("trial wall budget exhausted") {}
};

void check_deadline(const Deadline& deadline) {
  if (deadline && Clock::now() > *deadline) throw TrialBudgetHit{};
}

const std::set<std::string> kBaseKeys = {
    "mode", "scenario", "eps",  "delta",   "eta",
    "trials", "seed",   "out",  "workers", "trial_budget_ms"};

const std::map<std::string, std::set<std::string>> kModeKeys = {
    {"pq-halfspace",
     {"train_size", "n_eval_train", "n_eval_test", "n_adversarial", "lift"}},
    {"tdsboost",
     {"learner", "support_m", "theory", "levels", "p_min", "gamma1", "gamma2",
      "accept_acc", "delta_node", "majority_runs", "rejection_cap_factor",
      "wd_c", "wd_c_prime", "wd_budget", "wd_learner_delta", "n_eval"}},
    {"forster-check", {"input_csv", "labeled", "points_per_trial"}},
    {"weakdist",
     {"learner", "support_m", "n_eval_advantage", "wd_c", "wd_c_prime",
      "wd_budget", "wd_learner_delta"}},
};

double get_or(const nlohmann::json& j, const char* key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

long long get_or_ll(const nlohmann::json& j, const char* key, long long fallback) {
  return j.contains(key) ? j.at(key).get<long long>() : fallback;
}

std::string get_or_str(const nlohmann::json& j, const char* key,
                       const std::string& fallback) {
  return j.contains(key) ? j.at(key).get<std::string>() : fallback;
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::shared_ptr<TdsLearner> learner_from_config(const nlohmann::json& extra,
                                                const ShiftScenario& scenario) {
  if (!scenario.discrete)
    throw ConfigInvalid("this mode needs a discrete-k scenario");
  const std::string name = get_or_str(extra, "learner", "histogram");
  const int k = scenario.discrete->k;
  if (name == "histogram") return histogram_tds(k);
  if (name == "support")
    return support_tds(k, static_cast<int>(get_or_ll(extra, "support_m", 8)));
  throw ConfigInvalid("unknown learner '" + name + "'");
}

WdParams wd_params_from(const nlohmann::json& extra, double fallback_delta) {
  WdParams p;
  p.c = get_or(extra, "wd_c", p.c);
  p.c_prime = get_or(extra, "wd_c_prime", p.c_prime);
  p.eval_budget = get_or_ll(extra, "wd_budget", p.eval_budget);
  p.learner_delta = get_or(extra, "wd_learner_delta", p.learner_delta);
  (void)fallback_delta;
  return p;
}

using MetricRows = std::vector<std::pair<std::string, double>>;

// ---------------------------------------------------------------- pq mode

/// Unit point with w.x exactly c (θ + signed margin), random otherwise.
Point sphere_point_with_projection(const Eigen::VectorXd& w, double c, Rng& rng) {
  const int n = static_cast<int>(w.size());
  for (;;) {
    Point g(n);
    for (int i = 0; i < n; ++i) g[i] = rng.gaussian();
    Point v = g - w.dot(g) * w;
    const double norm = v.norm();
    if (norm < 1e-12) continue;
    v /= norm;
    return Point(c * w + std::sqrt(1.0 - c * c) * v);
  }
}

MetricRows run_pq_trial(const ExperimentConfig& cfg, int /*trial*/, Rng& rng,
                        const Deadline& deadline) {
  const nlohmann::json params = [&] {
    nlohmann::json p = cfg.scenario;
    p.erase("name");
    return p;
  }();
  ShiftScenario scenario =
      generate_scenario(cfg.scenario.at("name").get<std::string>(), params, rng);
  if (!scenario.target_w)
    throw ConfigInvalid("pq-halfspace needs a halfspace-target scenario");
  const Eigen::VectorXd w = *scenario.target_w;
  const double theta = scenario.target_theta.value_or(0.0);

  const long long train_size = get_or_ll(cfg.extra, "train_size", 2000);
  const long long n_eval_train = get_or_ll(cfg.extra, "n_eval_train", 20000);
  const long long n_eval_test = get_or_ll(cfg.extra, "n_eval_test", 80000);
  const long long n_adversarial = get_or_ll(cfg.extra, "n_adversarial", 20000);
  const std::string lift = get_or_str(cfg.extra, "lift", "auto");

  std::vector<Point> train;
  train.reserve(static_cast<std::size_t>(train_size));
  for (long long i = 0; i < train_size; ++i) train.push_back(scenario.train(rng));

  MembershipOracle oracle(
      [w, theta](const Point& x) { return sign_pm(w.dot(x) - theta); });

  const bool use_lift =
      lift == "always" || (lift == "auto" && theta != 0.0);
  check_deadline(deadline);

  std::unique_ptr<SelectiveClassifier> classifier;
  double residual_fraction = 0.0;
  int rounds = 0;
  int exit_code = 0;
  long long degenerate = 0;
  std::size_t stages = 0;
  if (use_lift) {
    GeneralLearnResult res =
        learn_general_halfspace(train, cfg.eps, cfg.delta, oracle, rng);
    residual_fraction = res.residual_fraction;
    rounds = res.rounds;
    exit_code = static_cast<int>(res.exit);
    degenerate = res.degenerate_queries;
    stages = res.classifier.inner().stages().size();
    classifier = std::make_unique<GeneralPqClassifier>(std::move(res.classifier));
  } else {
    PqLearnResult res = learn_halfspace(train, cfg.eps, cfg.delta, oracle, rng);
    residual_fraction = res.residual_fraction;
    rounds = res.rounds;
    exit_code = static_cast<int>(res.exit);
    stages = res.classifier.stages().size();
    classifier = std::make_unique<HalfspacePqClassifier>(std::move(res.classifier));
  }
  check_deadline(deadline);

  const double rejection =
      rejection_rate(*classifier, scenario.train, n_eval_train, rng);
  check_deadline(deadline);

  // RPU check: every selected point must carry the target's exact sign.
  long long selected = 0;
  long long wrong_selected = 0;
  const auto check_point = [&](const Point& x) {
    const double margin = w.dot(x) - theta;
    if (margin == 0.0) return;  // target sign undefined; skip
    const SelectiveDecision d = classifier->evaluate(x, rng);
    if (!d.selected) return;
    ++selected;
    if (d.label != sign_pm(margin)) ++wrong_selected;
  };
  for (long long i = 0; i < n_eval_test; ++i) check_point(scenario.test(rng));
  // Adversarial points: exact signed margins down to 1e-10, both sides.
  const double margins[] = {1e-10, 1e-8, 1e-6, 1e-4, 1e-3, 1e-2};
  for (long long i = 0; i < n_adversarial; ++i) {
    const double s = margins[(i / 2) % 6] * (i % 2 == 0 ? 1.0 : -1.0);
    const double c = theta + s;
    if (std::abs(c) >= 1.0) continue;
    check_point(sphere_point_with_projection(w, c, rng));
  }

  return {
      {"rejection_rate", rejection},
      {"selective_errors", static_cast<double>(wrong_selected)},
      {"selected_count", static_cast<double>(selected)},
      {"query_count", static_cast<double>(oracle.query_count())},
      {"stages", static_cast<double>(stages)},
      {"rounds", static_cast<double>(rounds)},
      {"residual_fraction", residual_fraction},
      {"exit_code", static_cast<double>(exit_code)},
      {"degenerate_queries", static_cast<double>(degenerate)},
  };
}

// ----------------------------------------------------------- tdsboost mode

BoostParams boost_params_from(const ExperimentConfig& cfg, const TdsLearner& a) {
  const nlohmann::json& e = cfg.extra;
  if (e.contains("theory") && e.at("theory").get<bool>()) {
    BoostParams p = BoostParams::theory(a.sample_complexity(cfg.eps), cfg.eps,
                                        cfg.delta, cfg.eta);
    p.wd = wd_params_from(e, cfg.delta);
    return p;
  }
  BoostParams p;
  p.levels = static_cast<int>(get_or_ll(e, "levels", p.levels));
  p.p_min = get_or(e, "p_min", p.p_min);
  p.gamma1 = get_or(e, "gamma1", p.gamma1);
  p.gamma2 = get_or(e, "gamma2", p.gamma2);
  p.accept_acc = get_or(e, "accept_acc", p.accept_acc);
  p.delta_node = get_or(e, "delta_node", p.delta_node);
  p.majority_runs = static_cast<int>(get_or_ll(e, "majority_runs", p.majority_runs));
  p.rejection_cap_factor =
      get_or(e, "rejection_cap_factor", p.rejection_cap_factor);
  p.eta = cfg.eta;
  p.wd = wd_params_from(e, cfg.delta);
  return p;
}

MetricRows run_tdsboost_trial(const ExperimentConfig& cfg, int trial,
                              Rng& rng, const Deadline& deadline) {
  nlohmann::json params = cfg.scenario;
  params.erase("name");
  ShiftScenario scenario =
      generate_scenario(cfg.scenario.at("name").get<std::string>(), params, rng);
  auto learner = learner_from_config(cfg.extra, scenario);
  BoostParams bp = boost_params_from(cfg, *learner);

  BoostDiagnostics diag;
  BoostedSelectiveClassifier cls =
      boost(*learner, scenario.labeled_train(), scenario.test, cfg.eps,
            cfg.delta, bp, rng, &diag);
  check_deadline(deadline);

  if (trial == 0 && !cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream os(cfg.out_dir + "/program.json", std::ios::binary);
    if (os) os << cls.program().describe().dump(2) << "\n";
  }

  DiscreteDomain domain = *scenario.discrete;
  const ExactMetrics em = exact_metrics(domain, cls.program(), rng);
  double rare0_train_mass = 0.0;
  double agnostic_train_mass = 0.0;
  for (const auto& leaf : em.leaves) {
    if (leaf.kind == NodeKind::LeafRare && leaf.label == 0)
      rare0_train_mass += leaf.train_mass;
    if (leaf.kind == NodeKind::LeafAgnostic) agnostic_train_mass += leaf.train_mass;
  }

  return {
      {"selective_error", em.selective_error},
      {"rejection_rate", em.rejection_rate},
      {"leaves", static_cast<double>(em.leaves.size())},
      {"nodes_internal", static_cast<double>(diag.nodes_internal)},
      {"nodes_accepted", static_cast<double>(diag.nodes_accepted)},
      {"nodes_rare", static_cast<double>(diag.nodes_rare)},
      {"nodes_agnostic", static_cast<double>(diag.nodes_agnostic)},
      {"wd_calls", static_cast<double>(diag.wd_calls)},
      {"wd_failures", static_cast<double>(diag.wd_failures)},
      {"learner_runs", static_cast<double>(diag.learner_runs)},
      {"built_levels", static_cast<double>(diag.built_levels)},
      {"rare0_train_mass", rare0_train_mass},
      {"agnostic_train_mass", agnostic_train_mass},
      {"benchmark_lambda", exact_benchmark_lambda(domain)},
  };
}

// ----------------------------------------------------------- weakdist mode

MetricRows run_weakdist_trial(const ExperimentConfig& cfg, int /*trial*/,
                              Rng& rng, const Deadline& deadline) {
  nlohmann::json params = cfg.scenario;
  params.erase("name");
  ShiftScenario scenario =
      generate_scenario(cfg.scenario.at("name").get<std::string>(), params, rng);
  auto learner = learner_from_config(cfg.extra, scenario);
  const WdParams wp = wd_params_from(cfg.extra, cfg.delta);
  const long long n_eval = get_or_ll(cfg.extra, "n_eval_advantage", 20000);

  WdResult res = get_weak_distinguisher(*learner, scenario.labeled_train(),
                                        scenario.test, cfg.eps, cfg.delta, rng, wp);
  check_deadline(deadline);

  MetricRows rows;
  if (std::holds_alternative<WdFail>(res)) {
    rows.push_back({"success", 0.0});
    rows.push_back({"fail_reason",
                    std::get<WdFail>(res).reason == WdFailReason::NoGap ? 0.0 : 1.0});
    return rows;
  }
  const auto& wd = std::get<WeakDistinguisher>(res);
  rows.push_back({"success", 1.0});
  rows.push_back({"position", static_cast<double>(wd.position())});
  const AdvantageReport rep = measure_advantage(
      wd.as_function(), marginal_of(scenario.labeled_train()), scenario.test,
      n_eval, rng);
  rows.push_back({"advantage_measured", rep.estimate});
  if (scenario.discrete) {
    rows.push_back({"advantage_exact",
                    exact_single_sample_advantage(*scenario.discrete,
                                                  wd.as_function(), rng)});
  }
  const int m = learner->sample_complexity(cfg.eps);
  rows.push_back({"threshold", 1.0 / (5000.0 * m)});
  return rows;
}

// ------------------------------------------------------- forster-check mode

MetricRows run_forster_trial(const ExperimentConfig& cfg, int /*trial*/,
                             Rng& rng, const Deadline& deadline) {
  std::vector<Point> points;
  if (cfg.extra.contains("input_csv")) {
    const std::string path = cfg.extra.at("input_csv").get<std::string>();
    if (cfg.extra.contains("labeled") && cfg.extra.at("labeled").get<bool>()) {
      for (const auto& e : read_labeled_csv(path)) points.push_back(e.x);
    } else {
      points = read_points_csv(path);
    }
  } else {
    nlohmann::json params = cfg.scenario;
    params.erase("name");
    ShiftScenario scenario = generate_scenario(
        cfg.scenario.at("name").get<std::string>(), params, rng);
    const long long count = get_or_ll(cfg.extra, "points_per_trial", 200);
    points.reserve(static_cast<std::size_t>(count));
    for (long long i = 0; i < count; ++i) points.push_back(scenario.train(rng));
  }
  check_deadline(deadline);

  const int n = static_cast<int>(points.front().size());
  const ForsterOutcome outcome = forster_transform(points, cfg.eps);
  MetricRows rows;
  rows.push_back({"n", static_cast<double>(n)});
  rows.push_back({"points", static_cast<double>(points.size())});
  if (const auto* tr = std::get_if<ForsterTransform>(&outcome)) {
    std::vector<Point> images;
    images.reserve(points.size());
    for (const auto& p : points) {
      const Point y = tr->map * (p / p.norm());
      images.push_back(y / y.norm());
    }
    rows.push_back({"certificate", 0.0});
    rows.push_back({"eps_star", isotropy_eps(images)});
    rows.push_back({"iterations", static_cast<double>(tr->iterations)});
    rows.push_back({"verified",
                    is_radially_isotropic(images, cfg.eps) ? 1.0 : 0.0});
  } else {
    const auto& sub = std::get<ForsterSubspace>(outcome);
    rows.push_back({"certificate", 1.0});
    rows.push_back({"subspace_dim", static_cast<double>(sub.basis.cols())});
    rows.push_back({"member_count", static_cast<double>(sub.members.size())});
    rows.push_back({"verified",
                    counting_condition(sub.members.size(),
                                       static_cast<int>(sub.basis.cols()),
                                       points.size(), n)
                        ? 1.0
                        : 0.0});
  }
  return rows;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigInvalid("config must be a JSON object");
  if (!j.contains("mode")) throw ConfigInvalid("config: missing 'mode'");
  ExperimentConfig cfg;
  cfg.mode = j.at("mode").get<std::string>();
  const auto mode_it = kModeKeys.find(cfg.mode);
  if (mode_it == kModeKeys.end())
    throw ConfigInvalid("config: unknown mode '" + cfg.mode + "'");
  for (const auto& [key, value] : j.items()) {
    if (!kBaseKeys.count(key) && !mode_it->second.count(key))
      throw ConfigInvalid("config: unknown field '" + key + "'");
    if (!kBaseKeys.count(key)) cfg.extra[key] = value;
  }
  if (j.contains("scenario")) {
    cfg.scenario = j.at("scenario");
    if (!cfg.scenario.is_object() || !cfg.scenario.contains("name"))
      throw ConfigInvalid("config: scenario needs a 'name'");
  } else if (cfg.mode != "forster-check" || !cfg.extra.contains("input_csv")) {
    throw ConfigInvalid("config: missing 'scenario'");
  }
  cfg.eps = get_or(j, "eps", cfg.eps);
  cfg.delta = get_or(j, "delta", cfg.delta);
  if (j.contains("eta")) cfg.eta = j.at("eta").get<double>();
  cfg.trials = static_cast<int>(get_or_ll(j, "trials", cfg.trials));
  cfg.seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>() : 0;
  cfg.out_dir = get_or_str(j, "out", "");
  cfg.workers = static_cast<int>(get_or_ll(j, "workers", 1));
  if (j.contains("trial_budget_ms"))
    cfg.trial_budget_ms = j.at("trial_budget_ms").get<double>();
  if (!(cfg.eps > 0.0 && cfg.eps < 1.0)) throw ConfigInvalid("config: eps in (0,1)");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
    throw ConfigInvalid("config: delta in (0,1)");
  if (cfg.trials < 1) throw ConfigInvalid("config: trials >= 1");
  if (cfg.workers < 1) throw ConfigInvalid("config: workers >= 1");
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open config " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j{{"mode", mode},   {"eps", eps},
                   {"delta", delta}, {"trials", trials},
                   {"seed", seed},   {"workers", workers}};
  if (!scenario.is_null()) j["scenario"] = scenario;
  if (eta) j["eta"] = *eta;
  if (!out_dir.empty()) j["out"] = out_dir;
  if (trial_budget_ms) j["trial_budget_ms"] = *trial_budget_ms;
  for (const auto& [key, value] : extra.items()) j[key] = value;
  return j;
}

std::string Report::csv_bytes() const {
  std::string out = "trial,metric,value\n";
  for (const auto& row : rows) {
    out += std::to_string(row.trial);
    out += ',';
    out += row.metric;
    out += ',';
    out += format_value(row.value);
    out += '\n';
  }
  return out;
}

std::string Report::timings_csv_bytes() const {
  std::string out = "trial,wall_ms\n";
  for (std::size_t t = 0; t < wall_ms.size(); ++t) {
    out += std::to_string(t);
    out += ',';
    out += format_value(wall_ms[t]);
    out += '\n';
  }
  return out;
}

Report run_experiment(const ExperimentConfig& cfg) {
  std::function<MetricRows(int, Rng&, const Deadline&)> runner;
  if (cfg.mode == "pq-halfspace") {
    runner = [&cfg](int t, Rng& r, const Deadline& d) {
      return run_pq_trial(cfg, t, r, d);
    };
  } else if (cfg.mode == "tdsboost") {
    runner = [&cfg](int t, Rng& r, const Deadline& d) {
      return run_tdsboost_trial(cfg, t, r, d);
    };
  } else if (cfg.mode == "weakdist") {
    runner = [&cfg](int t, Rng& r, const Deadline& d) {
      return run_weakdist_trial(cfg, t, r, d);
    };
  } else if (cfg.mode == "forster-check") {
    runner = [&cfg](int t, Rng& r, const Deadline& d) {
      return run_forster_trial(cfg, t, r, d);
    };
  } else {
    throw ConfigInvalid("run_experiment: unknown mode '" + cfg.mode + "'");
  }

  struct TrialOutcome {
    MetricRows metrics;
    double wall = 0.0;
    int status = 0;  // 0 ok, 1 error, 2 budget
    std::string error;
  };
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(cfg.trials));
  std::atomic<int> next{0};

  const auto work = [&] {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= cfg.trials) return;
      TrialOutcome& out = outcomes[static_cast<std::size_t>(t)];
      const auto start = Clock::now();
      Deadline deadline;
      if (cfg.trial_budget_ms)
        deadline = start + std::chrono::duration_cast<Clock::duration>(
                               std::chrono::duration<double, std::milli>(
                                   *cfg.trial_budget_ms));
      try {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(t)));
        out.metrics = runner(t, rng, deadline);
      } catch (const TrialBudgetHit&) {
        out.status = 2;
      } catch (const std::exception& e) {
        out.status = 1;
        out.error = e.what();
      }
      out.wall = std::chrono::duration<double, std::milli>(Clock::now() - start)
                     .count();
    }
  };

  const int n_workers = std::min(cfg.workers, cfg.trials);
  if (n_workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  Report report;
  std::map<std::string, std::vector<double>> by_metric;
  nlohmann::ordered_json errors = nlohmann::ordered_json::array();
  int ok = 0, failed = 0, budget = 0;
  for (int t = 0; t < cfg.trials; ++t) {
    const TrialOutcome& out = outcomes[static_cast<std::size_t>(t)];
    for (const auto& [name, value] : out.metrics) {
      report.rows.push_back({t, name, value});
      if (out.status == 0) by_metric[name].push_back(value);
    }
    report.rows.push_back({t, "status", static_cast<double>(out.status)});
    report.wall_ms.push_back(out.wall);
    if (out.status == 0) ++ok;
    if (out.status == 1) {
      ++failed;
      errors.push_back({{"trial", t}, {"message", out.error}});
    }
    if (out.status == 2) ++budget;
  }

  nlohmann::ordered_json metrics;
  for (const auto& [name, values] : by_metric) {
    double mean = 0.0;
    for (const double v : values) mean += v;
    mean /= values.empty() ? 1.0 : static_cast<double>(values.size());
    double var = 0.0;
    for (const double v : values) var += (v - mean) * (v - mean);
    if (values.size() > 1) var /= static_cast<double>(values.size() - 1);
    metrics[name] = {{"mean", mean},
                     {"std", std::sqrt(var)},
                     {"n", values.size()}};
  }
  report.aggregate = {{"version", kLibraryVersion},
                      {"schema", 1},
                      {"config", cfg.to_json()},
                      {"metrics", std::move(metrics)},
                      {"status", {{"ok", ok}, {"error", failed}, {"budget", budget}}},
                      {"errors", std::move(errors)}};

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    const auto write = [&](const std::string& file, const std::string& bytes) {
      std::ofstream os(cfg.out_dir + "/" + file, std::ios::binary);
      if (!os) throw std::runtime_error("cannot write " + cfg.out_dir + "/" + file);
      os << bytes;
    };
    write("report.csv", report.csv_bytes());
    write("report.json", report.aggregate.dump(2) + "\n");
    write("timings.csv", report.timings_csv_bytes());
  }
  return report;
}

}  // namespace shiftlab
