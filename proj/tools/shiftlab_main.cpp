#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "shiftlab/csv.hpp"
#include "shiftlab/forster.hpp"
#include "shiftlab/harness.hpp"

namespace {

struct RunOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0;
  std::string out_dir;
  int workers = 0;
};

void add_run_mode(CLI::App& app, const std::string& mode,
                  const std::string& description, int& exit_code) {
  auto opts = std::make_shared<RunOptions>();
  CLI::App* sub = app.add_subcommand(mode, description);
  sub->add_option("--config", opts->config_path, "experiment config (JSON)")
      ->required();
  sub->add_option("--seed", opts->seed, "master seed override")
      ->each([opts](const std::string&) { opts->seed_set = true; });
  sub->add_option("--trials", opts->trials, "trial count override");
  sub->add_option("--out", opts->out_dir, "output directory override");
  sub->add_option("--workers", opts->workers, "worker count override");
  sub->callback([opts, mode, &exit_code]() {
    auto cfg = shiftlab::ExperimentConfig::load(opts->config_path);
    if (cfg.mode != mode)
      throw CLI::ValidationError("config mode '" + cfg.mode +
                                 "' does not match subcommand '" + mode + "'");
    if (opts->seed_set) cfg.seed = opts->seed;
    if (opts->trials > 0) cfg.trials = opts->trials;
    if (!opts->out_dir.empty()) cfg.out_dir = opts->out_dir;
    if (opts->workers > 0) cfg.workers = opts->workers;
    const shiftlab::Report report = shiftlab::run_experiment(cfg);
    std::cout << report.aggregate.dump(2) << "\n";
    const auto& status = report.aggregate.at("status");
    exit_code = status.at("error").get<int>() > 0 ? 1 : 0;
  });
}

void add_forster_check(CLI::App& app, int& exit_code) {
  CLI::App* forster = app.add_subcommand("forster", "Forster transform utilities");
  auto path = std::make_shared<std::string>();
  auto eps = std::make_shared<double>(0.5);
  auto labeled = std::make_shared<bool>(false);
  CLI::App* check = forster->add_subcommand(
      "check", "print second-moment eigenvalues and the isotropy verdict");
  check->add_option("file", *path, "point-set CSV")->required();
  check->add_option("--eps", *eps, "isotropy tolerance (default 0.5)");
  check->add_flag("--labeled", *labeled, "final CSV column is a label");
  check->callback([path, eps, labeled, &exit_code]() {
    std::vector<shiftlab::Point> points;
    if (*labeled) {
      for (const auto& e : shiftlab::read_labeled_csv(*path)) points.push_back(e.x);
    } else {
      points = shiftlab::read_points_csv(*path);
    }
    const Eigen::MatrixXd m = shiftlab::second_moment(points);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    std::cout << "points: " << points.size() << "  dimension: " << m.rows()
              << "\neigenvalues:";
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      std::printf(" %.12g", es.eigenvalues()[i]);
    }
    const double star = shiftlab::isotropy_eps(points);
    const bool ok = shiftlab::is_radially_isotropic(points, *eps);
    std::printf("\nverdict: %s, eps=%.12g (requested %.12g)\n",
                ok ? "isotropic" : "not isotropic", star, *eps);
    exit_code = ok ? 0 : 1;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shiftlab: selective classification under distribution shift"};
  app.require_subcommand(1);
  int exit_code = 0;

  add_run_mode(app, "pq-halfspace",
               "membership-query PQ halfspace learner experiments", exit_code);
  add_run_mode(app, "tdsboost", "branching-program booster experiments",
               exit_code);
  add_run_mode(app, "forster-check", "Forster certificate experiments",
               exit_code);
  add_run_mode(app, "weakdist", "weak-distinguisher extraction experiments",
               exit_code);
  add_forster_check(app, exit_code);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
