// ipglab: preference-guidance laboratory CLI.
//
// Pipeline stages work through files in the run directory so any stage can
// be re-run or inspected in isolation:
//   generate -> collect -> train -> guide -> report   (or: all)
//   trajectory exports one user's guidance episode for case studies.
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ipg/config.hpp"
#include "ipg/pipeline.hpp"

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  int threads = -1;
  std::string scale;
};

ipg::ExperimentConfig resolve_config(const GlobalOpts& g) {
  ipg::ExperimentConfig cfg;
  if (!g.config_path.empty()) {
    cfg = ipg::load_config(g.config_path);
  } else if (!g.scale.empty()) {
    cfg = ipg::default_config(g.scale);
  } else {
    cfg = ipg::default_config();
  }
  if (g.seed >= 0) cfg.seeds = {static_cast<uint64_t>(g.seed)};
  // Output directory precedence: --out flag, then environment, then config.
  if (const char* env = std::getenv("IPGLAB_OUT_DIR"); env && *env)
    cfg.out_dir = env;
  if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
  if (g.threads >= 0) cfg.threads = g.threads;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ipglab: simulated users, a sequential recommender, and "
               "multi-round preference-guidance experiments"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalOpts g;
  app.add_option("--config", g.config_path, "experiment config file");
  app.add_option("--out", g.out_dir, "output directory (overrides config)");
  app.add_option("--seed", g.seed, "master seed (overrides config seeds)");
  app.add_option("--threads", g.threads, "worker threads, 0 = all cores");
  app.add_option("--scale", g.scale, "preset when no config file: desk|paper");

  auto* c_generate = app.add_subcommand("generate", "generate the embedding world");
  auto* c_collect = app.add_subcommand("collect", "run the log-collection phase");
  auto* c_train = app.add_subcommand("train", "train the recommender on the log");
  auto* c_guide = app.add_subcommand("guide", "run guidance episodes for all "
                                              "gammas, targets and policies");
  auto* c_report = app.add_subcommand("report", "compute HR@K / IoI@K tables");
  auto* c_all = app.add_subcommand("all", "chain every stage");

  auto* c_traj = app.add_subcommand("trajectory", "dump one user's episode");
  int t_user = 0;
  int t_target = 0;
  std::string t_policy = "ipg";
  double t_gamma = -1.0;
  c_traj->add_option("--user", t_user, "user id")->required();
  c_traj->add_option("--target", t_target, "target item id")->required();
  c_traj->add_option("--policy", t_policy, "policy: random|greedy|heuristic|ipg|ipg_exact");
  c_traj->add_option("--gamma", t_gamma, "preference-evolution rate "
                                         "(default: first sweep entry)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);  // prints usage; exit 0 for --help
  }

  try {
    const ipg::ExperimentConfig cfg = resolve_config(g);
    const auto log = [](const std::string& msg) { std::cout << msg << "\n"; };

    for (uint64_t seed : cfg.seeds) {
      if (c_generate->parsed()) stage_generate(cfg, seed, log);
      if (c_collect->parsed()) stage_collect(cfg, seed, log);
      if (c_train->parsed()) stage_train(cfg, seed, log);
      if (c_guide->parsed()) stage_guide(cfg, seed, log);
      if (c_report->parsed()) stage_report(cfg, seed, log);
      if (c_traj->parsed()) {
        const double gamma = t_gamma > 0.0 ? t_gamma : cfg.gamma_sweep.front();
        stage_trajectory(cfg, seed, t_user, t_target, t_policy, gamma, log);
      }
    }
    if (c_all->parsed()) run_all(cfg, log);
    return 0;
  } catch (const ipg::ConfigError& e) {
    std::cerr << "ipglab: " << e.what() << "\n";
    std::cerr << "run 'ipglab --help' for usage\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ipglab: " << e.what() << "\n";
    return 1;
  }
}
