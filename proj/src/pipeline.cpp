#include "ipg/pipeline.hpp"

#include <algorithm>
#include <stdexcept>

namespace ipg {

namespace {

FileMeta meta_for(const ExperimentConfig& cfg, uint64_t seed,
                  const std::string& kind) {
  return FileMeta{kind, seed, config_hash(cfg)};
}

World load_world(const RunPaths& p) {
  World w;
  w.user_embeddings = parse_matrix(read_file(p.users()));
  w.catalog = Catalog::from_items(parse_matrix(read_file(p.items())));
  return w;
}

}  // namespace

RunPaths run_paths(const ExperimentConfig& cfg, uint64_t seed) {
  return RunPaths{cfg.out_dir + "/seed_" + std::to_string(seed)};
}

void stage_generate(const ExperimentConfig& cfg, uint64_t seed, const StageLog& log) {
  const RunPaths p = run_paths(cfg, seed);
  const FileMeta mu = meta_for(cfg, seed, "embeddings");
  if (file_up_to_date(p.users(), mu) && file_up_to_date(p.items(), mu)) {
    log("generate: up to date, skipped");
    return;
  }
  World w = generate_world(cfg.n_users, cfg.n_items, cfg.sim, seed, cfg.threads);
  write_file(p.users(), serialize_matrix(w.user_embeddings, mu));
  write_file(p.items(), serialize_matrix(w.catalog.items, mu));
  log("generate: wrote " + p.users() + ", " + p.items());
}

void stage_collect(const ExperimentConfig& cfg, uint64_t seed, const StageLog& log) {
  const RunPaths p = run_paths(cfg, seed);
  const FileMeta ml = meta_for(cfg, seed, "log");
  const FileMeta ms = meta_for(cfg, seed, "snapshot");
  if (file_up_to_date(p.log(), ml) && file_up_to_date(p.snapshot(), ms)) {
    log("collect: up to date, skipped");
    return;
  }
  World w = load_world(p);
  CollectionResult result =
      run_log_collection(w, cfg.sim, cfg.collection_rounds, cfg.oracle_fraction,
                         seed, cfg.threads);
  write_file(p.log(), serialize_log(result.log, ml));
  write_file(p.snapshot(), serialize_snapshot(snapshot(result.users), ms));
  log("collect: wrote " + p.log() + ", " + p.snapshot());
}

void stage_train(const ExperimentConfig& cfg, uint64_t seed, const StageLog& log) {
  const RunPaths p = run_paths(cfg, seed);
  const FileMeta mm = meta_for(cfg, seed, "model");
  const FileMeta mx = meta_for(cfg, seed, "metrics");
  if (file_up_to_date(p.model(), mm) && file_up_to_date(p.metrics(), mx)) {
    log("train: up to date, skipped");
    return;
  }
  InteractionLog full = parse_log(read_file(p.log()));
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  TrainResult trained = train(full, tc);
  write_file(p.model(), serialize_model(trained.model, mm));

  // Held-out sanity metrics from a model trained on the truncated log.
  const int eval_from = cfg.collection_rounds - cfg.holdout_rounds + 1;
  InteractionLog trunc;
  trunc.n_users = full.n_users;
  trunc.n_items = full.n_items;
  for (const LogRecord& r : full.records)
    if (r.round < eval_from) trunc.records.push_back(r);
  TrainResult eval_trained = train(trunc, tc);
  EvalMetrics ev = evaluate_model(full, eval_from, eval_trained.model);

  std::string metrics = "# ipglab metrics v1\n# seed=" + std::to_string(seed) +
                        " config=" + config_hash(cfg) + "\n";
  metrics += "final_train_loss\t" + fmt_double(trained.final_loss) + "\n";
  metrics += "holdout_log_loss\t" + fmt_double(ev.log_loss) + "\n";
  metrics += "holdout_auc\t" + fmt_double(ev.auc) + "\n";
  write_file(p.metrics(), metrics);
  log("train: loss=" + fmt_double(trained.final_loss) +
      " holdout_auc=" + fmt_double(ev.auc) + " -> " + p.model());
}

void stage_guide(const ExperimentConfig& cfg, uint64_t seed, const StageLog& log) {
  const RunPaths p = run_paths(cfg, seed);
  const FileMeta me = meta_for(cfg, seed, "episodes");
  if (file_up_to_date(p.episodes(), me)) {
    log("guide: up to date, skipped");
    return;
  }
  World w = load_world(p);
  SimSnapshot snap = parse_snapshot(read_file(p.snapshot()));
  RecommenderModel model = parse_model(read_file(p.model()));
  InteractionLog full = parse_log(read_file(p.log()));
  std::vector<ClickedPrefix> histories = clicked_histories(full);
  std::vector<int> targets = sample_targets(cfg.n_targets, cfg.n_items, seed);
  const uint64_t snap_hash = snapshot_hash(snap);

  std::vector<EpisodeTable> tables;
  for (double gamma : cfg.gamma_sweep) {
    GuidanceSetup setup;
    setup.snapshot = &snap;
    setup.histories = &histories;
    setup.model = &model;
    setup.catalog = &w.catalog;
    setup.sim = cfg.sim;
    setup.sim.gamma = gamma;
    setup.master_seed = seed;
    setup.threads = cfg.threads;
    for (int target : targets)
      for (const std::string& pname : cfg.policies) {
        EpisodeSet episodes = run_guidance(setup, parse_policy(pname, cfg.alpha),
                                           target, cfg.guidance_rounds);
        tables.push_back(reduce_episode(episodes, w.catalog, cfg.report_ks));
      }
  }
  if (snapshot_hash(snap) != snap_hash)
    throw std::logic_error("guide: snapshot mutated during the sweep");
  write_file(p.episodes(),
             serialize_episodes(tables, cfg.report_ks, cfg.guidance_rounds, me));
  log("guide: wrote " + p.episodes() + " (" + std::to_string(tables.size()) +
      " episode tables)");
}

void stage_report(const ExperimentConfig& cfg, uint64_t seed, const StageLog& log) {
  const RunPaths p = run_paths(cfg, seed);
  const FileMeta mr = meta_for(cfg, seed, "report");
  const FileMeta ma = meta_for(cfg, seed, "report_aggregate");
  if (file_up_to_date(p.report(), mr) && file_up_to_date(p.report_aggregate(), ma)) {
    log("report: up to date, skipped");
    return;
  }
  if (!file_exists(p.episodes()))
    throw IoError("missing episode data: run the guide stage first (" +
                  p.episodes() + ")");
  std::vector<int> ks;
  int rounds = 0;
  std::vector<EpisodeTable> tables =
      parse_episodes(read_file(p.episodes()), &ks, &rounds);
  GuidanceReport report = report_from_episodes(tables, ks, seed);
  write_file(p.report(), serialize_report(report, mr));
  write_file(p.report_aggregate(), serialize_report_aggregate(report, ma));
  log("report: wrote " + p.report() + ", " + p.report_aggregate());
}

void stage_trajectory(const ExperimentConfig& cfg, uint64_t seed, int user,
                      int target, const std::string& policy, double gamma,
                      const StageLog& log) {
  const RunPaths p = run_paths(cfg, seed);
  World w = load_world(p);
  SimSnapshot snap = parse_snapshot(read_file(p.snapshot()));
  RecommenderModel model = parse_model(read_file(p.model()));
  InteractionLog full = parse_log(read_file(p.log()));
  std::vector<ClickedPrefix> histories = clicked_histories(full);
  if (user < 0 || user >= static_cast<int>(snap.size()))
    throw std::out_of_range("trajectory: unknown user");
  if (target < 0 || target >= w.catalog.size())
    throw std::out_of_range("trajectory: unknown target");

  GuidanceSetup setup;
  setup.snapshot = &snap;
  setup.histories = &histories;
  setup.model = &model;
  setup.catalog = &w.catalog;
  setup.sim = cfg.sim;
  setup.sim.gamma = gamma;
  setup.master_seed = seed;
  setup.threads = cfg.threads;
  EpisodeSet episodes = run_guidance(setup, parse_policy(policy, cfg.alpha),
                                     target, cfg.guidance_rounds);
  const std::string path = p.trajectory(user, target, policy);
  write_file(path, serialize_trajectory(episodes, user, w.catalog,
                                        meta_for(cfg, seed, "trajectory")));
  log("trajectory: wrote " + path);
}

void run_all(const ExperimentConfig& cfg, const StageLog& log) {
  for (uint64_t seed : cfg.seeds) {
    log("== seed " + std::to_string(seed) + " ==");
    stage_generate(cfg, seed, log);
    stage_collect(cfg, seed, log);
    stage_train(cfg, seed, log);
    stage_guide(cfg, seed, log);
    stage_report(cfg, seed, log);
  }
  if (cfg.seeds.size() > 1) {
    // Cross-seed mean of the per-seed aggregate rows.
    std::vector<AggregateRow> mean;
    for (uint64_t seed : cfg.seeds) {
      const RunPaths p = run_paths(cfg, seed);
      std::vector<int> ks;
      int rounds = 0;
      std::vector<EpisodeTable> tables =
          parse_episodes(read_file(p.episodes()), &ks, &rounds);
      GuidanceReport report = report_from_episodes(tables, ks, seed);
      if (mean.empty()) {
        mean = report.aggregate;
      } else {
        for (size_t i = 0; i < mean.size(); ++i) {
          mean[i].hr += report.aggregate[i].hr;
          mean[i].ioi += report.aggregate[i].ioi;
        }
      }
    }
    for (AggregateRow& row : mean) {
      row.hr /= static_cast<double>(cfg.seeds.size());
      row.ioi /= static_cast<double>(cfg.seeds.size());
    }
    GuidanceReport combined;
    combined.aggregate = std::move(mean);
    const std::string path = cfg.out_dir + "/report_mean.tsv";
    write_file(path, serialize_report_aggregate(
                         combined, FileMeta{"report_mean", 0, config_hash(cfg)}));
    log("all: wrote " + path + " (mean over " +
        std::to_string(cfg.seeds.size()) + " seeds)");
  }
}

}  // namespace ipg
