// Two-phase experimental protocol: log collection under a mixed
// oracle/random strategy, guidance episodes over sampled targets, HR@K and
// IoI@K metrics, and the sweep/aggregation driver.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ipg/guidance.hpp"
#include "ipg/log.hpp"
#include "ipg/recsys.hpp"
#include "ipg/simenv.hpp"

namespace ipg {

struct World {
  std::vector<Embedding> user_embeddings;
  Catalog catalog;
};

// One private stream per entity id, so generation order (and thread count)
// cannot change the population.
World generate_world(int n_users, int n_items, const SimConfig& cfg,
                     uint64_t master_seed, int threads = 1);

struct CollectionResult {
  InteractionLog log;               // round-major record order
  std::vector<SimUserState> users;  // end-of-collection states
};

// Per round and user, pick the oracle policy with probability
// oracle_fraction, otherwise a uniform random item; step the simulator.
// prob_trace, when given, receives each record's click probability.
CollectionResult run_log_collection(const World& world, const SimConfig& cfg,
                                    int rounds, double oracle_fraction,
                                    uint64_t master_seed, int threads = 1,
                                    std::vector<double>* prob_trace = nullptr);

// Chronological clicked item ids per user, collection phase only.
std::vector<ClickedPrefix> clicked_histories(const InteractionLog& log);

// Uniform sample without replacement from a dedicated stream.
std::vector<int> sample_targets(int n_targets, int n_items, uint64_t master_seed);

struct RoundRecord {
  int item = -1;
  bool clicked = false;
  Embedding true_embedding{};  // simulator state after this round's step
  Embedding model_rep{};       // model-side representation after this round
};

struct UserEpisode {
  Embedding start_embedding{};  // at restore, before round 1
  std::vector<RoundRecord> rounds;
};

struct EpisodeSet {
  double gamma = 0.0;
  std::string policy;
  int target = -1;
  int n_rounds = 0;
  std::vector<UserEpisode> users;
};

struct GuidanceSetup {
  const SimSnapshot* snapshot = nullptr;
  const std::vector<ClickedPrefix>* histories = nullptr;  // collection clicks
  const RecommenderModel* model = nullptr;
  const Catalog* catalog = nullptr;
  SimConfig sim;  // gamma may differ from the collection phase (sweep)
  uint64_t master_seed = 0;
  int threads = 1;
};

// Restores the snapshot and plays `rounds` guidance rounds, one item per
// user per round. Click streams are keyed by user id only, so outcomes are
// paired across policies and targets.
EpisodeSet run_guidance(const GuidanceSetup& setup, const Policy& policy,
                        int target, int rounds);

// (1/(K|U|)) sum of click flags over the first K rounds.
double hit_ratio(const EpisodeSet& episodes, int K);

// Mean over users of e_u(K).e_j - e_u(1).e_j in the true space.
double ioi(const EpisodeSet& episodes, int target_id, int K,
           const Catalog& catalog);

// Reduced per-user episode statistics; enough to recompute HR/IoI at the
// report Ks without retaining full trajectories.
struct EpisodeUserStats {
  double dot_start = 0.0;
  std::vector<double> dot_at_k;  // aligned with the report K list
  std::vector<uint8_t> clicks;   // one flag per round
};

struct EpisodeTable {
  double gamma = 0.0;
  std::string policy;
  int target = -1;
  std::vector<EpisodeUserStats> users;
};

EpisodeTable reduce_episode(const EpisodeSet& episodes, const Catalog& catalog,
                            const std::vector<int>& report_ks);

struct ReportRow {
  double gamma = 0.0;
  std::string policy;
  int target = -1;
  int K = 0;
  double hr = 0.0;
  double ioi = 0.0;
};

struct AggregateRow {
  double gamma = 0.0;
  std::string policy;
  int K = 0;
  double hr = 0.0;
  double ioi = 0.0;
};

struct GuidanceReport {
  uint64_t seed = 0;
  std::vector<int> ks;
  std::vector<ReportRow> per_target;
  std::vector<AggregateRow> aggregate;  // arithmetic mean over targets
};

GuidanceReport report_from_episodes(const std::vector<EpisodeTable>& tables,
                                    const std::vector<int>& report_ks,
                                    uint64_t seed);

// Structural hash of a population snapshot; used to verify the restored
// snapshot is reused unmodified across policies and targets.
uint64_t snapshot_hash(const SimSnapshot& snap);

struct ExperimentConfig;  // config.hpp

struct ExperimentResult {
  GuidanceReport report;
  std::vector<EpisodeTable> episodes;
  EvalMetrics eval;        // held-out sanity metrics of the trainer
  double train_loss = 0.0;
};

// Full single-seed pipeline: world, collection, training, snapshot, then the
// gamma x target x policy sweep.
ExperimentResult run_experiment(const ExperimentConfig& cfg, uint64_t seed);

}  // namespace ipg
