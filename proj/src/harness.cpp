#include "ipg/harness.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "ipg/config.hpp"
#include "ipg/kernels.hpp"
#include "ipg/rng.hpp"

namespace ipg {

World generate_world(int n_users, int n_items, const SimConfig& cfg,
                     uint64_t master_seed, int threads) {
  cfg.validate();
  World w;
  w.user_embeddings.resize(n_users);
  std::vector<Embedding> items(n_items);
  par::for_index(n_users, threads, [&](int u) {
    std::mt19937_64 rng = make_stream(master_seed, Stream::WorldUser, u);
    w.user_embeddings[u] = generate_embedding(rng, cfg.embed_noise_std);
  });
  par::for_index(n_items, threads, [&](int i) {
    std::mt19937_64 rng = make_stream(master_seed, Stream::WorldItem, i);
    items[i] = generate_embedding(rng, cfg.embed_noise_std);
  });
  w.catalog = Catalog::from_items(std::move(items));
  return w;
}

CollectionResult run_log_collection(const World& world, const SimConfig& cfg,
                                    int rounds, double oracle_fraction,
                                    uint64_t master_seed, int threads,
                                    std::vector<double>* prob_trace) {
  if (!(oracle_fraction >= 0.0 && oracle_fraction <= 1.0))
    throw std::invalid_argument("collection: oracle_fraction must lie in [0,1]");
  const int n_users = static_cast<int>(world.user_embeddings.size());
  const int n_items = world.catalog.size();

  CollectionResult result;
  result.users.resize(n_users);
  result.log.n_users = n_users;
  result.log.n_items = n_items;
  result.log.records.resize(static_cast<size_t>(rounds) * n_users);
  if (prob_trace) prob_trace->resize(result.log.records.size());

  std::vector<std::mt19937_64> policy_rng;
  std::vector<std::mt19937_64> click_rng;
  policy_rng.reserve(n_users);
  click_rng.reserve(n_users);
  for (int u = 0; u < n_users; ++u) {
    result.users[u].embedding = world.user_embeddings[u];
    policy_rng.push_back(make_stream(master_seed, Stream::CollectPolicy, u));
    click_rng.push_back(make_stream(master_seed, Stream::CollectClick, u));
  }

  for (int round = 1; round <= rounds; ++round) {
    par::for_index(n_users, threads, [&](int u) {
      SimUserState& user = result.users[u];
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      int item;
      if (unif(policy_rng[u]) < oracle_fraction) {
        SelectContext ctx;
        ctx.sim_user = &user;
        ctx.catalog = &world.catalog;
        ctx.sim_cfg = &cfg;
        Policy oracle;
        oracle.kind = PolicyKind::Oracle;
        item = select(oracle, ctx, n_items);
      } else {
        std::uniform_int_distribution<int> pick(0, n_items - 1);
        item = pick(policy_rng[u]);
      }
      const Feedback fb = step(user, item, world.catalog, cfg, click_rng[u]);
      LogRecord& rec =
          result.log.records[static_cast<size_t>(round - 1) * n_users + u];
      rec = {u, Phase::Collection, round, item, fb.clicked};
      if (prob_trace)
        (*prob_trace)[static_cast<size_t>(round - 1) * n_users + u] =
            fb.click_probability;
    });
  }
  return result;
}

std::vector<ClickedPrefix> clicked_histories(const InteractionLog& log) {
  std::vector<size_t> order(log.records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return log.records[a].round < log.records[b].round;
  });
  std::vector<ClickedPrefix> histories(log.n_users);
  for (size_t idx : order) {
    const LogRecord& r = log.records[idx];
    if (r.phase == Phase::Collection && r.clicked)
      histories[r.user].push_back(r.item);
  }
  return histories;
}

std::vector<int> sample_targets(int n_targets, int n_items, uint64_t master_seed) {
  if (n_targets < 1 || n_targets > n_items)
    throw std::invalid_argument("sample_targets: n_targets must lie in [1, n_items]");
  std::vector<int> ids(n_items);
  std::iota(ids.begin(), ids.end(), 0);
  std::mt19937_64 rng = make_stream(master_seed, Stream::Targets);
  for (int i = 0; i < n_targets; ++i) {
    std::uniform_int_distribution<int> pick(i, n_items - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  ids.resize(n_targets);
  return ids;
}

EpisodeSet run_guidance(const GuidanceSetup& setup, const Policy& policy,
                        int target, int rounds) {
  const Catalog& catalog = *setup.catalog;
  const RecommenderModel& model = *setup.model;
  const int n_users = static_cast<int>(setup.snapshot->size());
  const int n_items = catalog.size();
  if (target < 0 || target >= n_items)
    throw std::out_of_range("run_guidance: unknown target");
  if (static_cast<int>(setup.histories->size()) != n_users)
    throw std::invalid_argument("run_guidance: histories/population mismatch");

  std::vector<SimUserState> users = restore(*setup.snapshot);

  EpisodeSet episodes;
  episodes.gamma = setup.sim.gamma;
  episodes.policy = policy.label.empty() ? policy_name(policy.kind) : policy.label;
  episodes.target = target;
  episodes.n_rounds = rounds;
  episodes.users.resize(n_users);

  // Model-side state: the representation of the clicked history plus the
  // prefix itself (only consulted by the exact policy).
  struct RepState {
    Embedding rep{};
    ClickedPrefix prefix;
  };
  std::vector<RepState> reps(n_users);
  std::vector<std::mt19937_64> policy_rng;
  std::vector<std::mt19937_64> click_rng;
  policy_rng.reserve(n_users);
  click_rng.reserve(n_users);
  for (int u = 0; u < n_users; ++u) {
    policy_rng.push_back(make_stream(setup.master_seed, Stream::GuidePolicy, u));
    click_rng.push_back(make_stream(setup.master_seed, Stream::GuideClick, u));
    episodes.users[u].start_embedding = users[u].embedding;
    episodes.users[u].rounds.reserve(rounds);
  }
  par::for_index(n_users, setup.threads, [&](int u) {
    reps[u].prefix = (*setup.histories)[u];
    reps[u].rep = encode(reps[u].prefix, model);
  });

  std::vector<RoundRecord> round_out(n_users);
  for (int round = 1; round <= rounds; ++round) {
    par::for_index(n_users, setup.threads, [&](int u) {
      SimUserState& user = users[u];
      RepState& rs = reps[u];

      SelectContext ctx;
      ctx.model = &model;
      ctx.rep = &rs.rep;
      ctx.prefix = &rs.prefix;
      ctx.target = target;
      ctx.sim_user = &user;
      ctx.catalog = &catalog;
      ctx.sim_cfg = &setup.sim;
      ctx.rng = &policy_rng[u];
      ctx.alpha = policy.alpha;
      const int item = select(policy, ctx, n_items);

      const Feedback fb = step(user, item, catalog, setup.sim, click_rng[u]);
      if (fb.clicked) {
        // First click installs the item embedding (matches encode()).
        rs.rep = rs.prefix.empty() ? model.item(item)
                                   : update_user_rep(rs.rep, item, model);
        rs.prefix.push_back(item);
      }
      round_out[u] = {item, fb.clicked, fb.user_embedding_after, rs.rep};
    });
    for (int u = 0; u < n_users; ++u)
      episodes.users[u].rounds.push_back(round_out[u]);
  }
  return episodes;
}

double hit_ratio(const EpisodeSet& episodes, int K) {
  if (K < 1 || K > episodes.n_rounds)
    throw std::out_of_range("hit_ratio: K out of range");
  double sum = 0.0;
  for (const UserEpisode& ue : episodes.users)
    for (int k = 0; k < K; ++k) sum += ue.rounds[k].clicked ? 1.0 : 0.0;
  return sum / (static_cast<double>(K) * static_cast<double>(episodes.users.size()));
}

double ioi(const EpisodeSet& episodes, int target_id, int K,
           const Catalog& catalog) {
  if (K < 1 || K > episodes.n_rounds)
    throw std::out_of_range("ioi: K out of range");
  if (target_id < 0 || target_id >= catalog.size())
    throw std::out_of_range("ioi: unknown target");
  const Embedding& ej = catalog.items[target_id];
  double sum = 0.0;
  for (const UserEpisode& ue : episodes.users)
    sum += inner(ue.rounds[K - 1].true_embedding, ej) -
           inner(ue.start_embedding, ej);
  return sum / static_cast<double>(episodes.users.size());
}

EpisodeTable reduce_episode(const EpisodeSet& episodes, const Catalog& catalog,
                            const std::vector<int>& report_ks) {
  EpisodeTable table;
  table.gamma = episodes.gamma;
  table.policy = episodes.policy;
  table.target = episodes.target;
  const Embedding& ej = catalog.items[episodes.target];
  table.users.reserve(episodes.users.size());
  for (const UserEpisode& ue : episodes.users) {
    EpisodeUserStats s;
    s.dot_start = inner(ue.start_embedding, ej);
    s.dot_at_k.reserve(report_ks.size());
    for (int k : report_ks)
      s.dot_at_k.push_back(inner(ue.rounds[k - 1].true_embedding, ej));
    s.clicks.reserve(ue.rounds.size());
    for (const RoundRecord& r : ue.rounds) s.clicks.push_back(r.clicked ? 1 : 0);
    table.users.push_back(std::move(s));
  }
  return table;
}

GuidanceReport report_from_episodes(const std::vector<EpisodeTable>& tables,
                                    const std::vector<int>& report_ks,
                                    uint64_t seed) {
  GuidanceReport report;
  report.seed = seed;
  report.ks = report_ks;
  for (const EpisodeTable& t : tables) {
    const double n = static_cast<double>(t.users.size());
    for (size_t ki = 0; ki < report_ks.size(); ++ki) {
      const int K = report_ks[ki];
      double clicks = 0.0, delta = 0.0;
      for (const EpisodeUserStats& u : t.users) {
        for (int k = 0; k < K; ++k) clicks += u.clicks[k];
        delta += u.dot_at_k[ki] - u.dot_start;
      }
      report.per_target.push_back({t.gamma, t.policy, t.target, K,
                                   clicks / (K * n), delta / n});
    }
  }
  // Aggregate: arithmetic mean over targets within (gamma, policy, K),
  // preserving first-seen row order.
  std::vector<int> counts;
  for (const ReportRow& row : report.per_target) {
    auto it = std::find_if(report.aggregate.begin(), report.aggregate.end(),
                           [&](const AggregateRow& a) {
                             return a.gamma == row.gamma && a.policy == row.policy &&
                                    a.K == row.K;
                           });
    if (it == report.aggregate.end()) {
      report.aggregate.push_back({row.gamma, row.policy, row.K, 0.0, 0.0});
      it = std::prev(report.aggregate.end());
      counts.push_back(0);
    }
    it->hr += row.hr;
    it->ioi += row.ioi;
    ++counts[static_cast<size_t>(it - report.aggregate.begin())];
  }
  for (size_t i = 0; i < report.aggregate.size(); ++i) {
    report.aggregate[i].hr /= counts[i];
    report.aggregate[i].ioi /= counts[i];
  }
  return report;
}

uint64_t snapshot_hash(const SimSnapshot& snap) {
  std::string bytes;
  auto put = [&](const void* p, size_t n) {
    bytes.append(static_cast<const char*>(p), n);
  };
  for (const SimUserState& u : snap) {
    put(u.embedding.data(), sizeof(double) * kEmbedDim);
    const int wn = static_cast<int>(u.recent_clicks.size());
    put(&wn, sizeof(wn));
    for (const ClickedItem& c : u.recent_clicks) {
      put(&c.item, sizeof(c.item));
      put(&c.category, sizeof(c.category));
    }
    for (const auto& [id, n] : u.click_counts) {
      put(&id, sizeof(id));
      put(&n, sizeof(n));
    }
  }
  return fnv1a64(bytes);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, uint64_t seed) {
  cfg.validate();
  const int threads = cfg.threads;

  World world = generate_world(cfg.n_users, cfg.n_items, cfg.sim, seed, threads);
  CollectionResult collection = run_log_collection(
      world, cfg.sim, cfg.collection_rounds, cfg.oracle_fraction, seed, threads);

  TrainConfig train_cfg = cfg.train;
  train_cfg.seed = seed;
  TrainResult trained = train(collection.log, train_cfg);

  // Held-out sanity metrics: retrain on the truncated log, score the tail.
  const int eval_from = cfg.collection_rounds - cfg.holdout_rounds + 1;
  ExperimentResult result;
  {
    InteractionLog trunc;
    trunc.n_users = collection.log.n_users;
    trunc.n_items = collection.log.n_items;
    for (const LogRecord& r : collection.log.records)
      if (r.round < eval_from) trunc.records.push_back(r);
    TrainResult eval_model = train(trunc, train_cfg);
    result.eval = evaluate_model(collection.log, eval_from, eval_model.model);
  }
  result.train_loss = trained.final_loss;

  const SimSnapshot snap = snapshot(collection.users);
  const uint64_t snap_hash = snapshot_hash(snap);
  const std::vector<ClickedPrefix> histories = clicked_histories(collection.log);
  const std::vector<int> targets = sample_targets(cfg.n_targets, cfg.n_items, seed);

  for (double gamma : cfg.gamma_sweep) {
    GuidanceSetup setup;
    setup.snapshot = &snap;
    setup.histories = &histories;
    setup.model = &trained.model;
    setup.catalog = &world.catalog;
    setup.sim = cfg.sim;
    setup.sim.gamma = gamma;
    setup.master_seed = seed;
    setup.threads = threads;
    for (int target : targets) {
      for (const std::string& pname : cfg.policies) {
        const Policy policy = parse_policy(pname, cfg.alpha);
        EpisodeSet episodes =
            run_guidance(setup, policy, target, cfg.guidance_rounds);
        result.episodes.push_back(
            reduce_episode(episodes, world.catalog, cfg.report_ks));
      }
    }
  }
  if (snapshot_hash(snap) != snap_hash)
    throw std::logic_error("run_experiment: snapshot mutated during the sweep");

  result.report = report_from_episodes(result.episodes, cfg.report_ks, seed);
  return result;
}

}  // namespace ipg
