// Per-round item selection policies: iterative preference guidance in its
// simplified and exact forms, the heuristic and pure-recommender baselines,
// the uniform-random baseline, and the simulator-side oracle used during log
// collection.
#pragma once

#include <random>
#include <span>
#include <string>

#include "ipg/recsys.hpp"
#include "ipg/simenv.hpp"

namespace ipg {

enum class PolicyKind { Random, Greedy, Heuristic, IPG, IPGExact, Oracle };

struct Policy {
  PolicyKind kind = PolicyKind::Random;
  double alpha = 1.0;     // heuristic trade-off weight, >= 0
  std::string label;      // report label; defaults to the policy name
};

// Accepts random | greedy | heuristic | ipg | ipg_exact | oracle, plus
// heuristic:<alpha> for side-by-side alpha sweeps.
Policy parse_policy(const std::string& name, double alpha);
std::string policy_name(PolicyKind kind);

struct ScoredItem {
  int item = -1;
  double interaction_prob = 0.0;  // predicted click probability
  double guide_score = 0.0;       // simplified guiding score
  double ipg_score = 0.0;         // product of the two
};

// Simplified guiding score (e_i - rep) . e_j in the learned space; the
// constant (1 - decay) factor is dropped since it rescales every candidate
// alike.
double guiding_score(const Embedding& rep, int item_id, int target_id,
                     const RecommenderModel& model);

// Literal form: re-encode the prefix extended by the candidate and take the
// change of the target affinity.
double guiding_score_exact(std::span<const int> prefix, int item_id,
                           int target_id, const RecommenderModel& model);

double ipg_score(double interaction_prob, double guide_score);

ScoredItem score_item(const Embedding& rep, int item_id, int target_id,
                      const RecommenderModel& model);

// Everything a policy might need; select() validates the fields the chosen
// policy actually uses.
struct SelectContext {
  const RecommenderModel* model = nullptr;
  const Embedding* rep = nullptr;           // greedy / heuristic / ipg
  const ClickedPrefix* prefix = nullptr;    // ipg_exact
  int target = -1;                          // heuristic / ipg / ipg_exact
  const SimUserState* sim_user = nullptr;   // oracle
  const Catalog* catalog = nullptr;         // oracle
  const SimConfig* sim_cfg = nullptr;       // oracle
  std::mt19937_64* rng = nullptr;           // random
  double alpha = 1.0;                       // heuristic
};

// Returns the selected item id; ties always break to the lowest id. The
// catalog scan may be parallelized internally (threads), which preserves the
// tie-break.
int select(const Policy& policy, const SelectContext& ctx, int n_items,
           int threads = 1);

}  // namespace ipg
