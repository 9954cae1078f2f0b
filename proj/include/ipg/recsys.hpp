// The learned recommender: exponential-moving-average sequential encoder,
// learned item embeddings, and a logistic prediction head trained on logs.
//
// The EMA fold is the one encoder under which extending a prefix by one item
// is exactly a linear update of the representation; the guidance module's
// simplified scores rely on that identity. The encoder entry points below are
// the seam for substituting a different sequential encoder.
#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "ipg/embedding.hpp"
#include "ipg/log.hpp"

namespace ipg {

struct RecommenderModel {
  std::vector<Embedding> item_table;  // learned item embeddings, one per id
  double head_scale = 1.0;            // logistic head weight
  double head_bias = 0.0;             // logistic head bias
  double encoder_decay = 0.8;         // EMA decay, in (0,1)
  uint64_t train_seed = 0;

  int n_items() const { return static_cast<int>(item_table.size()); }
  const Embedding& item(int id) const;  // throws std::out_of_range
};

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 8;
  double l2_reg = 1e-2;
  int batch_size = 1;
  int embed_dim = kEmbedDim;
  double init_noise = 0.1;
  double encoder_decay = 0.8;
  uint64_t seed = 1;

  void validate() const;
};

// Chronological clicked item ids of one user.
using ClickedPrefix = std::vector<int>;

// Empty prefix -> zero vector; first click installs that item's embedding;
// later clicks fold with decay*rep + (1-decay)*e_i.
Embedding encode(std::span<const int> prefix, const RecommenderModel& model);

// The raw linear update decay*rep + (1-decay)*e_i. Equals re-encoding the
// extended prefix whenever the prefix was non-empty.
Embedding update_user_rep(const Embedding& rep, int item_id,
                          const RecommenderModel& model);

// sigmoid(head_scale * (rep . e_i) + head_bias), in (0,1).
double predict_click(const Embedding& rep, int item_id,
                     const RecommenderModel& model);

// Per-impression objective: binary cross-entropy of predict_click against the
// label, plus (l2/2)*||e||^2 over the unique touched embeddings (candidate
// and prefix items). Gradients flow through the EMA fold into the prefix.
struct ImpressionGrad {
  std::map<int, Embedding> items;  // sparse d/d(item_table)
  double d_scale = 0.0;
  double d_bias = 0.0;
};
double impression_loss(const RecommenderModel& model,
                       std::span<const int> prefix, int item_id, bool clicked,
                       double l2_reg);
double impression_loss_grad(const RecommenderModel& model,
                            std::span<const int> prefix, int item_id,
                            bool clicked, double l2_reg, ImpressionGrad& grad);

struct TrainResult {
  RecommenderModel model;
  double final_loss = 0.0;  // mean per-impression loss over the last epoch
};

// Deterministic SGD over the logged impressions: clicked-only prefixes,
// shuffled per epoch under cfg.seed, single-threaded by contract.
TrainResult train(const InteractionLog& logs, const TrainConfig& cfg);

struct EvalMetrics {
  double log_loss = 0.0;
  double auc = 0.0;
};

// Scores every collection impression with round >= eval_from_round; prefixes
// come from the full history in `logs`. Throws std::domain_error if the
// evaluated slice holds a single class.
EvalMetrics evaluate_model(const InteractionLog& logs, int eval_from_round,
                           const RecommenderModel& model);

}  // namespace ipg
