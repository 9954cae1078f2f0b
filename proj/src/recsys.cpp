#include "ipg/recsys.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ipg/mathutil.hpp"
#include "ipg/rng.hpp"

namespace ipg {

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double bce(double logit, bool clicked) {
  return clicked ? softplus(-logit) : softplus(logit);
}

}  // namespace

const Embedding& RecommenderModel::item(int id) const {
  if (id < 0 || id >= n_items())
    throw std::out_of_range("model: unknown item id");
  return item_table[id];
}

void TrainConfig::validate() const {
  if (learning_rate < 0.0 || !std::isfinite(learning_rate))
    throw std::invalid_argument("train: learning_rate must be >= 0");
  if (epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");
  if (l2_reg < 0.0) throw std::invalid_argument("train: l2_reg must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (embed_dim != kEmbedDim)
    throw std::invalid_argument("train: embed_dim must equal 20");
  if (init_noise < 0.0) throw std::invalid_argument("train: init_noise must be >= 0");
  if (!(encoder_decay > 0.0 && encoder_decay < 1.0))
    throw std::invalid_argument("train: encoder_decay must lie in (0,1)");
}

Embedding encode(std::span<const int> prefix, const RecommenderModel& model) {
  Embedding rep{};
  if (prefix.empty()) return rep;
  rep = model.item(prefix[0]);
  const double g = model.encoder_decay;
  for (size_t t = 1; t < prefix.size(); ++t) {
    const Embedding& e = model.item(prefix[t]);
    for (int k = 0; k < kEmbedDim; ++k) rep[k] = g * rep[k] + (1.0 - g) * e[k];
  }
  return rep;
}

Embedding update_user_rep(const Embedding& rep, int item_id,
                          const RecommenderModel& model) {
  const Embedding& e = model.item(item_id);
  const double g = model.encoder_decay;
  Embedding out;
  for (int k = 0; k < kEmbedDim; ++k) out[k] = g * rep[k] + (1.0 - g) * e[k];
  return out;
}

double predict_click(const Embedding& rep, int item_id,
                     const RecommenderModel& model) {
  const double z = inner(rep, model.item(item_id));
  return sigmoid(model.head_scale * z + model.head_bias);
}

double impression_loss(const RecommenderModel& model,
                       std::span<const int> prefix, int item_id, bool clicked,
                       double l2_reg) {
  const Embedding rep = encode(prefix, model);
  const double logit = model.head_scale * inner(rep, model.item(item_id)) +
                       model.head_bias;
  double loss = bce(logit, clicked);
  if (l2_reg > 0.0) {
    std::vector<int> touched(prefix.begin(), prefix.end());
    touched.push_back(item_id);
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (int id : touched) loss += 0.5 * l2_reg * inner(model.item(id), model.item(id));
  }
  return loss;
}

double impression_loss_grad(const RecommenderModel& model,
                            std::span<const int> prefix, int item_id,
                            bool clicked, double l2_reg, ImpressionGrad& grad) {
  grad.items.clear();
  grad.d_scale = 0.0;
  grad.d_bias = 0.0;

  const Embedding rep = encode(prefix, model);
  const Embedding& cand = model.item(item_id);
  const double z = inner(rep, cand);
  const double logit = model.head_scale * z + model.head_bias;
  const double err = sigmoid(logit) - (clicked ? 1.0 : 0.0);

  grad.d_scale = err * z;
  grad.d_bias = err;

  Embedding& d_cand = grad.items[item_id];
  for (int k = 0; k < kEmbedDim; ++k) d_cand[k] += err * model.head_scale * rep[k];

  // Backprop through the EMA fold: with prefix length n, item m contributes
  // decay^(n-1-m) * (m == 0 ? 1 : 1-decay) to the representation.
  const double g = model.encoder_decay;
  const size_t n = prefix.size();
  if (n > 0) {
    double coeff = 1.0;  // decay^(n-1-m), built from the back
    for (size_t m = n; m-- > 0;) {
      const double c = (m == 0) ? coeff : coeff * (1.0 - g);
      Embedding& d = grad.items[prefix[m]];
      for (int k = 0; k < kEmbedDim; ++k)
        d[k] += c * err * model.head_scale * cand[k];
      coeff *= g;
    }
  }

  double loss = bce(logit, clicked);
  if (l2_reg > 0.0) {
    for (auto& [id, d] : grad.items) {
      const Embedding& e = model.item(id);
      loss += 0.5 * l2_reg * inner(e, e);
      for (int k = 0; k < kEmbedDim; ++k) d[k] += l2_reg * e[k];
    }
  }
  return loss;
}

namespace {

struct Impression {
  int user;
  int prefix_len;  // clicks of this user strictly before the record
  int item;
  bool clicked;
};

struct TrainingSet {
  std::vector<std::vector<int>> clicks;  // per-user chronological clicked ids
  std::vector<Impression> impressions;
};

TrainingSet build_training_set(const InteractionLog& logs) {
  TrainingSet ts;
  ts.clicks.resize(logs.n_users);
  std::vector<size_t> order(logs.records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const LogRecord& ra = logs.records[a];
    const LogRecord& rb = logs.records[b];
    if (ra.user != rb.user) return ra.user < rb.user;
    if (ra.phase != rb.phase) return ra.phase < rb.phase;
    return ra.round < rb.round;
  });
  for (size_t idx : order) {
    const LogRecord& r = logs.records[idx];
    if (r.user < 0 || r.user >= logs.n_users)
      throw std::out_of_range("train: user id outside the population");
    if (r.item < 0 || r.item >= logs.n_items)
      throw std::out_of_range("train: item id outside the catalog");
    ts.impressions.push_back(
        {r.user, static_cast<int>(ts.clicks[r.user].size()), r.item, r.clicked});
    if (r.clicked) ts.clicks[r.user].push_back(r.item);
  }
  return ts;
}

}  // namespace

TrainResult train(const InteractionLog& logs, const TrainConfig& cfg) {
  cfg.validate();
  if (logs.records.empty()) throw std::invalid_argument("train: empty log");
  bool any_pos = false, any_neg = false;
  for (const LogRecord& r : logs.records) (r.clicked ? any_pos : any_neg) = true;
  if (!any_pos || !any_neg)
    throw std::invalid_argument("train: log needs both positive and negative outcomes");

  TrainResult result;
  RecommenderModel& model = result.model;
  model.encoder_decay = cfg.encoder_decay;
  model.train_seed = cfg.seed;
  model.head_scale = 1.0;
  model.head_bias = 0.0;
  model.item_table.assign(logs.n_items, Embedding{});
  {
    std::mt19937_64 rng = make_stream(cfg.seed, Stream::TrainInit);
    std::normal_distribution<double> noise(0.0, cfg.init_noise);
    for (Embedding& e : model.item_table)
      for (int k = 0; k < kEmbedDim; ++k) e[k] = noise(rng);
  }

  TrainingSet ts = build_training_set(logs);
  std::vector<size_t> order(ts.impressions.size());
  std::iota(order.begin(), order.end(), 0);

  ImpressionGrad grad;
  ImpressionGrad batch;
  double epoch_loss = 0.0;
  for (int epoch = 0; epoch < std::max(cfg.epochs, 1); ++epoch) {
    const bool update = epoch < cfg.epochs;  // epochs == 0: loss pass only
    if (update) {
      std::mt19937_64 rng =
          make_stream(cfg.seed, Stream::TrainShuffle, static_cast<uint64_t>(epoch));
      std::shuffle(order.begin(), order.end(), rng);
    }
    epoch_loss = 0.0;
    int in_batch = 0;
    auto flush = [&](int count) {
      if (count == 0) return;
      const double scale = cfg.learning_rate / count;
      for (const auto& [id, d] : batch.items)
        for (int k = 0; k < kEmbedDim; ++k) model.item_table[id][k] -= scale * d[k];
      model.head_scale -= scale * batch.d_scale;
      model.head_bias -= scale * batch.d_bias;
      batch.items.clear();
      batch.d_scale = batch.d_bias = 0.0;
      in_batch = 0;
    };
    for (size_t idx : order) {
      const Impression& im = ts.impressions[idx];
      std::span<const int> prefix(ts.clicks[im.user].data(),
                                  static_cast<size_t>(im.prefix_len));
      const double loss =
          impression_loss_grad(model, prefix, im.item, im.clicked, cfg.l2_reg, grad);
      if (!std::isfinite(loss)) throw std::runtime_error("train: loss diverged");
      epoch_loss += loss;
      if (update) {
        for (const auto& [id, d] : grad.items) {
          Embedding& acc = batch.items[id];
          for (int k = 0; k < kEmbedDim; ++k) acc[k] += d[k];
        }
        batch.d_scale += grad.d_scale;
        batch.d_bias += grad.d_bias;
        if (++in_batch == cfg.batch_size) flush(cfg.batch_size);
      }
    }
    if (update) flush(in_batch);
    if (cfg.epochs == 0) break;
  }
  result.final_loss = epoch_loss / static_cast<double>(ts.impressions.size());
  return result;
}

EvalMetrics evaluate_model(const InteractionLog& logs, int eval_from_round,
                           const RecommenderModel& model) {
  TrainingSet ts = build_training_set(logs);
  std::vector<double> scores;
  std::vector<char> labels;
  double loss_sum = 0.0;
  std::vector<size_t> order(logs.records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const LogRecord& ra = logs.records[a];
    const LogRecord& rb = logs.records[b];
    if (ra.user != rb.user) return ra.user < rb.user;
    if (ra.phase != rb.phase) return ra.phase < rb.phase;
    return ra.round < rb.round;
  });
  std::vector<int> clicks_seen(logs.n_users, 0);
  for (size_t idx : order) {
    const LogRecord& r = logs.records[idx];
    if (r.phase == Phase::Collection && r.round >= eval_from_round) {
      std::span<const int> prefix(ts.clicks[r.user].data(),
                                  static_cast<size_t>(clicks_seen[r.user]));
      const Embedding rep = encode(prefix, model);
      const double logit = model.head_scale * inner(rep, model.item(r.item)) +
                           model.head_bias;
      loss_sum += bce(logit, r.clicked);
      scores.push_back(sigmoid(logit));
      labels.push_back(r.clicked ? 1 : 0);
    }
    if (r.clicked) ++clicks_seen[r.user];
  }
  if (scores.empty())
    throw std::invalid_argument("evaluate_model: empty evaluation slice");
  size_t n_pos = 0;
  for (char l : labels) n_pos += l;
  const size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::domain_error("evaluate_model: single-class slice, auc undefined");

  // Mann-Whitney AUC with average ranks on ties.
  std::vector<size_t> rank_order(scores.size());
  std::iota(rank_order.begin(), rank_order.end(), 0);
  std::sort(rank_order.begin(), rank_order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < rank_order.size()) {
    size_t j = i;
    while (j < rank_order.size() && scores[rank_order[j]] == scores[rank_order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (size_t t = i; t < j; ++t)
      if (labels[rank_order[t]]) rank_sum_pos += avg_rank;
    i = j;
  }
  EvalMetrics m;
  m.log_loss = loss_sum / static_cast<double>(labels.size());
  m.auc = (rank_sum_pos - 0.5 * static_cast<double>(n_pos) * (n_pos + 1)) /
          (static_cast<double>(n_pos) * static_cast<double>(n_neg));
  return m;
}

}  // namespace ipg
