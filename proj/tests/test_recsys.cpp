#include <cmath>
#include <stdexcept>
#include <random>

#include "doctest.h"
#include "ipg/recsys.hpp"
#include "ipg/rng.hpp"

using namespace ipg;

namespace {

RecommenderModel random_model(int n_items, uint64_t seed, double scale = 0.5) {
  RecommenderModel m;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, scale);
  m.item_table.resize(n_items);
  for (auto& e : m.item_table)
    for (double& v : e) v = noise(rng);
  m.head_scale = 1.0 + std::abs(noise(rng));
  m.head_bias = noise(rng);
  return m;
}

ClickedPrefix random_prefix(std::mt19937_64& rng, int n_items, int min_len,
                            int max_len) {
  std::uniform_int_distribution<int> len(min_len, max_len);
  std::uniform_int_distribution<int> pick(0, n_items - 1);
  ClickedPrefix p(len(rng));
  for (int& id : p) id = pick(rng);
  return p;
}

}  // namespace

TEST_SUITE_BEGIN("recsys");

TEST_CASE("encode base cases") {
  RecommenderModel m = random_model(6, 1);
  CHECK(encode({}, m) == Embedding{});

  ClickedPrefix one{3};
  CHECK(encode(one, m) == m.item_table[3]);  // exactly the embedding

  ClickedPrefix rep{2, 2, 2, 2, 2};
  Embedding r = encode(rep, m);
  for (int k = 0; k < kEmbedDim; ++k)
    CHECK(r[k] == doctest::Approx(m.item_table[2][k]).epsilon(1e-12));

  ClickedPrefix ab{0, 1};
  Embedding e = encode(ab, m);
  for (int k = 0; k < kEmbedDim; ++k)
    CHECK(e[k] == doctest::Approx(0.8 * m.item_table[0][k] +
                                  0.2 * m.item_table[1][k]).epsilon(1e-12));

  ClickedPrefix bad{99};
  CHECK_THROWS_AS((void)encode(bad, m), std::out_of_range);
}

TEST_CASE("update_user_rep equals re-encoding the extended prefix") {
  RecommenderModel m = random_model(30, 2);
  std::mt19937_64 rng(99);

  // fixed point
  Embedding rep = m.item_table[4];
  Embedding out = update_user_rep(rep, 4, m);
  for (int k = 0; k < kEmbedDim; ++k)
    CHECK(out[k] == doctest::Approx(rep[k]).epsilon(1e-12));

  // zero rep
  Embedding from_zero = update_user_rep(Embedding{}, 7, m);
  for (int k = 0; k < kEmbedDim; ++k)
    CHECK(from_zero[k] ==
          doctest::Approx((1.0 - m.encoder_decay) * m.item_table[7][k]).epsilon(1e-12));

  // re-encode oracle on non-empty prefixes
  std::uniform_int_distribution<int> pick(0, 29);
  for (int trial = 0; trial < 500; ++trial) {
    ClickedPrefix p = random_prefix(rng, 30, 1, 12);
    const int extra = pick(rng);
    Embedding incremental = update_user_rep(encode(p, m), extra, m);
    ClickedPrefix extended = p;
    extended.push_back(extra);
    Embedding reencoded = encode(extended, m);
    for (int k = 0; k < kEmbedDim; ++k)
      CHECK(std::abs(incremental[k] - reencoded[k]) <= 1e-12);
  }
}

TEST_CASE("predict_click") {
  RecommenderModel m = random_model(20, 3);
  std::mt19937_64 rng(5);
  ClickedPrefix p = random_prefix(rng, 20, 1, 8);
  Embedding rep = encode(p, m);

  RecommenderModel flat = m;
  flat.head_scale = 0.0;
  const double expect = 1.0 / (1.0 + std::exp(-flat.head_bias));
  for (int i = 0; i < 20; ++i)
    CHECK(predict_click(rep, i, flat) == doctest::Approx(expect).epsilon(1e-12));

  RecommenderModel centered = m;
  centered.head_bias = 0.0;
  Embedding zero{};
  CHECK(predict_click(zero, 0, centered) == 0.5);

  // sigmoid is monotone: the predict_click ranking equals the raw dot ranking
  std::vector<int> by_prob(20), by_dot(20);
  for (int i = 0; i < 20; ++i) by_prob[i] = by_dot[i] = i;
  std::sort(by_prob.begin(), by_prob.end(), [&](int a, int b) {
    return predict_click(rep, a, m) > predict_click(rep, b, m);
  });
  std::sort(by_dot.begin(), by_dot.end(), [&](int a, int b) {
    return inner(rep, m.item_table[a]) > inner(rep, m.item_table[b]);
  });
  CHECK(by_prob == by_dot);
}

TEST_CASE("impression gradient matches central finite differences") {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<int> pick(0, 11);
  std::uniform_int_distribution<int> coin(0, 1);
  const double h = 1e-5;
  for (int point = 0; point < 100; ++point) {
    RecommenderModel m = random_model(12, 1000 + point);
    ClickedPrefix p = random_prefix(rng, 12, 0, 6);
    const int cand = pick(rng);
    const bool label = coin(rng) == 1;
    const double l2 = (point % 2 == 0) ? 0.0 : 1e-3;

    ImpressionGrad grad;
    impression_loss_grad(m, p, cand, label, l2, grad);

    auto check = [&](double* param, double analytic) {
      const double saved = *param;
      *param = saved + h;
      const double up = impression_loss(m, p, cand, label, l2);
      *param = saved - h;
      const double down = impression_loss(m, p, cand, label, l2);
      *param = saved;
      const double fd = (up - down) / (2.0 * h);
      const double err = std::abs(analytic - fd) /
                         std::max(std::abs(analytic) + std::abs(fd), 1e-3);
      CHECK(err <= 1e-4);
    };

    check(&m.head_scale, grad.d_scale);
    check(&m.head_bias, grad.d_bias);
    for (int id = 0; id < 12; ++id) {
      Embedding zero{};
      const Embedding* g = &zero;
      auto it = grad.items.find(id);
      if (it != grad.items.end()) g = &it->second;
      for (int k = 0; k < kEmbedDim; ++k) check(&m.item_table[id][k], (*g)[k]);
    }
  }
}

TEST_CASE("one-impression SGD drives the prediction to the label") {
  RecommenderModel m = random_model(4, 9);
  ClickedPrefix p{1, 2};
  const int cand = 3;

  double prev_loss = impression_loss(m, p, cand, true, 0.0);
  ImpressionGrad grad;
  for (int iter = 0; iter < 400; ++iter) {
    impression_loss_grad(m, p, cand, true, 0.0, grad);
    for (const auto& [id, d] : grad.items)
      for (int k = 0; k < kEmbedDim; ++k) m.item_table[id][k] -= 0.1 * d[k];
    m.head_scale -= 0.1 * grad.d_scale;
    m.head_bias -= 0.1 * grad.d_bias;
    const double loss = impression_loss(m, p, cand, true, 0.0);
    CHECK(loss < prev_loss);  // strictly decreasing on the 1-sample problem
    prev_loss = loss;
  }
  CHECK(predict_click(encode(p, m), cand, m) > 0.95);
}

namespace {

InteractionLog toy_log(uint64_t seed, int n_users = 12, int n_items = 10,
                       int rounds = 30) {
  // Two latent taste groups: users click items of their group more often.
  InteractionLog log;
  log.n_users = n_users;
  log.n_items = n_items;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, n_items - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int round = 1; round <= rounds; ++round)
    for (int user = 0; user < n_users; ++user) {
      const int item = pick(rng);
      const bool same_group = (user % 2) == (item % 2);
      const bool clicked = u(rng) < (same_group ? 0.8 : 0.1);
      log.records.push_back({user, Phase::Collection, round, item, clicked});
    }
  return log;
}

}  // namespace

TEST_CASE("train determinism and the zero-learning-rate identity") {
  InteractionLog log = toy_log(1);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 5;

  TrainResult a = train(log, cfg);
  TrainResult b = train(log, cfg);
  CHECK(a.model.item_table == b.model.item_table);
  CHECK(a.model.head_scale == b.model.head_scale);
  CHECK(a.model.head_bias == b.model.head_bias);
  CHECK(a.final_loss == b.final_loss);

  TrainConfig frozen = cfg;
  frozen.learning_rate = 0.0;
  TrainConfig init_only = cfg;
  init_only.epochs = 0;
  CHECK(train(log, frozen).model.item_table ==
        train(log, init_only).model.item_table);
}

TEST_CASE("train input validation and divergence") {
  TrainConfig cfg;
  InteractionLog empty;
  empty.n_users = 1;
  empty.n_items = 1;
  CHECK_THROWS_AS((void)train(empty, cfg), std::invalid_argument);

  InteractionLog one_class;
  one_class.n_users = 1;
  one_class.n_items = 2;
  one_class.records.push_back({0, Phase::Collection, 1, 0, true});
  one_class.records.push_back({0, Phase::Collection, 2, 1, true});
  CHECK_THROWS_AS((void)train(one_class, cfg), std::invalid_argument);

  TrainConfig bad = cfg;
  bad.embed_dim = 16;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  TrainConfig wild = cfg;
  wild.learning_rate = 1e300;
  wild.epochs = 4;
  CHECK_THROWS_AS((void)train(toy_log(2), wild), std::runtime_error);
}

TEST_CASE("evaluation metrics") {
  InteractionLog log = toy_log(3, 16, 10, 40);
  TrainConfig cfg;
  cfg.epochs = 12;
  cfg.learning_rate = 0.1;
  cfg.seed = 11;

  // constant predictor: zero head => p = 0.5, log-loss ln 2, tied auc 0.5
  RecommenderModel flat;
  flat.item_table.assign(10, Embedding{});
  flat.head_scale = 0.0;
  flat.head_bias = 0.0;
  EvalMetrics base = evaluate_model(log, 31, flat);
  CHECK(base.log_loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(base.auc == doctest::Approx(0.5).epsilon(1e-12));

  // trained beats untrained on the held-out tail
  InteractionLog head;
  head.n_users = log.n_users;
  head.n_items = log.n_items;
  for (const LogRecord& r : log.records)
    if (r.round <= 30) head.records.push_back(r);
  TrainResult trained = train(head, cfg);
  TrainConfig init_only = cfg;
  init_only.epochs = 0;
  TrainResult untrained = train(head, init_only);
  EvalMetrics mt = evaluate_model(log, 31, trained.model);
  EvalMetrics mu = evaluate_model(log, 31, untrained.model);
  CHECK(mt.auc > mu.auc);
  CHECK(mt.auc <= 1.0);
  CHECK(mt.auc >= 0.0);

  // single class in the slice
  InteractionLog one_class = log;
  for (LogRecord& r : one_class.records)
    if (r.round >= 31) r.clicked = false;
  CHECK_THROWS_AS((void)evaluate_model(one_class, 31, trained.model),
                  std::domain_error);

  // a perfect separator
  InteractionLog two;
  two.n_users = 1;
  two.n_items = 2;
  two.records.push_back({0, Phase::Collection, 1, 0, true});
  two.records.push_back({0, Phase::Collection, 2, 1, false});
  two.records.push_back({0, Phase::Collection, 3, 0, true});
  two.records.push_back({0, Phase::Collection, 4, 1, false});
  RecommenderModel sep;
  sep.item_table.assign(2, Embedding{});
  sep.item_table[0][0] = 1.0;
  sep.item_table[1][0] = -1.0;
  EvalMetrics ms = evaluate_model(two, 2, sep);
  CHECK(ms.auc == 1.0);
}

TEST_SUITE_END();
