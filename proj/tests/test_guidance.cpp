#include <cmath>
#include <stdexcept>
#include <random>

#include "doctest.h"
#include "ipg/guidance.hpp"
#include "ipg/rng.hpp"

using namespace ipg;

namespace {

RecommenderModel random_model(int n_items, uint64_t seed) {
  RecommenderModel m;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.5);
  m.item_table.resize(n_items);
  for (auto& e : m.item_table)
    for (double& v : e) v = noise(rng);
  m.head_scale = 1.5;
  m.head_bias = -0.2;
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

TEST_SUITE_BEGIN("guidance");

TEST_CASE("guiding score base cases") {
  RecommenderModel m = random_model(10, 1);

  // recommending the current interest yields zero guidance
  Embedding rep = m.item_table[4];
  CHECK(guiding_score(rep, 4, 7, m) == 0.0);

  // rep orthogonal to the target, candidate equal to it, unit norm
  RecommenderModel unitm = m;
  unitm.item_table[0] = Embedding{};
  unitm.item_table[0][0] = 1.0;  // target
  Embedding orth{};
  orth[1] = 1.0;
  CHECK(guiding_score(orth, 0, 0, unitm) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("guiding score equals the literal one-step interest increase") {
  RecommenderModel m = random_model(25, 2);
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> pick(0, 24);
  for (int trial = 0; trial < 1000; ++trial) {
    ClickedPrefix p = random_prefix(rng, 25, 1, 10);
    const Embedding rep = encode(p, m);
    const int item = pick(rng);
    const int target = pick(rng);

    // Eq-level oracle: move the representation by one update and take the
    // change of the target affinity, scaled back by 1/(1-decay).
    const Embedding moved = update_user_rep(rep, item, m);
    const double literal = (inner(moved, m.item_table[target]) -
                            inner(rep, m.item_table[target])) /
                           (1.0 - m.encoder_decay);
    CHECK(guiding_score(rep, item, target, m) ==
          doctest::Approx(literal).epsilon(1e-9));

    // exact form: re-encode and difference, equals (1-decay) * simplified
    const double exact = guiding_score_exact(p, item, target, m);
    CHECK(exact == doctest::Approx((1.0 - m.encoder_decay) *
                                   guiding_score(rep, item, target, m))
                       .epsilon(1e-9));
  }
}

TEST_CASE("exact guiding score of a fixed-point prefix is zero") {
  RecommenderModel m = random_model(6, 3);
  ClickedPrefix p{2, 2, 2, 2, 2, 2};
  CHECK(guiding_score_exact(p, 2, 5, m) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("ipg score arithmetic") {
  CHECK(ipg_score(0.7, 0.0) == 0.0);

  const double p[3] = {0.9, 0.6, 0.1};
  const double g[3] = {-0.2, 0.5, 0.9};
  const double expect[3] = {-0.18, 0.30, 0.09};
  int best = 0;
  for (int i = 0; i < 3; ++i) {
    CHECK(ipg_score(p[i], g[i]) == doctest::Approx(expect[i]).epsilon(1e-12));
    if (ipg_score(p[i], g[i]) > ipg_score(p[best], g[best])) best = i;
  }
  CHECK(best == 1);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> up(0.01, 0.99), ug(-2.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const double gg = ug(rng);
    const double r = ipg_score(up(rng), gg);
    CHECK(std::signbit(r) == std::signbit(gg));
  }
}

TEST_CASE("scored item consistency") {
  RecommenderModel m = random_model(40, 4);
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    ClickedPrefix p = random_prefix(rng, 40, 1, 8);
    Embedding rep = encode(p, m);
    std::uniform_int_distribution<int> pick(0, 39);
    ScoredItem s = score_item(rep, pick(rng), pick(rng), m);
    CHECK(s.interaction_prob > 0.0);
    CHECK(s.interaction_prob < 1.0);
    CHECK(std::abs(s.ipg_score - s.interaction_prob * s.guide_score) <= 1e-12);
  }
}

TEST_CASE("selection matches the exhaustive scan and the exact policy") {
  const int n_items = 400;
  RecommenderModel m = random_model(n_items, 5);
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> pick(0, n_items - 1);

  for (int trial = 0; trial < 60; ++trial) {
    ClickedPrefix p = random_prefix(rng, n_items, 1, 15);
    Embedding rep = encode(p, m);
    const int target = pick(rng);

    SelectContext ctx;
    ctx.model = &m;
    ctx.rep = &rep;
    ctx.prefix = &p;
    ctx.target = target;

    // brute-force oracle over all scored items
    int best = 0;
    ScoredItem bs = score_item(rep, 0, target, m);
    for (int i = 1; i < n_items; ++i) {
      ScoredItem s = score_item(rep, i, target, m);
      if (s.ipg_score > bs.ipg_score) {
        bs = s;
        best = i;
      }
    }
    const int ipg_pick = select(Policy{PolicyKind::IPG}, ctx, n_items);
    CHECK(ipg_pick == best);

    // the exact policy agrees (positive rescaling preserves the argmax)
    CHECK(select(Policy{PolicyKind::IPGExact}, ctx, n_items) == ipg_pick);

    // positive rescaling of the guide scores leaves the selection unchanged
    std::uniform_real_distribution<double> cdist(0.1, 10.0);
    const double c = cdist(rng);
    int scaled_best = 0;
    double scaled_score = 0.0;
    for (int i = 0; i < n_items; ++i) {
      ScoredItem s = score_item(rep, i, target, m);
      const double r = s.interaction_prob * (c * s.guide_score);
      if (i == 0 || r > scaled_score) {
        scaled_score = r;
        scaled_best = i;
      }
    }
    CHECK(scaled_best == ipg_pick);
  }
}

TEST_CASE("heuristic with zero alpha matches the greedy selection") {
  const int n_items = 300;
  RecommenderModel m = random_model(n_items, 6);
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> pick(0, n_items - 1);
  for (int trial = 0; trial < 50; ++trial) {
    ClickedPrefix p = random_prefix(rng, n_items, 1, 10);
    Embedding rep = encode(p, m);
    SelectContext ctx;
    ctx.model = &m;
    ctx.rep = &rep;
    ctx.target = pick(rng);
    ctx.alpha = 0.0;
    Policy heuristic{PolicyKind::Heuristic, 0.0};
    CHECK(select(heuristic, ctx, n_items) ==
          select(Policy{PolicyKind::Greedy}, ctx, n_items));
  }
}

TEST_CASE("greedy ignores the target") {
  const int n_items = 120;
  RecommenderModel m = random_model(n_items, 7);
  std::mt19937_64 rng(13);
  ClickedPrefix p = random_prefix(rng, n_items, 2, 10);
  Embedding rep = encode(p, m);
  SelectContext ctx;
  ctx.model = &m;
  ctx.rep = &rep;
  ctx.target = 0;
  const int first = select(Policy{PolicyKind::Greedy}, ctx, n_items);
  for (int target = 1; target < n_items; target += 7) {
    ctx.target = target;
    CHECK(select(Policy{PolicyKind::Greedy}, ctx, n_items) == first);
  }
}

TEST_CASE("random policy is reproducible and uniform") {
  const int n_items = 100;
  SelectContext ctx;
  auto rng = make_stream(2023, Stream::GuidePolicy, 0);
  ctx.rng = &rng;
  Policy random{PolicyKind::Random};

  std::vector<int> counts(n_items, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const int id = select(random, ctx, n_items);
    REQUIRE(id >= 0);
    REQUIRE(id < n_items);
    ++counts[id];
  }
  // chi-square upper 1% critical value at 99 dof is 134.64
  const double expect = static_cast<double>(draws) / n_items;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expect) * (c - expect) / expect;
  CHECK(chi2 < 134.64);

  auto rng2 = make_stream(2023, Stream::GuidePolicy, 0);
  SelectContext ctx2;
  ctx2.rng = &rng2;
  auto rng3 = make_stream(2023, Stream::GuidePolicy, 0);
  SelectContext ctx3;
  ctx3.rng = &rng3;
  for (int i = 0; i < 1000; ++i)
    CHECK(select(random, ctx2, n_items) == select(random, ctx3, n_items));
}

TEST_CASE("selection errors") {
  RecommenderModel m = random_model(5, 8);
  Embedding rep{};
  SelectContext ctx;
  ctx.model = &m;
  ctx.rep = &rep;
  ctx.target = 1;
  CHECK_THROWS_AS((void)select(Policy{PolicyKind::IPG}, ctx, 0),
                  std::invalid_argument);
  SelectContext missing;
  CHECK_THROWS_AS((void)select(Policy{PolicyKind::Greedy}, missing, 5),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)select(Policy{PolicyKind::Random}, missing, 5),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_policy("bogus", 1.0), std::invalid_argument);
  CHECK_THROWS_AS(parse_policy("heuristic", -1.0), std::invalid_argument);
  CHECK(parse_policy("ipg_exact", 0.0).kind == PolicyKind::IPGExact);
}

TEST_CASE("heuristic alpha sweep tokens") {
  Policy p = parse_policy("heuristic:0.5", 1.0);
  CHECK(p.kind == PolicyKind::Heuristic);
  CHECK(p.alpha == 0.5);
  CHECK(p.label == "heuristic:0.5");
  CHECK(parse_policy("heuristic:2", 1.0).alpha == 2.0);
  CHECK(parse_policy("heuristic", 1.5).alpha == 1.5);
  CHECK_THROWS_AS(parse_policy("heuristic:x", 1.0), std::invalid_argument);
}

TEST_SUITE_END();
