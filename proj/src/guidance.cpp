#include "ipg/guidance.hpp"

#include <stdexcept>

#include "ipg/kernels.hpp"

namespace ipg {

Policy parse_policy(const std::string& name, double alpha) {
  Policy p;
  p.alpha = alpha;
  p.label = name;
  std::string base = name;
  if (base.rfind("heuristic:", 0) == 0) {
    try {
      p.alpha = std::stod(base.substr(10));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad heuristic alpha in: " + name);
    }
    base = "heuristic";
  }
  if (base == "random") p.kind = PolicyKind::Random;
  else if (base == "greedy") p.kind = PolicyKind::Greedy;
  else if (base == "heuristic") p.kind = PolicyKind::Heuristic;
  else if (base == "ipg") p.kind = PolicyKind::IPG;
  else if (base == "ipg_exact") p.kind = PolicyKind::IPGExact;
  else if (base == "oracle") p.kind = PolicyKind::Oracle;
  else throw std::invalid_argument("unknown policy: " + name);
  if (!(p.alpha >= 0.0)) throw std::invalid_argument("policy alpha must be >= 0");
  return p;
}

std::string policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Random: return "random";
    case PolicyKind::Greedy: return "greedy";
    case PolicyKind::Heuristic: return "heuristic";
    case PolicyKind::IPG: return "ipg";
    case PolicyKind::IPGExact: return "ipg_exact";
    case PolicyKind::Oracle: return "oracle";
  }
  return "?";
}

double guiding_score(const Embedding& rep, int item_id, int target_id,
                     const RecommenderModel& model) {
  const Embedding& ei = model.item(item_id);
  const Embedding& ej = model.item(target_id);
  double s = 0.0;
  for (int k = 0; k < kEmbedDim; ++k) s += (ei[k] - rep[k]) * ej[k];
  return s;
}

double guiding_score_exact(std::span<const int> prefix, int item_id,
                           int target_id, const RecommenderModel& model) {
  const Embedding& ej = model.item(target_id);
  const Embedding before = encode(prefix, model);
  std::vector<int> extended(prefix.begin(), prefix.end());
  extended.push_back(item_id);
  const Embedding after = encode(extended, model);
  return inner(after, ej) - inner(before, ej);
}

double ipg_score(double interaction_prob, double guide_score) {
  return interaction_prob * guide_score;
}

ScoredItem score_item(const Embedding& rep, int item_id, int target_id,
                      const RecommenderModel& model) {
  ScoredItem s;
  s.item = item_id;
  s.interaction_prob = predict_click(rep, item_id, model);
  s.guide_score = guiding_score(rep, item_id, target_id, model);
  s.ipg_score = ipg_score(s.interaction_prob, s.guide_score);
  return s;
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("select: missing context: ") + what);
}

}  // namespace

int select(const Policy& policy, const SelectContext& ctx, int n_items,
           int threads) {
  if (n_items <= 0) throw std::invalid_argument("select: empty catalog");

  switch (policy.kind) {
    case PolicyKind::Random: {
      require(ctx.rng != nullptr, "rng");
      std::uniform_int_distribution<int> pick(0, n_items - 1);
      return pick(*ctx.rng);
    }
    case PolicyKind::Greedy: {
      require(ctx.model && ctx.rep, "model/rep");
      // sigmoid is monotone, so ranking by the raw inner product matches
      // ranking by predict_click.
      return par::argmax_lowest(n_items, threads, [&](int i) {
        return inner(*ctx.rep, ctx.model->item(i));
      });
    }
    case PolicyKind::Heuristic: {
      require(ctx.model && ctx.rep && ctx.target >= 0, "model/rep/target");
      const Embedding& ej = ctx.model->item(ctx.target);
      const double alpha = ctx.alpha;
      return par::argmax_lowest(n_items, threads, [&](int i) {
        const Embedding& ei = ctx.model->item(i);
        return inner(*ctx.rep, ei) + alpha * inner(ej, ei);
      });
    }
    case PolicyKind::IPG: {
      require(ctx.model && ctx.rep && ctx.target >= 0, "model/rep/target");
      return par::argmax_lowest(n_items, threads, [&](int i) {
        return score_item(*ctx.rep, i, ctx.target, *ctx.model).ipg_score;
      });
    }
    case PolicyKind::IPGExact: {
      require(ctx.model && ctx.prefix && ctx.target >= 0, "model/prefix/target");
      const Embedding rep = encode(*ctx.prefix, *ctx.model);
      return par::argmax_lowest(n_items, threads, [&](int i) {
        const double p = predict_click(rep, i, *ctx.model);
        const double g = guiding_score_exact(*ctx.prefix, i, ctx.target, *ctx.model);
        return ipg_score(p, g);
      });
    }
    case PolicyKind::Oracle: {
      require(ctx.sim_user && ctx.catalog && ctx.sim_cfg, "sim_user/catalog/sim_cfg");
      if (n_items > ctx.catalog->size())
        throw std::invalid_argument("select: catalog smaller than n_items");
      return par::argmax_lowest(n_items, threads, [&](int i) {
        return click_probability(*ctx.sim_user, ctx.catalog->items[i],
                                 ctx.sim_user->clicks_of(i), *ctx.sim_cfg);
      });
    }
  }
  throw std::logic_error("select: unreachable");
}

}  // namespace ipg
