#include "ipg/simenv.hpp"

#include <cmath>
#include <stdexcept>

#include "ipg/mathutil.hpp"

namespace ipg {

void SimConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("sim: gamma must lie in (0,1)");
  if (boredom_window <= 0 || boredom_trigger <= 0)
    throw std::invalid_argument("sim: boredom window/trigger must be positive");
  if (boredom_trigger > boredom_window)
    throw std::invalid_argument("sim: boredom_trigger must be <= boredom_window");
  for (double v : {click_w, click_b, boredom_decay, item_boredom_coeff, embed_noise_std})
    if (!std::isfinite(v)) throw std::invalid_argument("sim: non-finite coefficient");
  if (embed_noise_std <= 0.0)
    throw std::invalid_argument("sim: embed_noise_std must be positive");
}

Catalog Catalog::from_items(std::vector<Embedding> items) {
  Catalog c;
  c.main_cats.reserve(items.size());
  for (const Embedding& e : items) c.main_cats.push_back(main_category(e));
  c.items = std::move(items);
  return c;
}

double click_probability(const SimUserState& user, const Embedding& item,
                         int n_ui, const SimConfig& cfg) {
  if (n_ui < 0) throw std::invalid_argument("click_probability: n_ui < 0");
  const double b_ui = cfg.item_boredom_coeff * n_ui;
  return sigmoid(cfg.click_w * (inner(user.embedding, item) - b_ui - cfg.click_b));
}

bool sample_click(double prob, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  return unif(rng) < prob;
}

void apply_preference_evolution(SimUserState& user, const Embedding& item,
                                const SimConfig& cfg) {
  for (int k = 0; k < kEmbedDim; ++k)
    user.embedding[k] = cfg.gamma * user.embedding[k] + (1.0 - cfg.gamma) * item[k];
}

bool apply_category_boredom(SimUserState& user, const SimConfig& cfg) {
  int count[kNumCategories] = {0};
  for (const ClickedItem& c : user.recent_clicks) ++count[c.category];

  bool triggered = false;
  for (int c = 0; c < kNumCategories; ++c) {
    if (count[c] >= cfg.boredom_trigger) {
      user.embedding[2 * c] *= cfg.boredom_decay;
      user.embedding[2 * c + 1] *= cfg.boredom_decay;
      triggered = true;
    }
  }
  if (triggered) user.embedding = renormalize(user.embedding);
  return triggered;
}

Feedback step(SimUserState& user, int item_id, const Catalog& catalog,
              const SimConfig& cfg, std::mt19937_64& rng) {
  if (item_id < 0 || item_id >= catalog.size())
    throw std::out_of_range("step: unknown item id");
  const Embedding& item = catalog.items[item_id];

  Feedback fb;
  fb.click_probability = click_probability(user, item, user.clicks_of(item_id), cfg);
  fb.clicked = sample_click(fb.click_probability, rng);
  if (fb.clicked) {
    ++user.click_counts[item_id];
    user.recent_clicks.push_back({item_id, catalog.main_cats[item_id]});
    while (static_cast<int>(user.recent_clicks.size()) > cfg.boredom_window)
      user.recent_clicks.pop_front();
    apply_preference_evolution(user, item, cfg);
    apply_category_boredom(user, cfg);
  }
  fb.user_embedding_after = user.embedding;
  return fb;
}

SimSnapshot snapshot(const std::vector<SimUserState>& users) { return users; }

std::vector<SimUserState> restore(const SimSnapshot& snap) { return snap; }

}  // namespace ipg
