// Ground-truth user environment: click model, Bernoulli feedback, preference
// evolution, category- and item-level boredom, snapshot/restore.
#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <vector>

#include "ipg/embedding.hpp"

namespace ipg {

struct SimConfig {
  double click_w = 10.0;          // click-model slope (calibrated, see README)
  double click_b = 0.8;           // click-model bias
  double gamma = 0.8;             // preference-evolution rate, in (0,1)
  int boredom_window = 10;        // last-N clicked items considered
  int boredom_trigger = 5;        // same-category clicks that trigger decay
  double boredom_decay = 0.8;     // block scale on trigger
  double item_boredom_coeff = 0.1;  // b_ui = coeff * n_ui
  double embed_noise_std = 0.4;   // component noise of generated embeddings

  void validate() const;  // throws std::invalid_argument
};

struct ClickedItem {
  int item;
  int category;  // the item's main category, fixed at click time
};

struct SimUserState {
  Embedding embedding{};                 // ground truth e_u, unit norm
  std::deque<ClickedItem> recent_clicks; // newest at back, len <= window
  std::map<int, int> click_counts;       // item id -> n_ui

  int clicks_of(int item) const {
    auto it = click_counts.find(item);
    return it == click_counts.end() ? 0 : it->second;
  }
};

struct Feedback {
  bool clicked = false;
  double click_probability = 0.0;
  Embedding user_embedding_after{};
};

// Item catalog with per-item main categories precomputed.
struct Catalog {
  std::vector<Embedding> items;
  std::vector<int> main_cats;

  int size() const { return static_cast<int>(items.size()); }
  static Catalog from_items(std::vector<Embedding> items);
};

using SimSnapshot = std::vector<SimUserState>;

// sigmoid(w * (e_u . e_i - coeff*n_ui - b)), always in (0,1).
double click_probability(const SimUserState& user, const Embedding& item,
                         int n_ui, const SimConfig& cfg);

bool sample_click(double prob, std::mt19937_64& rng);

// e_u <- gamma*e_u + (1-gamma)*e_i. No renormalization here.
void apply_preference_evolution(SimUserState& user, const Embedding& item,
                                const SimConfig& cfg);

// Decays every category block holding >= trigger of the last `window` clicks,
// then renormalizes once. Returns whether any category triggered.
bool apply_category_boredom(SimUserState& user, const SimConfig& cfg);

// One environment transition. Negative feedback leaves the state untouched.
Feedback step(SimUserState& user, int item_id, const Catalog& catalog,
              const SimConfig& cfg, std::mt19937_64& rng);

SimSnapshot snapshot(const std::vector<SimUserState>& users);
std::vector<SimUserState> restore(const SimSnapshot& snap);

}  // namespace ipg
