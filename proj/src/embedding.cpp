#include "ipg/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ipg {

double inner(const Embedding& a, const Embedding& b) {
  double s = 0.0;
  for (int k = 0; k < kEmbedDim; ++k) s += a[k] * b[k];
  return s;
}

double norm(const Embedding& e) { return std::sqrt(inner(e, e)); }

double block_norm(const Embedding& e, int category) {
  const double x = e[2 * category];
  const double y = e[2 * category + 1];
  return std::sqrt(x * x + y * y);
}

Embedding renormalize(const Embedding& e) {
  const double n = norm(e);
  if (n <= 0.0) throw std::domain_error("renormalize: zero-norm embedding");
  Embedding out;
  for (int k = 0; k < kEmbedDim; ++k) out[k] = e[k] / n;
  return out;
}

int main_category(const Embedding& e) {
  int best = 0;
  double best_norm = block_norm(e, 0);
  for (int c = 1; c < kNumCategories; ++c) {
    const double bn = block_norm(e, c);
    if (bn > best_norm) {
      best_norm = bn;
      best = c;
    }
  }
  return best;
}

std::optional<Propensities> propensities_from_raw(
    const std::array<double, kNumCategories>& raw) {
  double sum = 0.0;
  for (double r : raw) {
    if (r < 0.0) throw std::invalid_argument("propensities_from_raw: negative draw");
    sum += r;
  }
  if (sum <= 0.0) return std::nullopt;
  Propensities p;
  for (int c = 0; c < kNumCategories; ++c) p.weights[c] = raw[c] / sum;
  return p;
}

Propensities sample_propensities(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (;;) {
    std::array<double, kNumCategories> raw;
    for (int c = 0; c < kNumCategories; ++c) raw[c] = unif(rng);
    if (auto p = propensities_from_raw(raw)) return *p;
  }
}

std::optional<Embedding> embedding_from_raw(const Embedding& raw,
                                            const Propensities& p) {
  Embedding e;
  for (int k = 0; k < kEmbedDim; ++k) {
    const double clamped = std::clamp(raw[k], 0.0, 1.0);
    e[k] = clamped * p.weights[k / kCategoryDim];
  }
  const double n = norm(e);
  if (n <= 0.0) return std::nullopt;
  for (int k = 0; k < kEmbedDim; ++k) e[k] /= n;
  return e;
}

Embedding sample_embedding(std::mt19937_64& rng, const Propensities& p,
                           double noise_std) {
  std::normal_distribution<double> noise(0.0, noise_std);
  for (;;) {
    Embedding raw;
    for (int k = 0; k < kEmbedDim; ++k) raw[k] = noise(rng);
    if (auto e = embedding_from_raw(raw, p)) return *e;
  }
}

Embedding generate_embedding(std::mt19937_64& rng, double noise_std) {
  const Propensities p = sample_propensities(rng);
  return sample_embedding(rng, p, noise_std);
}

}  // namespace ipg
