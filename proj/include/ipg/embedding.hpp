// Structured 20-dimensional embedding space: 10 category blocks of 2
// components. Shared by the simulator's ground-truth vectors and, as a shape
// convention, the learned item table.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>

namespace ipg {

inline constexpr int kEmbedDim = 20;
inline constexpr int kNumCategories = 10;
inline constexpr int kCategoryDim = 2;  // block c = components [2c, 2c+1]

using Embedding = std::array<double, kEmbedDim>;

struct Propensities {
  std::array<double, kNumCategories> weights;  // nonneg, sums to 1
};

double inner(const Embedding& a, const Embedding& b);
double norm(const Embedding& e);
double block_norm(const Embedding& e, int category);

// e / ||e||. Zero input is a contract violation (throws std::domain_error).
Embedding renormalize(const Embedding& e);

// argmax over categories of the block norm, ties to the lowest index.
int main_category(const Embedding& e);

// Normalizes raw nonnegative draws to sum 1. All-zero input returns nullopt
// (caller resamples).
std::optional<Propensities> propensities_from_raw(
    const std::array<double, kNumCategories>& raw);

// 10 draws from Uniform(0,1), divided by their sum.
Propensities sample_propensities(std::mt19937_64& rng);

// Clamp raw components to [0,1], scale each block by its propensity, then
// normalize to unit norm. nullopt when everything clamps to zero.
std::optional<Embedding> embedding_from_raw(
    const Embedding& raw, const Propensities& p);

// Component draws from Normal(0, noise_std), then embedding_from_raw;
// resamples the component draws on the all-zero outcome.
Embedding sample_embedding(std::mt19937_64& rng, const Propensities& p,
                           double noise_std = 0.4);

// Full per-entity pipeline: propensities first, component draws second.
Embedding generate_embedding(std::mt19937_64& rng, double noise_std = 0.4);

}  // namespace ipg
