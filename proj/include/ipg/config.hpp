// Experiment configuration: flat key = value text with one section per
// module, validated on load, unknown keys rejected. The config hash keys all
// persisted outputs; it covers every semantic field and deliberately skips
// out_dir and threads.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipg/recsys.hpp"
#include "ipg/simenv.hpp"

namespace ipg {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  // [experiment]
  std::string scale = "desk";  // desk | paper
  std::vector<uint64_t> seeds = {1};
  std::string out_dir = "runs/desk";
  int n_users = 500;
  int n_items = 500;
  int n_targets = 10;
  int collection_rounds = 100;
  int guidance_rounds = 20;
  double oracle_fraction = 0.3;
  std::vector<double> gamma_sweep = {0.8};
  std::vector<std::string> policies = {"random", "greedy", "heuristic", "ipg"};
  std::vector<int> report_ks = {5, 10, 15, 20};
  int threads = 0;  // 0 = all available
  int holdout_rounds = 20;  // trailing collection rounds held out for eval

  // [sim]
  SimConfig sim;

  // [train]
  TrainConfig train;

  // [guidance]
  double alpha = 1.0;

  void validate() const;  // throws ConfigError
};

ExperimentConfig default_config(const std::string& scale = "desk");

// Parses the key = value file; keys not listed in the schema are rejected
// with their line number.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

// Canonical sorted key=value serialization of the semantic fields.
std::string canonical_config_text(const ExperimentConfig& cfg);

// FNV-1a over the canonical text, as fixed-width hex.
std::string config_hash(const ExperimentConfig& cfg);

uint64_t fnv1a64(const std::string& bytes);

}  // namespace ipg
