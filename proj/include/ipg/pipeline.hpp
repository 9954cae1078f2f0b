// Stage orchestration behind the CLI: each stage reads its inputs from the
// run directory and writes outputs stamped with seed + config hash; stages
// whose output already matches are skipped.
#pragma once

#include <functional>
#include <string>

#include "ipg/config.hpp"
#include "ipg/harness.hpp"
#include "ipg/io.hpp"

namespace ipg {

struct RunPaths {
  std::string dir;  // per-seed directory
  std::string users() const { return dir + "/users.tsv"; }
  std::string items() const { return dir + "/items.tsv"; }
  std::string log() const { return dir + "/log.tsv"; }
  std::string snapshot() const { return dir + "/snapshot.tsv"; }
  std::string model() const { return dir + "/model.tsv"; }
  std::string metrics() const { return dir + "/metrics.tsv"; }
  std::string episodes() const { return dir + "/episodes.tsv"; }
  std::string report() const { return dir + "/report.tsv"; }
  std::string report_aggregate() const { return dir + "/report_agg.tsv"; }
  std::string trajectory(int user, int target, const std::string& policy) const {
    return dir + "/trajectory_u" + std::to_string(user) + "_t" +
           std::to_string(target) + "_" + policy + ".tsv";
  }
};

RunPaths run_paths(const ExperimentConfig& cfg, uint64_t seed);

using StageLog = std::function<void(const std::string&)>;

void stage_generate(const ExperimentConfig& cfg, uint64_t seed, const StageLog& log);
void stage_collect(const ExperimentConfig& cfg, uint64_t seed, const StageLog& log);
void stage_train(const ExperimentConfig& cfg, uint64_t seed, const StageLog& log);
void stage_guide(const ExperimentConfig& cfg, uint64_t seed, const StageLog& log);
void stage_report(const ExperimentConfig& cfg, uint64_t seed, const StageLog& log);
void stage_trajectory(const ExperimentConfig& cfg, uint64_t seed, int user,
                      int target, const std::string& policy, double gamma,
                      const StageLog& log);

// Chains every stage for every configured seed; writes the cross-seed mean
// table when more than one seed is configured.
void run_all(const ExperimentConfig& cfg, const StageLog& log);

}  // namespace ipg
