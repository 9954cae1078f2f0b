// Persistence: delimited-text files with full-precision doubles (shortest
// round-trip formatting), each carrying the master seed and config hash in
// its header. All round-trips are bit-exact.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipg/harness.hpp"

namespace ipg {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Provenance header shared by every output file.
struct FileMeta {
  std::string kind;         // e.g. "embeddings", "log", "model"
  uint64_t seed = 0;
  std::string config_hash;  // 16 hex chars
};

std::string fmt_double(double v);        // shortest round-trip text
double parse_double_exact(const std::string& tok);

// Embedding matrices (row = entity id, 20 columns).
std::string serialize_matrix(const std::vector<Embedding>& rows, const FileMeta& m);
std::vector<Embedding> parse_matrix(const std::string& text, FileMeta* meta = nullptr);

std::string serialize_log(const InteractionLog& log, const FileMeta& m);
InteractionLog parse_log(const std::string& text, FileMeta* meta = nullptr);

std::string serialize_model(const RecommenderModel& model, const FileMeta& m);
RecommenderModel parse_model(const std::string& text, FileMeta* meta = nullptr);

std::string serialize_snapshot(const SimSnapshot& snap, const FileMeta& m);
SimSnapshot parse_snapshot(const std::string& text, FileMeta* meta = nullptr);

std::string serialize_episodes(const std::vector<EpisodeTable>& tables,
                               const std::vector<int>& report_ks, int rounds,
                               const FileMeta& m);
std::vector<EpisodeTable> parse_episodes(const std::string& text,
                                         std::vector<int>* report_ks = nullptr,
                                         int* rounds = nullptr,
                                         FileMeta* meta = nullptr);

std::string serialize_report(const GuidanceReport& report, const FileMeta& m);
std::string serialize_report_aggregate(const GuidanceReport& report,
                                       const FileMeta& m);
GuidanceReport parse_report(const std::string& text, FileMeta* meta = nullptr);

// Trajectory dump for one (user, target, policy) episode: a context row with
// ids and the target's true embedding, then one row per round.
std::string serialize_trajectory(const EpisodeSet& episodes, int user,
                                 const Catalog& catalog, const FileMeta& m);

void write_file(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);  // throws IoError when absent
bool file_exists(const std::string& path);

// Reads just the provenance header; returns false when the file is missing
// or carries a different kind/seed/hash.
bool file_up_to_date(const std::string& path, const FileMeta& expect);

}  // namespace ipg
