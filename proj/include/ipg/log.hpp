// Interaction records shared by the trainer and the experiment harness.
#pragma once

#include <cstdint>
#include <vector>

namespace ipg {

enum class Phase { Collection, Guidance };

struct LogRecord {
  int user = 0;
  Phase phase = Phase::Collection;
  int round = 0;  // 1-based, contiguous within a phase
  int item = 0;
  bool clicked = false;
};

struct InteractionLog {
  int n_users = 0;
  int n_items = 0;
  std::vector<LogRecord> records;
};

}  // namespace ipg
