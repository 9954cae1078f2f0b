#include "ipg/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ipg/guidance.hpp"

namespace ipg {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  double out;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ConfigError("config: key '" + key + "': not a number: '" + v + "'");
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ConfigError("config: key '" + key + "': not an integer: '" + v + "'");
  return out;
}

}  // namespace

ExperimentConfig default_config(const std::string& scale) {
  ExperimentConfig cfg;
  if (scale == "desk") {
    // defaults above
  } else if (scale == "paper") {
    cfg.scale = "paper";
    cfg.n_users = 6034;
    cfg.n_items = 3533;
    cfg.n_targets = 50;
    cfg.out_dir = "runs/paper";
  } else {
    throw ConfigError("config: unknown scale preset '" + scale + "'");
  }
  return cfg;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  if (scale != "desk" && scale != "paper") fail("scale must be desk or paper");
  if (seeds.empty()) fail("at least one seed required");
  if (n_users <= 0 || n_items <= 0) fail("n_users and n_items must be positive");
  if (n_targets <= 0 || n_targets > n_items)
    fail("n_targets must lie in [1, n_items]");
  if (collection_rounds <= 0 || guidance_rounds <= 0)
    fail("round counts must be positive");
  if (!(oracle_fraction >= 0.0 && oracle_fraction <= 1.0))
    fail("oracle_fraction must lie in [0,1]");
  if (gamma_sweep.empty()) fail("gamma_sweep must not be empty");
  for (double g : gamma_sweep)
    if (!(g > 0.0 && g < 1.0)) fail("gamma_sweep values must lie in (0,1)");
  if (policies.empty()) fail("policies must not be empty");
  for (size_t i = 0; i < policies.size(); ++i) {
    if (policies[i] == "oracle") fail("the oracle policy is collection-only");
    parse_policy(policies[i], alpha);  // throws on unknown names
    for (size_t j = 0; j < i; ++j)
      if (policies[i] == policies[j]) fail("duplicate policy '" + policies[i] + "'");
  }
  if (report_ks.empty()) fail("report_ks must not be empty");
  for (size_t i = 0; i < report_ks.size(); ++i) {
    if (report_ks[i] < 1 || report_ks[i] > guidance_rounds)
      fail("report_ks values must lie in [1, guidance_rounds]");
    if (i > 0 && report_ks[i] <= report_ks[i - 1])
      fail("report_ks must be strictly ascending");
  }
  if (threads < 0) fail("threads must be >= 0");
  if (holdout_rounds < 1 || holdout_rounds >= collection_rounds)
    fail("holdout_rounds must lie in [1, collection_rounds)");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail("alpha must be finite and >= 0");
  sim.validate();
  train.validate();
}

namespace {

using Setter = std::function<void(ExperimentConfig&, const std::string& key,
                                  const std::string& value)>;

const std::map<std::string, Setter>& schema() {
  static const std::map<std::string, Setter> s = [] {
    std::map<std::string, Setter> m;
    auto d = [](double ExperimentConfig::* f) {
      return [f](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.*f = parse_double(k, v);
      };
    };
    auto i = [](int ExperimentConfig::* f) {
      return [f](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.*f = static_cast<int>(parse_int(k, v));
      };
    };
    m["experiment.seed"] = [](ExperimentConfig& c, const std::string& k,
                              const std::string& v) {
      c.seeds = {static_cast<uint64_t>(parse_int(k, v))};
    };
    m["experiment.seeds"] = [](ExperimentConfig& c, const std::string& k,
                               const std::string& v) {
      c.seeds.clear();
      for (const std::string& tok : split_list(v))
        c.seeds.push_back(static_cast<uint64_t>(parse_int(k, tok)));
    };
    m["experiment.scale"] = [](ExperimentConfig&, const std::string&,
                               const std::string&) { /* applied in a pre-pass */ };
    m["experiment.out_dir"] = [](ExperimentConfig& c, const std::string&,
                                 const std::string& v) { c.out_dir = v; };
    m["experiment.n_users"] = i(&ExperimentConfig::n_users);
    m["experiment.n_items"] = i(&ExperimentConfig::n_items);
    m["experiment.n_targets"] = i(&ExperimentConfig::n_targets);
    m["experiment.collection_rounds"] = i(&ExperimentConfig::collection_rounds);
    m["experiment.guidance_rounds"] = i(&ExperimentConfig::guidance_rounds);
    m["experiment.oracle_fraction"] = d(&ExperimentConfig::oracle_fraction);
    m["experiment.gamma_sweep"] = [](ExperimentConfig& c, const std::string& k,
                                     const std::string& v) {
      c.gamma_sweep.clear();
      for (const std::string& tok : split_list(v))
        c.gamma_sweep.push_back(parse_double(k, tok));
    };
    m["experiment.policies"] = [](ExperimentConfig& c, const std::string&,
                                  const std::string& v) {
      c.policies = split_list(v);
    };
    m["experiment.report_ks"] = [](ExperimentConfig& c, const std::string& k,
                                   const std::string& v) {
      c.report_ks.clear();
      for (const std::string& tok : split_list(v))
        c.report_ks.push_back(static_cast<int>(parse_int(k, tok)));
    };
    m["experiment.threads"] = i(&ExperimentConfig::threads);
    m["experiment.holdout_rounds"] = i(&ExperimentConfig::holdout_rounds);

    auto sd = [](double SimConfig::* f) {
      return [f](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.sim.*f = parse_double(k, v);
      };
    };
    auto si = [](int SimConfig::* f) {
      return [f](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.sim.*f = static_cast<int>(parse_int(k, v));
      };
    };
    m["sim.click_w"] = sd(&SimConfig::click_w);
    m["sim.click_b"] = sd(&SimConfig::click_b);
    m["sim.gamma"] = sd(&SimConfig::gamma);
    m["sim.boredom_window"] = si(&SimConfig::boredom_window);
    m["sim.boredom_trigger"] = si(&SimConfig::boredom_trigger);
    m["sim.boredom_decay"] = sd(&SimConfig::boredom_decay);
    m["sim.item_boredom_coeff"] = sd(&SimConfig::item_boredom_coeff);
    m["sim.embed_noise_std"] = sd(&SimConfig::embed_noise_std);

    auto td = [](double TrainConfig::* f) {
      return [f](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.train.*f = parse_double(k, v);
      };
    };
    auto ti = [](int TrainConfig::* f) {
      return [f](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.train.*f = static_cast<int>(parse_int(k, v));
      };
    };
    m["train.learning_rate"] = td(&TrainConfig::learning_rate);
    m["train.epochs"] = ti(&TrainConfig::epochs);
    m["train.l2_reg"] = td(&TrainConfig::l2_reg);
    m["train.batch_size"] = ti(&TrainConfig::batch_size);
    m["train.embed_dim"] = ti(&TrainConfig::embed_dim);
    m["train.init_noise"] = td(&TrainConfig::init_noise);
    m["train.gamma_hat"] = td(&TrainConfig::encoder_decay);

    m["guidance.alpha"] = d(&ExperimentConfig::alpha);
    return m;
  }();
  return s;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  // Pre-pass: the scale preset seeds the defaults, explicit keys override.
  std::string scale = "desk";
  {
    std::istringstream in(text);
    std::string line, section;
    while (std::getline(in, line)) {
      line = trim(line.substr(0, line.find('#')));
      if (line.empty()) continue;
      if (line.front() == '[') continue;
      size_t eq = line.find('=');
      if (eq == std::string::npos) continue;
      if (trim(line.substr(0, eq)) == "scale") scale = trim(line.substr(eq + 1));
    }
  }
  ExperimentConfig cfg = default_config(scale);

  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": key '" +
                        key + "' outside any section");
    const std::string full = section + "." + key;
    auto it = schema().find(full);
    if (it == schema().end())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": unknown key '" + full + "'");
    it->second(cfg, full, value);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string canonical_config_text(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> kv;
  auto add = [&](const std::string& k, const std::string& v) {
    kv.emplace_back(k, v);
  };
  add("experiment.n_users", std::to_string(cfg.n_users));
  add("experiment.n_items", std::to_string(cfg.n_items));
  add("experiment.n_targets", std::to_string(cfg.n_targets));
  add("experiment.collection_rounds", std::to_string(cfg.collection_rounds));
  add("experiment.guidance_rounds", std::to_string(cfg.guidance_rounds));
  add("experiment.oracle_fraction", fmt_double(cfg.oracle_fraction));
  {
    std::string gs;
    for (double g : cfg.gamma_sweep) gs += (gs.empty() ? "" : ",") + fmt_double(g);
    add("experiment.gamma_sweep", gs);
  }
  {
    std::string ps;
    for (const std::string& p : cfg.policies) ps += (ps.empty() ? "" : ",") + p;
    add("experiment.policies", ps);
  }
  {
    std::string ks;
    for (int k : cfg.report_ks) ks += (ks.empty() ? "" : ",") + std::to_string(k);
    add("experiment.report_ks", ks);
  }
  add("experiment.holdout_rounds", std::to_string(cfg.holdout_rounds));
  add("sim.click_w", fmt_double(cfg.sim.click_w));
  add("sim.click_b", fmt_double(cfg.sim.click_b));
  add("sim.gamma", fmt_double(cfg.sim.gamma));
  add("sim.boredom_window", std::to_string(cfg.sim.boredom_window));
  add("sim.boredom_trigger", std::to_string(cfg.sim.boredom_trigger));
  add("sim.boredom_decay", fmt_double(cfg.sim.boredom_decay));
  add("sim.item_boredom_coeff", fmt_double(cfg.sim.item_boredom_coeff));
  add("sim.embed_noise_std", fmt_double(cfg.sim.embed_noise_std));
  add("train.learning_rate", fmt_double(cfg.train.learning_rate));
  add("train.epochs", std::to_string(cfg.train.epochs));
  add("train.l2_reg", fmt_double(cfg.train.l2_reg));
  add("train.batch_size", std::to_string(cfg.train.batch_size));
  add("train.embed_dim", std::to_string(cfg.train.embed_dim));
  add("train.init_noise", fmt_double(cfg.train.init_noise));
  add("train.gamma_hat", fmt_double(cfg.train.encoder_decay));
  add("guidance.alpha", fmt_double(cfg.alpha));
  std::sort(kv.begin(), kv.end());
  std::string out;
  for (auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_config_text(cfg))));
  return std::string(buf);
}

}  // namespace ipg
