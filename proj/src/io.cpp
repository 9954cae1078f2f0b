#include "ipg/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ipg {

namespace {

constexpr const char* kMagic = "# ipglab";

std::string header(const FileMeta& m) {
  std::string out = std::string(kMagic) + " " + m.kind + " v1\n";
  out += "# seed=" + std::to_string(m.seed) + " config=" + m.config_hash + "\n";
  return out;
}

struct LineReader {
  std::istringstream in;
  int lineno = 0;
  explicit LineReader(const std::string& text) : in(text) {}
  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw IoError("parse error at line " + std::to_string(lineno) + ": " + msg);
  }
};

FileMeta read_header(LineReader& r, const std::string& expect_kind) {
  std::string line;
  if (!r.next(line)) r.fail("empty file");
  std::istringstream h(line);
  std::string magic1, magic2, kind, version;
  h >> magic1 >> magic2 >> kind >> version;
  if (magic1 != "#" || magic2 != "ipglab") r.fail("not an ipglab file");
  if (!expect_kind.empty() && kind != expect_kind)
    r.fail("expected kind '" + expect_kind + "', found '" + kind + "'");
  if (version != "v1") r.fail("unsupported version '" + version + "'");
  FileMeta m;
  m.kind = kind;
  if (!r.next(line)) r.fail("missing provenance line");
  size_t sp = line.find("seed=");
  size_t cp = line.find("config=");
  if (sp == std::string::npos || cp == std::string::npos)
    r.fail("missing seed/config header");
  m.seed = std::strtoull(line.c_str() + sp + 5, nullptr, 10);
  m.config_hash = line.substr(cp + 7);
  while (!m.config_hash.empty() &&
         (m.config_hash.back() == ' ' || m.config_hash.back() == '\r'))
    m.config_hash.pop_back();
  return m;
}

std::vector<std::string> tokens(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

}  // namespace

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double_exact(const std::string& tok) {
  double out;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    throw IoError("bad number: '" + tok + "'");
  return out;
}

std::string serialize_matrix(const std::vector<Embedding>& rows, const FileMeta& m) {
  std::string out = header(m);
  out += "# columns: id e0..e19\n";
  out += "n " + std::to_string(rows.size()) + "\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    out += std::to_string(i);
    for (double v : rows[i]) out += "\t" + fmt_double(v);
    out += "\n";
  }
  return out;
}

std::vector<Embedding> parse_matrix(const std::string& text, FileMeta* meta) {
  LineReader r(text);
  FileMeta m = read_header(r, "");
  if (meta) *meta = m;
  std::string line;
  size_t n = 0;
  while (r.next(line)) {
    if (line.empty() || line[0] == '#') continue;
    auto tk = tokens(line);
    if (tk.size() == 2 && tk[0] == "n") {
      n = std::stoull(tk[1]);
      break;
    }
    r.fail("expected row count");
  }
  std::vector<Embedding> rows(n);
  for (size_t i = 0; i < n; ++i) {
    if (!r.next(line)) r.fail("truncated matrix");
    auto tk = tokens(line);
    if (tk.size() != 1 + kEmbedDim) r.fail("expected id + 20 components");
    if (std::stoull(tk[0]) != i) r.fail("rows must be ordered by id");
    for (int k = 0; k < kEmbedDim; ++k)
      rows[i][k] = parse_double_exact(tk[1 + k]);
  }
  return rows;
}

std::string serialize_log(const InteractionLog& log, const FileMeta& m) {
  std::string out = header(m);
  out += "# columns: user phase round item clicked\n";
  out += "n_users " + std::to_string(log.n_users) + "\n";
  out += "n_items " + std::to_string(log.n_items) + "\n";
  out += "n_records " + std::to_string(log.records.size()) + "\n";
  for (const LogRecord& rec : log.records) {
    out += std::to_string(rec.user);
    out += rec.phase == Phase::Collection ? "\tcollection\t" : "\tguidance\t";
    out += std::to_string(rec.round) + "\t" + std::to_string(rec.item) + "\t" +
           (rec.clicked ? "1" : "0") + "\n";
  }
  return out;
}

InteractionLog parse_log(const std::string& text, FileMeta* meta) {
  LineReader r(text);
  FileMeta m = read_header(r, "log");
  if (meta) *meta = m;
  InteractionLog log;
  std::string line;
  size_t n_records = 0;
  int scalars = 0;
  while (scalars < 3 && r.next(line)) {
    if (line.empty() || line[0] == '#') continue;
    auto tk = tokens(line);
    if (tk.size() != 2) r.fail("expected scalar header");
    if (tk[0] == "n_users") log.n_users = std::stoi(tk[1]);
    else if (tk[0] == "n_items") log.n_items = std::stoi(tk[1]);
    else if (tk[0] == "n_records") n_records = std::stoull(tk[1]);
    else r.fail("unknown scalar '" + tk[0] + "'");
    ++scalars;
  }
  log.records.reserve(n_records);
  for (size_t i = 0; i < n_records; ++i) {
    if (!r.next(line)) r.fail("truncated log");
    auto tk = tokens(line);
    if (tk.size() != 5) r.fail("expected 5 columns");
    LogRecord rec;
    rec.user = std::stoi(tk[0]);
    if (tk[1] == "collection") rec.phase = Phase::Collection;
    else if (tk[1] == "guidance") rec.phase = Phase::Guidance;
    else r.fail("unknown phase '" + tk[1] + "'");
    rec.round = std::stoi(tk[2]);
    rec.item = std::stoi(tk[3]);
    rec.clicked = tk[4] == "1";
    log.records.push_back(rec);
  }
  return log;
}

std::string serialize_model(const RecommenderModel& model, const FileMeta& m) {
  std::string out = header(m);
  out += "gamma_hat " + fmt_double(model.encoder_decay) + "\n";
  out += "head_scale " + fmt_double(model.head_scale) + "\n";
  out += "head_bias " + fmt_double(model.head_bias) + "\n";
  out += "train_seed " + std::to_string(model.train_seed) + "\n";
  out += "n_items " + std::to_string(model.n_items()) + "\n";
  for (int i = 0; i < model.n_items(); ++i) {
    out += std::to_string(i);
    for (double v : model.item_table[i]) out += "\t" + fmt_double(v);
    out += "\n";
  }
  return out;
}

RecommenderModel parse_model(const std::string& text, FileMeta* meta) {
  LineReader r(text);
  FileMeta m = read_header(r, "model");
  if (meta) *meta = m;
  RecommenderModel model;
  std::string line;
  int n_items = -1;
  while (n_items < 0 && r.next(line)) {
    if (line.empty() || line[0] == '#') continue;
    auto tk = tokens(line);
    if (tk.size() != 2) r.fail("expected scalar header");
    if (tk[0] == "gamma_hat") model.encoder_decay = parse_double_exact(tk[1]);
    else if (tk[0] == "head_scale") model.head_scale = parse_double_exact(tk[1]);
    else if (tk[0] == "head_bias") model.head_bias = parse_double_exact(tk[1]);
    else if (tk[0] == "train_seed") model.train_seed = std::stoull(tk[1]);
    else if (tk[0] == "n_items") n_items = std::stoi(tk[1]);
    else r.fail("unknown scalar '" + tk[0] + "'");
  }
  if (n_items < 0) r.fail("missing n_items");
  model.item_table.resize(n_items);
  for (int i = 0; i < n_items; ++i) {
    if (!r.next(line)) r.fail("truncated model");
    auto tk = tokens(line);
    if (tk.size() != 1 + kEmbedDim) r.fail("expected id + 20 components");
    for (int k = 0; k < kEmbedDim; ++k)
      model.item_table[i][k] = parse_double_exact(tk[1 + k]);
  }
  return model;
}

std::string serialize_snapshot(const SimSnapshot& snap, const FileMeta& m) {
  std::string out = header(m);
  out += "# columns: user e0..e19 window(item:cat,...) counts(item:n,...)\n";
  out += "n " + std::to_string(snap.size()) + "\n";
  for (size_t u = 0; u < snap.size(); ++u) {
    out += std::to_string(u);
    for (double v : snap[u].embedding) out += "\t" + fmt_double(v);
    std::string window;
    for (const ClickedItem& c : snap[u].recent_clicks) {
      if (!window.empty()) window += ",";
      window += std::to_string(c.item) + ":" + std::to_string(c.category);
    }
    std::string counts;
    for (const auto& [id, n] : snap[u].click_counts) {
      if (!counts.empty()) counts += ",";
      counts += std::to_string(id) + ":" + std::to_string(n);
    }
    out += "\t" + (window.empty() ? std::string("-") : window);
    out += "\t" + (counts.empty() ? std::string("-") : counts);
    out += "\n";
  }
  return out;
}

namespace {

std::vector<std::pair<int, int>> parse_pairs(const std::string& field,
                                             LineReader& r) {
  std::vector<std::pair<int, int>> out;
  if (field == "-") return out;
  std::stringstream ss(field);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    size_t colon = tok.find(':');
    if (colon == std::string::npos) r.fail("expected id:value pair");
    out.emplace_back(std::stoi(tok.substr(0, colon)),
                     std::stoi(tok.substr(colon + 1)));
  }
  return out;
}

}  // namespace

SimSnapshot parse_snapshot(const std::string& text, FileMeta* meta) {
  LineReader r(text);
  FileMeta m = read_header(r, "snapshot");
  if (meta) *meta = m;
  std::string line;
  size_t n = 0;
  while (r.next(line)) {
    if (line.empty() || line[0] == '#') continue;
    auto tk = tokens(line);
    if (tk.size() == 2 && tk[0] == "n") {
      n = std::stoull(tk[1]);
      break;
    }
    r.fail("expected population size");
  }
  SimSnapshot snap(n);
  for (size_t u = 0; u < n; ++u) {
    if (!r.next(line)) r.fail("truncated snapshot");
    auto tk = tokens(line);
    if (tk.size() != 1 + kEmbedDim + 2) r.fail("expected id + 20 + window + counts");
    for (int k = 0; k < kEmbedDim; ++k)
      snap[u].embedding[k] = parse_double_exact(tk[1 + k]);
    for (auto [item, cat] : parse_pairs(tk[1 + kEmbedDim], r))
      snap[u].recent_clicks.push_back({item, cat});
    for (auto [item, cnt] : parse_pairs(tk[2 + kEmbedDim], r))
      snap[u].click_counts[item] = cnt;
  }
  return snap;
}

std::string serialize_episodes(const std::vector<EpisodeTable>& tables,
                               const std::vector<int>& report_ks, int rounds,
                               const FileMeta& m) {
  std::string out = header(m);
  out += "# columns: gamma policy target user dot_start dot_at_k[...] clicks01\n";
  std::string ks;
  for (int k : report_ks) ks += (ks.empty() ? "" : ",") + std::to_string(k);
  out += "ks " + ks + "\n";
  out += "rounds " + std::to_string(rounds) + "\n";
  out += "n_tables " + std::to_string(tables.size()) + "\n";
  for (const EpisodeTable& t : tables) {
    out += "table " + fmt_double(t.gamma) + " " + t.policy + " " +
           std::to_string(t.target) + " " + std::to_string(t.users.size()) + "\n";
    for (size_t u = 0; u < t.users.size(); ++u) {
      const EpisodeUserStats& s = t.users[u];
      out += std::to_string(u) + "\t" + fmt_double(s.dot_start);
      for (double d : s.dot_at_k) out += "\t" + fmt_double(d);
      std::string clicks(s.clicks.size(), '0');
      for (size_t k = 0; k < s.clicks.size(); ++k)
        if (s.clicks[k]) clicks[k] = '1';
      out += "\t" + clicks + "\n";
    }
  }
  return out;
}

std::vector<EpisodeTable> parse_episodes(const std::string& text,
                                         std::vector<int>* report_ks,
                                         int* rounds, FileMeta* meta) {
  LineReader r(text);
  FileMeta m = read_header(r, "episodes");
  if (meta) *meta = m;
  std::string line;
  std::vector<int> ks;
  int n_rounds = 0;
  size_t n_tables = 0;
  int scalars = 0;
  while (scalars < 3 && r.next(line)) {
    if (line.empty() || line[0] == '#') continue;
    auto tk = tokens(line);
    if (tk.size() != 2) r.fail("expected scalar header");
    if (tk[0] == "ks") {
      std::stringstream ss(tk[1]);
      std::string tok;
      while (std::getline(ss, tok, ',')) ks.push_back(std::stoi(tok));
    } else if (tk[0] == "rounds") {
      n_rounds = std::stoi(tk[1]);
    } else if (tk[0] == "n_tables") {
      n_tables = std::stoull(tk[1]);
    } else {
      r.fail("unknown scalar '" + tk[0] + "'");
    }
    ++scalars;
  }
  if (report_ks) *report_ks = ks;
  if (rounds) *rounds = n_rounds;
  std::vector<EpisodeTable> tables;
  tables.reserve(n_tables);
  for (size_t t = 0; t < n_tables; ++t) {
    if (!r.next(line)) r.fail("truncated episodes");
    auto tk = tokens(line);
    if (tk.size() != 5 || tk[0] != "table") r.fail("expected table header");
    EpisodeTable table;
    table.gamma = parse_double_exact(tk[1]);
    table.policy = tk[2];
    table.target = std::stoi(tk[3]);
    const size_t n_users = std::stoull(tk[4]);
    table.users.resize(n_users);
    for (size_t u = 0; u < n_users; ++u) {
      if (!r.next(line)) r.fail("truncated episode table");
      auto utk = tokens(line);
      if (utk.size() != 3 + ks.size()) r.fail("bad episode row width");
      EpisodeUserStats& s = table.users[u];
      s.dot_start = parse_double_exact(utk[1]);
      for (size_t ki = 0; ki < ks.size(); ++ki)
        s.dot_at_k.push_back(parse_double_exact(utk[2 + ki]));
      const std::string& clicks = utk.back();
      if (static_cast<int>(clicks.size()) != n_rounds) r.fail("bad clicks width");
      for (char c : clicks) s.clicks.push_back(c == '1' ? 1 : 0);
    }
    tables.push_back(std::move(table));
  }
  return tables;
}

std::string serialize_report(const GuidanceReport& report, const FileMeta& m) {
  std::string out = header(m);
  out += "# columns: gamma policy target K hr ioi\n";
  for (const ReportRow& row : report.per_target)
    out += fmt_double(row.gamma) + "\t" + row.policy + "\t" +
           std::to_string(row.target) + "\t" + std::to_string(row.K) + "\t" +
           fmt_double(row.hr) + "\t" + fmt_double(row.ioi) + "\n";
  return out;
}

std::string serialize_report_aggregate(const GuidanceReport& report,
                                       const FileMeta& m) {
  std::string out = header(m);
  out += "# columns: gamma policy K hr ioi (mean over targets)\n";
  for (const AggregateRow& row : report.aggregate)
    out += fmt_double(row.gamma) + "\t" + row.policy + "\t" +
           std::to_string(row.K) + "\t" + fmt_double(row.hr) + "\t" +
           fmt_double(row.ioi) + "\n";
  return out;
}

GuidanceReport parse_report(const std::string& text, FileMeta* meta) {
  LineReader r(text);
  FileMeta m = read_header(r, "report");
  if (meta) *meta = m;
  GuidanceReport report;
  report.seed = m.seed;
  std::string line;
  while (r.next(line)) {
    if (line.empty() || line[0] == '#') continue;
    auto tk = tokens(line);
    if (tk.size() != 6) r.fail("expected 6 columns");
    ReportRow row;
    row.gamma = parse_double_exact(tk[0]);
    row.policy = tk[1];
    row.target = std::stoi(tk[2]);
    row.K = std::stoi(tk[3]);
    row.hr = parse_double_exact(tk[4]);
    row.ioi = parse_double_exact(tk[5]);
    report.per_target.push_back(row);
  }
  return report;
}

std::string serialize_trajectory(const EpisodeSet& episodes, int user,
                                 const Catalog& catalog, const FileMeta& m) {
  if (user < 0 || user >= static_cast<int>(episodes.users.size()))
    throw IoError("trajectory: unknown user");
  const UserEpisode& ue = episodes.users[user];
  const Embedding& ej = catalog.items[episodes.target];
  std::string out = header(m);
  out += "# user=" + std::to_string(user) + " target=" +
         std::to_string(episodes.target) + " policy=" + episodes.policy +
         " gamma=" + fmt_double(episodes.gamma) + "\n";
  out += "# row 0: start user embedding + target embedding; rows 1..R: round"
         " item clicked user_embedding[20] item_embedding[20]\n";
  out += "0\t" + std::to_string(episodes.target) + "\t-";
  for (double v : ue.start_embedding) out += "\t" + fmt_double(v);
  for (double v : ej) out += "\t" + fmt_double(v);
  out += "\n";
  for (size_t k = 0; k < ue.rounds.size(); ++k) {
    const RoundRecord& rec = ue.rounds[k];
    out += std::to_string(k + 1) + "\t" + std::to_string(rec.item) + "\t" +
           (rec.clicked ? "1" : "0");
    for (double v : rec.true_embedding) out += "\t" + fmt_double(v);
    for (double v : catalog.items[rec.item]) out += "\t" + fmt_double(v);
    out += "\n";
  }
  return out;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool file_exists(const std::string& path) {
  return std::filesystem::exists(path);
}

bool file_up_to_date(const std::string& path, const FileMeta& expect) {
  if (!file_exists(path)) return false;
  std::ifstream in(path, std::ios::binary);
  std::string l1, l2;
  if (!std::getline(in, l1) || !std::getline(in, l2)) return false;
  const std::string want1 = std::string(kMagic) + " " + expect.kind + " v1";
  const std::string want2 =
      "# seed=" + std::to_string(expect.seed) + " config=" + expect.config_hash;
  if (!l1.empty() && l1.back() == '\r') l1.pop_back();
  if (!l2.empty() && l2.back() == '\r') l2.pop_back();
  return l1 == want1 && l2 == want2;
}

}  // namespace ipg
