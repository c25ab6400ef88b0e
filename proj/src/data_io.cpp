#include "taco/data_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace taco {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  auto split_on = [&](std::string_view delim) {
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(delim, start);
      out.push_back(trim(std::string_view(line).substr(
          start, pos == std::string::npos ? std::string::npos : pos - start)));
      if (pos == std::string::npos) break;
      start = pos + delim.size();
    }
  };
  if (line.find('\t') != std::string::npos) {
    split_on("\t");
  } else if (line.find(',') != std::string::npos) {
    split_on(",");
  } else if (line.find("::") != std::string::npos) {
    split_on("::");
  } else {
    std::istringstream in(line);
    for (std::string f; in >> f;) out.push_back(f);
  }
  return out;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string at_line(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

// Reader for the canonical `#format:` files.
class CanonicalReader {
 public:
  CanonicalReader(const std::filesystem::path& path, const std::string& kind)
      : source_(path.string()), in_(read_file(path)) {
    std::string first;
    while (std::getline(in_, first)) {
      ++line_no_;
      if (!trim(first).empty()) break;
    }
    const std::string expected = "#format: " + kind + " 1";
    if (trim(first) != expected) {
      throw DataError(at_line(source_, line_no_) + "expected '" + expected +
                      "' header");
    }
  }

  // Next non-comment record split on whitespace; false at end of file.
  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      const std::string t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      fields.clear();
      std::istringstream ss(t);
      for (std::string f; ss >> f;) fields.push_back(f);
      return true;
    }
    return false;
  }

  template <typename T>
  T number(const std::vector<std::string>& fields, std::size_t k) {
    T v{};
    if (k >= fields.size() || !parse_number(fields[k], v)) {
      fail("malformed field " + std::to_string(k + 1));
    }
    return v;
  }

  void expect_fields(const std::vector<std::string>& fields, std::size_t k) {
    if (fields.size() != k) {
      fail("expected " + std::to_string(k) + " fields, found " +
           std::to_string(fields.size()));
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(at_line(source_, line_no_) + what);
  }

 private:
  std::string source_;
  std::istringstream in_;
  std::size_t line_no_ = 0;
};

std::string header(const std::string& kind, std::uint64_t config_hash) {
  std::string h = "#format: " + kind + " 1\n";
  if (config_hash != 0) {
    std::ostringstream ss;
    ss << "#config: " << std::hex << config_hash << "\n";
    h += ss.str();
  }
  return h;
}

}  // namespace

Label BinarizeRule::apply(double raw) const {
  if (!std::isfinite(raw) || (min_value && raw < *min_value) ||
      (max_value && raw > *max_value)) {
    throw DataError("rating " + format_double(raw) + " outside declared range");
  }
  const bool positive =
      strict ? raw > positive_threshold : raw >= positive_threshold;
  return positive ? Label::kPositive : Label::kNegative;
}

int IdMap::intern(const std::string& id) {
  auto [it, inserted] = index_.emplace(id, static_cast<int>(names_.size()));
  if (inserted) names_.push_back(id);
  return it->second;
}

std::optional<int> IdMap::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

IngestedRatings parse_ratings_text(const std::string& text,
                                   const std::optional<BinarizeRule>& rule,
                                   const std::string& source) {
  IngestedRatings out;
  std::vector<Rating> entries;
  std::unordered_set<std::uint64_t> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split_fields(t);
    if (fields.size() < 3 || fields[0].empty() || fields[1].empty()) {
      throw DataError(at_line(source, line_no) +
                      "malformed record, expected user, item, rating");
    }
    double raw = 0.0;
    if (!parse_number(fields[2], raw)) {
      throw DataError(at_line(source, line_no) + "rating '" + fields[2] +
                      "' is not a number");
    }
    Label label;
    try {
      if (rule) {
        label = rule->apply(raw);
      } else if (raw == 1.0) {
        label = Label::kPositive;
      } else if (raw == -1.0) {
        label = Label::kNegative;
      } else {
        throw DataError("rating " + fields[2] +
                        " is not +1/-1 and no binarization rule is set");
      }
    } catch (const DataError& e) {
      throw DataError(at_line(source, line_no) + e.what());
    }
    const int u = out.users.intern(fields[0]);
    const int i = out.items.intern(fields[1]);
    const std::uint64_t key =
        (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(i);
    if (!seen.insert(key).second) {
      throw DataError(at_line(source, line_no) + "duplicate rating for user '" +
                      fields[0] + "', item '" + fields[1] + "'");
    }
    entries.push_back({u, i, label});
  }
  out.ratings =
      RatingMatrix(out.users.size(), out.items.size(), std::move(entries));
  return out;
}

IngestedRatings parse_ratings(const std::filesystem::path& path,
                              const std::optional<BinarizeRule>& rule) {
  return parse_ratings_text(read_file(path), rule, path.string());
}

TermCounts parse_term_counts(const std::filesystem::path& path, IdMap& items,
                             IdMap& terms) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::vector<std::vector<std::pair<int, double>>> rows(items.size());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split_fields(t);
    double count = 0.0;
    if (fields.size() != 3 || !parse_number(fields[2], count) ||
        !std::isfinite(count) || count < 0.0) {
      throw DataError(at_line(path.string(), line_no) +
                      "expected item, term, nonnegative count");
    }
    const int item = items.intern(fields[0]);
    const int term = terms.intern(fields[1]);
    if (static_cast<int>(rows.size()) <= item) rows.resize(item + 1);
    if (count > 0.0) rows[item].emplace_back(term, count);
  }
  rows.resize(items.size());
  return TermCounts{terms.size(), std::move(rows)};
}

void write_ratings(const std::filesystem::path& path, const RatingMatrix& r,
                   std::uint64_t config_hash) {
  std::string out = header("taco-ratings", config_hash);
  out += std::to_string(r.n_users()) + "\t" + std::to_string(r.n_items()) +
         "\n";
  for (const Rating& e : r.entries()) {
    out += std::to_string(e.user) + "\t" + std::to_string(e.item) + "\t" +
           (e.label == Label::kPositive ? "1" : "-1") + "\n";
  }
  write_file(path, out);
}

RatingMatrix read_ratings(const std::filesystem::path& path) {
  CanonicalReader in(path, "taco-ratings");
  std::vector<std::string> f;
  if (!in.next(f)) in.fail("missing shape line");
  in.expect_fields(f, 2);
  const int n = in.number<int>(f, 0);
  const int m = in.number<int>(f, 1);
  std::vector<Rating> entries;
  while (in.next(f)) {
    in.expect_fields(f, 3);
    const int label = in.number<int>(f, 2);
    if (label != 1 && label != -1) in.fail("label must be 1 or -1");
    entries.push_back({in.number<int>(f, 0), in.number<int>(f, 1),
                       label == 1 ? Label::kPositive : Label::kNegative});
  }
  return RatingMatrix(n, m, std::move(entries));
}

void write_features(const std::filesystem::path& path,
                    const ItemFeatureMatrix& f, std::uint64_t config_hash) {
  std::string out = header("taco-features", config_hash);
  out += std::to_string(f.n_items()) + "\t" + std::to_string(f.dim()) + "\n";
  for (int j = 0; j < f.n_items(); ++j) {
    for (SparseRowMatrix::InnerIterator it(f.rows(), j); it; ++it) {
      out += std::to_string(j) + "\t" + std::to_string(it.index()) + "\t" +
             format_double(it.value()) + "\n";
    }
  }
  write_file(path, out);
}

ItemFeatureMatrix read_features(const std::filesystem::path& path) {
  CanonicalReader in(path, "taco-features");
  std::vector<std::string> f;
  if (!in.next(f)) in.fail("missing shape line");
  in.expect_fields(f, 2);
  const int m = in.number<int>(f, 0);
  const int d = in.number<int>(f, 1);
  std::vector<Triplet> triplets;
  while (in.next(f)) {
    in.expect_fields(f, 3);
    triplets.emplace_back(in.number<int>(f, 0), in.number<int>(f, 1),
                          in.number<double>(f, 2));
  }
  return ItemFeatureMatrix::from_triplets(m, d, triplets);
}

void write_similarity(const std::filesystem::path& path,
                      const SimilarityGraph& g, std::uint64_t config_hash) {
  std::string out = header("taco-similarity", config_hash);
  out += std::to_string(g.n_users()) + "\n";
  const SparseMatrix& s = g.similarity();
  // Column-major storage: column c holds neighbours of c; emit row < c.
  std::vector<std::tuple<int, int, double>> edges;
  for (int c = 0; c < s.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(s, c); it; ++it) {
      if (it.row() < c) edges.emplace_back(it.row(), c, it.value());
    }
  }
  std::sort(edges.begin(), edges.end());
  for (const auto& [a, b, v] : edges) {
    out += std::to_string(a) + "\t" + std::to_string(b) + "\t" +
           format_double(v) + "\n";
  }
  write_file(path, out);
}

SimilarityGraph read_similarity(const std::filesystem::path& path) {
  CanonicalReader in(path, "taco-similarity");
  std::vector<std::string> f;
  if (!in.next(f)) in.fail("missing shape line");
  in.expect_fields(f, 1);
  const int n = in.number<int>(f, 0);
  std::vector<Triplet> triplets;
  while (in.next(f)) {
    in.expect_fields(f, 3);
    triplets.emplace_back(in.number<int>(f, 0), in.number<int>(f, 1),
                          in.number<double>(f, 2));
  }
  return SimilarityGraph::from_triplets(n, triplets);
}

void write_id_map(const std::filesystem::path& path, const IdMap& map) {
  std::string out;
  for (int i = 0; i < map.size(); ++i) {
    out += std::to_string(i) + "\t" + map.name(i) + "\n";
  }
  write_file(path, out);
}

IdMap read_id_map(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  IdMap map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    int index = -1;
    if (tab == std::string::npos ||
        !parse_number(line.substr(0, tab), index) || index != map.size()) {
      throw DataError(at_line(path.string(), line_no) +
                      "expected consecutive index<TAB>id");
    }
    map.intern(trim(line.substr(tab + 1)));
  }
  return map;
}

void write_index_list(const std::filesystem::path& path,
                      const IndexSet& items) {
  std::string out;
  for (int j : items) out += std::to_string(j) + "\n";
  write_file(path, out);
}

IndexSet read_index_list(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  IndexSet out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    int j = 0;
    if (!parse_number(t, j)) {
      throw DataError(at_line(path.string(), line_no) + "expected an index");
    }
    out.push_back(j);
  }
  return out;
}

}  // namespace taco
