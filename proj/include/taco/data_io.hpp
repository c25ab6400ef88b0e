#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "taco/domain.hpp"

namespace taco {

// Maps raw rating values onto labels: +1 when raw > threshold (strict) or
// raw >= threshold (non-strict), -1 otherwise. Values outside the optional
// [min_value, max_value] range are rejected.
struct BinarizeRule {
  double positive_threshold = 0.0;
  bool strict = true;
  std::optional<double> min_value;
  std::optional<double> max_value;

  Label apply(double raw) const;

  static BinarizeRule ml_imdb() { return {5.0, true, 1.0, 10.0}; }
  static BinarizeRule amazon() { return {3.0, false, 1.0, 5.0}; }
};

// External string ids <-> dense 0-based indices, in first-seen order.
class IdMap {
 public:
  int intern(const std::string& id);
  std::optional<int> find(const std::string& id) const;
  const std::string& name(int index) const { return names_.at(index); }
  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
};

struct IngestedRatings {
  RatingMatrix ratings;
  IdMap users;
  IdMap items;
};

// Delimited text, one `user item rating` record per line. Fields are split
// on tabs, then commas, then "::", then whitespace (first one present).
// Blank lines and lines starting with '#' are skipped. Without a rule every
// rating must be +1 or -1. Errors name the offending line.
IngestedRatings parse_ratings(const std::filesystem::path& path,
                              const std::optional<BinarizeRule>& rule);

// Same parse over in-memory text; `source` only labels error messages.
IngestedRatings parse_ratings_text(const std::string& text,
                                   const std::optional<BinarizeRule>& rule,
                                   const std::string& source = "<text>");

// Per-item sparse term counts, terms interned into `terms`.
struct TermCounts {
  int n_terms = 0;
  std::vector<std::vector<std::pair<int, double>>> items;
};

// `item term count` records. Item ids are resolved (and new ones added)
// through `items`, so items without ratings still get feature rows.
TermCounts parse_term_counts(const std::filesystem::path& path, IdMap& items,
                             IdMap& terms);

// Canonical formats. Each starts with a `#format:` line naming the kind
// and version, then a shape line, then tab-separated triplets:
//
//   #format: taco-ratings 1       n_users n_items      user item +1|-1
//   #format: taco-features 1      n_items dim          item feature value
//   #format: taco-similarity 1    n_users              user user weight
//
// Similarity edges are written once with user < neighbour. Values are
// printed with round-trip precision.
void write_ratings(const std::filesystem::path& path, const RatingMatrix& r,
                   std::uint64_t config_hash = 0);
RatingMatrix read_ratings(const std::filesystem::path& path);

void write_features(const std::filesystem::path& path,
                    const ItemFeatureMatrix& f, std::uint64_t config_hash = 0);
ItemFeatureMatrix read_features(const std::filesystem::path& path);

void write_similarity(const std::filesystem::path& path,
                      const SimilarityGraph& g, std::uint64_t config_hash = 0);
SimilarityGraph read_similarity(const std::filesystem::path& path);

// One `index<TAB>external id` line per entry.
void write_id_map(const std::filesystem::path& path, const IdMap& map);
IdMap read_id_map(const std::filesystem::path& path);

// Plain list of item indices, one per line.
void write_index_list(const std::filesystem::path& path, const IndexSet& items);
IndexSet read_index_list(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace taco
