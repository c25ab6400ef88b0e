#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "taco/domain.hpp"

namespace taco {

// Candidates sorted by descending <w, x_j>, ties by ascending item index.
IndexSet rank_items(const Vector& w, const ItemFeatureMatrix& features,
                    std::span<const int> candidates);

// DCG@n = s_1 + sum_{k=2..n} s_k / log2(k), over a 0/1 relevance list in
// ranked order. Positions past the end of the list count as irrelevant.
double dcg_at_n(std::span<const int> relevance, int n);

// DCG@n divided by the DCG of min(total_relevant, n) leading ones.
// nullopt when total_relevant == 0 (the user is skipped, not scored 0).
std::optional<double> ndcg_at_n(std::span<const int> relevance, int n,
                                int total_relevant);

enum class RecallMode {
  kListSize,  // |relevant & top-n| / |top-n|
  kRelevant,  // |relevant & top-n| / |relevant|
};

// `relevant` must be sorted. Throws DataError on an empty top-n list.
double recall_at_n(std::span<const int> top_n, std::span<const int> relevant,
                   RecallMode mode = RecallMode::kListSize);

enum class Protocol { kWarm, kCold };

struct EvalOptions {
  Protocol protocol = Protocol::kWarm;
  std::vector<int> cutoffs = {5, 10, 15, 20};
  RecallMode recall = RecallMode::kListSize;
  // Cold protocol candidate items. Empty means every item that carries a
  // test label and no training label.
  IndexSet cold_items;
};

struct MetricTable {
  std::vector<int> cutoffs;
  std::vector<double> dcg;
  std::vector<double> ndcg;
  std::vector<double> rec;
  int n_users_evaluated = 0;
  int n_users_skipped = 0;  // no relevant test item among the candidates

  // One `metric<TAB>cutoff<TAB>value` row per metric x cutoff.
  std::string to_tsv() const;
  std::string to_json() const;
};

// Macro-averaged DCG/NDCG/REC over users that have at least one relevant
// (+1) test item among their candidates. Warm: candidates are all items
// the user has no training label for. Cold: candidates are the held-out
// items. Throws DataError when the test set is empty or overlaps training.
MetricTable evaluate(const Matrix& w, const ItemFeatureMatrix& features,
                     const RatingMatrix& train, const RatingMatrix& test,
                     const EvalOptions& options);

}  // namespace taco
