#include "taco/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace taco {

namespace {

struct UserMetrics {
  bool evaluated = false;
  std::vector<double> dcg, ndcg, rec;
};

// Descending score, ascending index.
auto ranking_order(const std::vector<double>& score_of) {
  return [&score_of](int a, int b) {
    const double sa = score_of[a];
    const double sb = score_of[b];
    return sa != sb ? sa > sb : a < b;
  };
}

}  // namespace

IndexSet rank_items(const Vector& w, const ItemFeatureMatrix& features,
                    std::span<const int> candidates) {
  std::vector<double> score_of(features.n_items(), 0.0);
  for (int j : candidates) score_of[j] = features.dot(j, w);
  IndexSet ranked(candidates.begin(), candidates.end());
  std::sort(ranked.begin(), ranked.end(), ranking_order(score_of));
  return ranked;
}

double dcg_at_n(std::span<const int> relevance, int n) {
  if (n < 1) throw ConfigError("cutoff must be >= 1");
  const int limit = std::min<int>(n, static_cast<int>(relevance.size()));
  double dcg = 0.0;
  for (int k = 1; k <= limit; ++k) {
    const double s = relevance[k - 1] != 0 ? 1.0 : 0.0;
    dcg += k == 1 ? s : s / std::log2(static_cast<double>(k));
  }
  return dcg;
}

std::optional<double> ndcg_at_n(std::span<const int> relevance, int n,
                                int total_relevant) {
  if (total_relevant <= 0) return std::nullopt;
  const std::vector<int> ideal(std::min(total_relevant, n), 1);
  return dcg_at_n(relevance, n) / dcg_at_n(ideal, n);
}

double recall_at_n(std::span<const int> top_n, std::span<const int> relevant,
                   RecallMode mode) {
  if (top_n.empty()) throw DataError("recall of an empty top-n list");
  int hits = 0;
  for (int j : top_n) {
    if (std::binary_search(relevant.begin(), relevant.end(), j)) ++hits;
  }
  if (mode == RecallMode::kListSize) {
    return static_cast<double>(hits) / static_cast<double>(top_n.size());
  }
  return relevant.empty()
             ? 0.0
             : static_cast<double>(hits) / static_cast<double>(relevant.size());
}

MetricTable evaluate(const Matrix& w, const ItemFeatureMatrix& features,
                     const RatingMatrix& train, const RatingMatrix& test,
                     const EvalOptions& options) {
  if (test.empty()) throw DataError("evaluation needs a nonempty test set");
  if (options.cutoffs.empty()) throw ConfigError("no evaluation cutoffs");
  for (int c : options.cutoffs) {
    if (c < 1) throw ConfigError("cutoffs must be >= 1");
  }
  const int n = static_cast<int>(w.rows());
  const int m = features.n_items();
  if (w.cols() != features.dim() || train.n_users() != n ||
      test.n_users() != n || train.n_items() != m || test.n_items() != m) {
    throw DataError("model, features and rating matrices disagree on shape");
  }
  for (const Rating& r : test.entries()) {
    if (train.at(r.user, r.item)) {
      throw DataError("test label (" + std::to_string(r.user) + ", " +
                      std::to_string(r.item) + ") also appears in training");
    }
  }

  const UserItemPartition train_sets = UserItemPartition::from_ratings(train);
  std::vector<IndexSet> relevant(n);
  for (const Rating& r : test.entries()) {
    if (r.label == Label::kPositive) relevant[r.user].push_back(r.item);
  }

  IndexSet cold = options.cold_items;
  if (options.protocol == Protocol::kCold && cold.empty()) {
    std::vector<char> trained(m, 0), tested(m, 0);
    for (const Rating& r : train.entries()) trained[r.item] = 1;
    for (const Rating& r : test.entries()) tested[r.item] = 1;
    for (int j = 0; j < m; ++j) {
      if (tested[j] && !trained[j]) cold.push_back(j);
    }
  }
  std::sort(cold.begin(), cold.end());
  cold.erase(std::unique(cold.begin(), cold.end()), cold.end());

  const int max_cut =
      *std::max_element(options.cutoffs.begin(), options.cutoffs.end());
  const std::size_t n_cut = options.cutoffs.size();
  std::vector<UserMetrics> per_user(n);

#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < n; ++i) {
    const IndexSet candidates = options.protocol == Protocol::kWarm
                                    ? train_sets.unrated(i)
                                    : cold;
    if (candidates.empty()) continue;
    IndexSet rel;
    std::set_intersection(relevant[i].begin(), relevant[i].end(),
                          candidates.begin(), candidates.end(),
                          std::back_inserter(rel));
    if (rel.empty()) continue;

    const Vector wi = w.row(i).transpose();
    std::vector<double> score_of(m, 0.0);
    for (int j : candidates) score_of[j] = features.dot(j, wi);
    IndexSet ranked = candidates;
    const auto top =
        ranked.begin() + std::min<std::ptrdiff_t>(max_cut, ranked.size());
    std::partial_sort(ranked.begin(), top, ranked.end(),
                      ranking_order(score_of));
    ranked.erase(top, ranked.end());

    std::vector<int> hits(ranked.size());
    for (std::size_t k = 0; k < ranked.size(); ++k) {
      hits[k] = std::binary_search(rel.begin(), rel.end(), ranked[k]) ? 1 : 0;
    }

    UserMetrics& um = per_user[i];
    um.evaluated = true;
    for (int cut : options.cutoffs) {
      const std::size_t len = std::min<std::size_t>(cut, ranked.size());
      um.dcg.push_back(dcg_at_n(hits, cut));
      um.ndcg.push_back(*ndcg_at_n(hits, cut, static_cast<int>(rel.size())));
      um.rec.push_back(recall_at_n(std::span(ranked).first(len), rel,
                                   options.recall));
    }
  }

  MetricTable table;
  table.cutoffs = options.cutoffs;
  table.dcg.assign(n_cut, 0.0);
  table.ndcg.assign(n_cut, 0.0);
  table.rec.assign(n_cut, 0.0);
  for (const UserMetrics& um : per_user) {
    if (!um.evaluated) {
      ++table.n_users_skipped;
      continue;
    }
    ++table.n_users_evaluated;
    for (std::size_t c = 0; c < n_cut; ++c) {
      table.dcg[c] += um.dcg[c];
      table.ndcg[c] += um.ndcg[c];
      table.rec[c] += um.rec[c];
    }
  }
  if (table.n_users_evaluated > 0) {
    const double inv = 1.0 / table.n_users_evaluated;
    for (std::size_t c = 0; c < n_cut; ++c) {
      table.dcg[c] *= inv;
      table.ndcg[c] *= inv;
      table.rec[c] *= inv;
    }
  }
  return table;
}

std::string MetricTable::to_tsv() const {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "metric\tcutoff\tvalue\n";
  const std::pair<const char*, const std::vector<double>*> rows[] = {
      {"DCG", &dcg}, {"NDCG", &ndcg}, {"REC", &rec}};
  for (const auto& [name, values] : rows) {
    for (std::size_t c = 0; c < cutoffs.size(); ++c) {
      out << name << '\t' << cutoffs[c] << '\t' << (*values)[c] << '\n';
    }
  }
  return out.str();
}

std::string MetricTable::to_json() const {
  nlohmann::ordered_json j;
  j["cutoffs"] = cutoffs;
  j["DCG"] = dcg;
  j["NDCG"] = ndcg;
  j["REC"] = rec;
  j["n_users_evaluated"] = n_users_evaluated;
  j["n_users_skipped"] = n_users_skipped;
  return j.dump(2);
}

}  // namespace taco
