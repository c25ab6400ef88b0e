#include "taco/data_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

namespace taco {

namespace {

constexpr std::uint64_t kSplitStream = 11;
constexpr std::uint64_t kPlantedWeights = 21;
constexpr std::uint64_t kPlantedFeatures = 22;
constexpr std::uint64_t kPlantedMask = 23;

// Sizes of the train / validation shards out of `total` units.
std::pair<std::size_t, std::size_t> shard_sizes(std::size_t total,
                                                double train,
                                                double validation) {
  auto n_train = static_cast<std::size_t>(
      std::llround(train * static_cast<double>(total)));
  auto n_val = static_cast<std::size_t>(
      std::llround(validation * static_cast<double>(total)));
  n_train = std::min(n_train, total);
  n_val = std::min(n_val, total - n_train);
  return {n_train, n_val};
}

void require_nonempty(std::size_t size, double fraction, const char* shard) {
  if (fraction > 0.0 && size == 0) {
    throw DataError(std::string("split leaves the ") + shard +
                    " shard empty");
  }
}

RatingMatrix subset(const RatingMatrix& ratings,
                    const std::vector<Rating>& entries) {
  return RatingMatrix(ratings.n_users(), ratings.n_items(), entries);
}

// Assigns each shuffled unit (cell or item) to shard 0/1/2 =
// train/validation/test and materializes the rating matrices.
SplitResult materialize(const RatingMatrix& ratings, SplitSpec::Mode mode,
                        const std::vector<int>& order,
                        const std::vector<int>& shard_of_position) {
  SplitResult out;
  std::vector<Rating> parts[3];
  if (mode == SplitSpec::Mode::kRatings) {
    for (std::size_t p = 0; p < order.size(); ++p) {
      parts[shard_of_position[p]].push_back(ratings.entries()[order[p]]);
    }
  } else {
    std::vector<int> shard_of_item(ratings.n_items(), 0);
    for (std::size_t p = 0; p < order.size(); ++p) {
      shard_of_item[order[p]] = shard_of_position[p];
      if (shard_of_position[p] == 1) out.validation_items.push_back(order[p]);
      if (shard_of_position[p] == 2) out.test_items.push_back(order[p]);
    }
    for (const Rating& r : ratings.entries()) {
      parts[shard_of_item[r.item]].push_back(r);
    }
    std::sort(out.validation_items.begin(), out.validation_items.end());
    std::sort(out.test_items.begin(), out.test_items.end());
  }
  out.train = subset(ratings, parts[0]);
  out.validation = subset(ratings, parts[1]);
  out.test = subset(ratings, parts[2]);
  return out;
}

std::vector<int> shuffled_units(const RatingMatrix& ratings,
                                const SplitSpec& spec) {
  const std::size_t units = spec.mode == SplitSpec::Mode::kRatings
                                ? ratings.size()
                                : static_cast<std::size_t>(ratings.n_items());
  std::vector<int> order(units);
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_rng(spec.seed, kSplitStream);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

}  // namespace

TfidfResult build_tfidf(const TermCounts& docs, int min_items,
                        double max_frac) {
  const int m = static_cast<int>(docs.items.size());
  std::vector<int> df(docs.n_terms, 0);
  for (const auto& row : docs.items) {
    std::vector<int> terms;
    for (const auto& [term, count] : row) {
      if (term < 0 || term >= docs.n_terms) {
        throw DataError("term id out of range");
      }
      if (count > 0.0) terms.push_back(term);
    }
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    for (int t : terms) ++df[t];
  }

  TfidfResult out;
  std::vector<int> column(docs.n_terms, -1);
  for (int t = 0; t < docs.n_terms; ++t) {
    if (df[t] > 0 && df[t] >= min_items &&
        static_cast<double>(df[t]) <= max_frac * m) {
      column[t] = static_cast<int>(out.vocabulary.size());
      out.vocabulary.push_back(t);
    }
  }
  if (out.vocabulary.empty()) {
    throw DataError("vocabulary is empty after document-frequency filtering");
  }

  std::vector<Triplet> triplets;
  for (int j = 0; j < m; ++j) {
    std::map<int, double> row;  // merges repeated terms, sorted columns
    for (const auto& [term, count] : docs.items[j]) {
      if (column[term] >= 0 && count > 0.0) {
        row[column[term]] += count;
      }
    }
    double norm2 = 0.0;
    for (auto& [col, value] : row) {
      const int term = out.vocabulary[col];
      value *= std::log(static_cast<double>(m) / df[term]);
      norm2 += value * value;
    }
    if (norm2 == 0.0) continue;
    const double inv = 1.0 / std::sqrt(norm2);
    for (const auto& [col, value] : row) {
      triplets.emplace_back(j, col, value * inv);
    }
  }
  out.features = ItemFeatureMatrix::from_triplets(
      m, static_cast<int>(out.vocabulary.size()), triplets);
  return out;
}

SparseRowMatrix corating_profiles(const RatingMatrix& ratings) {
  std::vector<Triplet> triplets;
  triplets.reserve(ratings.size());
  for (const Rating& r : ratings.entries()) {
    triplets.emplace_back(r.user, r.item,
                          r.label == Label::kPositive ? 1.0 : -1.0);
  }
  SparseRowMatrix p(ratings.n_users(), ratings.n_items());
  p.setFromTriplets(triplets.begin(), triplets.end());
  return p;
}

SimilarityBuild build_user_similarity(const SparseRowMatrix& profiles,
                                      int k_neighbors) {
  if (k_neighbors < 1) throw ConfigError("k_neighbors must be >= 1");
  const int n = static_cast<int>(profiles.rows());
  SparseRowMatrix unit = profiles;
  SimilarityBuild out;
  std::vector<char> usable(n, 0);
  for (int i = 0; i < n; ++i) {
    const double norm = unit.row(i).norm();
    if (norm > 0.0 && std::isfinite(norm)) {
      unit.row(i) /= norm;
      usable[i] = 1;
    } else {
      out.zero_profile_users.push_back(i);
    }
  }

  std::map<std::pair<int, int>, double> edges;
  for (int i = 0; i < n; ++i) {
    if (!usable[i]) continue;
    const Vector ui = unit.row(i).transpose();
    const Vector sims = unit * ui;
    std::vector<std::pair<double, int>> cand;
    for (int j = 0; j < n; ++j) {
      if (j != i && usable[j] && sims[j] > 0.0) cand.emplace_back(sims[j], j);
    }
    const auto keep = std::min<std::size_t>(k_neighbors, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + keep, cand.end(),
                      [](const auto& a, const auto& b) {
                        return a.first != b.first ? a.first > b.first
                                                  : a.second < b.second;
                      });
    for (std::size_t c = 0; c < keep; ++c) {
      const auto key = std::minmax(i, cand[c].second);
      double& slot = edges[{key.first, key.second}];
      slot = std::max(slot, cand[c].first);
    }
  }
  std::vector<Triplet> triplets;
  for (const auto& [key, value] : edges) {
    triplets.emplace_back(key.first, key.second, value);
  }
  out.graph = SimilarityGraph::from_triplets(n, triplets);
  return out;
}

void SplitSpec::validate() const {
  for (double f : {train, validation, test}) {
    if (!std::isfinite(f) || f < 0.0) {
      throw ConfigError("split fractions must be finite and >= 0");
    }
  }
  if (train <= 0.0 || test <= 0.0) {
    throw ConfigError("train and test fractions must be positive");
  }
  if (std::abs(train + validation + test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }
  if (folds && *folds < 2) throw ConfigError("folds must be >= 2");
}

SplitResult split(const RatingMatrix& ratings, const SplitSpec& spec) {
  spec.validate();
  const std::vector<int> order = shuffled_units(ratings, spec);
  const auto [n_train, n_val] =
      shard_sizes(order.size(), spec.train, spec.validation);
  const std::size_t n_test = order.size() - n_train - n_val;
  require_nonempty(n_train, spec.train, "train");
  require_nonempty(n_val, spec.validation, "validation");
  require_nonempty(n_test, spec.test, "test");
  std::vector<int> shard(order.size(), 2);
  std::fill_n(shard.begin(), n_train, 0);
  std::fill_n(shard.begin() + n_train, n_val, 1);
  return materialize(ratings, spec.mode, order, shard);
}

std::vector<SplitResult> split_folds(const RatingMatrix& ratings,
                                     const SplitSpec& spec) {
  spec.validate();
  if (!spec.folds) throw ConfigError("split_folds requires a fold count");
  const int k = *spec.folds;
  const std::vector<int> order = shuffled_units(ratings, spec);
  const std::size_t total = order.size();
  if (total < static_cast<std::size_t>(k)) {
    throw DataError("fewer units than folds");
  }
  const double rest_train = spec.train / (spec.train + spec.validation);
  std::vector<SplitResult> out;
  for (int f = 0; f < k; ++f) {
    const std::size_t lo = total * f / k;
    const std::size_t hi = total * (f + 1) / k;
    std::vector<int> shard(total, 0);
    std::vector<std::size_t> rest;
    for (std::size_t p = 0; p < total; ++p) {
      if (p >= lo && p < hi) {
        shard[p] = 2;
      } else {
        rest.push_back(p);
      }
    }
    const auto [n_train, n_val] =
        shard_sizes(rest.size(), rest_train, 1.0 - rest_train);
    require_nonempty(n_train, spec.train, "train");
    require_nonempty(n_val, spec.validation, "validation");
    for (std::size_t r = n_train; r < rest.size(); ++r) shard[rest[r]] = 1;
    out.push_back(materialize(ratings, spec.mode, order, shard));
  }
  return out;
}

PlantedData generate_planted(const PlantedSpec& spec) {
  const int n = spec.n_users;
  const int m = spec.n_items;
  const int d = spec.dim;
  if (n < 1 || m < 1 || d < 1) throw ConfigError("planted sizes must be >= 1");
  if (spec.true_rank < 1 || spec.true_rank > std::min(n, d)) {
    throw ConfigError("true_rank must be in [1, min(n_users, dim)]");
  }
  if (!(spec.obs_frac >= 0.0 && spec.obs_frac <= 1.0)) {
    throw ConfigError("obs_frac must be in [0, 1]");
  }
  if (!(spec.bias > 0.0) || !std::isfinite(spec.bias)) {
    throw ConfigError("bias multiplier must be finite and > 0");
  }
  const int quartile = m / 4;
  if (quartile < 1) {
    throw DataError("planted data needs at least 4 items for quartile labels");
  }

  auto fill_normal = [](Matrix& mat, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
      for (Eigen::Index j = 0; j < mat.cols(); ++j) mat(i, j) = normal(rng);
    }
  };

  PlantedData out;
  auto weight_rng = make_rng(spec.seed, kPlantedWeights);
  Matrix a(n, spec.true_rank);
  Matrix b(d, spec.true_rank);
  fill_normal(a, weight_rng);
  fill_normal(b, weight_rng);
  out.true_weights = a * b.transpose();

  auto feature_rng = make_rng(spec.seed, kPlantedFeatures);
  Matrix x(m, d);
  fill_normal(x, feature_rng);
  for (int j = 0; j < m; ++j) {
    const double norm = x.row(j).norm();
    if (norm > 0.0) x.row(j) /= norm;
  }
  out.features = ItemFeatureMatrix::from_dense(x);

  const double p_pos =
      std::min(1.0, 2.0 * spec.obs_frac * spec.bias / (1.0 + spec.bias));
  const double p_neg = std::min(1.0, 2.0 * spec.obs_frac / (1.0 + spec.bias));
  auto mask_rng = make_rng(spec.seed, kPlantedMask);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  std::vector<Rating> truth, observed, held_out;
  std::vector<int> order(m);
  for (int i = 0; i < n; ++i) {
    const Vector wi = out.true_weights.row(i).transpose();
    const Vector s = out.features.scores(wi);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&s](int p, int q) {
      return s[p] != s[q] ? s[p] > s[q] : p < q;
    });
    std::vector<Rating> user_labels;
    for (int r = 0; r < quartile; ++r) {
      user_labels.push_back({i, order[r], Label::kPositive});
      user_labels.push_back({i, order[m - 1 - r], Label::kNegative});
    }
    std::sort(user_labels.begin(), user_labels.end());
    for (const Rating& r : user_labels) {
      truth.push_back(r);
      const double p = r.label == Label::kPositive ? p_pos : p_neg;
      (uniform(mask_rng) < p ? observed : held_out).push_back(r);
    }
  }
  out.truth = RatingMatrix(n, m, std::move(truth));
  out.observed = RatingMatrix(n, m, std::move(observed));
  out.held_out = RatingMatrix(n, m, std::move(held_out));
  return out;
}

}  // namespace taco
