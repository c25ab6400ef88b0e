#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "taco/data_io.hpp"
#include "taco/domain.hpp"

namespace taco {

struct TfidfResult {
  ItemFeatureMatrix features;
  std::vector<int> vocabulary;  // feature column -> original term id
};

// Drops terms present in fewer than `min_items` items or in more than
// `max_frac` of the items, then weights count * ln(m / df) and
// L2-normalizes every nonzero row. Throws DataError when no term survives.
TfidfResult build_tfidf(const TermCounts& docs, int min_items = 20,
                        double max_frac = 0.20);

struct SimilarityBuild {
  SimilarityGraph graph;
  IndexSet zero_profile_users;  // users without a usable profile (no edges)
};

// Cosine similarity between user profile rows, negatives clipped to 0,
// each user keeping its `k_neighbors` strongest neighbours (ties by lower
// index), then symmetrized by taking the max of the two directions.
SimilarityBuild build_user_similarity(const SparseRowMatrix& profiles,
                                      int k_neighbors);

// Users' +1/-1 rows as profile vectors over items.
SparseRowMatrix corating_profiles(const RatingMatrix& ratings);

struct SplitSpec {
  enum class Mode { kRatings, kItems };
  Mode mode = Mode::kRatings;
  double train = 0.6;
  double validation = 0.2;
  double test = 0.2;
  std::optional<int> folds;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SplitResult {
  RatingMatrix train;
  RatingMatrix validation;
  RatingMatrix test;
  IndexSet test_items;  // items mode only
  IndexSet validation_items;
};

// Ratings mode partitions observed cells; items mode partitions item
// columns so that every rating of a held-out item leaves training.
// Shard sizes are round(train * N) and round(validation * N), test takes
// the rest. Throws DataError when a shard with a nonzero fraction ends up
// empty.
SplitResult split(const RatingMatrix& ratings, const SplitSpec& spec);

// k disjoint test shards over cells (or items); for each fold the
// remaining units are divided between train and validation in the ratio
// train : validation.
std::vector<SplitResult> split_folds(const RatingMatrix& ratings,
                                     const SplitSpec& spec);

struct PlantedSpec {
  int n_users = 20;
  int n_items = 50;
  int dim = 10;
  int true_rank = 2;
  double obs_frac = 0.5;
  // Ratio of the +1 to the -1 observation probability; 1 is missing at
  // random. Probabilities are 2 obs_frac b/(1+b) and 2 obs_frac/(1+b),
  // capped at 1, so the overall rate stays obs_frac when uncapped.
  double bias = 1.0;
  std::uint64_t seed = 0;
};

struct PlantedData {
  RatingMatrix observed;
  RatingMatrix truth;     // every quartile label
  RatingMatrix held_out;  // truth minus observed
  ItemFeatureMatrix features;
  Matrix true_weights;  // n x d, rank true_rank
};

// W* = A B^T with Gaussian A (n x r), B (d x r); Gaussian item features,
// L2-normalized. Each user's top quartile of scores is +1 and the bottom
// quartile -1; each label is observed independently per the bias rule.
PlantedData generate_planted(const PlantedSpec& spec);

}  // namespace taco
