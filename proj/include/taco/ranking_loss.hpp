#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "taco/domain.hpp"

namespace taco {

// l(x) = [1 - x]_+
inline double hinge(double x) { return x < 1.0 ? 1.0 - x : 0.0; }

struct MaxScore {
  double value = 0.0;
  int item = -1;  // smallest index attaining the maximum
};

// max_{j in items} <w, x_j>. Throws DataError on an empty set.
MaxScore max_score(const Vector& w, std::span<const int> items,
                   const ItemFeatureMatrix& features);

// The three index sets one user's loss ranges over. `unrated` is either
// the full complement of pos/neg or a subsample of it.
struct UserSets {
  std::span<const int> pos;
  std::span<const int> neg;
  std::span<const int> unrated;
};

struct UserLossBreakdown {
  double pos_vs_neg = 0.0;
  double pos_vs_unrated = 0.0;
  double unrated_vs_neg = 0.0;
  double total = 0.0;
};

// Push-at-top loss of a single user:
//
//   1/|I+| sum_{j in I+} l(<w,x_j> - max_{k in I-} <w,x_k>)
// + 1/|I+| sum_{j in I+} l(<w,x_j> - max_{k in Io} <w,x_k>)
// + 1/|Io| sum_{j in Io} l(<w,x_j> - max_{k in I-} <w,x_k>)
//
// A term whose index sets include an empty one is zero.
UserLossBreakdown user_push_loss(const Vector& w, const UserSets& sets,
                                 const ItemFeatureMatrix& features);

// A subgradient of user_push_loss at w. Each active hinge (margin <= 1)
// contributes x_max - x_j scaled by the term's normalizer, where x_max is
// the smallest-index maximizer.
Vector user_subgradient(const Vector& w, const UserSets& sets,
                        const ItemFeatureMatrix& features);

// Draws the per-user unrated subsample used at a given iteration, or
// returns `unrated` unchanged when no subsample size is configured or the
// set is already small enough.
IndexSet sample_unrated(const IndexSet& unrated, const Hyperparams& hp,
                        int user, std::uint64_t iteration);

// Users included in the stochastic batch of an iteration (sorted). All
// users when hp.user_batch is unset or >= n_users.
IndexSet sample_user_batch(int n_users, const Hyperparams& hp,
                           std::uint64_t iteration);

struct LossReport {
  double data_loss = 0.0;
  double trace_penalty = 0.0;
  double graph_penalty = 0.0;
  double objective = 0.0;
};

// Sum of singular values.
double nuclear_norm(const Matrix& w);

// Full objective at W. Uses the exact unrated sets (no subsampling);
// hp.semi_supervised selects the three-term or observed-only loss.
LossReport total_loss(const Matrix& w, const UserItemPartition& partition,
                      const ItemFeatureMatrix& features, const Hyperparams& hp,
                      const SimilarityGraph* graph = nullptr);

// Data loss alone, sum over users.
double data_loss(const Matrix& w, const UserItemPartition& partition,
                 const ItemFeatureMatrix& features, bool semi_supervised);

// Stacked user subgradients (n x d). When hp.user_batch is set only the
// sampled rows are filled, scaled by n/|batch|; hp.unrated_sample replaces
// each user's unrated set with a seeded subsample. Rows are independent,
// so the result does not depend on the thread count.
Matrix total_subgradient(const Matrix& w, const UserItemPartition& partition,
                         const ItemFeatureMatrix& features,
                         const Hyperparams& hp, std::uint64_t iteration = 0);

// 1/2 sum_items sum_{j,k} S_jk (<w_j,x_i> - <w_k,x_i>)^2
//   = tr(L W X^T X W^T)
double graph_reg_value(const Matrix& w, const ItemFeatureMatrix& features,
                       const SimilarityGraph& graph);

// 2 gamma L W X^T X, the gradient of gamma * graph_reg_value.
Matrix graph_reg_gradient(const Matrix& w, const ItemFeatureMatrix& features,
                          const SimilarityGraph& graph, double gamma);

}  // namespace taco
