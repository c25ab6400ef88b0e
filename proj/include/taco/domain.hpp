#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "taco/types.hpp"

namespace taco {

enum class Label : std::int8_t { kNegative = -1, kPositive = 1 };

struct Rating {
  int user = 0;
  int item = 0;
  Label label = Label::kPositive;

  auto operator<=>(const Rating&) const = default;
};

// Sparse user x item matrix of binary labels. Unobserved cells are absent;
// there is no "zero" rating. Entries are kept sorted by (user, item).
class RatingMatrix {
 public:
  RatingMatrix() = default;
  // Throws DataError on out-of-range indices or a repeated (user, item) key.
  RatingMatrix(int n_users, int n_items, std::vector<Rating> entries);

  int n_users() const { return n_users_; }
  int n_items() const { return n_items_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::span<const Rating> entries() const { return entries_; }

  std::optional<Label> at(int user, int item) const;

  bool operator==(const RatingMatrix&) const = default;

 private:
  int n_users_ = 0;
  int n_items_ = 0;
  std::vector<Rating> entries_;
};

// m x d item side information, one sparse row per item. Items are seen by
// the model only through these rows.
class ItemFeatureMatrix {
 public:
  ItemFeatureMatrix() = default;
  // Throws DataError on non-finite values.
  explicit ItemFeatureMatrix(SparseRowMatrix rows);

  // Repeated (item, feature) keys are a DataError.
  static ItemFeatureMatrix from_triplets(int n_items, int dim,
                                         const std::vector<Triplet>& triplets);
  static ItemFeatureMatrix from_dense(const Matrix& rows);

  int n_items() const { return static_cast<int>(rows_.rows()); }
  int dim() const { return static_cast<int>(rows_.cols()); }
  const SparseRowMatrix& rows() const { return rows_; }

  // <w, x_item>, accumulated over the row's nonzeros in ascending feature
  // order. All scoring goes through this so summation order is fixed.
  double dot(int item, const Vector& w) const;

  // out += scale * x_item
  void add_row(int item, double scale, Vector& out) const;

  // <w, x_j> for every item j.
  Vector scores(const Vector& w) const;

  bool operator==(const ItemFeatureMatrix& other) const;

 private:
  SparseRowMatrix rows_;
};

struct UserItems {
  IndexSet pos;  // I+
  IndexSet neg;  // I-
};

// Per-user relevant / irrelevant index sets. The unrated set is the
// complement within [m] and is built on request.
class UserItemPartition {
 public:
  UserItemPartition() = default;
  UserItemPartition(int n_items, std::vector<UserItems> users);

  static UserItemPartition from_ratings(const RatingMatrix& ratings);

  int n_users() const { return static_cast<int>(users_.size()); }
  int n_items() const { return n_items_; }
  const UserItems& user(int i) const { return users_.at(i); }
  IndexSet unrated(int i) const;

 private:
  int n_items_ = 0;
  std::vector<UserItems> users_;
};

// Dense n x d parameter matrix, one ranking vector per user (rows).
class Model {
 public:
  Model() = default;
  explicit Model(Matrix weights);

  const Matrix& weights() const { return weights_; }
  int n_users() const { return static_cast<int>(weights_.rows()); }
  int dim() const { return static_cast<int>(weights_.cols()); }
  Vector user_vector(int i) const { return weights_.row(i).transpose(); }

 private:
  Matrix weights_;
};

// W = U * V^T with U: n x k and V: d x k.
class FactoredModel {
 public:
  FactoredModel() = default;
  FactoredModel(Matrix u, Matrix v);

  const Matrix& u() const { return u_; }
  const Matrix& v() const { return v_; }
  int rank() const { return static_cast<int>(u_.cols()); }
  Matrix reconstruct() const { return u_ * v_.transpose(); }
  Model to_model() const { return Model(reconstruct()); }

 private:
  Matrix u_;
  Matrix v_;
};

// Symmetric nonnegative user-similarity matrix S with zero diagonal,
// its degree vector and Laplacian L = D - S.
class SimilarityGraph {
 public:
  SimilarityGraph() = default;
  // Throws DataError unless s is square, symmetric, nonnegative and has a
  // zero diagonal.
  explicit SimilarityGraph(SparseMatrix s);

  // Each undirected edge may be listed once in either orientation or twice
  // with equal weights.
  static SimilarityGraph from_triplets(int n_users,
                                       const std::vector<Triplet>& triplets);

  int n_users() const { return static_cast<int>(s_.rows()); }
  const SparseMatrix& similarity() const { return s_; }
  const Vector& degree() const { return degree_; }
  const SparseMatrix& laplacian() const { return laplacian_; }

 private:
  SparseMatrix s_;
  Vector degree_;
  SparseMatrix laplacian_;
};

struct StepSchedule {
  enum class Kind { kConstant, kInvSqrt };
  Kind kind = Kind::kConstant;
  double eta0 = 0.1;
};

struct Hyperparams {
  double lambda = 0.0;  // trace-norm weight
  double gamma = 0.0;   // graph weight
  StepSchedule step;
  int max_iters = 100;
  double tol = 0.0;  // relative objective change; 0 disables early stop
  std::optional<int> rank;
  std::optional<int> unrated_sample;
  std::optional<int> user_batch;
  std::uint64_t seed = 0;
  double init_sigma = 0.01;
  // false drops the two unrated-item terms (observed pairs only).
  bool semi_supervised = true;

  // Throws ConfigError. Trainers accept max_iters == 0 (returns the
  // initial model); run configurations require at least one iteration.
  void validate(bool allow_zero_iters = false) const;
};

// Ratings, features and the derived partition, checked for consistency.
struct Dataset {
  RatingMatrix ratings;
  ItemFeatureMatrix features;
  UserItemPartition partition;

  int n_users() const { return ratings.n_users(); }
  int n_items() const { return ratings.n_items(); }
  int dim() const { return features.dim(); }
};

UserItemPartition validate_dataset(const RatingMatrix& ratings,
                                   const ItemFeatureMatrix& features);

Dataset make_dataset(RatingMatrix ratings, ItemFeatureMatrix features);

}  // namespace taco
