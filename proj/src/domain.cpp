#include "taco/domain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace taco {

RatingMatrix::RatingMatrix(int n_users, int n_items,
                           std::vector<Rating> entries)
    : n_users_(n_users), n_items_(n_items), entries_(std::move(entries)) {
  if (n_users < 0 || n_items < 0) {
    throw DataError("rating matrix dimensions must be nonnegative");
  }
  for (const Rating& r : entries_) {
    if (r.user < 0 || r.user >= n_users || r.item < 0 || r.item >= n_items) {
      throw DataError("rating (" + std::to_string(r.user) + ", " +
                      std::to_string(r.item) + ") out of range for " +
                      std::to_string(n_users) + " x " +
                      std::to_string(n_items));
    }
    if (r.label != Label::kPositive && r.label != Label::kNegative) {
      throw DataError("rating label must be +1 or -1");
    }
  }
  std::sort(entries_.begin(), entries_.end(),
            [](const Rating& a, const Rating& b) {
              return std::tie(a.user, a.item) < std::tie(b.user, b.item);
            });
  for (std::size_t k = 1; k < entries_.size(); ++k) {
    if (entries_[k].user == entries_[k - 1].user &&
        entries_[k].item == entries_[k - 1].item) {
      throw DataError("duplicate rating for (user " +
                      std::to_string(entries_[k].user) + ", item " +
                      std::to_string(entries_[k].item) + ")");
    }
  }
}

std::optional<Label> RatingMatrix::at(int user, int item) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(),
                             Rating{user, item, Label::kNegative},
                             [](const Rating& a, const Rating& b) {
                               return std::tie(a.user, a.item) <
                                      std::tie(b.user, b.item);
                             });
  if (it != entries_.end() && it->user == user && it->item == item) {
    return it->label;
  }
  return std::nullopt;
}

ItemFeatureMatrix::ItemFeatureMatrix(SparseRowMatrix rows)
    : rows_(std::move(rows)) {
  rows_.makeCompressed();
  const double* values = rows_.valuePtr();
  for (Eigen::Index k = 0; k < rows_.nonZeros(); ++k) {
    if (!std::isfinite(values[k])) {
      throw DataError("item features must be finite");
    }
  }
}

ItemFeatureMatrix ItemFeatureMatrix::from_triplets(
    int n_items, int dim, const std::vector<Triplet>& triplets) {
  if (n_items < 0 || dim < 0) {
    throw DataError("feature matrix dimensions must be nonnegative");
  }
  for (const Triplet& t : triplets) {
    if (t.row() < 0 || t.row() >= n_items || t.col() < 0 || t.col() >= dim) {
      throw DataError("feature entry (" + std::to_string(t.row()) + ", " +
                      std::to_string(t.col()) + ") out of range");
    }
  }
  SparseRowMatrix rows(n_items, dim);
  bool duplicate = false;
  rows.setFromTriplets(triplets.begin(), triplets.end(),
                       [&duplicate](double a, double) {
                         duplicate = true;
                         return a;
                       });
  if (duplicate) throw DataError("duplicate (item, feature) entry");
  return ItemFeatureMatrix(std::move(rows));
}

ItemFeatureMatrix ItemFeatureMatrix::from_dense(const Matrix& rows) {
  return ItemFeatureMatrix(rows.sparseView(0.0, 0.0));
}

double ItemFeatureMatrix::dot(int item, const Vector& w) const {
  double s = 0.0;
  for (SparseRowMatrix::InnerIterator it(rows_, item); it; ++it) {
    s += it.value() * w[it.index()];
  }
  return s;
}

void ItemFeatureMatrix::add_row(int item, double scale, Vector& out) const {
  for (SparseRowMatrix::InnerIterator it(rows_, item); it; ++it) {
    out[it.index()] += scale * it.value();
  }
}

Vector ItemFeatureMatrix::scores(const Vector& w) const {
  Vector s(n_items());
  for (int j = 0; j < n_items(); ++j) s[j] = dot(j, w);
  return s;
}

bool ItemFeatureMatrix::operator==(const ItemFeatureMatrix& other) const {
  if (n_items() != other.n_items() || dim() != other.dim()) return false;
  if (rows_.nonZeros() != other.rows_.nonZeros()) return false;
  for (int j = 0; j < n_items(); ++j) {
    SparseRowMatrix::InnerIterator a(rows_, j);
    SparseRowMatrix::InnerIterator b(other.rows_, j);
    for (; a && b; ++a, ++b) {
      if (a.index() != b.index() || a.value() != b.value()) return false;
    }
    if (a || b) return false;
  }
  return true;
}

UserItemPartition::UserItemPartition(int n_items, std::vector<UserItems> users)
    : n_items_(n_items), users_(std::move(users)) {
  for (auto& u : users_) {
    std::sort(u.pos.begin(), u.pos.end());
    std::sort(u.neg.begin(), u.neg.end());
    for (const IndexSet* set : {&u.pos, &u.neg}) {
      if (std::adjacent_find(set->begin(), set->end()) != set->end()) {
        throw DataError("repeated item in a user's index set");
      }
      if (!set->empty() && (set->front() < 0 || set->back() >= n_items)) {
        throw DataError("item index out of range in partition");
      }
    }
    IndexSet both;
    std::set_intersection(u.pos.begin(), u.pos.end(), u.neg.begin(),
                          u.neg.end(), std::back_inserter(both));
    if (!both.empty()) {
      throw DataError("item " + std::to_string(both.front()) +
                      " is both relevant and irrelevant for a user");
    }
  }
}

UserItemPartition UserItemPartition::from_ratings(const RatingMatrix& ratings) {
  std::vector<UserItems> users(ratings.n_users());
  for (const Rating& r : ratings.entries()) {
    auto& u = users[r.user];
    (r.label == Label::kPositive ? u.pos : u.neg).push_back(r.item);
  }
  return UserItemPartition(ratings.n_items(), std::move(users));
}

IndexSet UserItemPartition::unrated(int i) const {
  const UserItems& u = users_.at(i);
  IndexSet out;
  out.reserve(n_items_ - u.pos.size() - u.neg.size());
  auto p = u.pos.begin();
  auto q = u.neg.begin();
  for (int j = 0; j < n_items_; ++j) {
    if (p != u.pos.end() && *p == j) {
      ++p;
    } else if (q != u.neg.end() && *q == j) {
      ++q;
    } else {
      out.push_back(j);
    }
  }
  return out;
}

Model::Model(Matrix weights) : weights_(std::move(weights)) {
  if (!weights_.allFinite()) {
    throw NumericError("model weights contain NaN or Inf");
  }
}

FactoredModel::FactoredModel(Matrix u, Matrix v)
    : u_(std::move(u)), v_(std::move(v)) {
  if (u_.cols() != v_.cols()) {
    throw DataError("factor ranks differ: U has " + std::to_string(u_.cols()) +
                    " columns, V has " + std::to_string(v_.cols()));
  }
  if (u_.cols() < 1 || u_.cols() > std::min(u_.rows(), v_.rows())) {
    throw DataError("factor rank must be in [1, min(n_users, dim)]");
  }
  if (!u_.allFinite() || !v_.allFinite()) {
    throw NumericError("factor matrices contain NaN or Inf");
  }
}

SimilarityGraph::SimilarityGraph(SparseMatrix s) : s_(std::move(s)) {
  if (s_.rows() != s_.cols()) throw DataError("similarity must be square");
  s_.prune(0.0, 0.0);
  s_.makeCompressed();
  const int n = static_cast<int>(s_.rows());
  for (int c = 0; c < n; ++c) {
    for (SparseMatrix::InnerIterator it(s_, c); it; ++it) {
      if (!std::isfinite(it.value()) || it.value() < 0.0) {
        throw DataError("similarity weights must be finite and nonnegative");
      }
      if (it.row() == c) throw DataError("similarity diagonal must be zero");
    }
  }
  SparseMatrix diff = s_ - SparseMatrix(s_.transpose());
  diff.prune(0.0, 0.0);
  if (diff.nonZeros() != 0) throw DataError("similarity must be symmetric");

  degree_ = Vector::Zero(n);
  for (int c = 0; c < n; ++c) {
    for (SparseMatrix::InnerIterator it(s_, c); it; ++it) {
      degree_[it.row()] += it.value();
    }
  }
  SparseMatrix d(n, n);
  std::vector<Triplet> diag;
  for (int i = 0; i < n; ++i) {
    if (degree_[i] != 0.0) diag.emplace_back(i, i, degree_[i]);
  }
  d.setFromTriplets(diag.begin(), diag.end());
  laplacian_ = d - s_;
  laplacian_.makeCompressed();
}

SimilarityGraph SimilarityGraph::from_triplets(
    int n_users, const std::vector<Triplet>& triplets) {
  if (n_users < 0) throw DataError("negative user count");
  std::vector<Triplet> mirrored;
  mirrored.reserve(2 * triplets.size());
  for (const Triplet& t : triplets) {
    if (t.row() < 0 || t.row() >= n_users || t.col() < 0 ||
        t.col() >= n_users) {
      throw DataError("similarity entry (" + std::to_string(t.row()) + ", " +
                      std::to_string(t.col()) + ") out of range");
    }
    mirrored.emplace_back(t.row(), t.col(), t.value());
    if (t.row() != t.col()) mirrored.emplace_back(t.col(), t.row(), t.value());
  }
  // An edge listed in both orientations arrives here four times; equal
  // weights collapse, unequal ones are rejected.
  bool conflict = false;
  SparseMatrix s(n_users, n_users);
  s.setFromTriplets(mirrored.begin(), mirrored.end(),
                    [&conflict](double a, double b) {
                      if (a != b) conflict = true;
                      return a;
                    });
  if (conflict) throw DataError("asymmetric similarity weights in input");
  return SimilarityGraph(std::move(s));
}

void Hyperparams::validate(bool allow_zero_iters) const {
  auto finite_nonneg = [](double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ConfigError(std::string(name) + " must be finite and >= 0");
    }
  };
  finite_nonneg(lambda, "lambda");
  finite_nonneg(gamma, "gamma");
  finite_nonneg(tol, "tol");
  finite_nonneg(init_sigma, "init_sigma");
  if (!std::isfinite(step.eta0) || step.eta0 <= 0.0) {
    throw ConfigError("step size must be finite and > 0");
  }
  if (max_iters < (allow_zero_iters ? 0 : 1)) {
    throw ConfigError("max_iters must be >= 1");
  }
  if (rank && *rank < 1) throw ConfigError("rank must be >= 1");
  if (unrated_sample && *unrated_sample < 1) {
    throw ConfigError("unrated_sample must be >= 1");
  }
  if (user_batch && *user_batch < 1) {
    throw ConfigError("user_batch must be >= 1");
  }
}

UserItemPartition validate_dataset(const RatingMatrix& ratings,
                                   const ItemFeatureMatrix& features) {
  if (ratings.n_items() != features.n_items()) {
    throw DataError("ratings cover " + std::to_string(ratings.n_items()) +
                    " items but features describe " +
                    std::to_string(features.n_items()));
  }
  return UserItemPartition::from_ratings(ratings);
}

Dataset make_dataset(RatingMatrix ratings, ItemFeatureMatrix features) {
  UserItemPartition partition = validate_dataset(ratings, features);
  return Dataset{std::move(ratings), std::move(features),
                 std::move(partition)};
}

}  // namespace taco
