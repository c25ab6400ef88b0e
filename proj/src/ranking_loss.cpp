#include "taco/ranking_loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace taco {

namespace {

constexpr std::uint64_t kUnratedStream = 0x756e726174656400ULL;
constexpr std::uint64_t kBatchStream = 0x6261746368000000ULL;

// sum_{j in items} l(<w,x_j> - top) / |items|
double averaged_hinge(const Vector& w, std::span<const int> items, double top,
                      const ItemFeatureMatrix& features) {
  double sum = 0.0;
  for (int j : items) sum += hinge(features.dot(j, w) - top);
  return sum / static_cast<double>(items.size());
}

// Adds the subgradient of averaged_hinge with the max taken over `rivals`.
void add_push_subgradient(const Vector& w, std::span<const int> items,
                          const MaxScore& top,
                          const ItemFeatureMatrix& features, Vector& g) {
  const double scale = 1.0 / static_cast<double>(items.size());
  int active = 0;
  for (int j : items) {
    if (features.dot(j, w) - top.value <= 1.0) {
      features.add_row(j, -scale, g);
      ++active;
    }
  }
  if (active > 0) features.add_row(top.item, scale * active, g);
}

UserSets user_sets(const UserItemPartition& partition, int user,
                   const IndexSet& unrated) {
  const UserItems& u = partition.user(user);
  return UserSets{u.pos, u.neg, unrated};
}

}  // namespace

MaxScore max_score(const Vector& w, std::span<const int> items,
                   const ItemFeatureMatrix& features) {
  if (items.empty()) throw DataError("max_score over an empty item set");
  MaxScore best{features.dot(items.front(), w), items.front()};
  for (int j : items.subspan(1)) {
    const double s = features.dot(j, w);
    if (s > best.value || (s == best.value && j < best.item)) {
      best = {s, j};
    }
  }
  return best;
}

UserLossBreakdown user_push_loss(const Vector& w, const UserSets& sets,
                                 const ItemFeatureMatrix& features) {
  UserLossBreakdown out;
  if (!sets.neg.empty()) {
    const double top_neg = max_score(w, sets.neg, features).value;
    if (!sets.pos.empty()) {
      out.pos_vs_neg = averaged_hinge(w, sets.pos, top_neg, features);
    }
    if (!sets.unrated.empty()) {
      out.unrated_vs_neg = averaged_hinge(w, sets.unrated, top_neg, features);
    }
  }
  if (!sets.pos.empty() && !sets.unrated.empty()) {
    const double top_unrated = max_score(w, sets.unrated, features).value;
    out.pos_vs_unrated = averaged_hinge(w, sets.pos, top_unrated, features);
  }
  out.total = out.pos_vs_neg + out.pos_vs_unrated + out.unrated_vs_neg;
  if (!std::isfinite(out.total)) {
    throw NumericError("non-finite user loss");
  }
  return out;
}

Vector user_subgradient(const Vector& w, const UserSets& sets,
                        const ItemFeatureMatrix& features) {
  Vector g = Vector::Zero(features.dim());
  if (!sets.neg.empty()) {
    const MaxScore top_neg = max_score(w, sets.neg, features);
    if (!std::isfinite(top_neg.value)) {
      throw NumericError("non-finite item score");
    }
    if (!sets.pos.empty()) {
      add_push_subgradient(w, sets.pos, top_neg, features, g);
    }
    if (!sets.unrated.empty()) {
      add_push_subgradient(w, sets.unrated, top_neg, features, g);
    }
  }
  if (!sets.pos.empty() && !sets.unrated.empty()) {
    const MaxScore top_unrated = max_score(w, sets.unrated, features);
    if (!std::isfinite(top_unrated.value)) {
      throw NumericError("non-finite item score");
    }
    add_push_subgradient(w, sets.pos, top_unrated, features, g);
  }
  return g;
}

IndexSet sample_unrated(const IndexSet& unrated, const Hyperparams& hp,
                        int user, std::uint64_t iteration) {
  if (!hp.unrated_sample ||
      static_cast<std::size_t>(*hp.unrated_sample) >= unrated.size()) {
    return unrated;
  }
  auto rng = make_rng(hp.seed ^ kUnratedStream, iteration,
                      static_cast<std::uint64_t>(user));
  IndexSet out;
  out.reserve(*hp.unrated_sample);
  std::sample(unrated.begin(), unrated.end(), std::back_inserter(out),
              *hp.unrated_sample, rng);
  return out;
}

IndexSet sample_user_batch(int n_users, const Hyperparams& hp,
                           std::uint64_t iteration) {
  IndexSet all(n_users);
  std::iota(all.begin(), all.end(), 0);
  if (!hp.user_batch || *hp.user_batch >= n_users) return all;
  auto rng = make_rng(hp.seed ^ kBatchStream, iteration);
  IndexSet out;
  out.reserve(*hp.user_batch);
  std::sample(all.begin(), all.end(), std::back_inserter(out),
              *hp.user_batch, rng);
  return out;
}

double nuclear_norm(const Matrix& w) {
  if (w.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(w);
  return svd.singularValues().sum();
}

double data_loss(const Matrix& w, const UserItemPartition& partition,
                 const ItemFeatureMatrix& features, bool semi_supervised) {
  const int n = partition.n_users();
  std::vector<double> per_user(n, 0.0);
  const IndexSet none;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const IndexSet unrated = semi_supervised ? partition.unrated(i) : none;
    const Vector wi = w.row(i).transpose();
    per_user[i] =
        user_push_loss(wi, user_sets(partition, i, unrated), features).total;
  }
  double total = 0.0;
  for (double v : per_user) total += v;
  return total;
}

LossReport total_loss(const Matrix& w, const UserItemPartition& partition,
                      const ItemFeatureMatrix& features, const Hyperparams& hp,
                      const SimilarityGraph* graph) {
  if (w.rows() != partition.n_users() || w.cols() != features.dim()) {
    throw DataError("model shape does not match the dataset");
  }
  LossReport r;
  r.data_loss = data_loss(w, partition, features, hp.semi_supervised);
  r.trace_penalty = hp.lambda == 0.0 ? 0.0 : hp.lambda * nuclear_norm(w);
  if (graph != nullptr && hp.gamma != 0.0) {
    r.graph_penalty = hp.gamma * graph_reg_value(w, features, *graph);
  }
  r.objective = r.data_loss + r.trace_penalty + r.graph_penalty;
  if (!std::isfinite(r.objective)) {
    throw NumericError("objective is not finite");
  }
  return r;
}

Matrix total_subgradient(const Matrix& w, const UserItemPartition& partition,
                         const ItemFeatureMatrix& features,
                         const Hyperparams& hp, std::uint64_t iteration) {
  const int n = partition.n_users();
  if (w.rows() != n || w.cols() != features.dim()) {
    throw DataError("model shape does not match the dataset");
  }
  const IndexSet batch = sample_user_batch(n, hp, iteration);
  const double scale =
      static_cast<int>(batch.size()) == n
          ? 1.0
          : static_cast<double>(n) / static_cast<double>(batch.size());
  Matrix g = Matrix::Zero(n, features.dim());
  const int b = static_cast<int>(batch.size());
#pragma omp parallel for schedule(static)
  for (int k = 0; k < b; ++k) {
    const int i = batch[k];
    IndexSet unrated;
    if (hp.semi_supervised) {
      unrated = sample_unrated(partition.unrated(i), hp, i, iteration);
    }
    const Vector wi = w.row(i).transpose();
    Vector gi = user_subgradient(wi, user_sets(partition, i, unrated), features);
    if (scale != 1.0) gi *= scale;
    g.row(i) = gi.transpose();
  }
  return g;
}

double graph_reg_value(const Matrix& w, const ItemFeatureMatrix& features,
                       const SimilarityGraph& graph) {
  if (graph.n_users() != w.rows() || w.cols() != features.dim()) {
    throw DataError("graph / model / feature shapes disagree");
  }
  const Matrix y = w * features.rows().transpose();  // n x m scores
  const Matrix ly = graph.laplacian() * y;
  return y.cwiseProduct(ly).sum();
}

Matrix graph_reg_gradient(const Matrix& w, const ItemFeatureMatrix& features,
                          const SimilarityGraph& graph, double gamma) {
  if (graph.n_users() != w.rows() || w.cols() != features.dim()) {
    throw DataError("graph / model / feature shapes disagree");
  }
  if (gamma == 0.0) return Matrix::Zero(w.rows(), w.cols());
  const Matrix y = w * features.rows().transpose();
  const Matrix ly = graph.laplacian() * y;
  return (2.0 * gamma) * (ly * features.rows());
}

}  // namespace taco
