#pragma once

// Random instances and brute-force reference implementations shared by
// the unit and acceptance tests. The references are deliberately naive:
// they rescore every item inside every loop rather than reusing the
// library's cached maxima.

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "taco/domain.hpp"

namespace taco_test {

using taco::IndexSet;
using taco::ItemFeatureMatrix;
using taco::Matrix;
using taco::Vector;

inline Matrix random_matrix(int rows, int cols, std::mt19937_64& rng,
                            double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

inline Vector random_vector(int n, std::mt19937_64& rng, double scale = 1.0) {
  return random_matrix(n, 1, rng, scale).col(0);
}

// Randomly assigns every item of [m] to pos / neg / unrated with the
// requested counts.
struct RandomSets {
  IndexSet pos, neg, unrated;
};

inline RandomSets random_sets(int m, int n_pos, int n_neg,
                              std::mt19937_64& rng) {
  std::vector<int> items(m);
  for (int j = 0; j < m; ++j) items[j] = j;
  std::shuffle(items.begin(), items.end(), rng);
  RandomSets s;
  s.pos.assign(items.begin(), items.begin() + n_pos);
  s.neg.assign(items.begin() + n_pos, items.begin() + n_pos + n_neg);
  s.unrated.assign(items.begin() + n_pos + n_neg, items.end());
  std::sort(s.pos.begin(), s.pos.end());
  std::sort(s.neg.begin(), s.neg.end());
  std::sort(s.unrated.begin(), s.unrated.end());
  return s;
}

// Random +1/-1 labels, each cell observed with probability `density`.
inline taco::RatingMatrix random_ratings(int n, int m, double density,
                                         std::mt19937_64& rng) {
  std::bernoulli_distribution observe(density), positive(0.5);
  std::vector<taco::Rating> entries;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      if (observe(rng))
        entries.push_back({i, j,
                           positive(rng) ? taco::Label::kPositive
                                         : taco::Label::kNegative});
  return taco::RatingMatrix(n, m, std::move(entries));
}

// Naive per-user loss, one term at a time, every max recomputed.
struct NaiveLoss {
  double pos_vs_neg = 0, pos_vs_unrated = 0, unrated_vs_neg = 0, total = 0;
};

inline double naive_score(const Vector& w, const ItemFeatureMatrix& f,
                          int j) {
  return f.dot(j, w);
}

inline double naive_max(const Vector& w, const ItemFeatureMatrix& f,
                        const IndexSet& set) {
  double best = naive_score(w, f, set.front());
  for (int k : set) best = std::max(best, naive_score(w, f, k));
  return best;
}

inline double naive_hinge(double x) { return x < 1.0 ? 1.0 - x : 0.0; }

inline NaiveLoss naive_user_loss(const Vector& w, const ItemFeatureMatrix& f,
                                 const IndexSet& pos, const IndexSet& neg,
                                 const IndexSet& unrated) {
  NaiveLoss out;
  if (!pos.empty() && !neg.empty()) {
    double sum = 0;
    for (int j : pos) sum += naive_hinge(naive_score(w, f, j) - naive_max(w, f, neg));
    out.pos_vs_neg = sum / static_cast<double>(pos.size());
  }
  if (!pos.empty() && !unrated.empty()) {
    double sum = 0;
    for (int j : pos)
      sum += naive_hinge(naive_score(w, f, j) - naive_max(w, f, unrated));
    out.pos_vs_unrated = sum / static_cast<double>(pos.size());
  }
  if (!unrated.empty() && !neg.empty()) {
    double sum = 0;
    for (int j : unrated)
      sum += naive_hinge(naive_score(w, f, j) - naive_max(w, f, neg));
    out.unrated_vs_neg = sum / static_cast<double>(unrated.size());
  }
  out.total = out.pos_vs_neg + out.pos_vs_unrated + out.unrated_vs_neg;
  return out;
}

// 1/2 ||X - M||_F^2 + tau ||X||_*
double prox_objective(const Matrix& x, const Matrix& m, double tau);

// Scratch directory unique to this test, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

// Runs `command` through the shell and returns its exit status.
int run_shell(const std::string& command);

}  // namespace taco_test
