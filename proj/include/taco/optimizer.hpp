#pragma once

#include <vector>

#include "taco/domain.hpp"
#include "taco/ranking_loss.hpp"

namespace taco {

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  double data_loss = 0.0;
  double nuclear_norm = 0.0;
  int rank = 0;
  double step = 0.0;  // learning rate used in this iteration
  double wall_ms = 0.0;
};

struct TrainTrace {
  LossReport initial;  // objective at the initial point
  std::vector<IterationRecord> records;
  bool stopped_early = false;
};

struct TrainResult {
  Model model;
  TrainTrace trace;
};

struct FactoredTrainResult {
  FactoredModel model;
  TrainTrace trace;
};

struct ShrinkResult {
  Matrix value;
  Vector singular_values;  // of `value`, descending, zeros included
};

// Singular value shrinkage: U diag([s_i - tau]_+) V^T from the thin SVD
// of m. This is the minimizer of 1/2 ||X - M||_F^2 + tau ||X||_*.
Matrix svt(const Matrix& m, double tau);
ShrinkResult svt_with_spectrum(const Matrix& m, double tau);

// svt(W - G / eta, lambda / eta); eta is the inverse step of the
// proximal model (eta/2 ||X - W||^2 + <G, X - W> + lambda ||X||_*).
Matrix prox_step(const Matrix& w, const Matrix& g, double eta, double lambda);

// Learning rate at iteration t >= 1: eta0, or eta0 / sqrt(t).
double step_size(const StepSchedule& schedule, int t);

// Gaussian(0, sigma^2) initial parameters drawn from (seed, stream).
Matrix gaussian_init(int rows, int cols, double sigma, std::uint64_t seed,
                     std::uint64_t stream);

// Proximal subgradient descent with singular value shrinkage. Each
// iteration uses learning rate a_t = step_size(hp.step, t):
//   W <- prox_step(W, G_t, 1 / a_t, lambda).
TrainResult train_taco(const Dataset& data, const Hyperparams& hp);

// As train_taco with G_t + graph_reg_gradient in place of G_t.
TrainResult train_taco_plus(const Dataset& data, const SimilarityGraph& graph,
                            const Hyperparams& hp);

// Gradient descent on the factors of W = U V^T (hp.rank required):
//   U <- (1 - lambda a) U - a G V,  V <- (1 - lambda a) V - a G^T U
// with both updates taken at the current (U, V) and G the subgradient of
// the data loss at U V^T. Objective tracked as
// lambda/2 (||U||^2 + ||V||^2) + L(U V^T) (+ graph term when given).
// Converges to a stationary point that need not be global.
FactoredTrainResult train_factored(const Dataset& data, const Hyperparams& hp,
                                   const SimilarityGraph* graph = nullptr);

// Coarse learning-rate probe: runs each candidate for `probe_iters`
// iterations of the selected trainer and returns the one with the lowest
// final objective (first wins on ties).
double probe_step(const Dataset& data, const Hyperparams& hp,
                  const SimilarityGraph* graph = nullptr, bool factored = false,
                  const std::vector<double>& candidates = {1.0, 0.1, 0.01},
                  int probe_iters = 5);

}  // namespace taco
