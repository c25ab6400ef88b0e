#include "taco/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace taco {

namespace {

constexpr std::uint64_t kInitW = 1;
constexpr std::uint64_t kInitU = 2;
constexpr std::uint64_t kInitV = 3;

// Consecutive calm iterations required before an early stop.
constexpr int kCalmWindow = 5;

using Clock = std::chrono::steady_clock;

Vector singular_values(const Matrix& m) {
  if (m.size() == 0) return Vector();
  if (!m.allFinite()) throw NumericError("SVD of a non-finite matrix");
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues();
}

int numerical_rank(const Vector& sv, Eigen::Index rows, Eigen::Index cols) {
  if (sv.size() == 0) return 0;
  const double eps = static_cast<double>(std::max(rows, cols)) * sv[0] *
                     std::numeric_limits<double>::epsilon();
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > eps) ++r;
  }
  return r;
}

void check_inputs(const Dataset& data, const Hyperparams& hp,
                  const SimilarityGraph* graph) {
  hp.validate(/*allow_zero_iters=*/true);
  if (data.partition.n_users() != data.n_users() ||
      data.features.n_items() != data.n_items()) {
    throw DataError("dataset parts disagree on shape");
  }
  if (graph != nullptr && graph->n_users() != data.n_users()) {
    throw DataError("similarity graph covers " +
                    std::to_string(graph->n_users()) + " users, dataset has " +
                    std::to_string(data.n_users()));
  }
}

// Tracks the relative-change stopping rule.
class StopRule {
 public:
  StopRule(double tol, double initial) : tol_(tol), prev_(initial) {}

  bool update(double objective) {
    if (tol_ > 0.0) {
      const double denom = std::max(std::abs(prev_), 1e-300);
      calm_ = std::abs(objective - prev_) / denom < tol_ ? calm_ + 1 : 0;
    }
    prev_ = objective;
    return calm_ >= kCalmWindow;
  }

 private:
  double tol_;
  double prev_;
  int calm_ = 0;
};

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

void require_finite(double objective, int iter) {
  if (!std::isfinite(objective)) {
    throw NumericError("objective became non-finite at iteration " +
                       std::to_string(iter));
  }
}

void require_finite(const Matrix& iterate, int iter) {
  if (!iterate.allFinite()) {
    throw NumericError("iterate became non-finite at iteration " +
                       std::to_string(iter));
  }
}

TrainResult run_proximal(const Dataset& data, const Hyperparams& hp,
                         const SimilarityGraph* graph) {
  check_inputs(data, hp, graph);
  const bool use_graph = graph != nullptr && hp.gamma != 0.0;
  const SimilarityGraph* active_graph = use_graph ? graph : nullptr;

  Matrix w = gaussian_init(data.n_users(), data.dim(), hp.init_sigma, hp.seed,
                           kInitW);
  TrainTrace trace;
  trace.initial = total_loss(w, data.partition, data.features, hp,
                             active_graph);
  StopRule stop(hp.tol, trace.initial.objective);

  for (int t = 1; t <= hp.max_iters; ++t) {
    const auto start = Clock::now();
    Matrix g = total_subgradient(w, data.partition, data.features, hp,
                                 static_cast<std::uint64_t>(t));
    if (use_graph) {
      g += graph_reg_gradient(w, data.features, *graph, hp.gamma);
    }
    const double rate = step_size(hp.step, t);
    Vector sv;
    if (hp.lambda > 0.0) {
      const Matrix step = w - rate * g;
      require_finite(step, t);
      require_finite(hp.lambda * rate, t);
      ShrinkResult shrunk = svt_with_spectrum(step, hp.lambda * rate);
      w = std::move(shrunk.value);
      sv = std::move(shrunk.singular_values);
    } else {
      w -= rate * g;
      require_finite(w, t);
      sv = singular_values(w);
    }

    IterationRecord rec;
    rec.iter = t;
    rec.step = rate;
    rec.data_loss = data_loss(w, data.partition, data.features,
                              hp.semi_supervised);
    rec.nuclear_norm = sv.sum();
    rec.rank = numerical_rank(sv, w.rows(), w.cols());
    rec.objective = rec.data_loss + hp.lambda * rec.nuclear_norm;
    if (use_graph) {
      rec.objective += hp.gamma * graph_reg_value(w, data.features, *graph);
    }
    require_finite(rec.objective, t);
    rec.wall_ms = elapsed_ms(start);
    trace.records.push_back(rec);
    if (stop.update(rec.objective)) {
      trace.stopped_early = true;
      break;
    }
  }
  return TrainResult{Model(std::move(w)), std::move(trace)};
}

LossReport factored_loss(const Matrix& u, const Matrix& v, const Dataset& data,
                         const Hyperparams& hp, const SimilarityGraph* graph) {
  const Matrix w = u * v.transpose();
  LossReport r;
  r.data_loss = data_loss(w, data.partition, data.features,
                          hp.semi_supervised);
  r.trace_penalty = 0.5 * hp.lambda * (u.squaredNorm() + v.squaredNorm());
  if (graph != nullptr) {
    r.graph_penalty = hp.gamma * graph_reg_value(w, data.features, *graph);
  }
  r.objective = r.data_loss + r.trace_penalty + r.graph_penalty;
  return r;
}

}  // namespace

ShrinkResult svt_with_spectrum(const Matrix& m, double tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) {
    throw ConfigError("shrinkage threshold must be finite and >= 0");
  }
  if (m.size() == 0) return ShrinkResult{m, Vector()};
  if (!m.allFinite()) throw NumericError("SVD of a non-finite matrix");
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericError("SVD failed");
  const Vector shrunk =
      (svd.singularValues().array() - tau).max(0.0).matrix();
  Matrix value =
      svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
  return ShrinkResult{std::move(value), shrunk};
}

Matrix svt(const Matrix& m, double tau) {
  return svt_with_spectrum(m, tau).value;
}

Matrix prox_step(const Matrix& w, const Matrix& g, double eta, double lambda) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw ConfigError("prox step requires eta > 0");
  }
  if (w.rows() != g.rows() || w.cols() != g.cols()) {
    throw DataError("prox step: W and G shapes differ");
  }
  if (lambda == 0.0) return w - g / eta;
  return svt(w - g / eta, lambda / eta);
}

double step_size(const StepSchedule& schedule, int t) {
  if (t < 1) throw ConfigError("step_size is defined for t >= 1");
  switch (schedule.kind) {
    case StepSchedule::Kind::kConstant:
      return schedule.eta0;
    case StepSchedule::Kind::kInvSqrt:
      return schedule.eta0 / std::sqrt(static_cast<double>(t));
  }
  return schedule.eta0;
}

Matrix gaussian_init(int rows, int cols, double sigma, std::uint64_t seed,
                     std::uint64_t stream) {
  Matrix out = Matrix::Zero(rows, cols);
  if (sigma == 0.0) return out;
  auto rng = make_rng(seed, stream);
  std::normal_distribution<double> normal(0.0, sigma);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) out(i, j) = normal(rng);
  }
  return out;
}

TrainResult train_taco(const Dataset& data, const Hyperparams& hp) {
  return run_proximal(data, hp, nullptr);
}

TrainResult train_taco_plus(const Dataset& data, const SimilarityGraph& graph,
                            const Hyperparams& hp) {
  return run_proximal(data, hp, &graph);
}

FactoredTrainResult train_factored(const Dataset& data, const Hyperparams& hp,
                                   const SimilarityGraph* graph) {
  check_inputs(data, hp, graph);
  if (!hp.rank) throw ConfigError("factored training requires a rank");
  const int k = *hp.rank;
  if (k < 1 || k > std::min(data.n_users(), data.dim())) {
    throw ConfigError("rank must be in [1, min(n_users, dim)] = [1, " +
                      std::to_string(std::min(data.n_users(), data.dim())) +
                      "]");
  }
  if (hp.init_sigma == 0.0) {
    // U = V = 0 is a saddle: both factor gradients vanish there.
    throw ConfigError("factored training requires init_sigma > 0");
  }
  const bool use_graph = graph != nullptr && hp.gamma != 0.0;
  const SimilarityGraph* active_graph = use_graph ? graph : nullptr;

  Matrix u = gaussian_init(data.n_users(), k, hp.init_sigma, hp.seed, kInitU);
  Matrix v = gaussian_init(data.dim(), k, hp.init_sigma, hp.seed, kInitV);

  TrainTrace trace;
  trace.initial = factored_loss(u, v, data, hp, active_graph);
  require_finite(trace.initial.objective, 0);
  StopRule stop(hp.tol, trace.initial.objective);

  for (int t = 1; t <= hp.max_iters; ++t) {
    const auto start = Clock::now();
    const Matrix w = u * v.transpose();
    Matrix g = total_subgradient(w, data.partition, data.features, hp,
                                 static_cast<std::uint64_t>(t));
    if (use_graph) {
      g += graph_reg_gradient(w, data.features, *graph, hp.gamma);
    }
    const double rate = step_size(hp.step, t);
    const double decay = 1.0 - hp.lambda * rate;
    const Matrix grad_u = g * v;
    const Matrix grad_v = g.transpose() * u;
    u = decay * u - rate * grad_u;
    v = decay * v - rate * grad_v;
    require_finite(u, t);
    require_finite(v, t);

    const LossReport r = factored_loss(u, v, data, hp, active_graph);
    require_finite(r.objective, t);
    const Vector sv = singular_values(u * v.transpose());
    IterationRecord rec;
    rec.iter = t;
    rec.step = rate;
    rec.objective = r.objective;
    rec.data_loss = r.data_loss;
    rec.nuclear_norm = sv.sum();
    rec.rank = numerical_rank(sv, u.rows(), v.rows());
    rec.wall_ms = elapsed_ms(start);
    trace.records.push_back(rec);
    if (stop.update(rec.objective)) {
      trace.stopped_early = true;
      break;
    }
  }
  return FactoredTrainResult{FactoredModel(std::move(u), std::move(v)),
                             std::move(trace)};
}

double probe_step(const Dataset& data, const Hyperparams& hp,
                  const SimilarityGraph* graph, bool factored,
                  const std::vector<double>& candidates, int probe_iters) {
  if (candidates.empty()) throw ConfigError("no step-size candidates");
  double best_rate = 0.0;
  double best_objective = std::numeric_limits<double>::infinity();
  for (double rate : candidates) {
    Hyperparams trial = hp;
    trial.step = StepSchedule{StepSchedule::Kind::kConstant, rate};
    trial.max_iters = probe_iters;
    trial.tol = 0.0;
    double objective = 0.0;
    try {
      const TrainTrace trace =
          factored ? train_factored(data, trial, graph).trace
                   : run_proximal(data, trial, graph).trace;
      objective = trace.records.empty() ? trace.initial.objective
                                        : trace.records.back().objective;
    } catch (const NumericError&) {
      continue;
    }
    if (objective < best_objective) {
      best_objective = objective;
      best_rate = rate;
    }
  }
  if (!std::isfinite(best_objective)) {
    throw NumericError("every step-size candidate diverged");
  }
  return best_rate;
}

}  // namespace taco
