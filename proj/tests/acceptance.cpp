// Acceptance suite: one PASS / FAIL / SKIP line per criterion, exit status
// nonzero if any criterion fails.
//
// The planted instance and its base hyperparameters come from
// configs/planted.cfg; per-criterion overrides are spelled out below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "taco/checkpoint.hpp"
#include "taco/commands.hpp"
#include "taco/config.hpp"
#include "taco/data_io.hpp"
#include "taco/data_pipeline.hpp"
#include "taco/evaluation.hpp"
#include "taco/optimizer.hpp"
#include "taco/ranking_loss.hpp"

using namespace taco;
using taco_test::random_matrix;

namespace {

const std::string kCli = TACO_CLI_PATH;
const std::string kPlanted = std::string(TACO_CONFIG_DIR) + "/planted.cfg";

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status = Status::kFail;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

RunConfig planted(std::vector<std::string> overrides = {}) {
  return load_config(kPlanted, overrides);
}

double ndcg10(const Matrix& w, const ItemFeatureMatrix& f,
              const RatingMatrix& train, const RatingMatrix& test) {
  EvalOptions opts;
  opts.cutoffs = {10};
  return evaluate(w, f, train, test, opts).ndcg[0];
}

// Trace-norm weight picked by NDCG@10 on an 80/20 split of the observed
// labels; the held-out labels are never looked at.
const std::vector<double> kLambdaGrid = {0.1, 0.3, 1.0, 3.0};

double select_lambda(const PlantedData& data, const Hyperparams& base) {
  SplitSpec spec;
  spec.train = 0.8;
  spec.validation = 0.0;
  spec.test = 0.2;
  spec.seed = 99;
  const SplitResult s = split(data.observed, spec);
  const Dataset sub = make_dataset(s.train, data.features);
  double best_score = -1.0, best_lambda = kLambdaGrid.front();
  for (double lambda : kLambdaGrid) {
    Hyperparams hp = base;
    hp.lambda = lambda;
    const double v =
        ndcg10(train_taco(sub, hp).model.weights(), data.features, s.train, s.test);
    if (v > best_score) best_score = v, best_lambda = lambda;
  }
  return best_lambda;
}

// ---------------------------------------------------------------------------

Outcome svt_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = INFINITY;
  int checks = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto rng = make_rng(1, trial);
    const Matrix m = random_matrix(6, 4, rng);
    for (double tau : {0.1, 1.0, 10.0}) {
      const Matrix x = svt(m, tau);
      const double at_x = taco_test::prox_objective(x, m, tau);
      for (int k = 0; k < 200; ++k) {
        const double scale = std::pow(10.0, -(k % 5));
        const Matrix xp = x + random_matrix(6, 4, rng, scale);
        worst = std::min(worst, taco_test::prox_objective(xp, m, tau) - at_x);
        ++checks;
      }
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = worst >= -1e-9 && secs < 5.0;
  return {ok ? Status::kPass : Status::kFail,
          fmt("%d perturbations, min objective gap %.3g (tol -1e-9), %.2f s (< 5 s)",
              checks, worst, secs)};
}

Outcome subgradient_validity() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = INFINITY;
  for (int trial = 0; trial < 100; ++trial) {
    auto rng = make_rng(2, trial);
    const int n = 5, m = 12, d = 4;
    const auto f = ItemFeatureMatrix::from_dense(random_matrix(m, d, rng));
    std::vector<UserItems> users;
    for (int i = 0; i < n; ++i) {
      std::uniform_int_distribution<int> count(0, 5);
      const int n_pos = count(rng), n_neg = count(rng);
      const auto s = taco_test::random_sets(m, n_pos, n_neg, rng);
      users.push_back({s.pos, s.neg});
    }
    const UserItemPartition p(m, users);
    const Matrix w = random_matrix(n, d, rng);
    const Matrix g = total_subgradient(w, p, f, Hyperparams{});
    const double lw = data_loss(w, p, f, true);
    for (int k = 0; k < 100; ++k) {
      // Mix distant draws with small steps around W, where kinks bite.
      const Matrix w2 = k % 2 ? random_matrix(n, d, rng, 2.0)
                              : Matrix(w + random_matrix(n, d, rng, std::pow(10.0, -(k % 7))));
      const double gap = data_loss(w2, p, f, true) - lw -
                         (g.array() * (w2 - w).array()).sum();
      worst = std::min(worst, gap);
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = worst >= -1e-9 && secs < 10.0;
  return {ok ? Status::kPass : Status::kFail,
          fmt("10000 pairs, min L(W')-L(W)-<G,W'-W> = %.3g (tol -1e-9), %.2f s (< 10 s)",
              worst, secs)};
}

Outcome loss_oracle() {
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto rng = make_rng(3, trial);
    std::uniform_int_distribution<int> size(0, 4);
    const int d = 1 + trial % 4;
    const int n_pos = size(rng), n_neg = size(rng), n_unrated = size(rng);
    const int m = n_pos + n_neg + n_unrated;
    if (m == 0) continue;
    const auto f = ItemFeatureMatrix::from_dense(random_matrix(m, d, rng));
    const auto s = taco_test::random_sets(m, n_pos, n_neg, rng);
    const Vector w = taco_test::random_vector(d, rng, 2.0);
    const auto got = user_push_loss(w, {s.pos, s.neg, s.unrated}, f);
    const auto want = taco_test::naive_user_loss(w, f, s.pos, s.neg, s.unrated);
    mismatches += !(got.pos_vs_neg == want.pos_vs_neg &&
                    got.pos_vs_unrated == want.pos_vs_unrated &&
                    got.unrated_vs_neg == want.unrated_vs_neg &&
                    got.total == want.total);
  }
  return {mismatches == 0 ? Status::kPass : Status::kFail,
          fmt("%d of 1000 instances differ from the naive enumeration (bitwise)",
              mismatches)};
}

Outcome graph_gradient() {
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    auto rng = make_rng(4, trial);
    const Matrix w = random_matrix(4, 3, rng);
    const auto f = ItemFeatureMatrix::from_dense(random_matrix(6, 3, rng));
    std::uniform_real_distribution<double> weight(0.0, 1.0);
    std::vector<Triplet> t;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) t.emplace_back(a, b, weight(rng));
    const auto g = SimilarityGraph::from_triplets(4, t);
    const Matrix grad = graph_reg_gradient(w, f, g, 1.0);
    const double h = 1e-6;
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 3; ++k) {
        Matrix up = w, down = w;
        up(i, k) += h;
        down(i, k) -= h;
        const double fd =
            (graph_reg_value(up, f, g) - graph_reg_value(down, f, g)) / (2 * h);
        worst = std::max(worst, std::abs(fd - grad(i, k)));
      }
  }
  return {worst < 1e-4 ? Status::kPass : Status::kFail,
          fmt("100 random 4x3 cases, max |central diff - gradient| = %.3g (< 1e-4)",
              worst)};
}

// Optimizer progress is measured with a light trace-norm weight and a small
// constant step; ranking quality (criteria 6, 7, 11) uses the validated
// weight instead.
Outcome optimization_progress() {
  const RunConfig c = planted({"train.lambda=0.1", "train.step.schedule=constant",
                               "train.step.eta0=0.01", "train.max_iters=200"});
  const auto t0 = std::chrono::steady_clock::now();
  const PlantedData data = generate_planted(c.synth);
  const TrainResult r = train_taco(make_dataset(data.observed, data.features), c.hp);
  const double secs = seconds_since(t0);
  const double initial = r.trace.initial.objective;
  const double final_obj = r.trace.records.back().objective;
  int nonincreasing = 0;
  double prev = initial;
  for (const IterationRecord& rec : r.trace.records) {
    nonincreasing += rec.objective <= prev;
    prev = rec.objective;
  }
  const double ratio = final_obj / initial;
  const double mono = static_cast<double>(nonincreasing) / r.trace.records.size();
  const bool ok = r.trace.records.size() == 200 && ratio <= 0.5 && mono >= 0.9 &&
                  secs < 60.0;
  return {ok ? Status::kPass : Status::kFail,
          fmt("final/initial objective %.3f (<= 0.5), nonincreasing steps %.1f%% "
              "(>= 90%%), %.2f s (< 60 s)",
              ratio, 100 * mono, secs)};
}

struct RecoveryResult {
  double lambda = 0;
  double taco_ndcg = 0;
};

RecoveryResult recovery_run() {
  const RunConfig c = planted();
  const PlantedData data = generate_planted(c.synth);
  RecoveryResult out;
  out.lambda = select_lambda(data, c.hp);
  Hyperparams hp = c.hp;
  hp.lambda = out.lambda;
  const Matrix w =
      train_taco(make_dataset(data.observed, data.features), hp).model.weights();
  out.taco_ndcg = ndcg10(w, data.features, data.observed, data.held_out);
  return out;
}

Outcome ranking_recovery(const RecoveryResult& run) {
  const RunConfig c = planted();
  const PlantedData data = generate_planted(c.synth);
  // Random-model baseline: uniformly shuffled candidate lists, 50 seeds.
  const auto train = UserItemPartition::from_ratings(data.observed);
  const auto test = UserItemPartition::from_ratings(data.held_out);
  double baseline = 0;
  for (int seed = 0; seed < 50; ++seed) {
    double sum = 0;
    int users = 0;
    for (int i = 0; i < train.n_users(); ++i) {
      const IndexSet& rel = test.user(i).pos;
      if (rel.empty()) continue;
      IndexSet cand = train.unrated(i);
      auto rng = make_rng(6, seed, i);
      std::shuffle(cand.begin(), cand.end(), rng);
      std::vector<int> s;
      for (int j : cand) s.push_back(std::binary_search(rel.begin(), rel.end(), j));
      sum += *ndcg_at_n(s, 10, static_cast<int>(rel.size()));
      ++users;
    }
    baseline += sum / users / 50;
  }
  const bool ok = run.taco_ndcg >= 0.8 && run.taco_ndcg > baseline + 0.3;
  return {ok ? Status::kPass : Status::kFail,
          fmt("held-out NDCG@10 %.3f (>= 0.8), random baseline %.3f (+0.3 = %.3f), "
              "lambda %.1f chosen on a validation split",
              run.taco_ndcg, baseline, baseline + 0.3, run.lambda)};
}

Outcome semi_supervision_direction() {
  const RunConfig c = planted({"synth.bias=3"});
  double mean[2] = {0, 0};
  for (int seed = 1; seed <= 10; ++seed) {
    PlantedSpec spec = c.synth;
    spec.seed = seed;
    const PlantedData data = generate_planted(spec);
    const Dataset all = make_dataset(data.observed, data.features);
    for (int semi = 0; semi < 2; ++semi) {
      Hyperparams hp = c.hp;
      hp.semi_supervised = semi == 1;
      hp.lambda = select_lambda(data, hp);
      mean[semi] += ndcg10(train_taco(all, hp).model.weights(), data.features,
                           data.observed, data.held_out) / 10;
    }
  }
  return {mean[1] > mean[0] ? Status::kPass : Status::kFail,
          fmt("bias 3, 10 seeds: mean NDCG@10 full objective %.3f vs observed-only "
              "%.3f (each arm's lambda chosen on validation)",
              mean[1], mean[0])};
}

Outcome metric_unit_values() {
  int bad = 0;
  auto exact = [&](double got, double want) { bad += got != want; };
  auto near = [&](double got, double want) { bad += !(std::abs(got - want) <= 1e-5); };
  exact(dcg_at_n(std::vector<int>{1, 1, 0}, 3), 2.0);
  exact(dcg_at_n(std::vector<int>{0, 0, 0}, 3), 0.0);
  near(dcg_at_n(std::vector<int>{0, 1, 1}, 3), 1.63093);
  near(*ndcg_at_n(std::vector<int>{0, 1, 1}, 3, 2), 0.81546);
  exact(*ndcg_at_n(std::vector<int>{1, 1, 1, 0}, 4, 3), 1.0);
  exact(*ndcg_at_n(std::vector<int>{0, 0, 0, 1, 1}, 3, 2), 0.0);
  const IndexSet top{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  exact(recall_at_n(top, IndexSet{2, 5, 8, 11}), 0.3);
  exact(recall_at_n(top, IndexSet{10, 11}), 0.0);
  exact(recall_at_n(top, top), 1.0);
  // One relevant item ranked second of ten.
  std::vector<int> second(10, 0);
  second[1] = 1;
  exact(dcg_at_n(second, 10), 1.0);
  IndexSet ten{7, 3, 0, 1, 2, 4, 5, 6, 8, 9};
  exact(recall_at_n(ten, IndexSet{3}), 0.1);
  return {bad == 0 ? Status::kPass : Status::kFail,
          fmt("%d of 11 hand values differ (DCG([1,1,0],3)=%.5f, NDCG=%.5f, REC=%.2f)",
              bad, dcg_at_n(std::vector<int>{1, 1, 0}, 3),
              *ndcg_at_n(std::vector<int>{0, 1, 1}, 3, 2),
              recall_at_n(top, IndexSet{2, 5, 8, 11}))};
}

Outcome determinism() {
  taco_test::TempDir dir("acceptance-det");
  const std::string set = " -c '" + kPlanted + "' -s output.dir='" +
                          dir.path().string() + "'";
  if (taco_test::run_shell(kCli + " synth" + set + " >/dev/null") != 0) {
    return {Status::kFail, "synth failed"};
  }
  struct Variant {
    const char* name;
    std::string extra;
  };
  const Variant variants[] = {
      {"full batch", ""},
      {"sampled", " -s train.user_batch=7 -s train.unrated_sample=10"},
  };
  std::string detail;
  bool ok = true;
  for (const Variant& v : variants) {
    std::vector<std::uint64_t> sums;
    for (int threads : {1, 1, 8, 8}) {
      const std::string cmd = "TACO_NUM_THREADS=" + std::to_string(threads) + " " +
                              kCli + " train" + set + v.extra + " >/dev/null";
      if (taco_test::run_shell(cmd) != 0) return {Status::kFail, "train failed"};
      sums.push_back(read_checkpoint(dir / "model.ckpt").checksum);
    }
    const bool same1 = sums[0] == sums[1];
    const bool same8 = sums[2] == sums[3];
    const bool across = sums[0] == sums[2];
    ok = ok && same1 && same8 && across;
    detail += fmt("%s: 1 thread %s, 8 threads %s, 1 vs 8 %s (%016llx); ", v.name,
                  same1 ? "equal" : "DIFFER", same8 ? "equal" : "DIFFER",
                  across ? "equal" : "DIFFER",
                  static_cast<unsigned long long>(sums[0]));
  }
  detail.resize(detail.size() - 2);
  return {ok ? Status::kPass : Status::kFail, detail};
}

// Reference sizes of the three public datasets after ingest.
struct AuditTarget {
  const char* env;
  const char* name;
  BinarizeRule rule;
  bool binarize;
  int users, items;
  std::size_t ratings;
};

Outcome dataset_audit() {
  const AuditTarget targets[] = {
      {"TACO_ML_IMDB_RATINGS", "ML-IMDB", BinarizeRule::ml_imdb(), true, 2113, 8645,
       739973},
      {"TACO_AMAZON_RATINGS", "Amazon", BinarizeRule::amazon(), true, 13097, 11077,
       175612},
      {"TACO_CITEULIKE_RATINGS", "CiteULike", {}, false, 3272, 21508, 180622},
  };
  std::string detail;
  bool any = false, ok = true;
  for (const AuditTarget& t : targets) {
    const char* path = std::getenv(t.env);
    if (path == nullptr || *path == '\0') continue;
    any = true;
    try {
      const IngestedRatings in = parse_ratings(
          path, t.binarize ? std::optional<BinarizeRule>(t.rule) : std::nullopt);
      const bool match = in.ratings.n_users() == t.users &&
                         in.ratings.n_items() == t.items &&
                         in.ratings.size() == t.ratings;
      ok = ok && match;
      detail += fmt("%s %d/%d/%zu (want %d/%d/%zu) %s; ", t.name,
                    in.ratings.n_users(), in.ratings.n_items(), in.ratings.size(),
                    t.users, t.items, t.ratings, match ? "match" : "MISMATCH");
    } catch (const Error& e) {
      ok = false;
      detail += std::string(t.name) + " ingest failed: " + e.what() + "; ";
    }
  }
  if (!any) {
    return {Status::kSkip,
            "no dataset supplied (set TACO_ML_IMDB_RATINGS, TACO_AMAZON_RATINGS "
            "or TACO_CITEULIKE_RATINGS)"};
  }
  detail.resize(detail.size() - 2);
  return {ok ? Status::kPass : Status::kFail, detail};
}

Outcome factored_parity(const RecoveryResult& run) {
  const RunConfig c = planted({"train.rank=5", "train.init_sigma=0.1"});
  const PlantedData data = generate_planted(c.synth);
  Hyperparams hp = c.hp;
  hp.lambda = run.lambda;
  const FactoredTrainResult r =
      train_factored(make_dataset(data.observed, data.features), hp);
  const double f = ndcg10(r.model.reconstruct(), data.features, data.observed,
                          data.held_out);
  const double rel = std::abs(f - run.taco_ndcg) / run.taco_ndcg;
  return {rel <= 0.10 ? Status::kPass : Status::kFail,
          fmt("factored k=5 NDCG@10 %.3f vs dense %.3f, relative difference %.1f%% "
              "(<= 10%%)",
              f, run.taco_ndcg, 100 * rel)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  RecoveryResult recovery;
  bool have_recovery = false;
  auto recovered = [&]() -> const RecoveryResult& {
    if (!have_recovery) recovery = recovery_run(), have_recovery = true;
    return recovery;
  };
  const Criterion criteria[] = {
      {1, "SVT correctness", svt_correctness},
      {2, "Subgradient validity", subgradient_validity},
      {3, "Loss oracle equivalence", loss_oracle},
      {4, "Graph gradient", graph_gradient},
      {5, "Optimization progress", optimization_progress},
      {6, "Ranking recovery", [&] { return ranking_recovery(recovered()); }},
      {7, "Semi-supervision direction", semi_supervision_direction},
      {8, "Metric unit values", metric_unit_values},
      {9, "Determinism", determinism},
      {10, "Dataset audit", dataset_audit},
      {11, "Factored-mode parity", [&] { return factored_parity(recovered()); }},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Status::kFail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::kPass   ? "PASS"
                      : o.status == Status::kSkip ? "SKIP"
                                                  : "FAIL";
    failed += o.status == Status::kFail;
    std::printf("[%s] criterion %2d  %-27s %s\n", tag, c.id, c.name,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
