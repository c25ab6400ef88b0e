#include "taco/commands.hpp"

#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "taco/checkpoint.hpp"
#include "taco/data_io.hpp"

namespace taco {

namespace fs = std::filesystem;

namespace {

const std::string& require_path(const std::string& value, const char* key) {
  if (value.empty()) {
    throw ConfigError(std::string(key) + " is required for this command");
  }
  return value;
}

fs::path out_path(const RunConfig& c, const std::string& name) {
  return fs::path(c.output_dir) / name;
}

void write_resolved(const RunConfig& c, const std::string& extra = "") {
  fs::create_directories(c.output_dir);
  std::string text = "# config_hash: " + hash_hex(c.hash()) + "\n" + extra;
  text += c.to_text();
  write_file(out_path(c, "resolved.cfg"), text);
}

}  // namespace

std::string IngestSummary::to_json() const {
  nlohmann::ordered_json j;
  j["n_users"] = n_users;
  j["n_items"] = n_items;
  j["n_ratings"] = n_ratings;
  j["n_positive"] = n_positive;
  j["n_negative"] = n_negative;
  j["n_features"] = n_features;
  const double cells = static_cast<double>(n_users) * n_items;
  j["density"] = cells > 0 ? static_cast<double>(n_ratings) / cells : 0.0;
  return j.dump(2);
}

IngestSummary cmd_ingest(const RunConfig& c) {
  const std::string& raw = require_path(c.raw_ratings, "data.raw_ratings");
  const std::optional<BinarizeRule> rule =
      c.binarize ? std::optional<BinarizeRule>(c.rule) : std::nullopt;
  IngestedRatings in = parse_ratings(raw, rule);

  IngestSummary s;
  const std::uint64_t h = c.hash();
  fs::create_directories(c.output_dir);
  if (!c.raw_terms.empty()) {
    IdMap terms;
    const TermCounts counts = parse_term_counts(c.raw_terms, in.items, terms);
    if (in.items.size() != in.ratings.n_items()) {
      // Items that only appear in the term file are cold-start items.
      std::vector<Rating> entries(in.ratings.entries().begin(),
                                  in.ratings.entries().end());
      in.ratings = RatingMatrix(in.ratings.n_users(), in.items.size(),
                                std::move(entries));
    }
    const TfidfResult tfidf =
        build_tfidf(counts, c.tfidf_min_items, c.tfidf_max_frac);
    write_features(out_path(c, "features.tsv"), tfidf.features, h);
    IdMap vocab;
    for (int t : tfidf.vocabulary) vocab.intern(terms.name(t));
    write_id_map(out_path(c, "vocabulary.tsv"), vocab);
    s.n_features = tfidf.features.dim();
  }
  const SimilarityBuild sim =
      build_user_similarity(corating_profiles(in.ratings), c.similarity_knn);
  write_similarity(out_path(c, "similarity.tsv"), sim.graph, h);

  write_ratings(out_path(c, "ratings.tsv"), in.ratings, h);
  write_id_map(out_path(c, "users.tsv"), in.users);
  write_id_map(out_path(c, "items.tsv"), in.items);

  s.n_users = in.ratings.n_users();
  s.n_items = in.ratings.n_items();
  s.n_ratings = in.ratings.size();
  for (const Rating& r : in.ratings.entries()) {
    (r.label == Label::kPositive ? s.n_positive : s.n_negative) += 1;
  }
  write_file(out_path(c, "ingest.json"), s.to_json() + "\n");
  write_resolved(c);
  return s;
}

void cmd_split(const RunConfig& c) {
  const RatingMatrix ratings =
      read_ratings(require_path(c.ratings, "data.ratings"));
  const std::uint64_t h = c.hash();
  auto emit = [&](const SplitResult& s, const fs::path& dir) {
    write_ratings(dir / "train.tsv", s.train, h);
    write_ratings(dir / "validation.tsv", s.validation, h);
    write_ratings(dir / "test.tsv", s.test, h);
    if (c.split.mode == SplitSpec::Mode::kItems) {
      write_index_list(dir / "test_items.txt", s.test_items);
      write_index_list(dir / "validation_items.txt", s.validation_items);
    }
  };
  if (c.split.folds) {
    const auto folds = split_folds(ratings, c.split);
    for (std::size_t f = 0; f < folds.size(); ++f) {
      emit(folds[f], fs::path(c.output_dir) / ("fold_" + std::to_string(f)));
    }
  } else {
    emit(split(ratings, c.split), c.output_dir);
  }
  write_resolved(c);
}

void cmd_synth(const RunConfig& c) {
  const PlantedData data = generate_planted(c.synth);
  const std::uint64_t h = c.hash();
  write_ratings(out_path(c, "observed.tsv"), data.observed, h);
  write_ratings(out_path(c, "heldout.tsv"), data.held_out, h);
  write_ratings(out_path(c, "truth.tsv"), data.truth, h);
  write_features(out_path(c, "features.tsv"), data.features, h);
  const SimilarityBuild sim =
      build_user_similarity(corating_profiles(data.observed), c.similarity_knn);
  write_similarity(out_path(c, "similarity.tsv"), sim.graph, h);
  write_checkpoint(out_path(c, "truth.ckpt"), Model(data.true_weights), h);
  write_resolved(c);
}

std::string trace_to_tsv(const TrainTrace& trace, std::uint64_t config_hash) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "#config: " << hash_hex(config_hash) << "\n";
  out << "#initial_objective: " << trace.initial.objective << "\n";
  out << "iter\tobjective\tdata_loss\tnuclear_norm\trank\tstep\twall_ms\n";
  for (const IterationRecord& r : trace.records) {
    out << r.iter << '\t' << r.objective << '\t' << r.data_loss << '\t'
        << r.nuclear_norm << '\t' << r.rank << '\t' << r.step << '\t'
        << r.wall_ms << '\n';
  }
  return out.str();
}

TrainOutcome cmd_train(const RunConfig& c) {
  require_path(c.train, "data.train");
  require_path(c.features, "data.features");
  if (c.mode == TrainMode::kTacoPlus && c.similarity.empty()) {
    throw ConfigError("train.mode = taco_plus requires data.similarity");
  }
  if (c.mode == TrainMode::kFactored && !c.hp.rank) {
    throw ConfigError("train.mode = factored requires train.rank");
  }
  c.hp.validate();

  const Dataset data =
      make_dataset(read_ratings(c.train), read_features(c.features));
  std::optional<SimilarityGraph> graph;
  if (c.mode == TrainMode::kTacoPlus) graph = read_similarity(c.similarity);
  const SimilarityGraph* g = graph ? &*graph : nullptr;

  Hyperparams hp = c.hp;
  std::string extra;
  if (c.auto_step) {
    hp.step.eta0 = probe_step(data, hp, g, c.mode == TrainMode::kFactored);
    std::ostringstream ss;
    ss << std::setprecision(17) << "# probed train.step.eta0: "
       << hp.step.eta0 << "\n";
    extra = ss.str();
  }

  TrainOutcome outcome;
  outcome.step_used = hp.step.eta0;
  const std::uint64_t h = c.hash();
  fs::create_directories(c.output_dir);
  if (c.mode == TrainMode::kFactored) {
    FactoredTrainResult r = train_factored(data, hp, g);
    outcome.checkpoint_checksum =
        write_checkpoint(out_path(c, "model.ckpt"), r.model, h);
    outcome.trace = std::move(r.trace);
  } else {
    TrainResult r = c.mode == TrainMode::kTacoPlus
                        ? train_taco_plus(data, *graph, hp)
                        : train_taco(data, hp);
    outcome.checkpoint_checksum =
        write_checkpoint(out_path(c, "model.ckpt"), r.model, h);
    outcome.trace = std::move(r.trace);
  }
  write_file(out_path(c, "trace.tsv"), trace_to_tsv(outcome.trace, h));
  write_resolved(c, extra);
  return outcome;
}

MetricTable cmd_evaluate(const RunConfig& c, const fs::path& checkpoint) {
  const RatingMatrix train = read_ratings(require_path(c.train, "data.train"));
  const RatingMatrix test = read_ratings(require_path(c.test, "data.test"));
  const ItemFeatureMatrix features =
      read_features(require_path(c.features, "data.features"));
  const Checkpoint ck = read_checkpoint(checkpoint);
  const Matrix w = ck.weights();
  if (w.rows() != train.n_users() || w.cols() != features.dim()) {
    throw DataError("checkpoint is " + std::to_string(w.rows()) + " x " +
                    std::to_string(w.cols()) + " but the dataset has " +
                    std::to_string(train.n_users()) + " users and " +
                    std::to_string(features.dim()) + " features");
  }
  EvalOptions opts;
  opts.protocol = c.protocol;
  opts.cutoffs = c.cutoffs;
  opts.recall = c.recall;
  if (c.protocol == Protocol::kCold && !c.test_items.empty()) {
    opts.cold_items = read_index_list(c.test_items);
  }
  const MetricTable table = evaluate(w, features, train, test, opts);

  const std::uint64_t h = c.hash();
  fs::create_directories(c.output_dir);
  write_file(out_path(c, "metrics.tsv"),
             "#config: " + hash_hex(h) + "\n" + table.to_tsv());
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(table.to_json());
  j["config_hash"] = hash_hex(h);
  j["protocol"] = c.protocol == Protocol::kWarm ? "warm" : "cold";
  write_file(out_path(c, "metrics.json"), j.dump(2) + "\n");
  write_resolved(c);
  return table;
}

std::vector<Recommendation> cmd_recommend(const fs::path& checkpoint,
                                          const fs::path& features_path,
                                          int user, int n) {
  if (n < 1) throw ConfigError("n must be >= 1");
  const ItemFeatureMatrix features = read_features(features_path);
  const Matrix w = read_checkpoint(checkpoint).weights();
  if (w.cols() != features.dim()) {
    throw DataError("checkpoint dimension does not match the features");
  }
  if (user < 0 || user >= w.rows()) {
    throw DataError("unknown user " + std::to_string(user) + " (model has " +
                    std::to_string(w.rows()) + " users)");
  }
  IndexSet all(features.n_items());
  std::iota(all.begin(), all.end(), 0);
  const Vector wu = w.row(user).transpose();
  const IndexSet ranked = rank_items(wu, features, all);
  std::vector<Recommendation> out;
  for (std::size_t k = 0; k < ranked.size() && k < static_cast<std::size_t>(n);
       ++k) {
    out.push_back({ranked[k], features.dot(ranked[k], wu)});
  }
  return out;
}

}  // namespace taco
