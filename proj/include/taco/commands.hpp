#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "taco/config.hpp"
#include "taco/evaluation.hpp"
#include "taco/optimizer.hpp"

namespace taco {

// Library side of the `taco` subcommands. Each reads its inputs from the
// config, writes into config.output_dir, and re-emits the resolved config
// as resolved.cfg. Errors propagate as ConfigError / DataError /
// NumericError.

struct IngestSummary {
  int n_users = 0;
  int n_items = 0;
  std::size_t n_ratings = 0;
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
  int n_features = 0;  // 0 when no term file was given

  std::string to_json() const;
};

// raw_ratings (+ raw_terms) -> ratings.tsv, users.tsv, items.tsv,
// [features.tsv, vocabulary.tsv, similarity.tsv]
IngestSummary cmd_ingest(const RunConfig& config);

// ratings -> train.tsv, validation.tsv, test.tsv (+ test_items.txt in
// items mode), or fold_<k>/ subdirectories when folds are configured.
void cmd_split(const RunConfig& config);

// Planted generator -> observed.tsv, heldout.tsv, truth.tsv,
// features.tsv, similarity.tsv and the oracle checkpoint truth.ckpt.
void cmd_synth(const RunConfig& config);

struct TrainOutcome {
  std::uint64_t checkpoint_checksum = 0;
  TrainTrace trace;
  double step_used = 0.0;  // eta0 after the optional auto-probe
};

// train + features (+ similarity) -> model.ckpt, trace.tsv. All config
// checks happen before any data is read.
TrainOutcome cmd_train(const RunConfig& config);

// checkpoint + train + test + features -> metrics.tsv, metrics.json
MetricTable cmd_evaluate(const RunConfig& config,
                         const std::filesystem::path& checkpoint);

struct Recommendation {
  int item = 0;
  double score = 0.0;
};

// Top-n items for one user over every item, ties by index.
std::vector<Recommendation> cmd_recommend(
    const std::filesystem::path& checkpoint,
    const std::filesystem::path& features, int user, int n);

std::string trace_to_tsv(const TrainTrace& trace, std::uint64_t config_hash);

}  // namespace taco
