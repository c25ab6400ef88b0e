#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "taco/data_io.hpp"
#include "taco/data_pipeline.hpp"
#include "taco/domain.hpp"
#include "taco/evaluation.hpp"

namespace taco {

enum class TrainMode { kTaco, kTacoPlus, kFactored };

// Everything a run depends on besides the input files. Stored as a flat
// `key = value` document; see README for the key reference.
struct RunConfig {
  // Inputs. Empty means "not configured".
  std::string raw_ratings;  // ingest: external ratings file
  std::string raw_terms;    // ingest: item term counts
  std::string ratings;      // split: canonical ratings
  std::string train;
  std::string validation;
  std::string test;
  std::string test_items;  // cold protocol candidate list
  std::string features;
  std::string similarity;

  bool binarize = false;
  BinarizeRule rule;
  int tfidf_min_items = 20;
  double tfidf_max_frac = 0.20;
  int similarity_knn = 10;

  SplitSpec split;

  TrainMode mode = TrainMode::kTaco;
  Hyperparams hp;
  bool auto_step = false;

  Protocol protocol = Protocol::kWarm;
  std::vector<int> cutoffs = {5, 10, 15, 20};
  RecallMode recall = RecallMode::kListSize;

  PlantedSpec synth;

  std::string output_dir = ".";

  std::map<std::string, std::string> to_kv() const;
  // Canonical text: one `key = value` per line, keys sorted.
  std::string to_text() const;
  // FNV-1a over the canonical text without output.dir.
  std::uint64_t hash() const;

  static RunConfig from_kv(const std::map<std::string, std::string>& kv);
};

// Parses `key = value` lines ('#' starts a comment). Throws ConfigError on
// malformed lines or unknown keys.
std::map<std::string, std::string> parse_kv(const std::string& text,
                                            const std::string& source);

// Reads an optional config file, applies `key=value` overrides, expands
// `${key}` references and validates the result.
RunConfig load_config(const std::filesystem::path& file,
                      const std::vector<std::string>& overrides);

std::string hash_hex(std::uint64_t h);

std::string to_string(TrainMode mode);

}  // namespace taco
