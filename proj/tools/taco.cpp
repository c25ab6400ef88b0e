// taco: batch front-end for semi-supervised push-at-top collaborative
// ranking. Subcommands: ingest, split, synth, train, evaluate, recommend.
//
// Exit status: 0 success, 2 configuration error, 3 data error,
// 4 numeric failure. Errors are also printed to stderr as one JSON record.
//
// Thread count comes from TACO_NUM_THREADS only; every other knob lives
// in the config file or --set overrides.

#include <omp.h>

#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "taco/commands.hpp"
#include "taco/config.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

int report(const char* kind, const std::string& message, int code) {
  nlohmann::ordered_json j;
  j["error"] = {{"kind", kind}, {"message", message}};
  j["exit_code"] = code;
  std::cerr << j.dump() << std::endl;
  return code;
}

void apply_thread_env() {
  if (const char* env = std::getenv("TACO_NUM_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) {
      omp_set_dynamic(0);
      omp_set_num_threads(n);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_env();

  CLI::App app{"Top-heavy ranking models over item features"};
  app.require_subcommand(1);

  std::string config_file;
  std::vector<std::string> overrides;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_file, "key = value config file");
    sub->add_option("-s,--set", overrides,
                    "override a config key (key=value), repeatable");
  };

  auto* ingest = app.add_subcommand("ingest", "binarize raw ratings, build "
                                              "TF-IDF features and the user "
                                              "similarity graph");
  add_config(ingest);
  auto* split = app.add_subcommand("split", "split ratings into shards");
  add_config(split);
  auto* synth = app.add_subcommand("synth", "generate a planted dataset");
  add_config(synth);
  auto* train = app.add_subcommand("train", "train a model");
  add_config(train);

  auto* evaluate = app.add_subcommand("evaluate", "compute DCG/NDCG/REC");
  add_config(evaluate);
  std::string checkpoint;
  evaluate->add_option("--checkpoint", checkpoint, "model checkpoint")
      ->required();

  auto* recommend = app.add_subcommand("recommend", "top-n items for a user");
  std::string rec_checkpoint, rec_features;
  int rec_user = 0;
  int rec_n = 10;
  recommend->add_option("--checkpoint", rec_checkpoint)->required();
  recommend->add_option("--features", rec_features)->required();
  recommend->add_option("--user", rec_user, "user index")->required();
  recommend->add_option("-n", rec_n, "list length");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("config", e.what(), kExitConfig);
  }

  try {
    if (recommend->parsed()) {
      const auto list = taco::cmd_recommend(rec_checkpoint, rec_features,
                                            rec_user, rec_n);
      std::cout << "rank\titem\tscore\n" << std::setprecision(17);
      for (std::size_t k = 0; k < list.size(); ++k) {
        std::cout << k + 1 << '\t' << list[k].item << '\t' << list[k].score
                  << '\n';
      }
      return 0;
    }

    const taco::RunConfig config = taco::load_config(config_file, overrides);
    if (ingest->parsed()) {
      std::cout << taco::cmd_ingest(config).to_json() << std::endl;
    } else if (split->parsed()) {
      taco::cmd_split(config);
    } else if (synth->parsed()) {
      taco::cmd_synth(config);
    } else if (train->parsed()) {
      const auto outcome = taco::cmd_train(config);
      nlohmann::ordered_json j;
      j["checkpoint_checksum"] = taco::hash_hex(outcome.checkpoint_checksum);
      j["iterations"] = outcome.trace.records.size();
      j["initial_objective"] = outcome.trace.initial.objective;
      j["final_objective"] = outcome.trace.records.empty()
                                 ? outcome.trace.initial.objective
                                 : outcome.trace.records.back().objective;
      j["step_eta0"] = outcome.step_used;
      std::cout << j.dump(2) << std::endl;
    } else if (evaluate->parsed()) {
      std::cout << taco::cmd_evaluate(config, checkpoint).to_tsv();
    }
  } catch (const taco::ConfigError& e) {
    return report("config", e.what(), kExitConfig);
  } catch (const taco::NumericError& e) {
    return report("numeric", e.what(), kExitNumeric);
  } catch (const taco::DataError& e) {
    return report("data", e.what(), kExitData);
  } catch (const std::filesystem::filesystem_error& e) {
    return report("data", e.what(), kExitData);
  }
  return 0;
}
