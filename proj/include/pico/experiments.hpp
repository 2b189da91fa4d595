#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pico/metrics.hpp"
#include "pico/training.hpp"

namespace pico {

inline constexpr const char* kToolVersion = "0.1.0";

struct DatasetParams {
  // blockworld: one pool of n demos, split per run seed.
  int n = 100;
  double train_fraction = 0.8;
  // dialpad: fixed train/test pools.
  int n_train = 1200;
  int n_test = 280;
  int keys = 10;
  int sketch_len = 4;
  double noise_std = 0.01;
  std::uint64_t seed = 12345;  // generation seed
  bool generate = true;        // generate in memory when no files are given
  std::string file;            // blockworld dataset file (optional)
  std::string train_file, test_file;  // dialpad files (optional)
};

struct ModelParams {
  int encoder_dim = 64;
  int hidden_dim = 64;
  std::vector<int> primitive_hidden = {64, 64};
};

struct ExperimentConfig {
  std::string kind = "reconstruct";   // reconstruct|gap_ablation|compare_baselines|latent
  std::string domain = "blockworld";  // blockworld|dialpad
  std::string out_dir = "runs/out";
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  int threads = 1;
  std::string format = "csv";  // csv|json
  DatasetParams dataset;
  ModelParams model;
  TrainConfig train;     // metacontroller / end-to-end training
  TrainConfig pretrain;  // behavior cloning

  ExperimentConfig();

  void validate() const;
  std::string to_json_string() const;
  static ExperimentConfig from_json_string(const std::string& text);
  static ExperimentConfig from_file(const std::filesystem::path& path);
  // FNV-1a hash of the canonical serialization, as fixed-width hex.
  std::string hash() const;
};

struct MetricRow {
  std::string method;     // pico | ctc
  std::string condition;  // all | drop_<primitive> | -
  std::uint64_t seed = 0;
  double label_accuracy = 0.0;
  double action_mse = 0.0;
  double train_loss = 0.0;  // final epoch
  std::optional<double> gap_claim_fraction;
  std::optional<double> gap_action_mse;
  std::optional<double> ref_action_mse;
};

struct Aggregate {
  std::string method, condition, metric;
  double mean = 0.0, stddev = 0.0;
  int n = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<MetricRow> rows;
  std::vector<Aggregate> aggregates;
  std::vector<std::string> files;  // inventory, relative to out_dir
  double wall_clock_seconds = 0.0;
};

// Runs the configured experiment across all seeds, writes metric CSVs,
// per-seed artifacts, a summary table, a column schema, and a manifest under
// config.out_dir.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Writes dataset files for the configured domain and returns their paths.
std::vector<std::string> generate_dataset_files(const ExperimentConfig& config);

// Rolls out the test split under the checkpoint, projects the hidden states
// to 2-D, writes x,y,label CSV to out_csv. Returns the projection.
LatentProjection run_latent(const ExperimentConfig& config,
                            const std::filesystem::path& checkpoint_path,
                            const std::filesystem::path& out_csv);

// One-line summary of a dataset file (count, T range, K, sketch stats).
std::string inspect_dataset(const std::filesystem::path& path);

// Human-readable aggregate table; plain disables ANSI styling.
std::string format_summary(const ExperimentResult& result, bool plain);
// True when NO_COLOR or PICO_PLAIN requests unstyled output.
bool plain_output_env();

// Building blocks shared by experiments and tests.
namespace detail {

// Pretrains one policy per ground-truth label from the demos. Ids follow the
// domain: reach/grasp/lift for blockworld (K=3) and key<k> otherwise.
std::vector<PrimitivePolicy> pretrain_library(std::span<const Demonstration> demos,
                                              const DatasetInfo& info, const ModelParams& model,
                                              const TrainConfig& pretrain_cfg,
                                              std::uint64_t seed);

std::string primitive_name(const std::string& domain, int label);

// Builds a network whose slot k holds the policy for label k; slots listed in
// `gap_slots` get a randomly initialized gap primitive instead.
PicoNetwork build_network(const std::vector<const PrimitivePolicy*>& slot_policies,
                          const std::vector<int>& gap_slots, const DatasetInfo& info,
                          const ModelParams& model, std::uint64_t seed);

struct PicoEvaluation {
  EvaluationReport report;
  std::vector<std::vector<RolloutRecord>> rollouts;
};

PicoEvaluation evaluate_pico(const PicoNetwork& net, std::span<const Demonstration> demos);

}  // namespace detail

}  // namespace pico
