#pragma once

#include "mmffc/data.hpp"
#include "mmffc/federation.hpp"
#include "mmffc/io.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mmffc {

/// Everything needed to reproduce one run: data location, hold-out protocol,
/// partitioning and the federated construction settings.
struct ExperimentConfig {
  std::string name;
  std::string dataset;
  std::string label_column;
  /// Optional partition file; its indices refer to rows of the full dataset
  /// and only the training rows of each client are used.
  std::string partition;
  PartitionMode mode = PartitionMode::kIid;
  int shards = 2;
  double test_fraction = 0.3;
  int min_leaf = 2;
  RunConfig run;

  /// Unknown keys are rejected. Relative paths resolve against `base_dir`.
  static ExperimentConfig from_json(json j, const std::string& base_dir = "");
  json to_json() const;
  void validate() const;
};

struct ExperimentResult {
  json results;
  std::vector<RoundRecord> rounds;
  std::vector<ConstructedFeature> features;

  std::string results_text() const;
  std::string rounds_text() const;
  std::string features_text() const;
};

/// Split, partition, federated construction, then C4.5 on the constructed
/// and on the original features over the same split.
ExperimentResult run_experiment(const ExperimentConfig& config, int threads = 1, const RunObserver& observer = {});

/// Writes results.json, rounds.jsonl and features.json into `out_dir`.
/// Nothing is left behind if any write fails.
void write_outputs(const ExperimentResult& result, const std::string& out_dir);

}  // namespace mmffc
