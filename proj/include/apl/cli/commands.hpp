// SPDX-License-Identifier: Apache-2.0

// Subcommand implementations behind the `apl` executable. Each writes its
// outputs plus a run_manifest.json into the output directory.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "apl/baselines/dtw.hpp"
#include "apl/baselines/svm.hpp"
#include "apl/eval/metrics.hpp"
#include "apl/model/resnet1d.hpp"
#include "apl/train/trainer.hpp"

namespace apl::cli {

namespace fs = std::filesystem;

inline constexpr char kRunManifestFile[] = "run_manifest.json";
inline constexpr char kNetworkSpecFile[] = "network_spec.txt";
inline constexpr char kTrainConfigFile[] = "train_config.txt";

/// `<dir>/<stem>.manifest.csv` for a container `<dir>/<stem>.<ext>`.
fs::path default_manifest_path(const fs::path& container);

struct ConvertOptions {
  fs::path raw_dir;
  fs::path out_container;
  std::optional<fs::path> manifest;  // default: default_manifest_path(out_container)
  std::optional<fs::path> annotations;
  std::size_t split_phase = 4;
};

struct ConvertResult {
  std::size_t samples = 0;
  std::size_t train = 0;
  std::size_t test = 0;
  fs::path manifest;
};

ConvertResult cmd_convert(const ConvertOptions& options);

struct TrainCommandOptions {
  fs::path container;
  std::optional<fs::path> manifest;
  model::NetworkSpec network;
  train::TrainConfig config;
  std::optional<std::uint64_t> seed;  // overrides both spec and config seeds
  fs::path out_dir;
  std::function<void(const train::EpochRecord&)> on_epoch;
};

train::TrainResult cmd_train(const TrainCommandOptions& options);

struct EvalCommandOptions {
  fs::path container;
  std::optional<fs::path> manifest;
  fs::path checkpoint;
  std::optional<fs::path> network_spec;  // default: network_spec.txt beside the checkpoint
  std::optional<fs::path> coordinates;
  eval::DistanceMode distance = eval::DistanceMode::kEuclidean;
  fs::path out_dir;
};

struct EvalReport {
  eval::ConfusionMatrix activity{6};
  eval::ConfusionMatrix location{16};
  eval::ClassMetrics activity_metrics;
  eval::ClassMetrics location_metrics;
  std::optional<double> ale_m;
  std::optional<double> ame_m;
  std::vector<std::string> warnings;
};

EvalReport cmd_eval(const EvalCommandOptions& options);

struct BaselineCommandOptions {
  fs::path container;
  std::optional<fs::path> manifest;
  std::string method;  // dtw-knn | svm-rbf
  baselines::DtwConfig dtw;
  baselines::SvmConfig svm;
  fs::path out_dir;
};

struct BaselineRow {
  std::string method;
  std::string task;
  double accuracy = 0.0;
  std::string config;
  double wall_seconds = 0.0;
};

std::vector<BaselineRow> cmd_baseline(const BaselineCommandOptions& options);

struct ExportCommandOptions {
  fs::path container;
  std::optional<fs::path> manifest;
  fs::path checkpoint;
  std::optional<fs::path> network_spec;
  std::vector<std::string> taps;
  fs::path out_dir;
};

/// Returns the written CSV paths, one per tap.
std::vector<fs::path> cmd_export_features(const ExportCommandOptions& options);

}  // namespace apl::cli
