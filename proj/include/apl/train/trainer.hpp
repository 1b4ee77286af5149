// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apl/dataset/csi_dataset.hpp"
#include "apl/model/resnet1d.hpp"
#include "apl/train/adam.hpp"
#include "apl/train/loss.hpp"

namespace apl::train {

struct TrainConfig {
  int epochs = 200;
  int batch_size = 128;
  double lr0 = 0.005;
  double decay = 0.5;
  int decay_every = 10;
  double lambda = 1.0;
  std::uint64_t seed = 0;
};

/// Keys: epochs, batch_size, lr0, decay, decay_every, lambda, seed.
TrainConfig read_train_config(const std::filesystem::path& path);
void write_train_config(const std::filesystem::path& path, const TrainConfig& config);
void validate(const TrainConfig& config);

/// lr0 * decay^floor(epoch / decay_every).
double lr_schedule(int epoch, const TrainConfig& config);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double act_train_acc = 0.0;
  double act_test_acc = 0.0;
  double loc_train_acc = 0.0;
  double loc_test_acc = 0.0;
  JointLossValue train_parts;
  JointLossValue test_parts;
};

struct LearningCurve {
  std::vector<EpochRecord> records;
};

/// `epoch,train_loss,test_loss,act_train_acc,act_test_acc,loc_train_acc,loc_test_acc`
std::string curve_csv(const LearningCurve& curve);
/// Per-task loss parts: `epoch,train_activity,train_location,test_activity,test_location`
std::string loss_parts_csv(const LearningCurve& curve);

/// Packs fingerprints into a [B, C, L] tensor plus label vectors.
struct Batch {
  Tensor<float> inputs;
  std::vector<int> activities;
  std::vector<int> locations;
};

Batch make_batch(std::span<const dataset::CsiFingerprint> fps, std::span<const std::size_t> indices);

/// Eval-mode predictions and mean joint loss over a set of samples.
struct SplitEvaluation {
  JointLossValue loss;
  std::vector<int> activity_pred;
  std::vector<int> location_pred;
  double activity_accuracy = 0.0;
  double location_accuracy = 0.0;
};

SplitEvaluation evaluate_split(model::ResNet1D<float>& net, std::span<const dataset::CsiFingerprint> fps,
                               double lambda = 1.0, std::size_t batch_size = 128);

struct TrainOptions {
  /// Checkpoint, curve and loss-part files are rewritten here after every epoch.
  std::optional<std::filesystem::path> out_dir;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  LearningCurve curve;
  std::uint64_t steps = 0;
};

inline constexpr char kCheckpointFile[] = "checkpoint.ckpt";
inline constexpr char kCurveFile[] = "learning_curve.csv";
inline constexpr char kLossPartsFile[] = "loss_parts.csv";

/// Mini-batch Adam training on standardized fingerprints. Each epoch shuffles
/// the training indices with a seeded permutation, runs every mini-batch
/// (the last one may be partial) in train mode, then measures both splits in
/// eval mode.
TrainResult train(model::ResNet1D<float>& net, std::span<const dataset::CsiFingerprint> train_set,
                  std::span<const dataset::CsiFingerprint> test_set, const TrainConfig& config,
                  const TrainOptions& options = {});

}  // namespace apl::train
