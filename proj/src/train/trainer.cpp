// SPDX-License-Identifier: Apache-2.0

#include "apl/train/trainer.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "apl/common/error.hpp"
#include "apl/common/io.hpp"
#include "apl/common/random.hpp"
#include "apl/tensor/checkpoint.hpp"

namespace apl::train {

void validate(const TrainConfig& c) {
  if (c.epochs < 1) fail(ErrorCode::kConfig, "epochs must be at least 1");
  if (c.batch_size < 1) fail(ErrorCode::kConfig, "batch_size must be at least 1");
  if (!(c.lr0 > 0.0)) fail(ErrorCode::kConfig, "lr0 must be positive");
  if (!(c.decay > 0.0)) fail(ErrorCode::kConfig, "decay must be positive");
  if (c.decay_every < 1) fail(ErrorCode::kConfig, "decay_every must be at least 1");
  if (!(c.lambda >= 0.0)) fail(ErrorCode::kConfig, "lambda must be non-negative");
}

TrainConfig read_train_config(const std::filesystem::path& path) {
  TrainConfig c;
  for (const auto& [key, value] : io::read_key_values(path)) {
    if (key == "epochs") {
      c.epochs = static_cast<int>(io::parse_int(value, key));
    } else if (key == "batch_size") {
      c.batch_size = static_cast<int>(io::parse_int(value, key));
    } else if (key == "lr0") {
      c.lr0 = io::parse_double(value, key);
    } else if (key == "decay") {
      c.decay = io::parse_double(value, key);
    } else if (key == "decay_every") {
      c.decay_every = static_cast<int>(io::parse_int(value, key));
    } else if (key == "lambda") {
      c.lambda = io::parse_double(value, key);
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(io::parse_int(value, key));
    } else {
      fail(ErrorCode::kConfig, "unknown training config key `" + key + "`");
    }
  }
  validate(c);
  return c;
}

void write_train_config(const std::filesystem::path& path, const TrainConfig& c) {
  std::ostringstream out;
  out << "epochs=" << c.epochs << '\n'
      << "batch_size=" << c.batch_size << '\n'
      << "lr0=" << io::format_double(c.lr0) << '\n'
      << "decay=" << io::format_double(c.decay) << '\n'
      << "decay_every=" << c.decay_every << '\n'
      << "lambda=" << io::format_double(c.lambda) << '\n'
      << "seed=" << c.seed << '\n';
  io::write_text(path, out.str());
}

double lr_schedule(int epoch, const TrainConfig& config) {
  if (epoch < 0) fail(ErrorCode::kConfig, "epoch must be non-negative");
  return config.lr0 * std::pow(config.decay, epoch / config.decay_every);
}

std::string curve_csv(const LearningCurve& curve) {
  std::ostringstream out;
  out << "epoch,train_loss,test_loss,act_train_acc,act_test_acc,loc_train_acc,loc_test_acc\n";
  for (const auto& r : curve.records) {
    out << r.epoch << ',' << io::format_double(r.train_loss) << ',' << io::format_double(r.test_loss) << ','
        << io::format_double(r.act_train_acc) << ',' << io::format_double(r.act_test_acc) << ','
        << io::format_double(r.loc_train_acc) << ',' << io::format_double(r.loc_test_acc) << '\n';
  }
  return out.str();
}

std::string loss_parts_csv(const LearningCurve& curve) {
  std::ostringstream out;
  out << "epoch,train_activity,train_location,test_activity,test_location\n";
  for (const auto& r : curve.records) {
    out << r.epoch << ',' << io::format_double(r.train_parts.activity_part) << ','
        << io::format_double(r.train_parts.location_part) << ',' << io::format_double(r.test_parts.activity_part)
        << ',' << io::format_double(r.test_parts.location_part) << '\n';
  }
  return out.str();
}

Batch make_batch(std::span<const dataset::CsiFingerprint> fps, std::span<const std::size_t> indices) {
  if (indices.empty()) fail(ErrorCode::kShape, "make_batch: empty batch");
  const auto& first = fps[indices.front()].amplitudes;
  Batch batch;
  batch.inputs = Tensor<float>({indices.size(), first.channels, first.length});
  const std::size_t stride = first.channels * first.length;
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const auto& fp = fps[indices[b]];
    if (fp.amplitudes.values.size() != stride) fail(ErrorCode::kShape, "make_batch: samples differ in shape");
    std::copy(fp.amplitudes.values.begin(), fp.amplitudes.values.end(),
              batch.inputs.data.begin() + static_cast<std::ptrdiff_t>(b * stride));
    batch.activities.push_back(fp.activity);
    batch.locations.push_back(fp.location);
  }
  return batch;
}

SplitEvaluation evaluate_split(model::ResNet1D<float>& net, std::span<const dataset::CsiFingerprint> fps,
                               double lambda, std::size_t batch_size) {
  SplitEvaluation ev;
  ev.loss.lambda = lambda;
  if (fps.empty()) return ev;
  std::size_t act_correct = 0;
  std::size_t loc_correct = 0;
  for (std::size_t start = 0; start < fps.size(); start += batch_size) {
    const std::size_t end = std::min(fps.size(), start + batch_size);
    std::vector<std::size_t> idx(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const Batch batch = make_batch(fps, idx);
    const auto out = net.forward(batch.inputs, Mode::kEval);
    const auto loss = joint_loss(out.activity, out.location, batch.activities, batch.locations, lambda);
    const double weight = static_cast<double>(idx.size());
    ev.loss.activity_part += loss.value.activity_part * weight;
    ev.loss.location_part += loss.value.location_part * weight;
    for (int p : argmax_rows(out.activity)) ev.activity_pred.push_back(p);
    for (int p : argmax_rows(out.location)) ev.location_pred.push_back(p);
  }
  const double n = static_cast<double>(fps.size());
  ev.loss.activity_part /= n;
  ev.loss.location_part /= n;
  ev.loss.total = ev.loss.activity_part + lambda * ev.loss.location_part;
  for (std::size_t i = 0; i < fps.size(); ++i) {
    act_correct += ev.activity_pred[i] == fps[i].activity ? 1 : 0;
    loc_correct += ev.location_pred[i] == fps[i].location ? 1 : 0;
  }
  ev.activity_accuracy = static_cast<double>(act_correct) / n;
  ev.location_accuracy = static_cast<double>(loc_correct) / n;
  return ev;
}

namespace {

void persist(const TrainOptions& options, model::ResNet1D<float>& net, const LearningCurve& curve) {
  if (!options.out_dir) return;
  write_checkpoint(*options.out_dir / kCheckpointFile, to_records(net.tensors()));
  io::write_text(*options.out_dir / kCurveFile, curve_csv(curve));
  io::write_text(*options.out_dir / kLossPartsFile, loss_parts_csv(curve));
}

}  // namespace

TrainResult train(model::ResNet1D<float>& net, std::span<const dataset::CsiFingerprint> train_set,
                  std::span<const dataset::CsiFingerprint> test_set, const TrainConfig& config,
                  const TrainOptions& options) {
  validate(config);
  if (train_set.empty()) fail(ErrorCode::kConfig, "training set is empty");
  if (options.out_dir) std::filesystem::create_directories(*options.out_dir);

  Rng shuffle_rng(config.seed + seed_offset::kShuffle);
  AdamState adam;
  TrainResult result;
  const auto params = net.trainable();
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_schedule(epoch, config);
    const auto order = shuffle_rng.permutation(train_set.size());
    try {
      for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t end = std::min(order.size(), start + batch_size);
        const Batch batch = make_batch(train_set, std::span<const std::size_t>(order).subspan(start, end - start));
        net.zero_grad();
        const auto out = net.forward(batch.inputs, Mode::kTrain);
        const auto loss = joint_loss(out.activity, out.location, batch.activities, batch.locations, config.lambda);
        if (!std::isfinite(loss.value.total)) fail(ErrorCode::kNumeric, "training loss became non-finite");
        net.backward(loss.grad_activity, loss.grad_location);
        adam_step(params, adam, lr);
        ++result.steps;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNumeric) throw;
      const std::string kept = result.curve.records.empty()
                                   ? "no checkpoint was written"
                                   : "checkpoint of epoch " + std::to_string(result.curve.records.back().epoch) +
                                         " kept";
      fail(ErrorCode::kNumeric, std::string(e.what()) + " during epoch " + std::to_string(epoch + 1) + "; " + kept);
    }

    const auto train_eval = evaluate_split(net, train_set, config.lambda);
    const auto test_eval = evaluate_split(net, test_set, config.lambda);
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.train_loss = train_eval.loss.total;
    rec.test_loss = test_eval.loss.total;
    rec.act_train_acc = train_eval.activity_accuracy;
    rec.act_test_acc = test_eval.activity_accuracy;
    rec.loc_train_acc = train_eval.location_accuracy;
    rec.loc_test_acc = test_eval.location_accuracy;
    rec.train_parts = train_eval.loss;
    rec.test_parts = test_eval.loss;
    result.curve.records.push_back(rec);
    persist(options, net, result.curve);
    if (options.on_epoch) options.on_epoch(rec);
  }
  return result;
}

}  // namespace apl::train
