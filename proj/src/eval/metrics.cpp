// SPDX-License-Identifier: Apache-2.0

#include "apl/eval/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "apl/common/error.hpp"
#include "apl/common/io.hpp"

namespace apl::eval {

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes) : k_(num_classes), counts_(num_classes * num_classes, 0) {
  if (num_classes == 0) fail(ErrorCode::kConfig, "confusion matrix needs at least one class");
}

void ConfusionMatrix::add(int truth, int prediction) {
  const auto k = static_cast<int>(k_);
  if (truth < 0 || truth >= k || prediction < 0 || prediction >= k) {
    fail(ErrorCode::kLabel, "label pair (" + std::to_string(truth) + ", " + std::to_string(prediction) +
                                ") outside 0.." + std::to_string(k - 1));
  }
  ++counts_[static_cast<std::size_t>(truth) * k_ + static_cast<std::size_t>(prediction)];
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.k_ != k_) fail(ErrorCode::kShape, "cannot merge confusion matrices of different sizes");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < k_; ++p) s += at(truth, p);
  return s;
}

std::uint64_t ConfusionMatrix::column_sum(std::size_t prediction) const {
  std::uint64_t s = 0;
  for (std::size_t t = 0; t < k_; ++t) s += at(t, prediction);
  return s;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t s = 0;
  for (auto c : counts_) s += c;
  return s;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < k_; ++i) s += at(i, i);
  return s;
}

std::optional<double> ConfusionMatrix::accuracy() const {
  const auto n = total();
  if (n == 0) return std::nullopt;
  return static_cast<double>(trace()) / static_cast<double>(n);
}

std::string ConfusionMatrix::to_csv() const {
  std::ostringstream out;
  out << "truth";
  for (std::size_t p = 0; p < k_; ++p) out << ",pred_" << p;
  out << '\n';
  for (std::size_t t = 0; t < k_; ++t) {
    out << t;
    for (std::size_t p = 0; p < k_; ++p) out << ',' << at(t, p);
    out << '\n';
  }
  return out.str();
}

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels, std::size_t num_classes) {
  if (predictions.size() != labels.size()) {
    fail(ErrorCode::kShape, "confusion: " + std::to_string(predictions.size()) + " predictions for " +
                                std::to_string(labels.size()) + " labels");
  }
  ConfusionMatrix cm(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) cm.add(labels[i], predictions[i]);
  return cm;
}

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

ClassMetrics class_metrics(const ConfusionMatrix& cm) {
  const auto acc = cm.accuracy();
  if (!acc) fail(ErrorCode::kValidation, "class metrics need a non-empty confusion matrix");
  ClassMetrics m;
  m.accuracy = *acc;
  for (std::size_t k = 0; k < cm.num_classes(); ++k) {
    ClassScore s;
    const auto col = cm.column_sum(k);
    const auto row = cm.row_sum(k);
    const auto diag = static_cast<double>(cm.at(k, k));
    if (col > 0) {
      s.precision = diag / static_cast<double>(col);
    } else {
      m.warnings.push_back("class " + std::to_string(k) + ": never predicted, precision reported as 0");
    }
    if (row > 0) {
      s.recall = diag / static_cast<double>(row);
    } else {
      m.warnings.push_back("class " + std::to_string(k) + ": absent from ground truth, recall reported as 0");
    }
    s.f1 = f1_score(s.precision, s.recall);
    m.per_class.push_back(s);
  }
  return m;
}

double round_half_up(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  // The nudge keeps decimal ties such as 0.845 (stored as 0.84499999...) rounding up.
  return std::floor(value * scale + 0.5 + 1e-9) / scale;
}

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace

std::string class_metrics_csv(const ClassMetrics& metrics) {
  std::ostringstream out;
  out << "class,precision,recall,f1\n";
  for (std::size_t k = 0; k < metrics.per_class.size(); ++k) {
    const auto& s = metrics.per_class[k];
    out << k << ',' << fixed(round_half_up(s.precision, 2), 2) << ',' << fixed(round_half_up(s.recall, 2), 2) << ','
        << fixed(round_half_up(s.f1, 2), 2) << '\n';
  }
  return out.str();
}

double location_distance(int predicted, int truth, const dataset::CoordinateMap& coords, DistanceMode mode) {
  const auto p = coords.find(predicted);
  const auto t = coords.find(truth);
  if (p == coords.end() || t == coords.end()) {
    fail(ErrorCode::kConfig, "no coordinate for location " + std::to_string(p == coords.end() ? predicted : truth));
  }
  const double dx = p->second.x_m - t->second.x_m;
  const double dy = p->second.y_m - t->second.y_m;
  const double sq = dx * dx + dy * dy;
  return mode == DistanceMode::kEuclidean ? std::sqrt(sq) : sq;
}

double ale(std::span<const int> predicted, std::span<const int> truth, const dataset::CoordinateMap& coords,
           DistanceMode mode) {
  if (predicted.size() != truth.size()) fail(ErrorCode::kShape, "ale: prediction and truth lengths differ");
  if (truth.empty()) fail(ErrorCode::kValidation, "ale needs at least one sample");
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) sum += location_distance(predicted[i], truth[i], coords, mode);
  return sum / static_cast<double>(truth.size());
}

std::optional<double> ame(std::span<const int> predicted, std::span<const int> truth,
                          const dataset::CoordinateMap& coords, DistanceMode mode) {
  if (predicted.size() != truth.size()) fail(ErrorCode::kShape, "ame: prediction and truth lengths differ");
  double sum = 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] == truth[i]) continue;
    sum += location_distance(predicted[i], truth[i], coords, mode);
    ++wrong;
  }
  if (wrong == 0) return std::nullopt;
  return sum / static_cast<double>(wrong);
}

std::string summary_csv(std::span<const SummaryRow> rows) {
  auto cell = [](const std::optional<double>& v) { return v ? fixed(*v, 6) : std::string("n/a"); };
  std::ostringstream out;
  out << "task,accuracy,ale_m,ame_m\n";
  for (const auto& r : rows) {
    out << r.task << ',' << cell(r.accuracy) << ',' << cell(r.ale_m) << ',' << cell(r.ame_m) << '\n';
  }
  return out.str();
}

}  // namespace apl::eval
