// SPDX-License-Identifier: Apache-2.0

// Confusion matrices, per-class precision/recall/F1 and the two
// localization-error summaries (mean error over all samples, and mean error
// over misclassified samples only).

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apl/dataset/csi_dataset.hpp"

namespace apl::eval {

/// K x K counts, rows = ground truth, columns = prediction.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t num_classes);

  void add(int truth, int prediction);
  void merge(const ConfusionMatrix& other);

  std::size_t num_classes() const { return k_; }
  std::uint64_t at(std::size_t truth, std::size_t prediction) const { return counts_[truth * k_ + prediction]; }
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t column_sum(std::size_t prediction) const;
  std::uint64_t total() const;
  std::uint64_t trace() const;

  /// trace / total; empty when no samples were counted.
  std::optional<double> accuracy() const;

  std::string to_csv() const;

 private:
  std::size_t k_;
  std::vector<std::uint64_t> counts_;
};

/// Throws kLabel for out-of-range values, kShape for length mismatch.
ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels, std::size_t num_classes);

struct ClassScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ClassMetrics {
  std::vector<ClassScore> per_class;
  double accuracy = 0.0;
  /// Human-readable notes for zero denominators (reported as 0).
  std::vector<std::string> warnings;
};

/// Throws kValidation on an empty matrix.
ClassMetrics class_metrics(const ConfusionMatrix& cm);

/// 2PR / (P + R), or 0 when P + R == 0.
double f1_score(double precision, double recall);

/// `class,precision,recall,f1` with values rounded half-up to 2 decimals.
std::string class_metrics_csv(const ClassMetrics& metrics);

/// Half-up rounding to `decimals` places.
double round_half_up(double value, int decimals);

enum class DistanceMode { kEuclidean, kSquaredEuclidean };

double location_distance(int predicted, int truth, const dataset::CoordinateMap& coords,
                         DistanceMode mode = DistanceMode::kEuclidean);

/// Mean distance between predicted and true coordinates over all N samples.
double ale(std::span<const int> predicted, std::span<const int> truth, const dataset::CoordinateMap& coords,
           DistanceMode mode = DistanceMode::kEuclidean);

/// Mean distance over the M misclassified samples; empty when M == 0.
std::optional<double> ame(std::span<const int> predicted, std::span<const int> truth,
                          const dataset::CoordinateMap& coords, DistanceMode mode = DistanceMode::kEuclidean);

struct SummaryRow {
  std::string task;
  std::optional<double> accuracy;
  std::optional<double> ale_m;
  std::optional<double> ame_m;
};

/// `task,accuracy,ale_m,ame_m`; missing values are written as `n/a`.
std::string summary_csv(std::span<const SummaryRow> rows);

}  // namespace apl::eval
