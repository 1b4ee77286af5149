// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apl/dataset/csi_dataset.hpp"

namespace apl::baselines {

struct DtwConfig {
  std::optional<std::size_t> band_radius = 8;  // Sakoe-Chiba radius in time steps
  std::size_t k = 1;
  std::size_t decimation = 3;

  std::string describe() const;
};

/// Series stored frame by frame: frame t occupies values[t*channels .. +channels).
struct TimeMajorSeries {
  std::size_t channels = 0;
  std::size_t length = 0;
  std::vector<float> values;
};

TimeMajorSeries to_time_major(const dataset::SeriesMatrix& series);

/// Keeps every `factor`-th time step starting at 0.
dataset::SeriesMatrix decimate(const dataset::SeriesMatrix& series, std::size_t factor);

/// Dependent multichannel DTW: local cost is the Euclidean distance between
/// frames, steps (i-1,j), (i,j-1), (i-1,j-1); cells with |i-j| > band are
/// forbidden. Throws kInfeasibleBand when no warping path fits the band.
double dtw_distance(const TimeMajorSeries& a, const TimeMajorSeries& b,
                    std::optional<std::size_t> band = std::nullopt);

double dtw_distance(const dataset::SeriesMatrix& a, const dataset::SeriesMatrix& b,
                    std::optional<std::size_t> band = std::nullopt);

/// Row-major float32 distance matrix.
struct DistanceMatrix {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<float> values;

  float at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// Distances from every query to every reference, parallel over queries.
DistanceMatrix dtw_distance_matrix(std::span<const TimeMajorSeries> queries,
                                   std::span<const TimeMajorSeries> references, std::optional<std::size_t> band);

/// "DIST" magic, u32 rows, u32 cols, float32 LE row-major.
std::vector<std::uint8_t> encode_distance_matrix(const DistanceMatrix& m);
DistanceMatrix decode_distance_matrix(std::span<const std::uint8_t> bytes);
void write_distance_matrix(const std::filesystem::path& path, const DistanceMatrix& m);
DistanceMatrix read_distance_matrix(const std::filesystem::path& path);

/// Majority vote among the k nearest references (ties in distance resolved
/// by reference index). Vote ties go to the class with the smaller summed
/// neighbor distance, then to the lower label.
int knn_vote(std::span<const double> distances, std::span<const int> labels, std::size_t k);

}  // namespace apl::baselines
