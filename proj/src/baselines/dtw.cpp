// SPDX-License-Identifier: Apache-2.0

#include "apl/baselines/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "apl/common/error.hpp"
#include "apl/common/io.hpp"
#include "apl/common/parallel.hpp"

namespace apl::baselines {

std::string DtwConfig::describe() const {
  return "k=" + std::to_string(k) + ";band=" + (band_radius ? std::to_string(*band_radius) : std::string("none")) +
         ";decimation=" + std::to_string(decimation);
}

TimeMajorSeries to_time_major(const dataset::SeriesMatrix& series) {
  TimeMajorSeries out{series.channels, series.length, std::vector<float>(series.values.size())};
  for (std::size_t c = 0; c < series.channels; ++c) {
    for (std::size_t t = 0; t < series.length; ++t) out.values[t * series.channels + c] = series.at(c, t);
  }
  return out;
}

dataset::SeriesMatrix decimate(const dataset::SeriesMatrix& series, std::size_t factor) {
  if (factor == 0) fail(ErrorCode::kConfig, "decimation factor must be at least 1");
  const std::size_t len = (series.length + factor - 1) / factor;
  dataset::SeriesMatrix out(series.channels, len);
  for (std::size_t c = 0; c < series.channels; ++c) {
    for (std::size_t t = 0; t < len; ++t) out.at(c, t) = series.at(c, t * factor);
  }
  return out;
}

double dtw_distance(const TimeMajorSeries& a, const TimeMajorSeries& b, std::optional<std::size_t> band) {
  if (a.length == 0 || b.length == 0) fail(ErrorCode::kShape, "dtw: series must have at least one frame");
  if (a.channels != b.channels) fail(ErrorCode::kShape, "dtw: channel counts differ");
  const std::size_t n = a.length;
  const std::size_t m = b.length;
  const std::size_t gap = n > m ? n - m : m - n;
  if (band && gap > *band) {
    fail(ErrorCode::kInfeasibleBand, "dtw: band radius " + std::to_string(*band) + " cannot align lengths " +
                                         std::to_string(n) + " and " + std::to_string(m));
  }
  const std::size_t ch = a.channels;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // prev/cur hold rows i-1 and i of the cumulative cost with column j at index
  // j+1; index 0 is the virtual column -1, zero only before the first row.
  std::vector<double> prev(m + 1, kInf);
  std::vector<double> cur(m + 1, kInf);
  prev[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(cur.begin(), cur.end(), kInf);
    std::size_t j_lo = 0;
    std::size_t j_hi = m - 1;
    if (band) {
      j_lo = i > *band ? i - *band : 0;
      j_hi = std::min(m - 1, i + *band);
    }
    const float* fa = a.values.data() + i * ch;
    for (std::size_t j = j_lo; j <= j_hi; ++j) {
      const float* fb = b.values.data() + j * ch;
      double sq = 0.0;
      for (std::size_t c = 0; c < ch; ++c) {
        const double d = static_cast<double>(fa[c]) - fb[c];
        sq += d * d;
      }
      const double best = std::min({prev[j + 1], cur[j], prev[j]});
      cur[j + 1] = std::sqrt(sq) + best;
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double dtw_distance(const dataset::SeriesMatrix& a, const dataset::SeriesMatrix& b, std::optional<std::size_t> band) {
  return dtw_distance(to_time_major(a), to_time_major(b), band);
}

DistanceMatrix dtw_distance_matrix(std::span<const TimeMajorSeries> queries,
                                   std::span<const TimeMajorSeries> references, std::optional<std::size_t> band) {
  DistanceMatrix dm;
  dm.rows = static_cast<std::uint32_t>(queries.size());
  dm.cols = static_cast<std::uint32_t>(references.size());
  dm.values.assign(queries.size() * references.size(), 0.0F);
  parallel_chunks(queries.size(), [&](std::size_t q0, std::size_t q1, std::size_t) {
    for (std::size_t q = q0; q < q1; ++q) {
      for (std::size_t r = 0; r < references.size(); ++r) {
        dm.values[q * references.size() + r] = static_cast<float>(dtw_distance(queries[q], references[r], band));
      }
    }
  });
  return dm;
}

std::vector<std::uint8_t> encode_distance_matrix(const DistanceMatrix& m) {
  if (m.values.size() != static_cast<std::size_t>(m.rows) * m.cols) {
    fail(ErrorCode::kConsistency, "distance matrix payload does not match its shape");
  }
  io::ByteWriter w;
  w.put_bytes("DIST");
  w.put_u32(m.rows);
  w.put_u32(m.cols);
  for (float v : m.values) w.put_f32(v);
  return w.bytes();
}

DistanceMatrix decode_distance_matrix(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  if (r.remaining() < 12 || r.get_bytes(4) != "DIST") fail(ErrorCode::kFormat, "bad DIST header");
  DistanceMatrix m;
  m.rows = r.get_u32();
  m.cols = r.get_u32();
  const std::size_t n = static_cast<std::size_t>(m.rows) * m.cols;
  if (r.remaining() != n * 4) fail(ErrorCode::kFormat, "DIST payload size does not match its header");
  m.values.resize(n);
  for (auto& v : m.values) v = r.get_f32();
  return m;
}

void write_distance_matrix(const std::filesystem::path& path, const DistanceMatrix& m) {
  io::write_file(path, encode_distance_matrix(m));
}

DistanceMatrix read_distance_matrix(const std::filesystem::path& path) {
  return decode_distance_matrix(io::read_file(path));
}

int knn_vote(std::span<const double> distances, std::span<const int> labels, std::size_t k) {
  if (distances.empty()) fail(ErrorCode::kConfig, "knn: reference set is empty");
  if (distances.size() != labels.size()) fail(ErrorCode::kShape, "knn: distances and labels differ in length");
  if (k == 0) fail(ErrorCode::kConfig, "knn: k must be at least 1");
  k = std::min(k, distances.size());
  std::vector<std::size_t> order(distances.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t x, std::size_t y) {
                      return distances[x] != distances[y] ? distances[x] < distances[y] : x < y;
                    });
  struct Tally {
    std::size_t votes = 0;
    double distance = 0.0;
  };
  std::map<int, Tally> tally;
  for (std::size_t i = 0; i < k; ++i) {
    auto& t = tally[labels[order[i]]];
    ++t.votes;
    t.distance += distances[order[i]];
  }
  auto best = tally.begin();
  for (auto it = std::next(tally.begin()); it != tally.end(); ++it) {
    const bool more_votes = it->second.votes > best->second.votes;
    const bool closer = it->second.votes == best->second.votes && it->second.distance < best->second.distance;
    if (more_votes || closer) best = it;
  }
  return best->first;
}

}  // namespace apl::baselines
