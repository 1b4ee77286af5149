// SPDX-License-Identifier: Apache-2.0

#include "apl/dataset/csi_dataset.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "apl/common/error.hpp"
#include "apl/common/io.hpp"

namespace apl::dataset {
namespace {

constexpr char kMagic[] = "CSIT";

const std::vector<std::string> kManifestHeader = {"sample_id", "activity", "location", "split"};
const std::vector<std::string> kAnnotationHeader = {"sample_id", "start_idx", "end_idx"};
const std::vector<std::string> kCoordinatesHeader = {"location_id", "x_m", "y_m"};
const std::vector<std::string> kLabelsHeader = {"sample_id", "activity", "location"};

std::string split_name(Split s) { return s == Split::kTrain ? "train" : "test"; }

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  fail(ErrorCode::kValidation, "unknown split `" + s + "` (expected train or test)");
}

}  // namespace

std::vector<std::size_t> Dataset::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
    if (manifest.samples[i].split == split) out.push_back(i);
  }
  return out;
}

void validate_labels(int activity, int location, const std::string& sample_id) {
  if (activity < 0 || activity >= kNumActivities) {
    fail(ErrorCode::kValidation, "sample `" + sample_id + "`: activity " + std::to_string(activity) +
                                     " outside 0.." + std::to_string(kNumActivities - 1));
  }
  if (location < 0 || location >= kNumLocations) {
    fail(ErrorCode::kValidation, "sample `" + sample_id + "`: location " + std::to_string(location) +
                                     " outside 0.." + std::to_string(kNumLocations - 1));
  }
}

std::vector<std::uint8_t> encode_container(const CsiContainer& c) {
  const std::size_t expected = static_cast<std::size_t>(c.count) * c.channels * c.length;
  if (c.values.size() != expected) {
    fail(ErrorCode::kConsistency, "container holds " + std::to_string(c.values.size()) +
                                      " values, header implies " + std::to_string(expected));
  }
  io::ByteWriter w;
  w.put_bytes(std::string_view(kMagic, 4));
  w.put_u16(kContainerVersion);
  w.put_u32(c.count);
  w.put_u16(c.channels);
  w.put_u16(c.length);
  for (float v : c.values) w.put_f32(v);
  return w.bytes();
}

CsiContainer decode_container(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  if (r.remaining() < 14) fail(ErrorCode::kFormat, "CSIT header truncated");
  if (r.get_bytes(4) != std::string_view(kMagic, 4)) fail(ErrorCode::kFormat, "bad CSIT magic");
  const auto version = r.get_u16();
  if (version != kContainerVersion) {
    fail(ErrorCode::kFormat, "unsupported CSIT version " + std::to_string(version));
  }
  CsiContainer c;
  c.count = r.get_u32();
  c.channels = r.get_u16();
  c.length = r.get_u16();
  const std::size_t n = static_cast<std::size_t>(c.count) * c.channels * c.length;
  if (r.remaining() != n * 4) {
    fail(ErrorCode::kFormat, "CSIT payload is " + std::to_string(r.remaining()) + " bytes, header implies " +
                                 std::to_string(n * 4));
  }
  c.values.resize(n);
  for (auto& v : c.values) v = r.get_f32();
  return c;
}

void write_container(const std::filesystem::path& path, const CsiContainer& container) {
  io::write_file(path, encode_container(container));
}

CsiContainer read_container(const std::filesystem::path& path) {
  return decode_container(io::read_file(path));
}

CsiContainer make_container(std::span<const CsiFingerprint> fingerprints) {
  CsiContainer c;
  c.count = static_cast<std::uint32_t>(fingerprints.size());
  if (fingerprints.empty()) {
    c.channels = static_cast<std::uint16_t>(kNumSubcarriers);
    c.length = static_cast<std::uint16_t>(kFingerprintLength);
    return c;
  }
  c.channels = static_cast<std::uint16_t>(fingerprints.front().amplitudes.channels);
  c.length = static_cast<std::uint16_t>(fingerprints.front().amplitudes.length);
  c.values.reserve(fingerprints.size() * c.channels * c.length);
  for (const auto& fp : fingerprints) {
    if (fp.amplitudes.channels != c.channels || fp.amplitudes.length != c.length) {
      fail(ErrorCode::kShape, "sample `" + fp.sample_id + "` has a different shape from the first sample");
    }
    c.values.insert(c.values.end(), fp.amplitudes.values.begin(), fp.amplitudes.values.end());
  }
  return c;
}

std::vector<ManifestRow> read_manifest_csv(const std::filesystem::path& path) {
  const auto table = io::read_csv(path, kManifestHeader);
  std::vector<ManifestRow> rows;
  rows.reserve(table.rows.size());
  for (const auto& f : table.rows) {
    ManifestRow row;
    row.sample_id = f[0];
    row.activity = static_cast<int>(io::parse_int(f[1], "activity"));
    row.location = static_cast<int>(io::parse_int(f[2], "location"));
    row.split = parse_split(f[3]);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_manifest_csv(const std::filesystem::path& path, std::span<const ManifestRow> rows) {
  std::ostringstream out;
  out << "sample_id,activity,location,split\n";
  for (const auto& r : rows) {
    out << r.sample_id << ',' << r.activity << ',' << r.location << ',' << split_name(r.split) << '\n';
  }
  io::write_text(path, out.str());
}

std::vector<Annotation> read_annotations_csv(const std::filesystem::path& path) {
  const auto table = io::read_csv(path, kAnnotationHeader);
  std::vector<Annotation> out;
  for (const auto& f : table.rows) {
    const auto start = io::parse_int(f[1], "start_idx");
    const auto end = io::parse_int(f[2], "end_idx");
    if (start < 0 || end < 0) {
      fail(ErrorCode::kRange, "annotation for `" + f[0] + "` has a negative index");
    }
    out.push_back({f[0], static_cast<std::size_t>(start), static_cast<std::size_t>(end)});
  }
  return out;
}

CoordinateMap read_coordinates_csv(const std::filesystem::path& path) {
  const auto table = io::read_csv(path, kCoordinatesHeader);
  CoordinateMap coords;
  for (const auto& f : table.rows) {
    const int id = static_cast<int>(io::parse_int(f[0], "location_id"));
    if (id < 0 || id >= kNumLocations) {
      fail(ErrorCode::kValidation, "coordinate row for unknown location " + std::to_string(id));
    }
    if (!coords.emplace(id, Coordinate{io::parse_double(f[1], "x_m"), io::parse_double(f[2], "y_m")}).second) {
      fail(ErrorCode::kValidation, "duplicate coordinate row for location " + std::to_string(id));
    }
  }
  if (coords.size() != static_cast<std::size_t>(kNumLocations)) {
    fail(ErrorCode::kValidation, path.string() + ": expected " + std::to_string(kNumLocations) +
                                     " coordinate rows, got " + std::to_string(coords.size()));
  }
  return coords;
}

void write_coordinates_csv(const std::filesystem::path& path, const CoordinateMap& coords) {
  std::ostringstream out;
  out << "location_id,x_m,y_m\n";
  for (const auto& [id, c] : coords) {
    out << id << ',' << io::format_double(c.x_m) << ',' << io::format_double(c.y_m) << '\n';
  }
  io::write_text(path, out.str());
}

CoordinateMap synthetic_grid_coordinates() {
  CoordinateMap coords;
  for (int l = 0; l < kNumLocations; ++l) {
    coords[l] = Coordinate{static_cast<double>(l % 4), static_cast<double>(l / 4)};
  }
  return coords;
}

Dataset load_dataset(const std::filesystem::path& container_path,
                     const std::filesystem::path& manifest_path) {
  const CsiContainer container = read_container(container_path);
  if (container.count > 0 &&
      (container.channels != kNumSubcarriers || container.length != kFingerprintLength)) {
    fail(ErrorCode::kFormat, "container samples are " + std::to_string(container.channels) + "x" +
                                 std::to_string(container.length) + ", expected " +
                                 std::to_string(kNumSubcarriers) + "x" + std::to_string(kFingerprintLength));
  }
  Dataset ds;
  ds.manifest.samples = read_manifest_csv(manifest_path);
  if (ds.manifest.samples.size() != container.count) {
    fail(ErrorCode::kConsistency, "manifest has " + std::to_string(ds.manifest.samples.size()) +
                                      " rows but container holds " + std::to_string(container.count) +
                                      " samples");
  }
  std::set<std::string> seen;
  const std::size_t stride = kNumSubcarriers * kFingerprintLength;
  ds.fingerprints.reserve(container.count);
  for (std::size_t i = 0; i < container.count; ++i) {
    const auto& row = ds.manifest.samples[i];
    validate_labels(row.activity, row.location, row.sample_id);
    if (!seen.insert(row.sample_id).second) {
      fail(ErrorCode::kValidation, "duplicate sample_id `" + row.sample_id + "`");
    }
    CsiFingerprint fp;
    fp.sample_id = row.sample_id;
    fp.activity = row.activity;
    fp.location = row.location;
    fp.amplitudes = SeriesMatrix(kNumSubcarriers, kFingerprintLength);
    const auto first = container.values.begin() + static_cast<std::ptrdiff_t>(i * stride);
    std::copy(first, first + static_cast<std::ptrdiff_t>(stride), fp.amplitudes.values.begin());
    for (float v : fp.amplitudes.values) {
      if (!std::isfinite(v)) fail(ErrorCode::kValidation, "sample `" + row.sample_id + "` has a non-finite amplitude");
    }
    ds.fingerprints.push_back(std::move(fp));
  }
  if (!ds.indices(Split::kTrain).empty()) {
    ds.manifest.normalization = compute_normalization(ds.fingerprints, ds.manifest.samples);
  }
  return ds;
}

SeriesMatrix segment(const SeriesMatrix& raw, const Annotation& a) {
  if (a.end_idx > raw.length || a.start_idx >= a.end_idx || a.end_idx - a.start_idx < 2) {
    fail(ErrorCode::kRange, "annotation [" + std::to_string(a.start_idx) + ", " + std::to_string(a.end_idx) +
                                ") for `" + a.sample_id + "` is invalid for a series of length " +
                                std::to_string(raw.length));
  }
  const std::size_t len = a.end_idx - a.start_idx;
  SeriesMatrix out(raw.channels, len);
  for (std::size_t c = 0; c < raw.channels; ++c) {
    for (std::size_t t = 0; t < len; ++t) out.at(c, t) = raw.at(c, a.start_idx + t);
  }
  return out;
}

SeriesMatrix resample_linear(const SeriesMatrix& series, std::size_t target_len) {
  const std::size_t len = series.length;
  if (len < 2) fail(ErrorCode::kDegenerateInput, "cannot resample a series of length " + std::to_string(len));
  if (target_len < 2) fail(ErrorCode::kDegenerateInput, "resample target length must be at least 2");
  SeriesMatrix out(series.channels, target_len);
  for (std::size_t j = 0; j < target_len; ++j) {
    // j * (len - 1) is an exact integer, so pos is exact whenever it is integral.
    const double pos = static_cast<double>(j * (len - 1)) / static_cast<double>(target_len - 1);
    auto lo = static_cast<std::size_t>(pos);
    if (lo >= len - 1) lo = len - 2;
    const double frac = pos - static_cast<double>(lo);
    for (std::size_t c = 0; c < series.channels; ++c) {
      const double a = series.at(c, lo);
      const double b = series.at(c, lo + 1);
      out.at(c, j) = static_cast<float>(frac == 0.0 ? a : (frac == 1.0 ? b : a + (b - a) * frac));
    }
  }
  return out;
}

Normalization compute_normalization(std::span<const CsiFingerprint> fps, std::span<const ManifestRow> rows) {
  if (fps.size() != rows.size()) fail(ErrorCode::kConsistency, "fingerprint and manifest counts differ");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < fps.size(); ++i) {
    if (rows[i].split != Split::kTrain) continue;
    for (float v : fps[i].amplitudes.values) sum += v;
    n += fps[i].amplitudes.values.size();
  }
  if (n == 0) fail(ErrorCode::kDegenerateDataset, "training split is empty");
  const double mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (std::size_t i = 0; i < fps.size(); ++i) {
    if (rows[i].split != Split::kTrain) continue;
    for (float v : fps[i].amplitudes.values) sq += (v - mean) * (v - mean);
  }
  return {mean, std::sqrt(sq / static_cast<double>(n))};
}

std::vector<CsiFingerprint> standardize(std::span<const CsiFingerprint> fps, const DatasetManifest& manifest) {
  const auto& norm = manifest.normalization;
  if (!(norm.global_std > 0.0) || !std::isfinite(norm.global_std)) {
    fail(ErrorCode::kDegenerateDataset, "training amplitudes have zero variance");
  }
  std::vector<CsiFingerprint> out(fps.begin(), fps.end());
  for (auto& fp : out) {
    for (auto& v : fp.amplitudes.values) {
      v = static_cast<float>((v - norm.global_mean) / norm.global_std);
    }
  }
  return out;
}

SeriesMatrix destandardize(const SeriesMatrix& standardized, const Normalization& norm) {
  SeriesMatrix out = standardized;
  for (auto& v : out.values) v = static_cast<float>(v * norm.global_std + norm.global_mean);
  return out;
}

std::vector<Split> make_split(std::size_t n, std::size_t phase, std::size_t period) {
  if (period == 0 || phase >= period) fail(ErrorCode::kConfig, "split phase must be below a positive period");
  std::vector<Split> out(n, Split::kTrain);
  for (std::size_t i = 0; i < n; ++i) {
    if (i % period == phase) out[i] = Split::kTest;
  }
  return out;
}

std::vector<RawRecording> read_raw_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) fail(ErrorCode::kIo, "raw directory " + dir.string() + " not found");
  const auto labels_path = dir / "labels.csv";
  if (!std::filesystem::exists(labels_path)) {
    fail(ErrorCode::kValidation, "raw directory " + dir.string() + " contains zero samples (no labels.csv)");
  }
  const auto table = io::read_csv(labels_path, kLabelsHeader);
  if (table.rows.empty()) fail(ErrorCode::kValidation, "raw directory " + dir.string() + " contains zero samples");
  std::vector<RawRecording> out;
  std::set<std::string> seen;
  for (const auto& f : table.rows) {
    RawRecording rec;
    rec.sample_id = f[0];
    rec.activity = static_cast<int>(io::parse_int(f[1], "activity"));
    rec.location = static_cast<int>(io::parse_int(f[2], "location"));
    validate_labels(rec.activity, rec.location, rec.sample_id);
    if (!seen.insert(rec.sample_id).second) fail(ErrorCode::kValidation, "duplicate sample_id `" + rec.sample_id + "`");

    const auto path = dir / (rec.sample_id + ".csv");
    std::ifstream in(path);
    if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
    std::vector<std::vector<float>> frames;
    std::string line;
    while (std::getline(in, line)) {
      if (io::trim(line).empty()) continue;
      const auto fields = io::split(io::trim(line), ',');
      if (fields.size() != kNumSubcarriers) {
        fail(ErrorCode::kShape, path.string() + ": expected " + std::to_string(kNumSubcarriers) +
                                    " amplitudes per row, got " + std::to_string(fields.size()));
      }
      std::vector<float> frame(kNumSubcarriers);
      for (std::size_t c = 0; c < kNumSubcarriers; ++c) {
        frame[c] = static_cast<float>(io::parse_double(io::trim(fields[c]), "amplitude"));
      }
      frames.push_back(std::move(frame));
    }
    rec.series = SeriesMatrix(kNumSubcarriers, frames.size());
    for (std::size_t t = 0; t < frames.size(); ++t) {
      for (std::size_t c = 0; c < kNumSubcarriers; ++c) rec.series.at(c, t) = frames[t][c];
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<CsiFingerprint> prepare_fingerprints(std::span<const RawRecording> recordings,
                                                 const std::optional<std::vector<Annotation>>& annotations) {
  std::map<std::string, Annotation> by_id;
  if (annotations) {
    std::set<std::string> known;
    for (const auto& r : recordings) known.insert(r.sample_id);
    for (const auto& a : *annotations) {
      if (!known.contains(a.sample_id)) {
        fail(ErrorCode::kValidation, "annotation references unknown sample_id `" + a.sample_id + "`");
      }
      if (!by_id.emplace(a.sample_id, a).second) {
        fail(ErrorCode::kValidation, "duplicate annotation for `" + a.sample_id + "`");
      }
    }
  }
  std::vector<CsiFingerprint> out;
  out.reserve(recordings.size());
  for (const auto& r : recordings) {
    CsiFingerprint fp;
    fp.sample_id = r.sample_id;
    fp.activity = r.activity;
    fp.location = r.location;
    if (annotations) {
      const auto it = by_id.find(r.sample_id);
      if (it == by_id.end()) fail(ErrorCode::kValidation, "sample `" + r.sample_id + "` has no annotation");
      fp.amplitudes = resample_linear(segment(r.series, it->second));
    } else {
      fp.amplitudes = resample_linear(r.series);
    }
    out.push_back(std::move(fp));
  }
  return out;
}

}  // namespace apl::dataset
