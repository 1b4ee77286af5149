// SPDX-License-Identifier: Apache-2.0

// CSI fingerprint ingestion: the CSIT container, manifest/annotation/coordinate
// CSVs, segmentation, linear resampling to a fixed length, global
// standardization and the deterministic train/test split.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace apl::dataset {

inline constexpr std::size_t kNumSubcarriers = 52;
inline constexpr std::size_t kFingerprintLength = 192;
inline constexpr int kNumActivities = 6;
inline constexpr int kNumLocations = 16;

/// Channel-major real matrix: value(c, t) = values[c * length + t].
struct SeriesMatrix {
  std::size_t channels = 0;
  std::size_t length = 0;
  std::vector<float> values;

  SeriesMatrix() = default;
  SeriesMatrix(std::size_t c, std::size_t l, float fill = 0.0F)
      : channels(c), length(l), values(c * l, fill) {}

  float& at(std::size_t c, std::size_t t) { return values[c * length + t]; }
  float at(std::size_t c, std::size_t t) const { return values[c * length + t]; }
  std::span<const float> channel(std::size_t c) const {
    return std::span<const float>(values).subspan(c * length, length);
  }
};

struct CsiFingerprint {
  SeriesMatrix amplitudes;
  int activity = 0;
  int location = 0;
  std::string sample_id;
};

struct Annotation {
  std::string sample_id;
  std::size_t start_idx = 0;
  std::size_t end_idx = 0;
};

enum class Split { kTrain, kTest };

struct ManifestRow {
  std::string sample_id;
  int activity = 0;
  int location = 0;
  Split split = Split::kTrain;
};

struct Normalization {
  double global_mean = 0.0;
  double global_std = 1.0;
};

struct Coordinate {
  double x_m = 0.0;
  double y_m = 0.0;
};

using CoordinateMap = std::map<int, Coordinate>;

struct DatasetManifest {
  std::vector<ManifestRow> samples;
  Normalization normalization;
  CoordinateMap location_coords;
};

struct Dataset {
  std::vector<CsiFingerprint> fingerprints;
  DatasetManifest manifest;

  std::vector<std::size_t> indices(Split split) const;
};

// ---- CSIT container -------------------------------------------------------

inline constexpr std::uint16_t kContainerVersion = 1;

/// Raw contents of a CSIT file: `count` samples of channels x length float32.
struct CsiContainer {
  std::uint16_t channels = 0;
  std::uint16_t length = 0;
  std::uint32_t count = 0;
  std::vector<float> values;
};

std::vector<std::uint8_t> encode_container(const CsiContainer& container);
CsiContainer decode_container(std::span<const std::uint8_t> bytes);
void write_container(const std::filesystem::path& path, const CsiContainer& container);
CsiContainer read_container(const std::filesystem::path& path);

/// Packs fingerprints of identical shape into a container.
CsiContainer make_container(std::span<const CsiFingerprint> fingerprints);

// ---- CSV files -------------------------------------------------------------

std::vector<ManifestRow> read_manifest_csv(const std::filesystem::path& path);
void write_manifest_csv(const std::filesystem::path& path, std::span<const ManifestRow> rows);
std::vector<Annotation> read_annotations_csv(const std::filesystem::path& path);
CoordinateMap read_coordinates_csv(const std::filesystem::path& path);
void write_coordinates_csv(const std::filesystem::path& path, const CoordinateMap& coords);

/// Synthetic 4x4 grid with 1.0 m spacing: location l sits at (l % 4, l / 4).
/// For tests and demos only; the real room layout must come from a CSV.
CoordinateMap synthetic_grid_coordinates();

// ---- loading and preprocessing --------------------------------------------

/// Reads a container plus its manifest, validates shapes and labels, and
/// computes the training-split normalization. Amplitudes are returned
/// unstandardized.
Dataset load_dataset(const std::filesystem::path& container_path,
                     const std::filesystem::path& manifest_path);

/// Column slice [start_idx, end_idx) of a raw recording.
SeriesMatrix segment(const SeriesMatrix& raw, const Annotation& annotation);

/// Endpoint-aligned linear interpolation of every channel to `target_len`.
SeriesMatrix resample_linear(const SeriesMatrix& series,
                             std::size_t target_len = kFingerprintLength);

/// Global scalar mean/std over every amplitude of the training split.
Normalization compute_normalization(std::span<const CsiFingerprint> fingerprints,
                                    std::span<const ManifestRow> rows);

/// (x - mean) / std applied to every amplitude.
std::vector<CsiFingerprint> standardize(std::span<const CsiFingerprint> fingerprints,
                                        const DatasetManifest& manifest);

/// Inverse of standardize for one matrix.
SeriesMatrix destandardize(const SeriesMatrix& standardized, const Normalization& norm);

/// Index i goes to the test split iff i % period == phase.
std::vector<Split> make_split(std::size_t n, std::size_t phase = 4, std::size_t period = 5);

// ---- raw recordings --------------------------------------------------------

struct RawRecording {
  std::string sample_id;
  int activity = 0;
  int location = 0;
  SeriesMatrix series;
};

/// Raw directory layout: `labels.csv` (sample_id,activity,location) and one
/// `<sample_id>.csv` per sample holding L rows of 52 comma-separated
/// amplitudes (time-major, no header).
std::vector<RawRecording> read_raw_directory(const std::filesystem::path& dir);

/// Segments (when annotations are given) and resamples raw recordings into
/// fixed-size fingerprints. Every annotation must name a known sample and
/// every sample must be annotated.
std::vector<CsiFingerprint> prepare_fingerprints(
    std::span<const RawRecording> recordings,
    const std::optional<std::vector<Annotation>>& annotations);

void validate_labels(int activity, int location, const std::string& sample_id);

}  // namespace apl::dataset
