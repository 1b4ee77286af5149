// SPDX-License-Identifier: Apache-2.0

// Synthetic CSI-like recordings for demos and tests. Location sets a
// subcarrier profile, activity sets a temporal oscillation frequency.
// Not a stand-in for real measurements.

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "apl/dataset/csi_dataset.hpp"

namespace apl::dataset {

struct SyntheticOptions {
  std::size_t samples = 240;
  std::size_t min_length = 160;
  std::size_t max_length = 240;
  double noise = 0.5;
  std::uint64_t seed = 0;
};

/// Labels cycle through all activity/location pairs in sample order.
std::vector<RawRecording> synthetic_recordings(const SyntheticOptions& options);

/// Same generator at a fixed length, skipping the raw-file round trip.
std::vector<CsiFingerprint> synthetic_fingerprints(std::size_t samples, std::uint64_t seed,
                                                   std::size_t length = kFingerprintLength,
                                                   double noise = 0.5);

/// Writes the layout read_raw_directory expects.
void write_raw_directory(const std::filesystem::path& dir, const std::vector<RawRecording>& recordings);

}  // namespace apl::dataset
