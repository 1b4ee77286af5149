// SPDX-License-Identifier: Apache-2.0

#include "apl/dataset/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "apl/common/error.hpp"
#include "apl/common/io.hpp"
#include "apl/common/random.hpp"

namespace apl::dataset {
namespace {

SeriesMatrix synth_series(int activity, int location, std::size_t length, double noise, Rng& rng) {
  SeriesMatrix s(kNumSubcarriers, length);
  const double centre = 1.5 + 3.2 * location;
  const double cycles = 1.0 + activity;
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  for (std::size_t c = 0; c < kNumSubcarriers; ++c) {
    const double d = (static_cast<double>(c) - centre) / 3.0;
    const double profile = std::exp(-0.5 * d * d);
    for (std::size_t t = 0; t < length; ++t) {
      const double u = static_cast<double>(t) / static_cast<double>(length);
      const double wave = std::sin(2.0 * std::numbers::pi * cycles * u + phase);
      s.at(c, t) = static_cast<float>(10.0 + 4.0 * profile + 2.0 * wave + noise * rng.normal());
    }
  }
  return s;
}

}  // namespace

std::vector<RawRecording> synthetic_recordings(const SyntheticOptions& options) {
  if (options.min_length < 2 || options.max_length < options.min_length) {
    fail(ErrorCode::kConfig, "synthetic lengths must satisfy 2 <= min_length <= max_length");
  }
  Rng rng(options.seed);
  std::vector<RawRecording> out(options.samples);
  for (std::size_t i = 0; i < options.samples; ++i) {
    auto& r = out[i];
    char id[16];
    std::snprintf(id, sizeof(id), "s%05zu", i);
    r.sample_id = id;
    r.activity = static_cast<int>(i % kNumActivities);
    r.location = static_cast<int>((i / kNumActivities) % kNumLocations);
    const std::size_t length = options.min_length + rng.below(options.max_length - options.min_length + 1);
    r.series = synth_series(r.activity, r.location, length, options.noise, rng);
  }
  return out;
}

std::vector<CsiFingerprint> synthetic_fingerprints(std::size_t samples, std::uint64_t seed, std::size_t length,
                                                   double noise) {
  SyntheticOptions opts;
  opts.samples = samples;
  opts.min_length = length;
  opts.max_length = length;
  opts.noise = noise;
  opts.seed = seed;
  std::vector<CsiFingerprint> out;
  for (auto& r : synthetic_recordings(opts)) {
    out.push_back({std::move(r.series), r.activity, r.location, r.sample_id});
  }
  return out;
}

void write_raw_directory(const std::filesystem::path& dir, const std::vector<RawRecording>& recordings) {
  std::filesystem::create_directories(dir);
  std::string labels = "sample_id,activity,location\n";
  for (const auto& r : recordings) {
    labels += r.sample_id + ',' + std::to_string(r.activity) + ',' + std::to_string(r.location) + '\n';
    std::string body;
    char buf[32];
    for (std::size_t t = 0; t < r.series.length; ++t) {
      for (std::size_t c = 0; c < r.series.channels; ++c) {
        std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(r.series.at(c, t)));
        if (c > 0) body += ',';
        body += buf;
      }
      body += '\n';
    }
    io::write_text(dir / (r.sample_id + ".csv"), body);
  }
  io::write_text(dir / "labels.csv", labels);
}

}  // namespace apl::dataset
