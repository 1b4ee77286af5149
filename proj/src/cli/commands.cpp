// SPDX-License-Identifier: Apache-2.0

#include "apl/cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <json.hpp>
#include <map>
#include <sstream>

#include "apl/common/error.hpp"
#include "apl/common/io.hpp"
#include "apl/common/parallel.hpp"
#include "apl/tensor/checkpoint.hpp"

namespace apl::cli {
namespace {

using json = nlohmann::json;
using dataset::Split;

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string dataset_hash(const fs::path& container) { return hex64(io::fnv1a64(io::read_file(container))); }

// Written at the end of every successful command.
class RunManifest {
 public:
  RunManifest(std::string command, fs::path out_dir) : out_dir_(std::move(out_dir)), started_(utc_now()) {
    doc_["command"] = std::move(command);
    doc_["threads"] = num_threads();
  }

  json& config() { return doc_["config"]; }
  void set(const std::string& key, json value) { doc_[key] = std::move(value); }

  void write() {
    doc_["output_dir"] = out_dir_.string();
    doc_["started_at"] = started_;
    doc_["finished_at"] = utc_now();
    io::write_text(out_dir_ / kRunManifestFile, doc_.dump(2) + "\n");
  }

 private:
  fs::path out_dir_;
  std::string started_;
  json doc_;
};

json to_json(const model::NetworkSpec& s) {
  return {{"block_counts", s.block_counts},
          {"width_multiplier", s.width_multiplier},
          {"plus_variant", s.plus_variant},
          {"seed", s.seed}};
}

json to_json(const train::TrainConfig& c) {
  return {{"epochs", c.epochs}, {"batch_size", c.batch_size}, {"lr0", c.lr0},   {"decay", c.decay},
          {"decay_every", c.decay_every}, {"lambda", c.lambda}, {"seed", c.seed}};
}

struct LoadedSplits {
  dataset::Dataset raw;
  std::vector<dataset::CsiFingerprint> standardized;
  std::vector<dataset::CsiFingerprint> train;
  std::vector<dataset::CsiFingerprint> test;
};

LoadedSplits load_splits(const fs::path& container, const std::optional<fs::path>& manifest) {
  LoadedSplits s;
  s.raw = dataset::load_dataset(container, manifest ? *manifest : default_manifest_path(container));
  if (s.raw.indices(Split::kTrain).empty()) fail(ErrorCode::kConfig, "dataset has no training samples");
  s.standardized = dataset::standardize(s.raw.fingerprints, s.raw.manifest);
  for (std::size_t i = 0; i < s.standardized.size(); ++i) {
    (s.raw.manifest.samples[i].split == Split::kTrain ? s.train : s.test).push_back(s.standardized[i]);
  }
  return s;
}

model::ResNet1D<float> load_network(const fs::path& checkpoint, const std::optional<fs::path>& spec_path) {
  const fs::path path = spec_path ? *spec_path : checkpoint.parent_path() / kNetworkSpecFile;
  if (!fs::exists(path)) fail(ErrorCode::kCompatibility, "network spec " + path.string() + " not found");
  model::ResNet1D<float> net(model::read_network_spec(path));
  load_records(read_checkpoint(checkpoint), net.tensors());
  return net;
}

std::vector<int> activities_of(const std::vector<dataset::CsiFingerprint>& fps) {
  std::vector<int> out;
  for (const auto& f : fps) out.push_back(f.activity);
  return out;
}

std::vector<int> locations_of(const std::vector<dataset::CsiFingerprint>& fps) {
  std::vector<int> out;
  for (const auto& f : fps) out.push_back(f.location);
  return out;
}

baselines::FeatureMatrix flatten(const std::vector<dataset::CsiFingerprint>& fps) {
  baselines::FeatureMatrix m;
  m.rows = fps.size();
  m.cols = fps.empty() ? 0 : fps.front().amplitudes.values.size();
  m.values.reserve(m.rows * m.cols);
  for (const auto& f : fps) m.values.insert(m.values.end(), f.amplitudes.values.begin(), f.amplitudes.values.end());
  return m;
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (truth.empty()) return 0.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) ok += pred[i] == truth[i] ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(truth.size());
}

}  // namespace

fs::path default_manifest_path(const fs::path& container) {
  return container.parent_path() / (container.stem().string() + ".manifest.csv");
}

ConvertResult cmd_convert(const ConvertOptions& options) {
  const auto recordings = dataset::read_raw_directory(options.raw_dir);
  std::optional<std::vector<dataset::Annotation>> annotations;
  if (options.annotations) annotations = dataset::read_annotations_csv(*options.annotations);
  const auto fps = dataset::prepare_fingerprints(recordings, annotations);
  const auto split = dataset::make_split(fps.size(), options.split_phase);

  std::vector<dataset::ManifestRow> rows;
  ConvertResult result;
  for (std::size_t i = 0; i < fps.size(); ++i) {
    rows.push_back({fps[i].sample_id, fps[i].activity, fps[i].location, split[i]});
    ++(split[i] == Split::kTrain ? result.train : result.test);
  }
  if (options.out_container.has_parent_path()) fs::create_directories(options.out_container.parent_path());
  dataset::write_container(options.out_container, dataset::make_container(fps));
  result.manifest = options.manifest ? *options.manifest : default_manifest_path(options.out_container);
  dataset::write_manifest_csv(result.manifest, rows);
  result.samples = fps.size();

  const fs::path out_dir = options.out_container.parent_path().empty() ? fs::path(".")
                                                                       : options.out_container.parent_path();
  RunManifest run("convert", out_dir);
  run.config() = {{"raw_dir", options.raw_dir.string()},
                  {"annotations", options.annotations ? options.annotations->string() : ""},
                  {"split_phase", options.split_phase}};
  run.set("seed", nullptr);
  run.set("dataset_hash", dataset_hash(options.out_container));
  run.set("samples", result.samples);
  run.write();
  return result;
}

train::TrainResult cmd_train(const TrainCommandOptions& options) {
  model::NetworkSpec spec = options.network;
  train::TrainConfig config = options.config;
  if (options.seed) {
    spec.seed = *options.seed;
    config.seed = *options.seed;
  }
  train::validate(config);
  model::validate(spec);
  const auto splits = load_splits(options.container, options.manifest);

  fs::create_directories(options.out_dir);
  model::write_network_spec(options.out_dir / kNetworkSpecFile, spec);
  train::write_train_config(options.out_dir / kTrainConfigFile, config);

  model::ResNet1D<float> net(spec);
  train::TrainOptions topts;
  topts.out_dir = options.out_dir;
  topts.on_epoch = options.on_epoch;
  auto result = train::train(net, splits.train, splits.test, config, topts);

  RunManifest run("train", options.out_dir);
  run.config() = {{"network", to_json(spec)}, {"training", to_json(config)}};
  run.set("seed", config.seed);
  run.set("dataset_hash", dataset_hash(options.container));
  run.set("steps", result.steps);
  run.write();
  return result;
}

EvalReport cmd_eval(const EvalCommandOptions& options) {
  const auto splits = load_splits(options.container, options.manifest);
  if (splits.test.empty()) fail(ErrorCode::kValidation, "dataset has no test samples");
  auto net = load_network(options.checkpoint, options.network_spec);
  const auto ev = train::evaluate_split(net, splits.test);
  const auto act_truth = activities_of(splits.test);
  const auto loc_truth = locations_of(splits.test);

  EvalReport report;
  report.activity = eval::confusion(ev.activity_pred, act_truth, 6);
  report.location = eval::confusion(ev.location_pred, loc_truth, 16);
  report.activity_metrics = eval::class_metrics(report.activity);
  report.location_metrics = eval::class_metrics(report.location);
  std::vector<std::string> warnings;
  if (options.coordinates && !fs::exists(*options.coordinates)) {
    warnings.push_back("coordinates file " + options.coordinates->string() + " not found; ALE/AME not applicable");
  } else if (options.coordinates) {
    const auto coords = dataset::read_coordinates_csv(*options.coordinates);
    report.ale_m = eval::ale(ev.location_pred, loc_truth, coords, options.distance);
    report.ame_m = eval::ame(ev.location_pred, loc_truth, coords, options.distance);
  }

  fs::create_directories(options.out_dir);
  io::write_text(options.out_dir / "activity_metrics.csv", eval::class_metrics_csv(report.activity_metrics));
  io::write_text(options.out_dir / "location_metrics.csv", eval::class_metrics_csv(report.location_metrics));
  io::write_text(options.out_dir / "activity_confusion.csv", report.activity.to_csv());
  io::write_text(options.out_dir / "location_confusion.csv", report.location.to_csv());
  const std::vector<eval::SummaryRow> summary = {
      {"activity", report.activity.accuracy(), std::nullopt, std::nullopt},
      {"location", report.location.accuracy(), report.ale_m, report.ame_m}};
  io::write_text(options.out_dir / "summary.csv", eval::summary_csv(summary));

  RunManifest run("eval", options.out_dir);
  run.config() = {{"network", to_json(net.spec())},
                  {"checkpoint", options.checkpoint.string()},
                  {"coordinates", options.coordinates ? options.coordinates->string() : ""},
                  {"distance", options.distance == eval::DistanceMode::kEuclidean ? "euclidean" : "squared"}};
  run.set("seed", net.spec().seed);
  run.set("dataset_hash", dataset_hash(options.container));
  for (const auto& w : report.activity_metrics.warnings) warnings.push_back("activity " + w);
  for (const auto& w : report.location_metrics.warnings) warnings.push_back("location " + w);
  run.set("warnings", warnings);
  run.write();
  report.warnings = std::move(warnings);
  return report;
}

std::vector<BaselineRow> cmd_baseline(const BaselineCommandOptions& options) {
  if (options.method != "dtw-knn" && options.method != "svm-rbf") {
    fail(ErrorCode::kUsage, "unknown baseline method `" + options.method + "` (expected dtw-knn or svm-rbf)");
  }
  const auto splits = load_splits(options.container, options.manifest);
  if (splits.test.empty()) fail(ErrorCode::kValidation, "dataset has no test samples");
  fs::create_directories(options.out_dir);
  const auto act_train = activities_of(splits.train);
  const auto loc_train = locations_of(splits.train);
  const auto act_test = activities_of(splits.test);
  const auto loc_test = locations_of(splits.test);

  std::vector<BaselineRow> rows;
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  if (options.method == "dtw-knn") {
    const auto& cfg = options.dtw;
    if (cfg.k == 0 || cfg.k > splits.train.size()) {
      fail(ErrorCode::kConfig, "k must lie in 1.." + std::to_string(splits.train.size()));
    }
    auto prepare = [&](const std::vector<dataset::CsiFingerprint>& fps) {
      std::vector<baselines::TimeMajorSeries> out;
      for (const auto& f : fps) out.push_back(baselines::to_time_major(baselines::decimate(f.amplitudes, cfg.decimation)));
      return out;
    };
    const auto queries = prepare(splits.test);
    const auto references = prepare(splits.train);
    const auto dm = baselines::dtw_distance_matrix(queries, references, cfg.band_radius);
    baselines::write_distance_matrix(options.out_dir / "dtw_distances.dist", dm);
    std::vector<int> act_pred;
    std::vector<int> loc_pred;
    for (std::size_t q = 0; q < dm.rows; ++q) {
      const std::vector<double> d(dm.values.begin() + static_cast<std::ptrdiff_t>(q * dm.cols),
                                  dm.values.begin() + static_cast<std::ptrdiff_t>((q + 1) * dm.cols));
      act_pred.push_back(baselines::knn_vote(d, act_train, cfg.k));
      loc_pred.push_back(baselines::knn_vote(d, loc_train, cfg.k));
    }
    const double secs = elapsed();
    rows.push_back({"dtw-knn", "activity", accuracy(act_pred, act_test), cfg.describe(), secs});
    rows.push_back({"dtw-knn", "location", accuracy(loc_pred, loc_test), cfg.describe(), secs});
  } else {
    const auto train_x = flatten(splits.train);
    const auto test_x = flatten(splits.test);
    baselines::SvmConfig cfg = options.svm;
    if (!cfg.gamma) cfg.gamma = baselines::default_gamma(train_x);
    const auto act_model = baselines::svm_train(train_x, act_train, cfg);
    const auto loc_model = baselines::svm_train(train_x, loc_train, cfg);
    const auto act_pred = baselines::svm_predict(act_model, test_x);
    const auto loc_pred = baselines::svm_predict(loc_model, test_x);
    const double secs = elapsed();
    rows.push_back({"svm-rbf", "activity", accuracy(act_pred, act_test), cfg.describe(), secs});
    rows.push_back({"svm-rbf", "location", accuracy(loc_pred, loc_test), cfg.describe(), secs});
  }

  std::ostringstream csv;
  csv << "method,task,accuracy,config_string,wall_seconds\n";
  for (const auto& r : rows) {
    char secs[32];
    std::snprintf(secs, sizeof(secs), "%.3f", r.wall_seconds);
    csv << r.method << ',' << r.task << ',' << io::format_double(r.accuracy) << ',' << r.config << ',' << secs << '\n';
  }
  io::write_text(options.out_dir / "baseline_report.csv", csv.str());

  RunManifest run("baseline", options.out_dir);
  run.config() = {{"method", options.method},
                  {"config_string", rows.front().config}};
  run.set("seed", nullptr);
  run.set("dataset_hash", dataset_hash(options.container));
  run.write();
  return rows;
}

std::vector<fs::path> cmd_export_features(const ExportCommandOptions& options) {
  if (options.taps.empty()) fail(ErrorCode::kUsage, "no feature taps requested");
  try {
    model::validate_taps(options.taps);
  } catch (const Error& e) {
    fail(ErrorCode::kUsage, e.what());
  }
  const auto splits = load_splits(options.container, options.manifest);
  auto net = load_network(options.checkpoint, options.network_spec);
  fs::create_directories(options.out_dir);

  std::map<std::string, std::ostringstream> csv;
  for (const auto& tap : options.taps) csv[tap] << "";
  constexpr std::size_t kBatch = 64;
  for (std::size_t start = 0; start < splits.test.size(); start += kBatch) {
    const std::size_t end = std::min(splits.test.size(), start + kBatch);
    std::vector<std::size_t> idx;
    for (std::size_t i = start; i < end; ++i) idx.push_back(i);
    const auto batch = train::make_batch(splits.test, idx);
    const auto features = model::export_features(net, batch.inputs, options.taps);
    for (const auto& [tap, t] : features) {
      auto& out = csv[tap];
      const std::size_t width = t.dim(1);
      for (std::size_t r = 0; r < t.dim(0); ++r) {
        out << splits.test[idx[r]].sample_id;
        for (std::size_t c = 0; c < width; ++c) out << ',' << io::format_double(t.data[r * width + c]);
        out << '\n';
      }
    }
  }
  std::vector<fs::path> written;
  for (const auto& tap : options.taps) {
    const fs::path path = options.out_dir / ("features_" + tap + ".csv");
    io::write_text(path, csv[tap].str());
    written.push_back(path);
  }

  RunManifest run("export-features", options.out_dir);
  run.config() = {{"network", to_json(net.spec())}, {"checkpoint", options.checkpoint.string()},
                  {"taps", options.taps}};
  run.set("seed", net.spec().seed);
  run.set("dataset_hash", dataset_hash(options.container));
  run.write();
  return written;
}

}  // namespace apl::cli
