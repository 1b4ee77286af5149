// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <json.hpp>
#include <string>

#include "apl/cli/commands.hpp"
#include "apl/common/error.hpp"
#include "apl/common/io.hpp"
#include "apl/dataset/synthetic.hpp"
#include "apl/tensor/checkpoint.hpp"
#include "temp_dir.hpp"

namespace apl::cli {
namespace {

using apl::testing::TempDir;

template <typename F>
ErrorCode error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kUsage;
}

std::string text_of(const fs::path& p) {
  const auto b = io::read_file(p);
  return {b.begin(), b.end()};
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// Container of `n` synthetic fingerprints plus its manifest (default split).
fs::path toy_container(const TempDir& dir, std::size_t n, std::uint64_t seed) {
  const auto fps = dataset::synthetic_fingerprints(n, seed);
  const auto split = dataset::make_split(n);
  std::vector<dataset::ManifestRow> rows;
  for (std::size_t i = 0; i < n; ++i) rows.push_back({fps[i].sample_id, fps[i].activity, fps[i].location, split[i]});
  const fs::path path = dir / "toy.csit";
  dataset::write_container(path, dataset::make_container(fps));
  dataset::write_manifest_csv(default_manifest_path(path), rows);
  return path;
}

model::NetworkSpec tiny_net() {
  model::NetworkSpec s;
  s.width_multiplier = 0.125;
  return s;
}

TrainCommandOptions quick_train(const fs::path& container, const fs::path& out, int epochs = 2) {
  TrainCommandOptions o;
  o.container = container;
  o.network = tiny_net();
  o.config.epochs = epochs;
  o.config.batch_size = 16;
  o.seed = 7;
  o.out_dir = out;
  return o;
}

// ---- convert --------------------------------------------------------------------

TEST(Convert, SyntheticRawDirectory) {
  TempDir dir;
  dataset::SyntheticOptions so;
  so.samples = 25;
  dataset::write_raw_directory(dir / "raw", dataset::synthetic_recordings(so));
  ConvertOptions o;
  o.raw_dir = dir / "raw";
  o.out_container = dir / "out" / "d.csit";
  const auto r = cmd_convert(o);
  EXPECT_EQ(r.samples, 25U);
  EXPECT_EQ(r.test, 5U);
  EXPECT_EQ(r.manifest, dir / "out" / "d.manifest.csv");
  const auto ds = dataset::load_dataset(o.out_container, r.manifest);
  EXPECT_EQ(ds.fingerprints.size(), 25U);
  const auto manifest = nlohmann::json::parse(text_of(dir / "out" / kRunManifestFile));
  EXPECT_EQ(manifest["command"], "convert");
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(io::fnv1a64(io::read_file(o.out_container))));
  EXPECT_EQ(manifest["dataset_hash"], hash);
  EXPECT_TRUE(manifest.contains("started_at"));
}

TEST(Convert, EmptyDirectory) {
  TempDir dir;
  fs::create_directories(dir / "raw");
  ConvertOptions o;
  o.raw_dir = dir / "raw";
  o.out_container = dir / "d.csit";
  try {
    cmd_convert(o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("zero samples"), std::string::npos);
  }
}

TEST(Convert, AnnotationWithUnknownId) {
  TempDir dir;
  dataset::SyntheticOptions so;
  so.samples = 3;
  dataset::write_raw_directory(dir / "raw", dataset::synthetic_recordings(so));
  io::write_text(dir / "ann.csv", "sample_id,start_idx,end_idx\ns00000,0,100\ns00001,0,100\ns00002,0,100\nnope,0,5\n");
  ConvertOptions o;
  o.raw_dir = dir / "raw";
  o.out_container = dir / "d.csit";
  o.annotations = dir / "ann.csv";
  try {
    cmd_convert(o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
    EXPECT_NE(std::string(e.what()).find("nope"), std::string::npos);
  }
}

// ---- train ----------------------------------------------------------------------

TEST(Train, ZeroEpochsIsConfigError) {
  TempDir dir;
  auto o = quick_train(toy_container(dir, 20, 1), dir / "run", 0);
  EXPECT_EQ(error_of([&] { cmd_train(o); }), ErrorCode::kConfig);
}

TEST(Train, SameSeedGivesIdenticalCurves) {
  TempDir dir;
  const auto container = toy_container(dir, 30, 2);
  cmd_train(quick_train(container, dir / "a"));
  cmd_train(quick_train(container, dir / "b"));
  const auto a = text_of(dir / "a" / train::kCurveFile);
  EXPECT_EQ(a, text_of(dir / "b" / train::kCurveFile));
  EXPECT_EQ(line_count(a), 3U);
  EXPECT_EQ(text_of(dir / "a" / train::kLossPartsFile), text_of(dir / "b" / train::kLossPartsFile));
  EXPECT_EQ(io::read_file(dir / "a" / train::kCheckpointFile), io::read_file(dir / "b" / train::kCheckpointFile));
  EXPECT_EQ(model::read_network_spec(dir / "a" / kNetworkSpecFile).seed, 7U);
}

// ---- eval -----------------------------------------------------------------------

// 15 samples whose test split (indices 4, 9, 14) all carry activity 2 and
// location 7; a checkpoint with zero FC weights and one-hot biases predicts
// exactly that.
TEST(Eval, PerfectStubCheckpoint) {
  TempDir dir;
  auto fps = dataset::synthetic_fingerprints(15, 3);
  const auto split = dataset::make_split(15);
  std::vector<dataset::ManifestRow> rows;
  for (std::size_t i = 0; i < 15; ++i) {
    if (split[i] == dataset::Split::kTest) {
      fps[i].activity = 2;
      fps[i].location = 7;
    }
    rows.push_back({fps[i].sample_id, fps[i].activity, fps[i].location, split[i]});
  }
  dataset::write_container(dir / "s.csit", dataset::make_container(fps));
  dataset::write_manifest_csv(dir / "s.manifest.csv", rows);

  model::ResNet1D<float> net(tiny_net());
  for (auto& ref : net.tensors()) {
    if (ref.name.find(".fc.") == std::string::npos) continue;
    std::fill(ref.tensor->data.begin(), ref.tensor->data.end(), 0.0F);
    if (ref.name == "head_activity.fc.bias") ref.tensor->data[2] = 10.0F;
    if (ref.name == "head_location.fc.bias") ref.tensor->data[7] = 10.0F;
  }
  fs::create_directories(dir / "ckpt");
  write_checkpoint(dir / "ckpt" / "stub.ckpt", to_records(net.tensors()));
  model::write_network_spec(dir / "ckpt" / kNetworkSpecFile, tiny_net());

  EvalCommandOptions o;
  o.container = dir / "s.csit";
  o.checkpoint = dir / "ckpt" / "stub.ckpt";
  o.coordinates = fs::path(APL_SOURCE_DIR "/data/coords_synthetic_4x4.csv");
  o.out_dir = dir / "eval";
  const auto r = cmd_eval(o);
  EXPECT_EQ(r.activity.total(), 3U);
  EXPECT_EQ(r.activity_metrics.accuracy, 1.0);
  EXPECT_EQ(r.location_metrics.accuracy, 1.0);
  EXPECT_EQ(*r.ale_m, 0.0);
  EXPECT_FALSE(r.ame_m.has_value());
  EXPECT_EQ(text_of(dir / "eval" / "summary.csv"),
            "task,accuracy,ale_m,ame_m\nactivity,1.000000,n/a,n/a\nlocation,1.000000,0.000000,n/a\n");
}

TEST(Eval, MissingCoordinatesDegradesGracefully) {
  TempDir dir;
  const auto container = toy_container(dir, 20, 4);
  cmd_train(quick_train(container, dir / "run", 1));
  EvalCommandOptions o;
  o.container = container;
  o.checkpoint = dir / "run" / train::kCheckpointFile;
  o.coordinates = dir / "missing.csv";
  o.out_dir = dir / "eval";
  const auto r = cmd_eval(o);
  EXPECT_FALSE(r.ale_m.has_value());
  EXPECT_FALSE(r.warnings.empty());
  for (const char* f : {"activity_metrics.csv", "location_metrics.csv", "activity_confusion.csv",
                        "location_confusion.csv", "summary.csv", kRunManifestFile}) {
    EXPECT_TRUE(fs::exists(dir / "eval" / f)) << f;
  }
  EXPECT_EQ(line_count(text_of(dir / "eval" / "location_metrics.csv")), 17U);
  EXPECT_NE(text_of(dir / "eval" / "summary.csv").find("location,"), std::string::npos);
}

TEST(Eval, TrainedModelPopulatesLocationSummaryAndIsIdempotent) {
  TempDir dir;
  const auto container = toy_container(dir, 40, 5);
  cmd_train(quick_train(container, dir / "run", 2));
  EvalCommandOptions o;
  o.container = container;
  o.checkpoint = dir / "run" / train::kCheckpointFile;
  o.coordinates = fs::path(APL_SOURCE_DIR "/data/coords_synthetic_4x4.csv");
  o.out_dir = dir / "e1";
  const auto r = cmd_eval(o);
  ASSERT_TRUE(r.ale_m.has_value());
  if (r.location_metrics.accuracy < 1.0) {
    ASSERT_TRUE(r.ame_m.has_value());
    EXPECT_LE(*r.ale_m, *r.ame_m);
  }
  o.out_dir = dir / "e2";
  cmd_eval(o);
  for (const char* f : {"activity_metrics.csv", "location_metrics.csv", "activity_confusion.csv",
                        "location_confusion.csv", "summary.csv"}) {
    EXPECT_EQ(text_of(dir / "e1" / f), text_of(dir / "e2" / f)) << f;
  }
}

TEST(Eval, SpecCheckpointMismatch) {
  TempDir dir;
  const auto container = toy_container(dir, 20, 6);
  cmd_train(quick_train(container, dir / "run", 1));
  auto wider = tiny_net();
  wider.width_multiplier = 0.25;
  model::write_network_spec(dir / "other_spec.txt", wider);
  EvalCommandOptions o;
  o.container = container;
  o.checkpoint = dir / "run" / train::kCheckpointFile;
  o.network_spec = dir / "other_spec.txt";
  o.out_dir = dir / "eval";
  EXPECT_EQ(error_of([&] { cmd_eval(o); }), ErrorCode::kCompatibility);
}

// ---- baseline ---------------------------------------------------------------------

TEST(Baseline, DtwKnnReportHasTwoRows) {
  TempDir dir;
  const auto container = toy_container(dir, 12, 7);  // 10 train, 2 test
  BaselineCommandOptions o;
  o.container = container;
  o.method = "dtw-knn";
  o.out_dir = dir / "bl";
  const auto rows = cmd_baseline(o);
  ASSERT_EQ(rows.size(), 2U);
  EXPECT_EQ(rows[0].task, "activity");
  EXPECT_EQ(rows[1].task, "location");
  const auto report = text_of(dir / "bl" / "baseline_report.csv");
  EXPECT_EQ(report.substr(0, report.find('\n')), "method,task,accuracy,config_string,wall_seconds");
  EXPECT_NE(report.find("k=1;band=8;decimation=3"), std::string::npos);
  EXPECT_EQ(line_count(report), 3U);
  const auto dm = baselines::read_distance_matrix(dir / "bl" / "dtw_distances.dist");
  EXPECT_EQ(dm.rows, 2U);
  EXPECT_EQ(dm.cols, 10U);
}

TEST(Baseline, SvmSingleClassIsTrainingError) {
  TempDir dir;
  auto fps = dataset::synthetic_fingerprints(10, 8);
  std::vector<dataset::ManifestRow> rows;
  const auto split = dataset::make_split(10);
  for (std::size_t i = 0; i < 10; ++i) {
    fps[i].activity = 1;
    fps[i].location = 3;
    rows.push_back({fps[i].sample_id, 1, 3, split[i]});
  }
  dataset::write_container(dir / "one.csit", dataset::make_container(fps));
  dataset::write_manifest_csv(dir / "one.manifest.csv", rows);
  BaselineCommandOptions o;
  o.container = dir / "one.csit";
  o.method = "svm-rbf";
  o.out_dir = dir / "bl";
  EXPECT_EQ(error_of([&] { cmd_baseline(o); }), ErrorCode::kTraining);
}

TEST(Baseline, SvmReport) {
  TempDir dir;
  BaselineCommandOptions o;
  o.container = toy_container(dir, 30, 9);
  o.method = "svm-rbf";
  o.out_dir = dir / "bl";
  const auto rows = cmd_baseline(o);
  ASSERT_EQ(rows.size(), 2U);
  EXPECT_NE(rows[0].config.find("C=1"), std::string::npos);
}

TEST(Baseline, UnknownMethodIsUsageError) {
  TempDir dir;
  BaselineCommandOptions o;
  o.container = toy_container(dir, 10, 1);
  o.method = "random-forest";
  o.out_dir = dir / "bl";
  EXPECT_EQ(error_of([&] { cmd_baseline(o); }), ErrorCode::kUsage);
}

// ---- export-features ----------------------------------------------------------------

TEST(ExportFeatures, WidthsAndUnknownTap) {
  TempDir dir;
  const auto container = toy_container(dir, 20, 10);  // 4 test samples
  cmd_train(quick_train(container, dir / "run", 1));
  ExportCommandOptions o;
  o.container = container;
  o.checkpoint = dir / "run" / train::kCheckpointFile;
  o.taps = {"input", "output-activity", "output-location"};
  o.out_dir = dir / "fx";
  const auto paths = cmd_export_features(o);
  ASSERT_EQ(paths.size(), 3U);
  const std::size_t widths[] = {9985, 7, 17};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto table = io::read_csv(paths[i]);
    // read_csv treats the first line as a header; the files have none.
    EXPECT_EQ(table.rows.size() + 1, 4U);
    EXPECT_EQ(table.header.size(), widths[i]);
    EXPECT_EQ(table.header[0], "s00004");
  }
  o.taps = {"RB5"};
  EXPECT_EQ(error_of([&] { cmd_export_features(o); }), ErrorCode::kUsage);
}

// ---- executable -------------------------------------------------------------------

TEST(Executable, ErrorLineAndExitCode) {
  TempDir dir;
  const auto container = toy_container(dir, 10, 1);
  const std::string cmd = std::string(APL_CLI_PATH) + " baseline --container " + container.string() +
                          " --method nope --out " + (dir / "bl").string() + " 2> " + (dir / "err.txt").string();
  const int status = std::system(cmd.c_str());
  EXPECT_NE(status, 0);
  const auto err = text_of(dir / "err.txt");
  EXPECT_EQ(err.rfind("error: usage_error: ", 0), 0U) << err;
  EXPECT_EQ(line_count(err), 1U);

  const std::string ok = std::string(APL_CLI_PATH) + " baseline --container " + container.string() +
                         " --method dtw-knn --threads 2 --out " + (dir / "bl").string() + " > /dev/null";
  EXPECT_EQ(std::system(ok.c_str()), 0);
}

}  // namespace
}  // namespace apl::cli
