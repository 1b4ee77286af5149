// SPDX-License-Identifier: Apache-2.0

// apl: convert, train, eval, baseline and export-features subcommands.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "apl/cli/commands.hpp"
#include "apl/common/error.hpp"
#include "apl/common/io.hpp"
#include "apl/common/parallel.hpp"

namespace {

using namespace apl;
namespace fs = std::filesystem;

std::array<int, 4> parse_blocks(const std::string& text) {
  const auto parts = io::split(text, ',');
  if (parts.size() != 4) fail(ErrorCode::kUsage, "--blocks expects four comma-separated counts, got `" + text + "`");
  std::array<int, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) out[i] = static_cast<int>(io::parse_int(io::trim(parts[i]), "block count"));
  return out;
}

std::optional<fs::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

void print_error(ErrorCode code, const std::string& message) {
  std::string line = message;
  for (char& c : line) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  std::cerr << "error: " << error_code_name(code) << ": " << line << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CSI activity and location recognition toolkit"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  std::string out_dir = "out";
  app.add_option("--seed", seed, "Seed for every random consumer");
  app.add_option("--threads", threads, "Worker thread cap (0 = hardware concurrency)");
  app.add_option("--out", out_dir, "Output directory (convert: container path)");

  std::string container;
  std::string manifest;

  // convert
  auto* convert = app.add_subcommand("convert", "Raw recordings to a CSIT container and manifest");
  std::string raw_dir;
  std::string annotations;
  std::size_t split_phase = 4;
  convert->add_option("--raw", raw_dir, "Raw directory (labels.csv + <sample_id>.csv)")->required();
  convert->add_option("--annotations", annotations, "Segment annotations CSV");
  convert->add_option("--manifest", manifest, "Manifest path (default <container stem>.manifest.csv)");
  convert->add_option("--split-phase", split_phase, "Index mod 5 that goes to the test split");

  // train
  auto* train = app.add_subcommand("train", "Train a ResNet1D model");
  std::string network_file;
  std::string blocks;
  std::optional<double> width;
  bool plus = false;
  std::string config_file;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<double> lr0;
  std::optional<double> decay;
  std::optional<int> decay_every;
  std::optional<double> lambda;
  train->add_option("--container", container, "CSIT container")->required();
  train->add_option("--manifest", manifest, "Manifest CSV");
  train->add_option("--network-spec", network_file, "Network spec file (key=value)");
  train->add_option("--blocks", blocks, "Residual blocks per stage, e.g. 1,1,1,1");
  train->add_option("--width", width, "Channel width multiplier in (0, 1]");
  train->add_flag("--plus", plus, "Add the extra activity-head conv");
  train->add_option("--train-config", config_file, "Training config file (key=value)");
  train->add_option("--epochs", epochs);
  train->add_option("--batch-size", batch_size);
  train->add_option("--lr", lr0, "Initial learning rate");
  train->add_option("--decay", decay, "Step decay factor");
  train->add_option("--decay-every", decay_every, "Epochs between decays");
  train->add_option("--lambda", lambda, "Location loss weight");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  std::string checkpoint;
  std::string spec_file;
  std::string coords;
  bool squared = false;
  eval->add_option("--container", container, "CSIT container")->required();
  eval->add_option("--manifest", manifest, "Manifest CSV");
  eval->add_option("--checkpoint", checkpoint, "CKPT file")->required();
  eval->add_option("--network-spec", spec_file, "Network spec (default: beside the checkpoint)");
  eval->add_option("--coords", coords, "Location coordinates CSV (enables ALE/AME)");
  eval->add_flag("--squared-distance", squared, "Use squared Euclidean distance for ALE/AME");

  // baseline
  auto* baseline = app.add_subcommand("baseline", "Run a DTW+kNN or RBF-SVM baseline");
  std::string method;
  std::string band = "8";
  std::size_t k = 1;
  std::size_t decimation = 3;
  double svm_c = 1.0;
  std::optional<double> gamma;
  double tolerance = 1e-3;
  int max_passes = 100;
  baseline->add_option("--container", container, "CSIT container")->required();
  baseline->add_option("--manifest", manifest, "Manifest CSV");
  baseline->add_option("--method", method, "dtw-knn or svm-rbf")->required();
  baseline->add_option("--band", band, "Sakoe-Chiba radius in decimated steps, or `none`");
  baseline->add_option("--k", k, "Neighbours for kNN");
  baseline->add_option("--decimation", decimation, "Keep every n-th time step before DTW");
  baseline->add_option("--C", svm_c, "SVM box constraint");
  baseline->add_option("--gamma", gamma, "RBF gamma (default 1/(D*var))");
  baseline->add_option("--tolerance", tolerance, "SMO KKT tolerance");
  baseline->add_option("--max-passes", max_passes, "SMO iteration cap per sample");

  // export-features
  auto* exportf = app.add_subcommand("export-features", "Dump intermediate activations for the test split");
  std::string taps;
  exportf->add_option("--container", container, "CSIT container")->required();
  exportf->add_option("--manifest", manifest, "Manifest CSV");
  exportf->add_option("--checkpoint", checkpoint, "CKPT file")->required();
  exportf->add_option("--network-spec", spec_file, "Network spec (default: beside the checkpoint)");
  exportf->add_option("--taps", taps, "Comma-separated tap names")->required();

  for (auto* sub : {convert, train, eval, baseline, exportf}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error(ErrorCode::kUsage, e.what());
    return 2;
  }

  try {
    set_num_threads(threads == 0 ? std::thread::hardware_concurrency() : threads);

    if (convert->parsed()) {
      cli::ConvertOptions o;
      o.raw_dir = raw_dir;
      o.out_container = out_dir;
      o.manifest = opt_path(manifest);
      o.annotations = opt_path(annotations);
      o.split_phase = split_phase;
      const auto r = cli::cmd_convert(o);
      std::cout << "wrote " << r.samples << " samples (" << r.train << " train, " << r.test << " test) to "
                << o.out_container.string() << "\nmanifest: " << r.manifest.string() << '\n';
    } else if (train->parsed()) {
      cli::TrainCommandOptions o;
      o.container = container;
      o.manifest = opt_path(manifest);
      if (!network_file.empty()) o.network = model::read_network_spec(network_file);
      if (!blocks.empty()) o.network.block_counts = parse_blocks(blocks);
      if (width) o.network.width_multiplier = *width;
      if (plus) o.network.plus_variant = true;
      if (!config_file.empty()) o.config = train::read_train_config(config_file);
      if (epochs) o.config.epochs = *epochs;
      if (batch_size) o.config.batch_size = *batch_size;
      if (lr0) o.config.lr0 = *lr0;
      if (decay) o.config.decay = *decay;
      if (decay_every) o.config.decay_every = *decay_every;
      if (lambda) o.config.lambda = *lambda;
      o.seed = seed;
      o.out_dir = out_dir;
      o.on_epoch = [](const train::EpochRecord& e) {
        std::printf("epoch %d train_loss %.4f test_loss %.4f act %.4f/%.4f loc %.4f/%.4f\n", e.epoch, e.train_loss,
                    e.test_loss, e.act_train_acc, e.act_test_acc, e.loc_train_acc, e.loc_test_acc);
        std::fflush(stdout);
      };
      const auto r = cli::cmd_train(o);
      const auto& last = r.curve.records.back();
      std::printf("trained %zu epochs (%llu steps); final test accuracy activity %.4f location %.4f\n",
                  r.curve.records.size(), static_cast<unsigned long long>(r.steps), last.act_test_acc, last.loc_test_acc);
    } else if (eval->parsed()) {
      cli::EvalCommandOptions o;
      o.container = container;
      o.manifest = opt_path(manifest);
      o.checkpoint = checkpoint;
      o.network_spec = opt_path(spec_file);
      o.coordinates = opt_path(coords);
      o.distance = squared ? eval::DistanceMode::kSquaredEuclidean : eval::DistanceMode::kEuclidean;
      o.out_dir = out_dir;
      const auto r = cli::cmd_eval(o);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      std::printf("activity accuracy %.4f\nlocation accuracy %.4f\n", r.activity_metrics.accuracy,
                  r.location_metrics.accuracy);
      if (r.ale_m) std::printf("ALE %.4f m\n", *r.ale_m);
      if (r.ame_m) std::printf("AME %.4f m\n", *r.ame_m);
    } else if (baseline->parsed()) {
      cli::BaselineCommandOptions o;
      o.container = container;
      o.manifest = opt_path(manifest);
      o.method = method;
      if (band == "none") {
        o.dtw.band_radius = std::nullopt;
      } else {
        o.dtw.band_radius = static_cast<std::size_t>(io::parse_int(band, "band"));
      }
      o.dtw.k = k;
      o.dtw.decimation = decimation;
      o.svm.C = svm_c;
      o.svm.gamma = gamma;
      o.svm.tolerance = tolerance;
      o.svm.max_passes = max_passes;
      o.out_dir = out_dir;
      for (const auto& r : cli::cmd_baseline(o)) {
        std::printf("%s %s accuracy %.4f (%.1f s)\n", r.method.c_str(), r.task.c_str(), r.accuracy,
                    r.wall_seconds);
      }
    } else if (exportf->parsed()) {
      cli::ExportCommandOptions o;
      o.container = container;
      o.manifest = opt_path(manifest);
      o.checkpoint = checkpoint;
      o.network_spec = opt_path(spec_file);
      for (const auto& t : io::split(taps, ',')) o.taps.push_back(io::trim(t));
      o.out_dir = out_dir;
      for (const auto& p : cli::cmd_export_features(o)) std::cout << p.string() << '\n';
    }
  } catch (const Error& e) {
    print_error(e.code(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal_error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
