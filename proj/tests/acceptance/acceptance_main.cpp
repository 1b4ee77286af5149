// SPDX-License-Identifier: Apache-2.0

// Acceptance suite. Prints one status line per criterion:
//   PASS | FAIL | WARN (soft criterion violated) | BLOCKED (input unavailable).
// Criteria 5 and 7 need the recorded CSI corpus, given as a CSIT container in
// APL_DATASET (manifest beside it). Without
// it they report BLOCKED and run a clearly labelled synthetic proxy instead.
// Exit status is non-zero only when some criterion FAILs.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "apl/baselines/dtw.hpp"
#include "apl/baselines/svm.hpp"
#include "apl/cli/commands.hpp"
#include "apl/common/error.hpp"
#include "apl/common/io.hpp"
#include "apl/common/parallel.hpp"
#include "apl/common/random.hpp"
#include "apl/dataset/synthetic.hpp"
#include "apl/eval/metrics.hpp"
#include "apl/tensor/checkpoint.hpp"
#include "apl/train/loss.hpp"
#include "network_check.hpp"
#include "temp_dir.hpp"

namespace {

using namespace apl;
using apl::testing::TempDir;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

enum class Status { kPass, kFail, kWarn, kBlocked };

const char* status_name(Status s) {
  switch (s) {
    case Status::kPass: return "PASS";
    case Status::kFail: return "FAIL";
    case Status::kWarn: return "WARN";
    case Status::kBlocked: return "BLOCKED";
  }
  return "?";
}

// Collects failed expectations of one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void note(const std::string& s) { notes_.push_back(s); }
  bool ok() const { return failures_.empty(); }

  std::string detail() const {
    std::ostringstream out;
    const char* sep = "";
    for (const auto& f : failures_) {
      out << sep << "failed: " << f;
      sep = "; ";
    }
    for (const auto& n : notes_) {
      out << sep << n;
      sep = "; ";
    }
    return out.str();
  }

 private:
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  Status status;
  std::string detail;
};

Outcome from_check(const Check& c) { return {c.ok() ? Status::kPass : Status::kFail, c.detail()}; }

// ---- 1: gradient suite ----------------------------------------------------------

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  Check c;
  double worst = 0.0;
  auto record = [&](const std::string& name, const GradCheckReport& r) {
    worst = std::max(worst, r.max_rel_error);
    c.expect(r.passed && r.max_rel_error < 1e-3, name + " err " + fmt("%.3g", r.max_rel_error));
  };
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    GradCheckOptions o;
    o.seed = 100 + seed;
    Rng rng(seed);
    Conv1d<double> conv({3, 4, 3, 2, 1, true});
    conv.reset_parameters(rng);
    record("conv1d", grad_check_layer(conv, {2, 3, 11}, Mode::kTrain, o));
    for (Mode mode : {Mode::kTrain, Mode::kEval}) {
      BatchNorm1d<double> bn(3);
      bn.reset_parameters(rng);
      for (auto& v : bn.tensors("bn")[0].tensor->data) v = rng.uniform(0.5, 1.5);
      record(mode == Mode::kTrain ? "batchnorm(train)" : "batchnorm(eval)",
             grad_check_layer(bn, {3, 3, 5}, mode, o));
    }
    Relu<double> relu;
    record("relu", grad_check_layer(relu, {2, 3, 7}, Mode::kTrain, o));
    MaxPool1d<double> maxpool(3, 2, 1);
    record("maxpool1d", grad_check_layer(maxpool, {2, 3, 9}, Mode::kTrain, o));
    AvgPool1d<double> avgpool(4, 4);
    record("avgpool1d", grad_check_layer(avgpool, {2, 3, 12}, Mode::kTrain, o));
    Linear<double> linear(5, 3);
    linear.reset_parameters(rng);
    record("linear", grad_check_layer(linear, {4, 5}, Mode::kTrain, o));
    record("network", apl::testing::check_network(apl::testing::small_check_spec(), 4, Mode::kTrain, seed, 12));
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 120.0, "runtime " + fmt("%.1f", secs) + " s");
  c.note("7 checks x 5 seeds, max error " + fmt("%.2e", worst) + ", " + fmt("%.1f", secs) + " s");
  return from_check(c);
}

// ---- 2: architecture contract ------------------------------------------------------

Outcome architecture_contract() {
  Check c;
  model::NetworkSpec spec;
  model::ResNet1D<float> net(spec);
  const auto count = net.conv_count();
  c.expect(count.total == 11, "total convs " + std::to_string(count.total));
  c.expect(count.shared == 9, "shared convs " + std::to_string(count.shared));
  const std::vector<std::size_t> trace = {192, 96, 48, 48, 24, 12, 6, 6, 1};
  c.expect(net.expected_length_trace() == trace, "declared length trace");
  Tensor<float> x({1, 52, 192});
  c.expect(net.forward(x, Mode::kEval).length_trace == trace, "measured length trace");
  auto plus_spec = spec;
  plus_spec.plus_variant = true;
  model::ResNet1D<float> plus(plus_spec);
  const auto pc = plus.conv_count();
  c.expect(pc.total == count.total + 1 && pc.activity_head == count.activity_head + 1 &&
               pc.location_head == count.location_head && pc.shared == count.shared,
           "plus variant adds one activity-head conv");
  c.note("11 convs, 9 shared, trace 192/96/48/48/24/12/6/6/1");
  return from_check(c);
}

// ---- 3: analytic loss values ---------------------------------------------------------

Outcome analytic_losses() {
  Check c;
  const std::vector<double> six(6, 0.37);
  const std::vector<double> sixteen(16, -2.5);
  const double ce6 = train::cross_entropy(six, 3);
  const double ce16 = train::cross_entropy(sixteen, 11);
  c.expect(std::abs(ce6 - std::log(6.0)) < 1e-6, "CE over 6 uniform scores " + fmt("%.9f", ce6));
  c.expect(std::abs(ce16 - std::log(16.0)) < 1e-6, "CE over 16 uniform scores " + fmt("%.9f", ce16));
  Tensor<double> act({3, 6});
  Tensor<double> loc({3, 16});
  const std::vector<int> al = {0, 2, 5};
  const std::vector<int> ll = {1, 9, 15};
  const auto j = train::joint_loss(act, loc, al, ll, 1.0);
  c.expect(std::abs(j.value.total - (std::log(6.0) + std::log(16.0))) < 1e-6,
           "joint loss " + fmt("%.9f", j.value.total));
  c.note("ln6 + ln16 = " + fmt("%.6f", j.value.total));
  return from_check(c);
}

// ---- 4: metric oracle -----------------------------------------------------------------

Outcome metric_oracle() {
  Check c;
  Rng rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    const int k = trial % 2 == 0 ? 6 : 16;
    const std::size_t n = 30 + rng.below(200);
    std::vector<int> labels(n);
    std::vector<int> preds(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
      preds[i] = rng.uniform01() < 0.6 ? labels[i] : static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    }
    const auto cm = eval::confusion(preds, labels, static_cast<std::size_t>(k));
    const auto m = eval::class_metrics(cm);
    std::uint64_t tp_sum = 0;
    std::uint64_t actual_sum = 0;
    for (int cls = 0; cls < k; ++cls) {
      std::uint64_t tp = 0;
      std::uint64_t predicted = 0;
      std::uint64_t actual = 0;
      for (std::size_t i = 0; i < n; ++i) {
        tp += preds[i] == cls && labels[i] == cls;
        predicted += preds[i] == cls;
        actual += labels[i] == cls;
      }
      tp_sum += tp;
      actual_sum += actual;
      const double p = predicted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted);
      const double r = actual == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(actual);
      const double f = p + r == 0.0 ? 0.0 : 2 * p * r / (p + r);
      const auto& got = m.per_class[static_cast<std::size_t>(cls)];
      c.expect(got.precision == p && got.recall == r && got.f1 == f,
               "class " + std::to_string(cls) + " of trial " + std::to_string(trial));
    }
    const double micro_recall = static_cast<double>(tp_sum) / static_cast<double>(actual_sum);
    c.expect(micro_recall == m.accuracy, "micro-recall identity, trial " + std::to_string(trial));

    dataset::CoordinateMap coords;
    for (int l = 0; l < 16; ++l) coords[l] = {rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)};
    std::vector<int> lt(n);
    std::vector<int> lp(n);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < n; ++i) {
      lt[i] = static_cast<int>(rng.below(16));
      lp[i] = rng.uniform01() < 0.7 ? lt[i] : static_cast<int>(rng.below(16));
      wrong += lp[i] != lt[i];
    }
    const double ale = eval::ale(lp, lt, coords);
    const auto ame = eval::ame(lp, lt, coords);
    if (wrong > 0 && ame) {
      c.expect(std::abs(*ame * static_cast<double>(wrong) - ale * static_cast<double>(n)) < 1e-9,
               "AME*M = ALE*N, trial " + std::to_string(trial));
    } else {
      c.expect(wrong == 0 && !ame, "AME defined iff M > 0");
    }
  }
  c.expect(std::abs(0.0904 * 278.0 / 12.0 - 2.0943) < 5e-4, "reference ALE/AME pair");
  c.note("40 random fixtures; reference pair gives AME " + fmt("%.5f", 0.0904 * 278.0 / 12.0));
  return from_check(c);
}

// ---- 5 and 7: dataset-scale runs ----------------------------------------------------------

struct DataRun {
  bool real = false;
  fs::path container;
  std::optional<double> resnet_activity;
};

Outcome desk_training(DataRun& run, const fs::path& work) {
  Check c;
  cli::TrainCommandOptions o;
  o.container = run.container;
  o.network.width_multiplier = 0.25;
  o.config.epochs = 60;
  o.seed = 7;
  o.out_dir = work / "desk";
  const auto t0 = Clock::now();
  const auto result = cli::cmd_train(o);
  const double secs = seconds_since(t0);
  const auto& last = result.curve.records.back();
  run.resnet_activity = last.act_test_acc;
  const std::string summary = "activity " + fmt("%.4f", last.act_test_acc) + ", location " +
                              fmt("%.4f", last.loc_test_acc) + ", train loss " + fmt("%.4f", last.train_loss) +
                              ", " + fmt("%.0f", secs) + " s";
  if (!run.real) return {Status::kBlocked, "recorded CSI corpus not available (set APL_DATASET); synthetic proxy: " + summary};
  c.expect(last.act_test_acc >= 0.75, "activity accuracy " + fmt("%.4f", last.act_test_acc));
  c.expect(last.loc_test_acc >= 0.85, "location accuracy " + fmt("%.4f", last.loc_test_acc));
  c.expect(last.epoch == 60 && last.train_loss < 0.2, "train loss at epoch 60 " + fmt("%.4f", last.train_loss));
  c.expect(secs <= 3600.0, "runtime " + fmt("%.0f", secs) + " s");
  c.note(summary);
  return from_check(c);
}

Outcome baseline_ordering(DataRun& run, const fs::path& work) {
  cli::BaselineCommandOptions o;
  o.container = run.container;
  o.method = "dtw-knn";
  o.out_dir = work / "dtw";
  const auto dtw = cli::cmd_baseline(o);
  o.method = "svm-rbf";
  o.out_dir = work / "svm";
  const auto svm = cli::cmd_baseline(o);
  const double dtw_loc = dtw.at(1).accuracy;
  const double svm_act = svm.at(0).accuracy;
  const double resnet_act = run.resnet_activity.value_or(std::numeric_limits<double>::quiet_NaN());
  const std::string summary = "dtw-knn location " + fmt("%.4f", dtw_loc) + ", svm-rbf activity " +
                              fmt("%.4f", svm_act) + ", resnet activity " + fmt("%.4f", resnet_act);
  if (!run.real) return {Status::kBlocked, "recorded CSI corpus not available (set APL_DATASET); synthetic proxy: " + summary};
  Check c;
  c.expect(dtw_loc >= 0.85, "dtw-knn location accuracy below 0.85");
  c.expect(resnet_act - svm_act >= 0.20, "resnet activity margin over svm below 20 points");
  c.note(summary);
  return {c.ok() ? Status::kPass : Status::kWarn, c.detail()};
}

// ---- 6: baseline properties -----------------------------------------------------------------

dataset::SeriesMatrix random_series(std::size_t channels, std::size_t length, Rng& rng) {
  dataset::SeriesMatrix s(channels, length);
  for (auto& v : s.values) v = static_cast<float>(rng.uniform(-2.0, 2.0));
  return s;
}

double frame_cost(const dataset::SeriesMatrix& a, std::size_t i, const dataset::SeriesMatrix& b, std::size_t j) {
  double s = 0.0;
  for (std::size_t ch = 0; ch < a.channels; ++ch) {
    const double d = static_cast<double>(a.at(ch, i)) - b.at(ch, j);
    s += d * d;
  }
  return std::sqrt(s);
}

double enumerate_alignments(const dataset::SeriesMatrix& a, const dataset::SeriesMatrix& b) {
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double acc) {
    acc += frame_cost(a, i, b, j);
    if (i + 1 == a.length && j + 1 == b.length) {
      best = std::min(best, acc);
      return;
    }
    if (i + 1 < a.length) walk(i + 1, j, acc);
    if (j + 1 < b.length) walk(i, j + 1, acc);
    if (i + 1 < a.length && j + 1 < b.length) walk(i + 1, j + 1, acc);
  };
  walk(0, 0, 0.0);
  return best;
}

Outcome baseline_properties() {
  Check c;
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_series(4, 12 + rng.below(8), rng);
    const auto b = random_series(4, 12 + rng.below(8), rng);
    c.expect(baselines::dtw_distance(a, a) == 0.0, "dtw zero self");
    c.expect(baselines::dtw_distance(a, b) == baselines::dtw_distance(b, a), "dtw symmetry");
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t band = 8; band <= 20; ++band) {
      const double d = baselines::dtw_distance(a, b, band);
      c.expect(d <= prev, "band monotonicity");
      prev = d;
    }
    c.expect(baselines::dtw_distance(a, b) <= prev, "unbanded is the lower bound");
  }
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t channels = 1 + rng.below(3);
    const auto a = random_series(channels, 1 + rng.below(6), rng);
    const auto b = random_series(channels, 1 + rng.below(6), rng);
    c.expect(std::abs(baselines::dtw_distance(a, b) - enumerate_alignments(a, b)) < 1e-9,
             "dtw vs enumeration, trial " + std::to_string(trial));
  }

  baselines::FeatureMatrix x;
  x.cols = 4;
  std::vector<int> labels;
  const double centres[3][4] = {{0, 0, 0, 0}, {1.5, 1.5, 0, 0}, {0, 1.5, 1.5, 0}};
  for (int cls = 0; cls < 3; ++cls) {
    for (int i = 0; i < 12; ++i) {
      for (int k = 0; k < 4; ++k) x.values.push_back(static_cast<float>(centres[cls][k] + 0.8 * rng.normal()));
      labels.push_back(cls);
      ++x.rows;
    }
  }
  baselines::SvmConfig cfg;
  const auto model = baselines::svm_train(x, labels, cfg);
  const auto kernel = baselines::rbf_kernel_matrix(x, x, model.gamma);
  c.expect(model.pairs.size() == 3, "three pairwise problems");
  std::size_t checked = 0;
  for (const auto& pair : model.pairs) {
    const auto& sol = pair.solution;
    double eq = 0.0;
    for (std::size_t i = 0; i < sol.alpha.size(); ++i) {
      c.expect(sol.alpha[i] >= 0.0 && sol.alpha[i] <= cfg.C, "box constraint");
      eq += sol.alpha[i] * sol.y[i];
      double f = -sol.rho;
      for (std::size_t j = 0; j < sol.alpha.size(); ++j) {
        f += sol.alpha[j] * sol.y[j] * kernel[pair.members[i] * x.rows + pair.members[j]];
      }
      const double margin = sol.y[i] * f;
      if (sol.alpha[i] <= 0.0) {
        c.expect(margin >= 1.0 - cfg.tolerance, "KKT at alpha = 0");
      } else if (sol.alpha[i] >= cfg.C) {
        c.expect(margin <= 1.0 + cfg.tolerance, "KKT at alpha = C");
      } else {
        c.expect(std::abs(margin - 1.0) <= cfg.tolerance, "KKT on the margin");
      }
      ++checked;
    }
    c.expect(std::abs(eq) < cfg.tolerance, "equality constraint");
  }
  c.note("dtw: 20 property trials, 100 enumeration cases; svm: " + std::to_string(checked) + " KKT conditions");
  return from_check(c);
}

// ---- 8: determinism ---------------------------------------------------------------------------

Outcome determinism(const fs::path& data, const fs::path& work) {
  Check c;
  const std::size_t threads = 2;
  set_num_threads(threads);
  auto run = [&](const std::string& name) {
    cli::TrainCommandOptions o;
    o.container = data;
    o.network.width_multiplier = 0.125;
    o.config.epochs = 3;
    o.config.batch_size = 32;
    o.seed = 11;
    o.out_dir = work / name;
    cli::cmd_train(o);
    return io::read_file(work / name / train::kCurveFile);
  };
  const auto a = run("det_a");
  const auto b = run("det_b");
  set_num_threads(1);
  c.expect(!a.empty() && a == b, "learning curves differ");
  c.note(std::to_string(a.size()) + " identical bytes, " + std::to_string(threads) + " threads");
  return from_check(c);
}

// ---- 9: format round trips ---------------------------------------------------------------------

Outcome format_round_trips(const fs::path& work) {
  Check c;
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    dataset::CsiContainer ct;
    ct.channels = static_cast<std::uint16_t>(1 + rng.below(60));
    ct.length = static_cast<std::uint16_t>(1 + rng.below(200));
    ct.count = static_cast<std::uint32_t>(rng.below(20));
    ct.values.resize(static_cast<std::size_t>(ct.channels) * ct.length * ct.count);
    for (auto& v : ct.values) v = static_cast<float>(rng.normal() * 40.0);
    const fs::path p1 = work / "rt1.csit";
    const fs::path p2 = work / "rt2.csit";
    dataset::write_container(p1, ct);
    dataset::write_container(p2, dataset::read_container(p1));
    c.expect(io::read_file(p1) == io::read_file(p2), "CSIT trial " + std::to_string(trial));

    std::vector<CheckpointRecord> records(1 + rng.below(6));
    for (std::size_t r = 0; r < records.size(); ++r) {
      records[r].name = "tensor_" + std::to_string(trial) + "." + std::to_string(r);
      std::size_t total = 1;
      const std::size_t rank = 1 + rng.below(3);
      for (std::size_t d = 0; d < rank; ++d) {
        records[r].dims.push_back(static_cast<std::uint32_t>(1 + rng.below(9)));
        total *= records[r].dims.back();
      }
      records[r].values.resize(total);
      for (auto& v : records[r].values) v = static_cast<float>(rng.normal());
    }
    const fs::path k1 = work / "rt1.ckpt";
    const fs::path k2 = work / "rt2.ckpt";
    write_checkpoint(k1, records);
    write_checkpoint(k2, read_checkpoint(k1));
    c.expect(io::read_file(k1) == io::read_file(k2), "CKPT trial " + std::to_string(trial));
  }
  c.note("10 random containers and checkpoints");
  return from_check(c);
}

}  // namespace

int main() {
  TempDir work;
  bool any_fail = false;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out = {Status::kFail, std::string("exception: ") + e.what()};
    }
    any_fail = any_fail || out.status == Status::kFail;
    std::printf("criterion %d %-28s %s%s%s\n", id, name, status_name(out.status), out.detail.empty() ? "" : "  ",
                out.detail.c_str());
    std::fflush(stdout);
  };

  // Synthetic corpus for the determinism run and the proxy runs.
  dataset::SyntheticOptions so;
  so.seed = 3;
  const fs::path synthetic = work / "synthetic.csit";
  {
    dataset::write_raw_directory(work / "raw", dataset::synthetic_recordings(so));
    cli::ConvertOptions co;
    co.raw_dir = work / "raw";
    co.out_container = synthetic;
    cli::cmd_convert(co);
  }

  DataRun run;
  if (const char* env = std::getenv("APL_DATASET"); env != nullptr && *env != '\0') {
    run.real = true;
    run.container = env;
  } else {
    run.container = synthetic;
  }

  report(1, "gradient-suite", gradient_suite);
  report(2, "architecture-contract", architecture_contract);
  report(3, "analytic-loss-values", analytic_losses);
  report(4, "metric-oracle", metric_oracle);
  report(5, "desk-scale-training", [&] { return desk_training(run, work.path()); });
  report(6, "baseline-properties", baseline_properties);
  report(7, "baseline-ordering", [&] { return baseline_ordering(run, work.path()); });
  report(8, "determinism", [&] { return determinism(synthetic, work.path()); });
  report(9, "format-round-trips", [&] { return format_round_trips(work.path()); });
  return any_fail ? 1 : 0;
}
