// Copyright 2026 The leafkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// leafkit command-line interface.
//
//   leafkit prepare <data_root> --out DIR [--scheme pattern|stratified] [--augment-offline]
//   leafkit train --manifest M --out DIR [--config C] [--frontend F] [--layers N] [--seed S]
//                 [--deterministic] [--dry-run]
//   leafkit eval <checkpoint> --manifest M --out DIR [--split test|val|train] [--group-by-file]
//   leafkit summarize <report.json>... [--out table.csv]
//   leafkit analyze <init.ckpt> <trained.ckpt> --out DIR
//
// Exit codes: 0 ok, 1 unexpected, 2 data, 3 numeric, 4 label, 5 input, 6 mode.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "leafkit/leafkit.hpp"

namespace fs = std::filesystem;
using namespace leafkit;

namespace {

enum Exit { kOk = 0, kUnexpected = 1, kData = 2, kNumeric = 3, kLabel = 4, kInput = 5, kMode = 6 };

inline constexpr std::size_t kReferenceParameters = 28319;
inline constexpr std::size_t kDryRunClasses = 32;

struct Options {
  std::string data_root;
  std::string config;
  std::string manifest;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string frontend;
  std::optional<std::size_t> layers;
  bool deterministic = false;
  bool dry_run = false;
  bool group_by_file = false;
  bool augment_offline = false;
  std::string scheme = "pattern";
  bool trim_last_10s = false;
  std::string split = "test";
  std::optional<std::size_t> classes;
  std::string checkpoint;
  std::string init_checkpoint;
  std::string trained_checkpoint;
  std::vector<std::string> reports;
};

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("LEAFKIT_SEED");
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t used = 0;
    const auto s = std::stoull(v, &used);
    if (used != std::string(v).size()) throw std::invalid_argument("trailing characters");
    return s;
  } catch (const std::exception&) {
    throw InputError(std::string("LEAFKIT_SEED is not an unsigned integer: '") + v + "'");
  }
}

/// Config file, then flags on top. Seed precedence: --seed, config, LEAFKIT_SEED, 0.
training::TrainConfig resolve_config(const Options& o) {
  training::TrainConfig c;
  bool seed_in_file = false;
  if (!o.config.empty()) {
    training::Json raw;
    try {
      raw = training::Json::parse(read_text_file(o.config));
    } catch (const training::Json::exception& e) {
      throw InputError("config " + o.config + ": " + e.what());
    }
    if (!raw.is_object()) throw InputError("config " + o.config + ": expected a JSON object");
    seed_in_file = raw.contains("seed");
    c = training::train_config_from_json(raw);
  }
  if (!o.frontend.empty()) c.frontend = frontend::parse_frontend_kind(o.frontend);
  if (o.layers) c.n_conv_layers = *o.layers;
  if (o.deterministic) c.deterministic = true;
  if (o.seed) {
    c.seed = *o.seed;
  } else if (!seed_in_file) {
    c.seed = env_seed().value_or(0);
  }
  c.validate();
  return c;
}

void print_split_table(const dataset::DatasetManifest& m) {
  const auto s = m.summary();
  std::printf("%-6s %7s %10s %7s %7s %7s\n", "split", "files", "seconds", "chunks", "files%", "dur%");
  for (auto sp : {dataset::Split::kTrain, dataset::Split::kVal, dataset::Split::kTest}) {
    const int k = static_cast<int>(sp);
    std::printf("%-6s %7zu %10.1f %7zu %7.1f %7.1f\n", dataset::split_name(sp), s.files[k], s.seconds[k], s.chunks[k],
                100.0 * s.file_fraction(sp), 100.0 * s.duration_fraction(sp));
  }
}

int cmd_prepare(const Options& o) {
  if (o.out.empty()) throw InputError("prepare: --out is required");
  const fs::path out(o.out);
  dataset::IngestOptions io;
  io.trim_last_10s = o.trim_last_10s;
  io.converted_dir = out / "converted";
  auto ing = dataset::ingest(o.data_root, io);
  for (const auto& w : ing.warnings) log_warning(w);
  auto m = dataset::split(std::move(ing.manifest), dataset::parse_split_scheme(o.scheme));
  dataset::chunk_manifest(m);
  m.validate();
  fs::create_directories(out);
  dataset::write_rejection_report(ing.rejections, out / "rejections.tsv");

  if (o.augment_offline) {
    const training::TrainConfig tc = resolve_config(o);
    augment::AugmentConfig ac = tc.augment.mode == augment::AugmentMode::kOffline ? tc.augment
                                                                                   : augment::AugmentConfig::offline();
    ac.seed = tc.seed;
    if (!tc.ir_bank_dir.empty()) ac.ir_bank = augment::load_ir_bank(tc.ir_bank_dir);
    auto gen = augment::generate_offline(m, ac, out / "augmented");
    m = std::move(gen.manifest);
    m.header_extra["offline_augmentation"] = {{"generations", ac.offline_generations}, {"seed", ac.seed}};
    std::printf("generated %zu augmented training clips\n", gen.files.size());
  }

  dataset::write_manifest(m, out / "manifest.jsonl");
  std::printf("%zu recordings, %zu labels, %zu rejected\n", m.entries.size(), m.labels().size(), ing.rejections.size());
  print_split_table(m);
  std::printf("manifest: %s\n", (out / "manifest.jsonl").string().c_str());
  return kOk;
}

int dry_run(const training::TrainConfig& cfg, std::size_t n_classes) {
  training::Network net(cfg, n_classes);
  const std::size_t fe = backend::count_parameters(net.frontend().named());
  const std::size_t total = net.trainable_parameter_count();
  std::printf("model: %s, %zu classes\n", metrics::model_name(cfg).c_str(), n_classes);
  std::printf("trainable parameters: %zu (frontend %zu, backend %zu)\n", total, fe, total - fe);
  std::printf("reference (4-layer LEAF): %zu\n", kReferenceParameters);
  std::printf("delta: %+lld\n", static_cast<long long>(total) - static_cast<long long>(kReferenceParameters));
  return kOk;
}

training::Checkpoint snapshot(const training::Network& net, const training::TrainConfig& cfg,
                              const std::vector<std::string>& labels) {
  training::Checkpoint c;
  c.config = cfg;
  c.labels = labels;
  for (auto& [name, t] : net.state()) c.tensors.emplace_back(name, t.detach());
  return c;
}

int cmd_train(const Options& o) {
  const training::TrainConfig cfg = resolve_config(o);
  std::optional<dataset::DatasetManifest> m;
  if (!o.manifest.empty()) m = dataset::load_manifest(o.manifest);
  if (o.dry_run) {
    const std::size_t k = o.classes ? *o.classes : m ? m->labels().size() : kDryRunClasses;
    if (k < 2) throw DataError("train: need at least two classes");
    return dry_run(cfg, k);
  }
  if (!m) throw InputError("train: --manifest is required");
  if (o.out.empty()) throw InputError("train: --out is required");
  const fs::path out(o.out);
  fs::create_directories(out);
  const auto labels = m->labels();
  const auto train_set = training::clips_from_manifest(*m, dataset::Split::kTrain, labels);
  const auto val_set = training::clips_from_manifest(*m, dataset::Split::kVal, labels);
  write_text_file(out / "config.json", training::to_json(cfg).dump(2) + "\n");
  training::save_checkpoint(snapshot(training::Network(cfg, labels.size()), cfg, labels), out / "init.ckpt");

  std::printf("%s seed %llu: %zu train chunks, %zu val chunks, %zu labels\n", metrics::model_name(cfg).c_str(),
              static_cast<unsigned long long>(cfg.seed), train_set.size(), val_set.size(), labels.size());
  training::TrainHooks hooks;
  hooks.on_best = [&](const training::Checkpoint& c) { training::save_checkpoint(c, out / "best.ckpt"); };
  hooks.on_last = [&](const training::Checkpoint& c) { training::save_checkpoint(c, out / "last.ckpt"); };
  std::vector<training::EpochLog> logs;
  hooks.on_epoch = [&](const training::EpochLog& e, training::Network&) {
    logs.push_back(e);
    training::write_epoch_log(logs, out / "epochs.csv");
    std::printf("epoch %3d  train_loss %.4f  val_loss %.4f  val_acc %.4f\n", e.epoch, e.train_loss, e.val_loss,
                e.val_acc);
    std::fflush(stdout);
  };
  const auto res = training::train(cfg, train_set, val_set, labels, hooks);
  training::write_epoch_log(res.log, out / "epochs.csv");

  metrics::EvalOptions eo;
  eo.split = dataset::Split::kVal;
  auto rep = metrics::evaluate(res.best, *m, eo);
  rep.context["checkpoint"] = (out / "best.ckpt").string();
  metrics::write_report(rep, out / "val_report.json");
  std::printf("stopped at epoch %d (%s); best epoch %d, val_loss %.4f, val_acc %.4f\n", res.stop_epoch,
              res.early_stopped ? "early stopping" : "epoch limit", res.best.epoch, res.best.best_val_loss,
              rep.accuracy);
  return kOk;
}

int cmd_eval(const Options& o) {
  if (o.manifest.empty()) throw InputError("eval: --manifest is required");
  if (o.out.empty()) throw InputError("eval: --out is required");
  const auto ckpt = training::load_checkpoint(o.checkpoint);
  const auto m = dataset::load_manifest(o.manifest);
  metrics::EvalOptions eo;
  eo.split = dataset::parse_split(o.split);
  if (eo.split == dataset::Split::kUnassigned) throw InputError("eval: --split must be train, val or test");
  eo.group_by_file = o.group_by_file;
  auto rep = metrics::evaluate(ckpt, m, eo);
  rep.context["checkpoint"] = o.checkpoint;
  const fs::path out(o.out);
  metrics::write_report(rep, out / "report.json");
  metrics::export_confusion(rep, out / "confusion");
  std::printf("%s on %s (%s level, %zu items): accuracy %.4f  f1 %.4f  recall %.4f  precision %.4f\n",
              rep.context["model"].get<std::string>().c_str(), o.split.c_str(),
              rep.context["mode"].get<std::string>().c_str(), rep.n_items, rep.accuracy, rep.macro_f1,
              rep.macro_recall, rep.macro_precision);
  return kOk;
}

int cmd_summarize(const Options& o) {
  std::vector<metrics::EvalReport> reports;
  std::vector<std::string> bad;
  for (const auto& p : o.reports) {
    try {
      reports.push_back(metrics::read_report(p));
    } catch (const InputError& e) {
      bad.push_back(e.what());
    }
  }
  if (!bad.empty()) {
    std::string msg = "summarize: " + std::to_string(bad.size()) + " unreadable report(s):";
    for (const auto& b : bad) msg += "\n  " + b;
    throw InputError(msg);
  }
  const std::string csv = metrics::summary_csv(metrics::summarize_by_model(reports));
  if (!o.out.empty()) write_text_file(o.out, csv);
  std::fputs(csv.c_str(), stdout);
  return kOk;
}

int cmd_analyze(const Options& o) {
  if (o.out.empty()) throw InputError("analyze: --out is required");
  const auto init = training::load_checkpoint(o.init_checkpoint);
  const auto trained = training::load_checkpoint(o.trained_checkpoint);
  const auto ci = analysis::checkpoint_centers(init);
  const auto ct = analysis::checkpoint_centers(trained);
  const auto rep = analysis::extract_filter_report(ci, ct);
  const fs::path out(o.out);
  analysis::render_filter_plots(rep, out);
  const double disorder = analysis::order_disturbance_metric(rep);
  double max_abs = 0;
  for (const auto& r : rep.rows) max_abs = std::max(max_abs, std::abs(r.deviation_hz));
  training::Json summary{{"filters", rep.size()},
                         {"order_disturbance", disorder},
                         {"max_abs_deviation_hz", max_abs},
                         {"init_checkpoint", o.init_checkpoint},
                         {"trained_checkpoint", o.trained_checkpoint}};
  write_text_file(out / "analysis.json", summary.dump(2) + "\n");
  std::printf("%zu filters, order disturbance %.4f, largest shift %.1f Hz\n", rep.size(), disorder, max_abs);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"leafkit: learnable audio frontends for insect sound classification"};
  app.require_subcommand(1);
  Options o;

  auto add_seed = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "Random seed (overrides config and LEAFKIT_SEED)");
  };
  auto add_model_flags = [&](CLI::App* c) {
    c->add_option("--config", o.config, "JSON run configuration");
    c->add_option("--frontend", o.frontend, "Frontend")->check(CLI::IsMember({"mel", "leaf", "leafFB", "leafPCEN"}));
    c->add_option("--layers", o.layers, "Convolutional layers")->check(CLI::IsMember({4, 5}));
    c->add_flag("--deterministic", o.deterministic, "Reproducible run; epoch logs record no timings");
    add_seed(c);
  };

  auto* prep = app.add_subcommand("prepare", "Ingest a labeled folder tree, split, chunk and write a manifest");
  prep->add_option("data_root", o.data_root, "Root with one sub-folder per label")->required();
  prep->add_option("--out", o.out, "Output directory")->required();
  prep->add_option("--scheme", o.scheme, "Split scheme")->check(CLI::IsMember({"pattern", "stratified"}));
  prep->add_flag("--trim-last-10s", o.trim_last_10s, "Keep only the last 10 s of each recording");
  prep->add_flag("--augment-offline", o.augment_offline, "Write offline augmented copies of the training chunks");
  prep->add_option("--config", o.config, "JSON run configuration (augment section)");
  add_seed(prep);

  auto* tr = app.add_subcommand("train", "Train a model");
  tr->add_option("--manifest", o.manifest, "Dataset manifest");
  tr->add_option("--out", o.out, "Run directory");
  tr->add_flag("--dry-run", o.dry_run, "Print the trainable parameter count and exit");
  tr->add_option("--classes", o.classes, "Class count for --dry-run without a manifest")->check(CLI::PositiveNumber);
  add_model_flags(tr);

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  ev->add_option("checkpoint", o.checkpoint, "Checkpoint file")->required();
  ev->add_option("--manifest", o.manifest, "Dataset manifest")->required();
  ev->add_option("--out", o.out, "Output directory")->required();
  ev->add_option("--split", o.split, "Split to score")->check(CLI::IsMember({"train", "val", "test"}));
  ev->add_flag("--group-by-file", o.group_by_file, "Majority vote over each recording's chunks");

  auto* su = app.add_subcommand("summarize", "Median and range over evaluation reports");
  su->add_option("reports", o.reports, "Report JSON files")->required();
  su->add_option("--out", o.out, "CSV output file");

  auto* an = app.add_subcommand("analyze", "Compare learned filter centers with their initialization");
  an->add_option("init", o.init_checkpoint, "Checkpoint before training")->required();
  an->add_option("trained", o.trained_checkpoint, "Checkpoint after training")->required();
  an->add_option("--out", o.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInput;
  }

  try {
    if (prep->parsed()) return cmd_prepare(o);
    if (tr->parsed()) return cmd_train(o);
    if (ev->parsed()) return cmd_eval(o);
    if (su->parsed()) return cmd_summarize(o);
    if (an->parsed()) return cmd_analyze(o);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const LabelError& e) {
    std::cerr << "label error: " << e.what() << '\n';
    return kLabel;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const ModeError& e) {
    std::cerr << "mode error: " << e.what() << '\n';
    return kMode;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return kUnexpected;
  }
  return kUnexpected;
}
