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

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "leafkit/augment/augment.hpp"
#include "leafkit/backend/model.hpp"
#include "leafkit/core/error.hpp"
#include "leafkit/core/log.hpp"
#include "leafkit/core/rng.hpp"
#include "leafkit/dataset/chunk.hpp"
#include "leafkit/dataset/manifest.hpp"
#include "leafkit/frontend/frontend.hpp"
#include "leafkit/tensor/adam.hpp"
#include "leafkit/tensor/nn.hpp"
#include "leafkit/training/checkpoint.hpp"
#include "leafkit/training/config.hpp"

namespace leafkit::training {

using dsp::Waveform;

/// Labeled 5 s clips, loaded on demand.
struct ClipSet {
  std::vector<int> labels;
  std::vector<std::string> groups;  // recording id of each clip
  std::function<Waveform(std::size_t)> load;

  std::size_t size() const { return labels.size(); }
};

inline ClipSet clips_from_memory(std::vector<Waveform> clips, std::vector<int> labels,
                                 std::vector<std::string> groups = {}) {
  if (clips.size() != labels.size()) throw ShapeError("clips_from_memory: clip and label counts differ");
  if (groups.empty()) {
    for (std::size_t i = 0; i < clips.size(); ++i) groups.push_back(std::to_string(i));
  }
  ClipSet s;
  s.labels = std::move(labels);
  s.groups = std::move(groups);
  auto data = std::make_shared<std::vector<Waveform>>(std::move(clips));
  s.load = [data](std::size_t i) { return (*data)[i]; };
  return s;
}

/// Chunks of one split. `labels` fixes the class indices; a manifest label
/// outside it is a label error.
inline ClipSet clips_from_manifest(const dataset::DatasetManifest& m, dataset::Split which,
                                   const std::vector<std::string>& labels) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < labels.size(); ++i) index[labels[i]] = static_cast<int>(i);
  auto refs = std::make_shared<std::vector<std::pair<dataset::RecordingEntry, dataset::ChunkSpec>>>();
  ClipSet s;
  for (const auto& ref : m.chunks(which)) {
    auto it = index.find(ref.entry->label);
    if (it == index.end()) throw LabelError("label '" + ref.entry->label + "' is not in the model's label set");
    s.labels.push_back(it->second);
    s.groups.push_back(ref.entry->id);
    refs->emplace_back(*ref.entry, ref.chunk);
  }
  s.load = [refs](std::size_t i) { return dataset::load_chunk((*refs)[i].first, (*refs)[i].second); };
  return s;
}

/// Frontend + CNN in 32-bit floats.
class Network {
 public:
  Network(const TrainConfig& cfg, std::size_t n_classes) : frontend_(cfg.frontend), model_(make_model(cfg, n_classes)) {}

  frontend::Frontend<float>& frontend() { return frontend_; }
  const frontend::Frontend<float>& frontend() const { return frontend_; }
  backend::Model<float>& model() { return model_; }
  const backend::Model<float>& model() const { return model_; }

  Tensor<float> logits(const std::vector<Waveform>& clips, Mode mode, CounterRng& rng) {
    return model_.forward(frontend_.forward(clips), mode, rng);
  }

  std::vector<std::pair<std::string, Tensor<float>>> parameters() const {
    auto p = model_.named_parameters();
    for (auto& f : frontend_.named()) p.push_back(std::move(f));
    return p;
  }

  std::size_t trainable_parameter_count() const { return backend::count_parameters(parameters()); }

  /// Parameters plus batch-norm running statistics.
  std::vector<std::pair<std::string, Tensor<float>>> state() const {
    auto s = parameters();
    const auto& blocks = model_.blocks();
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const auto& st = blocks[i].stats;
      const std::string base = "backend.conv" + std::to_string(i + 1) + ".bn_running_";
      s.emplace_back(base + "mean", Tensor<float>({st.mean.size()}, std::vector<float>(st.mean.begin(), st.mean.end())));
      s.emplace_back(base + "var", Tensor<float>({st.var.size()}, std::vector<float>(st.var.begin(), st.var.end())));
      s.emplace_back(base + "updates", Tensor<float>::scalar(static_cast<float>(st.updates)));
    }
    return s;
  }

  /// Copies every state tensor from `c`. Shapes must match exactly.
  void load_state(const Checkpoint& c) {
    for (auto& [name, t] : parameters()) {
      const Tensor<float>* src = c.find(name);
      if (!src) throw ShapeError("checkpoint has no tensor '" + name + "'");
      copy_checked(name, *src, t);
    }
    auto& blocks = model_.blocks();
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      auto& st = blocks[i].stats;
      const std::string base = "backend.conv" + std::to_string(i + 1) + ".bn_running_";
      const auto* mean = c.find(base + "mean");
      const auto* var = c.find(base + "var");
      const auto* upd = c.find(base + "updates");
      if (!mean || !var || !upd) throw ShapeError("checkpoint lacks running statistics for conv" + std::to_string(i + 1));
      if (mean->numel() != st.mean.size() || var->numel() != st.var.size()) {
        throw ShapeError("checkpoint running statistics of conv" + std::to_string(i + 1) + " have the wrong size");
      }
      st.mean.assign(mean->values().begin(), mean->values().end());
      st.var.assign(var->values().begin(), var->values().end());
      st.updates = static_cast<std::uint64_t>(upd->item());
    }
  }

 private:
  static backend::Model<float> make_model(const TrainConfig& cfg, std::size_t n_classes) {
    backend::ModelConfig mc;
    mc.n_conv_layers = cfg.n_conv_layers;
    mc.dropout_rate = cfg.dropout;
    mc.n_classes = n_classes;
    CounterRng init(cfg.seed, 0x696e6974);
    return backend::build_model<float>(mc, init);
  }

  static void copy_checked(const std::string& name, const Tensor<float>& src, Tensor<float>& dst) {
    if (src.shape() != dst.shape()) {
      throw ShapeError("checkpoint tensor '" + name + "' has shape " + shape_str(src.shape()) + ", model expects " +
                       shape_str(dst.shape()));
    }
    std::copy(src.values().begin(), src.values().end(), dst.mutable_values().begin());
  }

  frontend::Frontend<float> frontend_;
  backend::Model<float> model_;
};

/// Network configured and loaded from a checkpoint.
inline Network network_from_checkpoint(const Checkpoint& c) {
  if (c.labels.size() < 2) throw DataError("checkpoint has fewer than two labels");
  Network net(c.config, c.labels.size());
  net.load_state(c);
  return net;
}

/// Patience rule on validation loss: an epoch improves only with a strictly
/// lower loss; training stops after `patience` epochs in a row without one.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {
    if (patience < 1) throw InputError("early stopping: patience must be >= 1");
  }

  /// Records `epoch`; returns true if it is the new best.
  bool observe(int epoch, double val_loss) {
    if (val_loss < best_loss_) {
      best_loss_ = val_loss;
      best_epoch_ = epoch;
      bad_ = 0;
      return true;
    }
    ++bad_;
    return false;
  }

  bool should_stop() const { return bad_ >= patience_; }
  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }
  int epochs_without_improvement() const { return bad_; }

  void restore(int best_epoch, double best_loss, int bad) {
    best_epoch_ = best_epoch;
    best_loss_ = best_loss;
    bad_ = bad;
  }

 private:
  int patience_;
  int best_epoch_ = 0;
  double best_loss_ = std::numeric_limits<double>::infinity();
  int bad_ = 0;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0;
  double val_loss = 0;
  double val_acc = 0;
  double seconds = 0;

  bool operator==(const EpochLog&) const = default;
};

inline std::string epoch_log_header() { return "epoch,train_loss,val_loss,val_acc,seconds"; }

inline std::string epoch_log_row(const EpochLog& e) {
  std::ostringstream s;
  s << e.epoch << ',' << std::setprecision(9) << e.train_loss << ',' << e.val_loss << ',' << e.val_acc << ','
    << std::setprecision(4) << std::fixed << e.seconds;
  return s.str();
}

inline void write_epoch_log(const std::vector<EpochLog>& logs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write epoch log " + path.string());
  out << epoch_log_header() << '\n';
  for (const auto& e : logs) out << epoch_log_row(e) << '\n';
}

inline std::vector<EpochLog> read_epoch_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open epoch log " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != epoch_log_header()) throw DataError("epoch log " + path.string() + ": unexpected header");
  std::vector<EpochLog> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    EpochLog e;
    char c1, c2, c3, c4;
    std::istringstream s(line);
    if (!(s >> e.epoch >> c1 >> e.train_loss >> c2 >> e.val_loss >> c3 >> e.val_acc >> c4 >> e.seconds)) {
      throw DataError("epoch log " + path.string() + ": bad row '" + line + "'");
    }
    out.push_back(e);
  }
  return out;
}

struct ValResult {
  double loss = 0;
  double accuracy = 0;
};

/// Eval-mode logits for every clip, in order.
inline std::vector<std::vector<float>> predict_logits(Network& net, const ClipSet& clips, std::size_t batch_size = 14) {
  NoGradGuard no_grad;
  CounterRng unused(0);
  std::vector<std::vector<float>> out;
  for (std::size_t s = 0; s < clips.size(); s += batch_size) {
    std::vector<Waveform> batch;
    for (std::size_t i = s; i < std::min(clips.size(), s + batch_size); ++i) batch.push_back(clips.load(i));
    const auto y = net.logits(batch, Mode::kEval, unused);
    const std::size_t c = y.size(1);
    for (std::size_t b = 0; b < batch.size(); ++b) out.emplace_back(y.values().begin() + b * c, y.values().begin() + (b + 1) * c);
  }
  return out;
}

inline int argmax(const std::vector<float>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

/// Mean cross-entropy and accuracy from logits.
inline ValResult score_logits(const std::vector<std::vector<float>>& logits, const std::vector<int>& labels) {
  if (logits.empty()) throw DataError("validate: empty validation set");
  double loss = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const auto& z = logits[i];
    const double mx = *std::max_element(z.begin(), z.end());
    double se = 0;
    for (float v : z) se += std::exp(static_cast<double>(v) - mx);
    loss += -(static_cast<double>(z[static_cast<std::size_t>(labels[i])]) - mx - std::log(se));
    correct += argmax(z) == labels[i];
  }
  const double n = static_cast<double>(logits.size());
  return {loss / n, static_cast<double>(correct) / n};
}

inline ValResult validate(Network& net, const ClipSet& val, std::size_t batch_size = 14) {
  if (val.size() == 0) throw DataError("validate: empty validation set");
  return score_logits(predict_logits(net, val, batch_size), val.labels);
}

struct TrainHooks {
  /// Replaces validation, e.g. with a scripted loss sequence.
  std::function<ValResult(int epoch)> validation;
  std::function<void(const EpochLog&, Network&)> on_epoch;
  std::function<void(const Checkpoint&)> on_best;
  std::function<void(const Checkpoint&)> on_last;
  /// Returning true ends training after the current epoch.
  std::function<bool(const EpochLog&)> stop_when;
};

struct TrainResult {
  Checkpoint best;
  std::vector<EpochLog> log;
  int stop_epoch = 0;
  bool early_stopped = false;
};

namespace detail {

inline std::vector<ParamRef<float>> param_refs(const Network& net, double frontend_lr_scale) {
  std::vector<ParamRef<float>> refs;
  for (auto& [name, t] : net.parameters()) {
    refs.push_back({name, t, name.rfind("leaf.", 0) == 0 ? frontend_lr_scale : 1.0});
  }
  return refs;
}

inline Checkpoint capture(const Network& net, const Adam<float>& opt, const TrainConfig& cfg,
                          const std::vector<std::string>& labels, int epoch, const EarlyStopping& es) {
  Checkpoint c;
  c.config = cfg;
  c.labels = labels;
  c.epoch = epoch;
  c.best_epoch = es.best_epoch();
  c.best_val_loss = es.best_loss();
  c.adam_steps = opt.steps();
  c.rng = {cfg.seed, 0, static_cast<std::uint64_t>(epoch)};
  for (auto& [name, t] : net.state()) c.tensors.emplace_back(name, t.clone());
  for (const auto& [name, m] : opt.moments()) {
    c.tensors.emplace_back("adam.m." + name, Tensor<float>({m.m.size()}, std::vector<float>(m.m.begin(), m.m.end())));
    c.tensors.emplace_back("adam.v." + name, Tensor<float>({m.v.size()}, std::vector<float>(m.v.begin(), m.v.end())));
  }
  return c;
}

inline void restore_optimizer(Adam<float>& opt, const Checkpoint& c) {
  for (auto& [name, m] : opt.moments()) {
    const auto* tm = c.find("adam.m." + name);
    const auto* tv = c.find("adam.v." + name);
    if (!tm || !tv || tm->numel() != m.m.size() || tv->numel() != m.v.size()) {
      throw ShapeError("checkpoint optimizer state missing or mis-sized for '" + name + "'");
    }
    m.m.assign(tm->values().begin(), tm->values().end());
    m.v.assign(tv->values().begin(), tv->values().end());
  }
  opt.set_steps(c.adam_steps);
}

// Fixed stream tags so every random decision is keyed by (seed, purpose, epoch, batch).
enum StreamTag : std::uint64_t { kShuffle = 1, kAugment = 2, kDropout = 3 };

}  // namespace detail

/// Epoch loop with early stopping. Returns the best checkpoint (strictly
/// lowest validation loss). `resume` continues from a saved state at its epoch + 1.
inline TrainResult train(const TrainConfig& cfg, const ClipSet& train_set, const ClipSet& val_set,
                         const std::vector<std::string>& labels, const TrainHooks& hooks = {},
                         const Checkpoint* resume = nullptr) {
  cfg.validate();
  if (train_set.size() == 0) throw DataError("train: empty training split");
  if (val_set.size() == 0 && !hooks.validation) throw DataError("train: empty validation split");
  if (labels.size() < 2) throw DataError("train: need at least two labels");

  Network net(cfg, labels.size());
  AdamConfig ac;
  ac.lr = cfg.lr;
  ac.l2_lambda = cfg.l2_lambda;
  Adam<float> opt(detail::param_refs(net, cfg.frontend_lr_scale), ac);
  EarlyStopping es(cfg.patience);
  augment::AugmentConfig aug = cfg.augment;
  if (cfg.augment_enabled && !cfg.ir_bank_dir.empty() && aug.ir_bank.empty()) aug.ir_bank = augment::load_ir_bank(cfg.ir_bank_dir);

  TrainResult res;
  int first_epoch = 1;
  if (resume) {
    if (resume->labels != labels) throw LabelError("resume: checkpoint label set differs from the manifest");
    net.load_state(*resume);
    detail::restore_optimizer(opt, *resume);
    es.restore(resume->best_epoch, resume->best_val_loss, resume->epoch - resume->best_epoch);
    first_epoch = resume->epoch + 1;
    res.best = *resume;
  }

  const CounterRng root(cfg.seed);
  std::vector<std::size_t> order(train_set.size());
  for (int epoch = first_epoch; epoch <= cfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), 0);
    CounterRng shuffle = root.derive(detail::kShuffle).derive(static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.uniform_index(i)]);

    double loss_sum = 0;
    std::size_t batch_index = 0;
    for (std::size_t s = 0; s < order.size(); s += cfg.batch_size, ++batch_index) {
      const std::size_t e = std::min(order.size(), s + cfg.batch_size);
      std::vector<Waveform> clips;
      std::vector<int> y;
      for (std::size_t i = s; i < e; ++i) {
        clips.push_back(train_set.load(order[i]));
        y.push_back(train_set.labels[order[i]]);
      }
      if (cfg.augment_enabled && aug.mode == augment::AugmentMode::kOnline) {
        CounterRng ar = root.derive(detail::kAugment).derive(static_cast<std::uint64_t>(epoch)).derive(batch_index);
        clips = augment::augment_batch(clips, aug, ar);
      }
      CounterRng dr = root.derive(detail::kDropout).derive(static_cast<std::uint64_t>(epoch)).derive(batch_index);
      Tensor<float> loss;
      try {
        loss = softmax_cross_entropy(net.logits(clips, Mode::kTrain, dr), y);
      } catch (const NumericError& ex) {
        throw NumericError("train: epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_index) + ": " +
                           ex.what());
      }
      opt.zero_grad();
      loss.backward();
      opt.step();
      net.frontend().clamp();
      loss_sum += static_cast<double>(loss.item()) * static_cast<double>(e - s);
    }

    const ValResult v = hooks.validation ? hooks.validation(epoch) : validate(net, val_set, cfg.batch_size);
    if (!std::isfinite(v.loss)) throw NumericError("train: non-finite validation loss at epoch " + std::to_string(epoch));
    EpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_sum / static_cast<double>(order.size());
    log.val_loss = v.loss;
    log.val_acc = v.accuracy;
    // Deterministic runs log zero seconds so repeated epoch logs are byte-identical.
    log.seconds = cfg.deterministic ? 0.0 : std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.log.push_back(log);
    res.stop_epoch = epoch;

    if (es.observe(epoch, v.loss)) {
      res.best = detail::capture(net, opt, cfg, labels, epoch, es);
      if (hooks.on_best) hooks.on_best(res.best);
    }
    if (hooks.on_last) hooks.on_last(detail::capture(net, opt, cfg, labels, epoch, es));
    if (hooks.on_epoch) hooks.on_epoch(log, net);
    if (es.should_stop()) {
      res.early_stopped = true;
      break;
    }
    if (hooks.stop_when && hooks.stop_when(log)) break;
  }
  return res;
}

}  // namespace leafkit::training
