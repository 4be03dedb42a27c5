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


// Scoring a trained network on manifest chunks.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "leafkit/dataset/manifest.hpp"
#include "leafkit/metrics/metrics.hpp"
#include "leafkit/training/trainer.hpp"

namespace leafkit::metrics {

/// "<frontend>-<layers>", e.g. "leaf-4".
inline std::string model_name(const training::TrainConfig& c) {
  return frontend::frontend_kind_name(c.frontend) + "-" + std::to_string(c.n_conv_layers);
}

struct EvalOptions {
  dataset::Split split = dataset::Split::kTest;
  bool group_by_file = false;     // majority vote per recording
  bool include_validation = true;  // adds val accuracy/loss to the context
  std::size_t batch_size = 14;
};

inline void check_label_sets(const std::vector<std::string>& model, const std::vector<std::string>& data) {
  if (model == data) return;
  std::string msg = "label set mismatch: checkpoint has " + std::to_string(model.size()) + " labels, manifest has " +
                    std::to_string(data.size());
  for (const auto& l : data) {
    if (!std::binary_search(model.begin(), model.end(), l)) {
      msg += "; '" + l + "' is unknown to the checkpoint";
      break;
    }
  }
  throw LabelError(msg);
}

/// Chunk-level (or file-level) report from precomputed logits.
inline EvalReport evaluate_logits(const std::vector<std::string>& labels, const training::ClipSet& clips,
                                  const std::vector<std::vector<float>>& logits, bool group_by_file) {
  std::vector<int> pred;
  std::vector<std::vector<double>> probs;
  for (const auto& z : logits) {
    pred.push_back(training::argmax(z));
    const double mx = *std::max_element(z.begin(), z.end());
    std::vector<double> p(z.size());
    double s = 0;
    for (std::size_t k = 0; k < z.size(); ++k) s += p[k] = std::exp(static_cast<double>(z[k]) - mx);
    for (auto& v : p) v /= s;
    probs.push_back(std::move(p));
  }
  EvalReport rep;
  if (group_by_file) {
    auto [t, p] = majority_vote(clips.groups, clips.labels, pred, probs);
    rep = evaluate_indices(labels, t, p);
    rep.context["mode"] = "file";
  } else {
    rep = evaluate_indices(labels, clips.labels, pred);
    rep.context["mode"] = "chunk";
  }
  rep.loss = training::score_logits(logits, clips.labels).loss;
  rep.context["chunks"] = clips.size();
  return rep;
}

/// Scores `ckpt` on one split of `m`. The checkpoint's label list must equal
/// the manifest's; otherwise LabelError.
inline EvalReport evaluate(const training::Checkpoint& ckpt, const dataset::DatasetManifest& m,
                           const EvalOptions& opt = {}) {
  check_label_sets(ckpt.labels, m.labels());
  auto net = training::network_from_checkpoint(ckpt);
  const auto clips = training::clips_from_manifest(m, opt.split, ckpt.labels);
  if (clips.size() == 0) {
    throw DataError(std::string("evaluate: the ") + dataset::split_name(opt.split) + " split has no chunks");
  }
  EvalReport rep = evaluate_logits(ckpt.labels, clips, training::predict_logits(net, clips, opt.batch_size),
                                   opt.group_by_file);
  rep.context["model"] = model_name(ckpt.config);
  rep.context["split"] = dataset::split_name(opt.split);
  rep.context["seed"] = ckpt.config.seed;
  rep.context["epoch"] = ckpt.epoch;
  if (opt.include_validation && opt.split != dataset::Split::kVal) {
    const auto val = training::clips_from_manifest(m, dataset::Split::kVal, ckpt.labels);
    if (val.size() > 0) {
      const auto v = training::validate(net, val, opt.batch_size);
      rep.context["validation"] = {{"accuracy", v.accuracy}, {"loss", v.loss}};
    }
  } else if (opt.split == dataset::Split::kVal) {
    rep.context["validation"] = {{"accuracy", rep.accuracy}, {"loss", *rep.loss}};
  }
  return rep;
}

}  // namespace leafkit::metrics
