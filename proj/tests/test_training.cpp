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

#include <gtest/gtest.h>

#include <fstream>

#include "fixtures/toy.hpp"
#include "leafkit/training/checkpoint.hpp"
#include "leafkit/training/config.hpp"
#include "leafkit/training/trainer.hpp"
#include "test_util.hpp"

namespace leafkit::training {
namespace {

const std::vector<std::string> kLabels{"high", "low"};

struct Toy {
  ClipSet train, val;
};

Toy toy(std::size_t per_class_train = 2, std::size_t per_class_val = 1) {
  std::vector<dsp::Waveform> a, b;
  std::vector<int> la, lb;
  testing::toy_dataset(per_class_train, 1, a, la);
  testing::toy_dataset(per_class_val, 2, b, lb);
  return {clips_from_memory(a, la), clips_from_memory(b, lb)};
}

TrainConfig mel_config(int max_epochs) {
  TrainConfig c;
  c.frontend = frontend::FrontendKind::kMel;
  c.max_epochs = max_epochs;
  c.batch_size = 4;
  c.seed = 3;
  return c;
}

std::function<ValResult(int)> scripted(std::vector<double> losses) {
  return [losses](int epoch) { return ValResult{losses.at(static_cast<std::size_t>(epoch - 1)), 0.5}; };
}

TEST(EarlyStoppingRule, ScriptedSequence) {
  EarlyStopping es(8);
  const std::vector<double> seq{1.0, 0.9, 0.95, 0.9, 1.2, 0.91, 0.9, 2.0, 0.93, 0.9};
  int stop = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    es.observe(static_cast<int>(i + 1), seq[i]);
    if (es.should_stop()) {
      stop = static_cast<int>(i + 1);
      break;
    }
  }
  EXPECT_EQ(stop, 10);
  EXPECT_EQ(es.best_epoch(), 2);
  EXPECT_EQ(stop - 8, es.best_epoch());
}

TEST(EarlyStoppingRule, EqualLossIsNotImprovement) {
  EarlyStopping es(2);
  EXPECT_TRUE(es.observe(1, 0.5));
  EXPECT_FALSE(es.observe(2, 0.5));
  EXPECT_FALSE(es.observe(3, 0.5));
  EXPECT_TRUE(es.should_stop());
  EXPECT_THROW(EarlyStopping(0), InputError);
}

TEST(Train, StopsAtEpochTenRestoresEpochTwo) {
  auto d = toy();
  TrainHooks h;
  h.validation = scripted({1.0, 0.9, 0.9, 0.95, 1.0, 0.92, 0.9, 0.99, 1.1, 0.9, 0.1, 0.1});
  std::vector<int> best_epochs;
  h.on_best = [&](const Checkpoint& c) { best_epochs.push_back(c.epoch); };
  auto r = train(mel_config(50), d.train, d.val, kLabels, h);
  EXPECT_TRUE(r.early_stopped);
  EXPECT_EQ(r.stop_epoch, 10);
  EXPECT_EQ(r.log.size(), 10u);
  EXPECT_EQ(r.best.epoch, 2);
  EXPECT_DOUBLE_EQ(r.best.best_val_loss, 0.9);
  EXPECT_EQ(best_epochs, (std::vector<int>{1, 2}));
}

TEST(Train, DecreasingLossRunsToCap) {
  auto d = toy();
  TrainHooks h;
  h.validation = scripted({5, 4, 3, 2, 1});
  auto r = train(mel_config(5), d.train, d.val, kLabels, h);
  EXPECT_FALSE(r.early_stopped);
  EXPECT_EQ(r.stop_epoch, 5);
  EXPECT_EQ(r.best.epoch, 5);
}

void expect_same_logs(const std::vector<EpochLog>& a, const std::vector<EpochLog>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].epoch, b[i].epoch);
    EXPECT_EQ(a[i].train_loss, b[i].train_loss);
    EXPECT_EQ(a[i].val_loss, b[i].val_loss);
    EXPECT_EQ(a[i].val_acc, b[i].val_acc);
  }
}

TEST(Train, SameSeedSameLogs) {
  auto d = toy();
  auto cfg = mel_config(3);
  auto a = train(cfg, d.train, d.val, kLabels), b = train(cfg, d.train, d.val, kLabels);
  expect_same_logs(a.log, b.log);
  cfg.seed = 4;
  auto c = train(cfg, d.train, d.val, kLabels);
  EXPECT_NE(a.log[0].train_loss, c.log[0].train_loss);
}

TEST(Train, OnlineAugmentationIsSeeded) {
  auto d = toy();
  auto cfg = mel_config(2);
  cfg.augment_enabled = true;
  auto a = train(cfg, d.train, d.val, kLabels), b = train(cfg, d.train, d.val, kLabels);
  expect_same_logs(a.log, b.log);
  cfg.augment_enabled = false;
  auto plain = train(cfg, d.train, d.val, kLabels);
  EXPECT_NE(plain.log[0].train_loss, a.log[0].train_loss);
}

TEST(Train, RegularizersChangeTrajectory) {
  auto d = toy();
  auto on = mel_config(2);
  auto off = on;
  off.dropout = 0;
  off.l2_lambda = 0;
  auto a = train(on, d.train, d.val, kLabels), b = train(off, d.train, d.val, kLabels);
  EXPECT_GT(std::abs(a.log[1].train_loss - b.log[1].train_loss), 1e-6);
}

TEST(Train, ResumeContinuesAtNextEpoch) {
  auto d = toy();
  auto cfg = mel_config(2);
  Checkpoint last;
  TrainHooks h;
  h.on_last = [&](const Checkpoint& c) { last = c; };
  auto first = train(cfg, d.train, d.val, kLabels, h);
  ASSERT_EQ(last.epoch, 2);
  cfg.max_epochs = 4;
  auto rest = train(cfg, d.train, d.val, kLabels, {}, &last);
  ASSERT_EQ(rest.log.size(), 2u);
  EXPECT_EQ(rest.log[0].epoch, 3);
  EXPECT_EQ(rest.log[1].epoch, 4);
  EXPECT_GE(rest.best.epoch, first.best.epoch);
}

TEST(Train, FrozenGroupsStayBitStable) {
  std::vector<dsp::Waveform> clips;
  std::vector<int> labels;
  testing::toy_dataset(1, 5, clips, labels);
  auto set = clips_from_memory(clips, labels);
  for (auto kind : {frontend::FrontendKind::kLeafFB, frontend::FrontendKind::kLeafPCEN}) {
    TrainConfig cfg;
    cfg.frontend = kind;
    cfg.max_epochs = 1;
    cfg.lr = 1e-2;
    const auto before = Network(cfg, 2).parameters();
    Checkpoint after;
    TrainHooks h;
    h.on_last = [&](const Checkpoint& c) { after = c; };
    h.validation = scripted({1.0});
    train(cfg, set, set, kLabels, h);
    const bool fb = kind == frontend::FrontendKind::kLeafFB;
    for (const auto& [name, t] : before) {
      if (name.rfind("leaf.", 0) != 0) continue;
      const bool filterbank = name == "leaf.center_hz" || name == "leaf.kernel_sigma" || name == "leaf.pool_sigma";
      const bool frozen = fb ? !filterbank : filterbank;
      const auto* got = after.find(name);
      ASSERT_NE(got, nullptr) << name;
      if (frozen) {
        EXPECT_EQ(got->vec(), t.vec()) << name;
      } else {
        EXPECT_NE(got->vec(), t.vec()) << name;
      }
    }
  }
}

TEST(Validate, UniformAndPerfectLogits) {
  std::vector<std::vector<float>> uniform(6, std::vector<float>(5, 0.0f));
  auto r = score_logits(uniform, {0, 1, 2, 3, 4, 0});
  EXPECT_NEAR(r.loss, std::log(5.0), 1e-12);
  std::vector<std::vector<float>> perfect{{9, 0}, {0, 9}, {9, 0}};
  EXPECT_EQ(score_logits(perfect, {0, 1, 0}).accuracy, 1.0);
  EXPECT_THROW(score_logits({}, {}), DataError);
}

TEST(Validate, PureAndRepeatable) {
  auto d = toy();
  Network net(mel_config(1), 2);
  CounterRng rng(0);
  std::vector<dsp::Waveform> warm{d.train.load(0), d.train.load(1)};
  net.logits(warm, Mode::kTrain, rng);  // populate running statistics
  const auto params = net.state();
  std::vector<std::vector<float>> before;
  for (const auto& [n, t] : params) before.push_back(t.vec());
  auto a = validate(net, d.val), b = validate(net, d.val);
  EXPECT_EQ(a.loss, b.loss);
  EXPECT_EQ(a.accuracy, b.accuracy);
  const auto after = net.state();
  for (std::size_t i = 0; i < after.size(); ++i) EXPECT_EQ(after[i].second.vec(), before[i]);
  ClipSet empty;
  EXPECT_THROW(validate(net, empty), DataError);
}

Checkpoint small_checkpoint(std::size_t classes) {
  TrainConfig cfg = mel_config(1);
  Network net(cfg, classes);
  Checkpoint c;
  c.config = cfg;
  for (std::size_t i = 0; i < classes; ++i) c.labels.push_back("c" + std::to_string(i));
  c.epoch = 7;
  c.best_epoch = 5;
  c.best_val_loss = 0.123456789012345;
  c.adam_steps = 42;
  c.rng = {3, 1, 9};
  c.tensors = net.state();
  return c;
}

TEST(CheckpointIo, RoundTripIsBitIdentical) {
  auto c = small_checkpoint(4);
  const auto p = testing::scratch_dir("ckpt") / "a.ckpt";
  save_checkpoint(c, p);
  auto back = load_checkpoint(p);
  EXPECT_EQ(back.labels, c.labels);
  EXPECT_EQ(back.epoch, 7);
  EXPECT_EQ(back.best_epoch, 5);
  EXPECT_EQ(back.best_val_loss, c.best_val_loss);
  EXPECT_EQ(back.adam_steps, 42u);
  EXPECT_EQ(back.rng, c.rng);
  EXPECT_EQ(to_json(back.config), to_json(c.config));
  ASSERT_EQ(back.tensors.size(), c.tensors.size());
  for (std::size_t i = 0; i < c.tensors.size(); ++i) {
    EXPECT_EQ(back.tensors[i].first, c.tensors[i].first);
    EXPECT_EQ(back.tensors[i].second.shape(), c.tensors[i].second.shape());
    EXPECT_EQ(0, std::memcmp(back.tensors[i].second.values().data(), c.tensors[i].second.values().data(),
                             c.tensors[i].second.numel() * sizeof(float)));
  }
  EXPECT_EQ(encode_checkpoint(back), encode_checkpoint(c));
}

TEST(CheckpointIo, Errors) {
  const std::string good = encode_checkpoint(small_checkpoint(2));
  std::string bad = good;
  bad[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad), DataError);
  std::string ver = good;
  ver[8] = 9;
  EXPECT_THROW(decode_checkpoint(ver), DataError);
  EXPECT_THROW(decode_checkpoint(good.substr(0, good.size() - 3)), DataError);
  EXPECT_THROW(load_checkpoint("/nonexistent/x.ckpt"), InputError);
}

TEST(CheckpointIo, ClassCountMismatchIsShapeError) {
  auto c32 = small_checkpoint(32);
  Network net47(c32.config, 47);
  try {
    net47.load_state(c32);
    FAIL() << "expected a shape error";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("backend.fc"), std::string::npos) << e.what();
  }
}

TEST(CheckpointIo, NetworkRestoresLogits) {
  auto d = toy();
  auto r = train(mel_config(1), d.train, d.val, kLabels);
  auto net = network_from_checkpoint(decode_checkpoint(encode_checkpoint(r.best)));
  auto again = network_from_checkpoint(r.best);
  EXPECT_EQ(predict_logits(net, d.val), predict_logits(again, d.val));
}

TEST(Config, JsonRoundTripAndDefaults) {
  TrainConfig c;
  c.frontend = frontend::FrontendKind::kLeafPCEN;
  c.n_conv_layers = 5;
  c.augment.snr_range_db = {20, 30};
  auto back = train_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  auto d = train_config_from_json(Json::object());
  EXPECT_EQ(d.batch_size, 14u);
  EXPECT_EQ(d.patience, 8);
  EXPECT_EQ(d.max_epochs, 200);
  EXPECT_DOUBLE_EQ(d.l2_lambda, 0.001);
  EXPECT_DOUBLE_EQ(d.dropout, 0.4);
}

TEST(Config, UnknownKeysListed) {
  try {
    train_config_from_json(Json::parse(R"({"lr":0.01,"learning_rate":1,"augment":{"snr":3}})"));
    FAIL();
  } catch (const InputError& e) {
    const std::string m = e.what();
    EXPECT_NE(m.find("learning_rate"), std::string::npos);
    EXPECT_NE(m.find("augment.snr"), std::string::npos);
  }
  EXPECT_THROW(train_config_from_json(Json::parse(R"({"batch_size":"big"})")), InputError);
  EXPECT_THROW(train_config_from_json(Json::parse(R"({"patience":0})")), InputError);
  EXPECT_THROW(train_config_from_json(Json::parse(R"({"frontend":"sinc"})")), InputError);
  EXPECT_THROW(train_config_from_json(Json::parse(R"({"n_conv_layers":3})")), InputError);
}

TEST(EpochLogCsv, HeaderAndRoundTrip) {
  std::vector<EpochLog> logs{{1, 0.7, 0.6, 0.5, 1.25}, {2, 0.5, 0.55, 0.75, 1.5}};
  const auto p = testing::scratch_dir("epochlog") / "log.csv";
  write_epoch_log(logs, p);
  std::ifstream in(p);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "epoch,train_loss,val_loss,val_acc,seconds");
  EXPECT_EQ(read_epoch_log(p), logs);
}

TEST(ManifestClips, UnknownLabelIsLabelError) {
  dataset::DatasetManifest m;
  dataset::RecordingEntry e;
  e.id = "x/1";
  e.label = "x";
  e.duration_s = 5;
  e.split = dataset::Split::kVal;
  e.chunks = {{"x/1", 0, 0, false}};
  m.entries.push_back(e);
  EXPECT_THROW(clips_from_manifest(m, dataset::Split::kVal, {"a", "b"}), LabelError);
  EXPECT_EQ(clips_from_manifest(m, dataset::Split::kVal, {"a", "x"}).labels, (std::vector<int>{1}));
}

}  // namespace
}  // namespace leafkit::training
