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

#include "leafkit/backend/model.hpp"
#include "leafkit/frontend/frontend.hpp"
#include "leafkit/tensor/gradcheck.hpp"
#include "test_util.hpp"

namespace leafkit::backend {
namespace {

using TD = Tensor<double>;

ModelConfig config(std::size_t layers, std::size_t classes, double dropout = 0.4) {
  ModelConfig c;
  c.n_conv_layers = layers;
  c.n_classes = classes;
  c.dropout_rate = dropout;
  return c;
}

Tensor<float> random_features(std::size_t B, std::size_t F, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<float> v(B * 64 * F);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  return Tensor<float>({B, 1, 64, F}, v);
}

TEST(Model, FourLayerShape) {
  CounterRng rng(1);
  auto m = build_model<float>(config(4, 32), rng);
  auto y = m.forward(random_features(2, 1500, 2), Mode::kTrain, rng);
  EXPECT_EQ(y.shape(), (Shape{2, 32}));
  for (float v : y.vec()) EXPECT_TRUE(std::isfinite(v));
}

TEST(Model, FiveLayerShape) {
  CounterRng rng(1);
  auto m = build_model<float>(config(5, 66, 0.23), rng);
  auto y = m.forward(random_features(3, 1500, 2), Mode::kTrain, rng);
  EXPECT_EQ(y.shape(), (Shape{3, 66}));
}

TEST(Model, SeedDeterminesWeights) {
  CounterRng a(7), b(7);
  auto ma = build_model<float>(config(4, 32), a), mb = build_model<float>(config(4, 32), b);
  auto pa = ma.named_parameters(), pb = mb.named_parameters();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i].second.vec(), pb[i].second.vec());
}

TEST(Model, InvalidConfigs) {
  CounterRng rng(0);
  EXPECT_THROW(build_model<float>(config(3, 32), rng), std::invalid_argument);
  EXPECT_THROW(build_model<float>(config(4, 1), rng), std::invalid_argument);
  EXPECT_THROW(build_model<float>(config(4, 32, 1.0), rng), std::invalid_argument);
  auto c = config(4, 32);
  c.channel_plan[2].out_channels = 0;
  EXPECT_THROW(build_model<float>(c, rng), std::invalid_argument);
}

TEST(Model, ShapeMismatchThrows) {
  CounterRng rng(0);
  auto m = build_model<float>(config(4, 32), rng);
  EXPECT_THROW(m.forward(Tensor<float>::zeros({1, 2, 64, 10}), Mode::kTrain, rng), ShapeError);
}

TEST(Model, EvalDeterministicTrainStochastic) {
  CounterRng rng(3);
  auto m = build_model<float>(config(4, 5), rng);
  auto x = random_features(4, 40, 5);
  m.forward(x, Mode::kTrain, rng);  // populates running stats
  auto e1 = m.forward(x, Mode::kEval, rng), e2 = m.forward(x, Mode::kEval, rng);
  EXPECT_EQ(e1.vec(), e2.vec());
  auto t1 = m.forward(x, Mode::kTrain, rng), t2 = m.forward(x, Mode::kTrain, rng);
  EXPECT_NE(t1.vec(), t2.vec());
}

TEST(Model, GradientsReachFrontendCenters) {
  CounterRng rng(4);
  auto m = build_model<float>(config(4, 3), rng);
  auto p = frontend::leaf_init<float>();
  Tensor<float> x({2, 4410}, std::vector<float>(8820, 0.0f));
  {
    auto tone = testing::sine(2000, 0.2, 0.5);
    std::copy(tone.begin(), tone.end(), x.mutable_values().begin());
  }
  std::vector<int> labels{0, 1};
  auto loss = softmax_cross_entropy(m.forward(frontend::leaf_forward(x, p), Mode::kTrain, rng), labels);
  loss.backward();
  ASSERT_TRUE(p.center_hz.has_grad());
  double mag = 0;
  for (float g : p.center_hz.grad()) mag += std::abs(g);
  EXPECT_GT(mag, 0.0);
}

TEST(ParamCount, LinearLayer) {
  std::vector<std::pair<std::string, Tensor<float>>> t{{"w", Tensor<float>::zeros({32, 64}, true)},
                                                      {"b", Tensor<float>::zeros({32}, true)}};
  EXPECT_EQ(count_parameters(t), 2080u);
}

TEST(ParamCount, DropoutHasNoParameters) {
  CounterRng a(1), b(1);
  EXPECT_EQ(count_parameters(build_model<float>(config(4, 32, 0.0), a)),
            count_parameters(build_model<float>(config(4, 32, 0.4), b)));
}

TEST(ParamCount, FourLayerLeafReconstruction) {
  CounterRng rng(1);
  auto m = build_model<float>(config(4, 32), rng);
  // conv1 8*25+8, conv2 16*72+16, conv3 32*144+32, conv4 64*288+64,
  // batchnorm 2*(8+16+32+64), fc 64*32+32.
  const std::size_t expected_backend = 208 + 1168 + 4640 + 18496 + 240 + 2080;
  EXPECT_EQ(count_parameters(m), expected_backend);
  frontend::Frontend<float> fe(frontend::FrontendKind::kLeaf);
  EXPECT_EQ(count_parameters(fe.named()), 7u * 64u);
  EXPECT_EQ(count_parameters(m) + count_parameters(fe.named()), 27280u);
  frontend::Frontend<float> fb(frontend::FrontendKind::kLeafFB);
  EXPECT_EQ(count_parameters(fb.named()), 3u * 64u);
}

TEST(Model, ReducedEndToEndGradientCheck) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CounterRng rng(seed);
    auto m = build_model<double>(config(4, 3, 0.0), rng);
    auto x = testing::random_tensor({2, 1, 64, 8}, seed + 50);
    std::vector<int> labels{0, 2};
    std::vector<std::pair<std::string, TD>> inputs = m.named_parameters();
    inputs.push_back({"x", x});
    GradCheckOptions o;
    o.max_coords = 6;
    o.seed = seed;
    // Bias shifts move every pre-activation at once; a 1e-5 step can straddle a ReLU kink.
    o.step_scale = 1e-6;
    auto rep = gradient_check(
        [&] {
          // Fresh running stats each call; train-mode output does not depend on them.
          for (auto& b : m.blocks()) b.stats = RunningStats(b.stats.mean.size());
          CounterRng r(0);
          return softmax_cross_entropy(m.forward(x, Mode::kTrain, r), labels);
        },
        inputs, o);
    EXPECT_LT(rep.max_rel_error, 1e-4) << seed << " " << rep.worst_tensor << "[" << rep.worst_index
                                       << "] " << rep.worst_analytic << " vs " << rep.worst_numeric;
  }
}

}  // namespace
}  // namespace leafkit::backend
