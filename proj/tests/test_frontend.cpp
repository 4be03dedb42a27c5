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

#include <cmath>
#include <numbers>

#include "leafkit/frontend/frontend.hpp"
#include "leafkit/tensor/adam.hpp"
#include "leafkit/tensor/conv.hpp"
#include "leafkit/tensor/gradcheck.hpp"
#include "test_util.hpp"

namespace leafkit::frontend {
namespace {

using TD = Tensor<double>;
constexpr double kPi = std::numbers::pi;

TD weighted_sum(const TD& y, std::uint64_t seed) {
  return sum(y * TD(y.shape(), testing::random_weights(y.numel(), seed)));
}

TD random_audio(std::size_t B, std::size_t L, std::uint64_t seed) {
  auto x = testing::random_tensor({B, L}, seed, -0.5, 0.5);
  x.set_requires_grad(false);
  return x;
}

// Composition of generic ops: Gabor kernels from elementwise ops, two
// conv1d calls, squared modulus, then a depthwise strided conv1d with
// sum-normalized Gaussian kernels. Independent of the fused FFT route.
TD reference_gabor_pool(const TD& x, const TD& centers, const TD& sigmas, const TD& pools, std::size_t K,
                        std::size_t S) {
  const std::size_t B = x.size(0), L = x.size(1), C = centers.numel();
  std::vector<double> tv(K), t2v(K);
  for (std::size_t i = 0; i < K; ++i) {
    tv[i] = static_cast<double>(i) - (static_cast<double>(K) - 1.0) / 2.0;
    t2v[i] = tv[i] * tv[i];
  }
  TD t({1, K}, tv), t2({1, K}, t2v);
  auto sig = reshape(sigmas, {C, 1});
  auto env = exp(mul_scalar(t2 / square(sig), -0.5));
  auto amp = mul_scalar(pow(sig, -1.0), 1.0 / std::sqrt(2.0 * kPi));
  auto phase = mul_scalar(reshape(centers, {C, 1}) * t, 2.0 * kPi / 44100.0);
  auto kre = reshape(amp * env * cos(phase), {C, 1, K});
  auto kim = reshape(amp * env * sin(phase), {C, 1, K});
  const std::size_t pl = (K - 1) / 2;
  Conv1dOptions same{1, pl, K - 1 - pl, 1};
  auto xin = reshape(x, {B, 1, L});
  auto e = square(conv1d(xin, kre, same)) + square(conv1d(xin, kim, same));

  auto s = mul_scalar(reshape(pools, {C, 1}), static_cast<double>(K) / 2.0);
  auto g = exp(mul_scalar(t2 / square(s), -0.5));
  auto w = g / matmul(g, TD::full({K, 1}, 1.0));
  const std::size_t F = (L + S - 1) / S;
  const std::size_t pr = (F - 1) * S + K - L - S;
  return conv1d(e, reshape(w, {C, 1, K}), Conv1dOptions{S, S, pr, C});
}

struct SmallBank {
  TD centers, sigmas, pools;
};

SmallBank random_bank(std::size_t C, std::uint64_t seed) {
  CounterRng rng(seed, 3);
  std::vector<double> c(C), s(C), p(C);
  for (std::size_t i = 0; i < C; ++i) {
    c[i] = rng.uniform(50.0, 20000.0);
    s[i] = rng.uniform(2.0, 40.0);
    p[i] = rng.uniform(0.1, 0.9);
  }
  return {TD({C}, c, true), TD({C}, s, true), TD({C}, p, true)};
}

class GaborPoolBlocks : public ::testing::TestWithParam<std::size_t> {};

// 4096 gives one FFT block for these lengths, 64 forces several.
INSTANTIATE_TEST_SUITE_P(BlockSizes, GaborPoolBlocks, ::testing::Values(4096u, 64u));

TEST_P(GaborPoolBlocks, MatchesOpCompositionValues) {
  const std::size_t K = 40, S = 20, L = 230;
  auto bank = random_bank(3, 1);
  auto x = random_audio(2, L, 2);
  GaborPoolConfig cfg{K, S, 44100.0, GetParam()};
  auto fused = gabor_pooled_energy(x, bank.centers, bank.sigmas, bank.pools, cfg);
  auto ref = reference_gabor_pool(x, bank.centers, bank.sigmas, bank.pools, K, S);
  ASSERT_EQ(fused.shape(), ref.shape());
  for (std::size_t i = 0; i < fused.numel(); ++i) EXPECT_NEAR(fused[i], ref[i], 1e-12 + 1e-9 * std::abs(ref[i]));
}

TEST_P(GaborPoolBlocks, MatchesOpCompositionGradients) {
  const std::size_t K = 40, S = 20, L = 230;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto bank = random_bank(3, seed);
    auto x = random_audio(2, L, seed + 10);
    x.set_requires_grad(true);
    GaborPoolConfig cfg{K, S, 44100.0, GetParam()};
    weighted_sum(gabor_pooled_energy(x, bank.centers, bank.sigmas, bank.pools, cfg), seed).backward();
    std::vector<std::vector<double>> fused;
    for (auto* t : {&x, &bank.centers, &bank.sigmas, &bank.pools}) {
      fused.emplace_back(t->grad().begin(), t->grad().end());
      t->zero_grad();
    }
    weighted_sum(reference_gabor_pool(x, bank.centers, bank.sigmas, bank.pools, K, S), seed).backward();
    std::size_t k = 0;
    for (auto* t : {&x, &bank.centers, &bank.sigmas, &bank.pools}) {
      for (std::size_t i = 0; i < t->numel(); ++i) {
        EXPECT_NEAR(fused[k][i], t->grad()[i], 1e-9 * (1.0 + std::abs(t->grad()[i])));
      }
      ++k;
    }
  }
}

TEST(GaborPool, FrameCount) {
  auto p = leaf_init<double>();
  for (std::size_t L : {147u, 148u, 4410u, 220500u}) {
    NoGradGuard ng;
    auto y = gabor_pooled_energy(TD::zeros({1, L}), p.center_hz, p.kernel_sigma, p.pool_sigma);
    EXPECT_EQ(y.size(2), (L + 146) / 147);
  }
}

TEST(GaborPool, PhaseInvariantEnergy) {
  TD c({1}, {5000.0}), s({1}, {20.0}), pool({1}, {0.4});
  double ref = -1;
  for (double phase : {0.0, 0.7, 1.9, 3.1, 4.4}) {
    const auto tone = testing::sine(5000, 0.1, 0.5, phase);
    auto x = TD({1, 4410}, std::vector<double>(tone.begin(), tone.end()));
    auto y = gabor_pooled_energy(x, c, s, pool);
    double e = 0;
    for (std::size_t f = 3; f + 3 < y.size(2); ++f) e += y[f];
    if (ref < 0) ref = e;
    EXPECT_NEAR(e / ref, 1.0, 1e-3) << phase;
  }
}

TEST(Pcen, ConstantInputSteadyState) {
  const std::size_t F = 2000;
  auto p = leaf_init<double>();
  TD e = TD::full({1, 64, F}, 1.0);
  auto y = pcen(e, p.pcen_alpha, p.pcen_delta, p.pcen_root, p.pcen_smooth, 0.0);
  EXPECT_NEAR(y[F - 1], std::sqrt(3.0) - std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(y[F - 1], 0.3178, 1e-4);
  auto y2 = pcen(e, p.pcen_alpha, p.pcen_delta, p.pcen_root, p.pcen_smooth, 1e-6);
  EXPECT_NEAR(y2[F - 1], pcen_steady_state(1.0, 0.96, 2.0, 0.5, 1e-6), 1e-12);
}

TEST(Pcen, ZeroInputZeroOutput) {
  auto p = leaf_init<double>();
  auto y = pcen(TD::zeros({2, 64, 10}), p.pcen_alpha, p.pcen_delta, p.pcen_root, p.pcen_smooth, p.epsilon);
  for (double v : y.vec()) EXPECT_EQ(v, 0.0);
}

TEST(Pcen, GainInvarianceAtAlphaOne) {
  auto p = leaf_init<double>();
  TD alpha = TD::full({64}, 1.0);
  double first = 0;
  for (double gain : {0.01, 1.0, 37.0, 1e4}) {
    auto y = pcen(TD::full({1, 64, 50}, gain), alpha, p.pcen_delta, p.pcen_root, p.pcen_smooth, 0.0);
    if (gain == 0.01) first = y[49];
    EXPECT_NEAR(y[49], first, 1e-6);
  }
}

TEST(Pcen, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto e = testing::random_tensor({2, 3, 12}, seed, 0.0, 2.0);
    auto a = testing::random_tensor({3}, seed + 1, 0.5, 1.2);
    auto d = testing::random_tensor({3}, seed + 2, 0.5, 3.0);
    auto r = testing::random_tensor({3}, seed + 3, 0.2, 1.0);
    auto s = testing::random_tensor({3}, seed + 4, 0.01, 0.5);
    auto rep = gradient_check([&] { return weighted_sum(pcen(e, a, d, r, s, 1e-6), seed); },
                              {{"E", e}, {"alpha", a}, {"delta", d}, {"root", r}, {"smooth", s}});
    EXPECT_LT(rep.max_rel_error, 1e-6) << rep.worst_tensor;
  }
}

TEST(LeafInit, CentersMatchMel) {
  auto p = leaf_init<double>();
  MelFrontend mel;
  auto mc = mel.filterbank().centers_hz();
  ASSERT_EQ(p.n_filters(), 64u);
  for (std::size_t c = 0; c < 64; ++c) EXPECT_NEAR(p.center_hz[c], mc[c], 1.0);
  for (std::size_t c = 1; c < 64; ++c) EXPECT_GT(p.center_hz[c], p.center_hz[c - 1]);
  EXPECT_LT(p.center_hz[0], 100.0);
  EXPECT_GT(p.center_hz[63], 20000.0);
}

TEST(LeafInit, Defaults) {
  auto p = leaf_init<double>();
  for (std::size_t c = 0; c < 64; ++c) {
    EXPECT_DOUBLE_EQ(p.pool_sigma[c], 0.4);
    EXPECT_DOUBLE_EQ(p.pcen_alpha[c], 0.96);
    EXPECT_DOUBLE_EQ(p.pcen_delta[c], 2.0);
    EXPECT_DOUBLE_EQ(p.pcen_root[c], 0.5);
    EXPECT_DOUBLE_EQ(p.pcen_smooth[c], 0.04);
  }
  EXPECT_DOUBLE_EQ(p.epsilon, 1e-6);
}

TEST(LeafInit, BandwidthMatchesTriangleWhereUnclamped) {
  auto p = leaf_init<double>();
  MelFrontend mel;
  std::size_t unclamped = 0;
  for (std::size_t c = 0; c < 64; ++c) {
    const double s = p.kernel_sigma[c];
    if (s <= p.config.sigma_min || s >= p.config.sigma_max()) continue;
    ++unclamped;
    // Half-power points of the Gabor power response, measured numerically.
    std::vector<double> cen{p.center_hz[c]}, sig{s};
    auto k = dsp::gabor_kernels(cen, sig, 294, 44100);
    auto power = [&](double hz) {
      std::complex<double> acc = 0;
      for (std::size_t i = 0; i < 294; ++i) {
        const double t = static_cast<double>(i) - 146.5;
        acc += std::complex<double>(k[0].cos[i], k[0].sin[i]) * std::polar(1.0, -2 * kPi * hz * t / 44100.0);
      }
      return std::norm(acc);
    };
    const double peak = power(p.center_hz[c]);
    double hi = p.center_hz[c];
    while (power(hi) > peak / 2) hi += 0.5;
    EXPECT_NEAR(2.0 * (hi - p.center_hz[c]), mel.filterbank().fwhm_hz(c), 0.02 * mel.filterbank().fwhm_hz(c) + 1.0);
  }
  EXPECT_GE(unclamped, 30u);
}

TEST(LeafInit, Deterministic) {
  auto a = leaf_init<double>(), b = leaf_init<double>();
  for (std::size_t i = 0; i < a.named().size(); ++i) EXPECT_EQ(a.named()[i].second.vec(), b.named()[i].second.vec());
}

TEST(Ablation, Flags) {
  auto p = leaf_init<double>();
  auto fb = set_ablation(p, Ablation::kLeafFB);
  EXPECT_TRUE(fb.center_hz.requires_grad());
  EXPECT_TRUE(fb.pool_sigma.requires_grad());
  EXPECT_FALSE(fb.pcen_alpha.requires_grad());
  auto pc = set_ablation(p, Ablation::kLeafPCEN);
  EXPECT_FALSE(pc.center_hz.requires_grad());
  EXPECT_FALSE(pc.pool_sigma.requires_grad());
  EXPECT_TRUE(pc.pcen_root.requires_grad());
  EXPECT_THROW(parse_ablation("leafXX"), std::invalid_argument);
}

void one_step(LeafParams<double>& p, std::uint64_t seed) {
  std::vector<ParamRef<double>> refs;
  for (auto& [n, t] : p.named()) refs.push_back({n, t});
  Adam<double> opt(refs, AdamConfig{});
  weighted_sum(leaf_forward(random_audio(1, 2000, seed), p), seed).backward();
  opt.step();
  clamp_params(p);
}

TEST(Ablation, LeafFBFreezesPcen) {
  auto init = leaf_init<double>();
  auto p = set_ablation(init, Ablation::kLeafFB);
  one_step(p, 1);
  EXPECT_EQ(p.pcen_alpha.vec(), init.pcen_alpha.vec());
  EXPECT_EQ(p.pcen_delta.vec(), init.pcen_delta.vec());
  EXPECT_EQ(p.pcen_root.vec(), init.pcen_root.vec());
  EXPECT_EQ(p.pcen_smooth.vec(), init.pcen_smooth.vec());
  EXPECT_NE(p.center_hz.vec(), init.center_hz.vec());
}

TEST(Ablation, LeafPCENFreezesFilterbankAndPooling) {
  auto init = leaf_init<double>();
  auto p = set_ablation(init, Ablation::kLeafPCEN);
  one_step(p, 2);
  EXPECT_EQ(p.center_hz.vec(), init.center_hz.vec());
  EXPECT_EQ(p.kernel_sigma.vec(), init.kernel_sigma.vec());
  EXPECT_EQ(p.pool_sigma.vec(), init.pool_sigma.vec());
  EXPECT_NE(p.pcen_alpha.vec(), init.pcen_alpha.vec());
}

TEST(Ablation, FullGivesEveryGroupGradient) {
  auto p = leaf_init<double>();
  weighted_sum(leaf_forward(random_audio(2, 3000, 4), p), 4).backward();
  for (auto& [name, t] : p.named()) {
    ASSERT_TRUE(t.has_grad()) << name;
    double mag = 0;
    for (double g : t.grad()) mag += std::abs(g);
    EXPECT_GT(mag, 0.0) << name;
  }
}

TEST(Clamp, InRangeUnchangedAndBoundary) {
  auto p = leaf_init<double>();
  auto before = p.clone();
  clamp_params(p);
  for (std::size_t i = 0; i < p.named().size(); ++i) EXPECT_EQ(p.named()[i].second.vec(), before.named()[i].second.vec());
  p.center_hz.mutable_values()[5] = 25000.0;
  clamp_params(p);
  EXPECT_EQ(p.center_hz[5], 22050.0);
}

TEST(Clamp, InvariantsHoldAfterRandomSteps) {
  auto p = leaf_init<double>();
  std::vector<ParamRef<double>> refs;
  for (auto& [n, t] : p.named()) refs.push_back({n, t});
  Adam<double> opt(refs, AdamConfig{0.5, 0.9, 0.999, 1e-8, 0.0});
  CounterRng rng(9);
  for (int step = 0; step < 100; ++step) {
    opt.zero_grad();
    for (auto& r : refs) {
      auto g = r.tensor.mutable_grad();
      for (auto& v : g) v = rng.normal() * 1e3;
    }
    opt.step();
    clamp_params(p);
    EXPECT_NO_THROW(p.validate());
  }
}

TEST(LeafForward, ZeroInputZeroOutput) {
  auto p = leaf_init<double>();
  auto y = leaf_forward(TD::zeros({1, 1000}), p);
  for (double v : y.vec()) EXPECT_EQ(v, 0.0);
}

TEST(LeafForward, NonNegativeAndPure) {
  auto p = leaf_init<float>();
  Tensor<float> x({1, 4410}, testing::sine(3000, 0.1, 0.3));
  NoGradGuard ng;
  auto a = leaf_forward(x, p), b = leaf_forward(x, p);
  EXPECT_EQ(a.vec(), b.vec());
  for (float v : a.vec()) EXPECT_GE(v, 0.0f);
}

TEST(LeafForward, CenterGradientMatchesFiniteDifferences) {
  auto p = leaf_init<double>();
  auto x = random_audio(1, 4410, 7);
  GradCheckOptions o;
  o.max_coords = 16;
  auto rep = gradient_check([&] { return sum(leaf_forward(x, p)); }, {{"center_hz", p.center_hz}}, o);
  EXPECT_LT(rep.max_rel_error, 1e-4) << rep.worst_index << " " << rep.worst_analytic << " " << rep.worst_numeric;
}

TEST(Frontends, ClipShapes) {
  dsp::Waveform w{testing::sine(1000, 5.0, 0.5), 44100};
  auto m = mel_frontend(w);
  EXPECT_EQ(m.channels(), 64u);
  EXPECT_EQ(m.frames(), 1500u);
  auto l = leaf_frontend(w, leaf_init<float>());
  EXPECT_EQ(l.channels(), 64u);
  EXPECT_EQ(l.frames(), 1500u);
  EXPECT_THROW(mel_frontend(dsp::Waveform{std::vector<float>(1000), 44100}), DataError);
  EXPECT_THROW(mel_frontend(dsp::Waveform{std::vector<float>(220500), 48000}), DataError);
}

TEST(MelFrontend, ZeroInputIsLogFloor) {
  MelFrontend mel;
  auto g = mel.compute(dsp::Waveform{std::vector<float>(2000, 0.0f), 44100});
  for (double v : g.values) EXPECT_DOUBLE_EQ(v, std::log(1e-6));
}

TEST(MelFrontend, ToneArgmax) {
  MelFrontend mel;
  for (std::size_t k : {8u, 32u, 56u}) {
    auto g = mel.compute(dsp::Waveform{testing::sine(mel.filterbank().center_hz(k), 0.5, 0.5), 44100});
    std::size_t best = 0;
    for (std::size_t c = 0; c < 64; ++c)
      if (g.at(c, 75) > g.at(best, 75)) best = c;
    EXPECT_EQ(best, k);
  }
}

}  // namespace
}  // namespace leafkit::frontend
