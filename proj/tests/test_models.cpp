// Copyright 2026 The pulsekit authors
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "models.hpp"
#include "oracles.hpp"

using namespace pulsekit;

namespace {

Signal obs_signal(int fps, uint64_t seed) {
  Rng rng(seed);
  Signal s;
  s.fps = fps;
  s.samples = oracle::random_signal(rng, static_cast<size_t>(2 * fps));
  return s;
}

// Identity-configured encoder: center-tap kernels replicate the (centered)
// input on every channel; activations disabled.
ModelParams identity_encoder(ModelConfig c) {
  c.activations = false;
  ModelParams p = zero_params(c);
  for (int layer = 1; layer <= c.enc_layers; ++layer) {
    ad::Tensor& w = p.enc.find("enc.conv" + std::to_string(layer) + ".w");
    int cin = layer == 1 ? 1 : c.channels;
    for (int co = 0; co < c.channels; ++co) {
      int ci = layer == 1 ? 0 : co;
      w.at(co, ci * c.enc_kernel + c.enc_kernel / 2) = 1.0;
    }
  }
  return p;
}

}  // namespace

TEST_CASE("encode: zero weights map anything to zero features") {
  ModelConfig c;
  ModelParams p = zero_params(c);
  ad::Tensor f = encode(obs_signal(30, 1), p);
  CHECK(f.shape == ad::Shape{8, 60});
  for (double v : f.data) CHECK(v == 0.0);
}

TEST_CASE("encode: shape contract across fps and channel settings") {
  for (int fps : {20, 30}) {
    for (int channels : {4, 8}) {
      ModelConfig c;
      c.fps = fps;
      c.channels = channels;
      ModelParams p = init_params(c, 3);
      ad::Tensor f = encode(obs_signal(fps, 2), p);
      CHECK(f.shape == ad::Shape{channels, 2 * fps});
    }
  }
}

TEST_CASE("encode: identity-configured stack replicates the centered input") {
  ModelConfig c;
  ModelParams p = identity_encoder(c);
  Signal obs = obs_signal(30, 4);
  ad::Tensor f = encode(obs, p);
  double mean = 0.0;
  for (double v : obs.samples) mean += v;
  mean /= obs.samples.size();
  for (int ch = 0; ch < c.channels; ++ch)
    for (int i = 0; i < 60; ++i)
      CHECK(f.at(ch, i) == doctest::Approx(obs.samples[i] - mean).epsilon(1e-12));
}

TEST_CASE("encode: rejects wrong input lengths") {
  ModelConfig c;
  ModelParams p = init_params(c, 5);
  Signal bad;
  bad.fps = 30;
  bad.samples.assign(61, 0.1);
  CHECK_THROWS_AS(encode(bad, p), Error);
}

TEST_CASE("estimate: zero features give a zero signal; shapes are duration-agnostic") {
  ModelConfig c;
  ModelParams p = init_params(c, 6);
  for (int len : {60, 300}) {
    ad::Tensor f = ad::Tensor::zeros({8, len});
    Signal s = estimate(f, p);
    CHECK(s.samples.size() == static_cast<size_t>(len));
    ad::Tensor& b1 = p.est.find("est.proj1.b");
    (void)b1;
  }
  ModelParams zp = zero_params(c);
  Signal s = estimate(ad::Tensor::zeros({8, 60}), zp);
  for (double v : s.samples) CHECK(v == 0.0);
}

TEST_CASE("estimate: mean-over-channels configuration recovers the signal") {
  ModelConfig c;
  c.activations = false;
  ModelParams p = zero_params(c);
  // First projection: identity on channels; second: mean over channels.
  ad::Tensor& w1 = p.est.find("est.proj1.w");
  for (int i = 0; i < c.channels; ++i) w1.at(i, i) = 1.0;
  ad::Tensor& w2 = p.est.find("est.proj2.w");
  for (int i = 0; i < c.est_hidden; ++i) w2.at(0, i) = 1.0 / c.est_hidden;

  Rng rng(7);
  std::vector<double> base = oracle::random_signal(rng, 60);
  ad::Tensor f = ad::Tensor::zeros({8, 60});
  for (int ch = 0; ch < 8; ++ch)
    for (int i = 0; i < 60; ++i) f.at(ch, i) = base[i];
  Signal s = estimate(f, p);
  for (int i = 0; i < 60; ++i)
    CHECK(s.samples[i] == doctest::Approx(base[i]).epsilon(1e-12));
}

TEST_CASE("estimate: linear in features when activations are disabled") {
  ModelConfig c;
  c.activations = false;
  ModelParams p = init_params(c, 8);
  Rng rng(9);
  ad::Tensor f1 = ad::Tensor::zeros({8, 40}), f2 = ad::Tensor::zeros({8, 40});
  for (double& v : f1.data) v = rng.next_gaussian();
  for (double& v : f2.data) v = rng.next_gaussian();

  Signal a = estimate(f1, p);
  Signal b = estimate(f2, p);
  ad::Tensor sum = f1;
  for (size_t i = 0; i < sum.data.size(); ++i) sum.data[i] += f2.data[i];
  Signal ab = estimate(sum, p);
  Signal zero = estimate(ad::Tensor::zeros({8, 40}), p);
  // Affine map: E(f1 + f2) = E(f1) + E(f2) - E(0).
  for (size_t i = 0; i < ab.samples.size(); ++i)
    CHECK(ab.samples[i] ==
          doctest::Approx(a.samples[i] + b.samples[i] - zero.samples[i])
              .epsilon(1e-9));
}

TEST_CASE("generate: block-chain shapes and determinism") {
  ModelConfig c;
  ModelParams p = init_params(c, 10);
  Signal s2 = obs_signal(30, 11);
  auto g = generate(s2, 1234, p);
  REQUIRE(g.size() == 4);
  CHECK(g.at(4).shape == ad::Shape{8, 120});
  CHECK(g.at(6).shape == ad::Shape{8, 180});
  CHECK(g.at(8).shape == ad::Shape{8, 240});
  CHECK(g.at(10).shape == ad::Shape{8, 300});

  auto g2 = generate(s2, 1234, p);
  for (int t : {4, 6, 8, 10}) CHECK(g.at(t).data == g2.at(t).data);
  auto g3 = generate(s2, 1235, p);
  CHECK(g.at(10).data != g3.at(10).data);
}

TEST_CASE("generate: ablated chains differ from the full chain") {
  ModelConfig full;
  ModelConfig ablated;
  ablated.gen_durations = {4, 10};
  ModelParams pf = init_params(full, 21);
  ModelParams pa = init_params(ablated, 21);
  Signal s2 = obs_signal(30, 12);
  auto gf = generate(s2, 99, pf);
  auto ga = generate(s2, 99, pa);
  CHECK(ga.size() == 2);
  CHECK(ga.at(10).shape == ad::Shape{8, 300});
  CHECK(gf.at(10).data != ga.at(10).data);
}

TEST_CASE("generate: information flows forward through the chain") {
  ModelConfig c;
  ModelParams p = init_params(c, 31);
  Signal s2 = obs_signal(30, 13);

  // Perturbing the first block's bias changes every later feature.
  auto base = generate(s2, 7, p);
  ModelParams p2 = p;
  p2.gen.find("gen.b1.l2.b").data[17] += 0.5;
  auto bumped = generate(s2, 7, p2);
  for (int t : {4, 6, 8, 10}) CHECK(base.at(t).data != bumped.at(t).data);

  // Perturbing a later block leaves earlier features untouched.
  ModelParams p3 = p;
  p3.gen.find("gen.b3.l2.b").data[3] += 0.5;
  auto later = generate(s2, 7, p3);
  CHECK(base.at(4).data == later.at(4).data);
  CHECK(base.at(6).data == later.at(6).data);
  CHECK(base.at(8).data != later.at(8).data);
  CHECK(base.at(10).data != later.at(10).data);
}

TEST_CASE("reconstruct: duplication tiles the window exactly") {
  Signal s2 = obs_signal(30, 14);
  ModelParams unused;
  Signal r = reconstruct(s2, "duplication", unused, 0);
  CHECK(r.samples.size() == 300);
  CHECK(r.samples.size() == 5 * s2.samples.size());
  for (size_t i = 0; i < r.samples.size(); ++i)
    CHECK(r.samples[i] == s2.samples[i % s2.samples.size()]);
}

TEST_CASE("reconstruct: duplication of an off-bin tone leaks into sidelobes") {
  // 1.2 Hz over 2 s does not complete an integer cycle count, so tiling
  // introduces phase discontinuities every window. The PSD peak stays at
  // 1.2 Hz (tiling quantizes frequency content to multiples of 0.5 Hz with
  // windowed spread), with visible sidelobe mass elsewhere.
  Signal s2;
  s2.fps = 30;
  s2.samples.resize(60);
  for (size_t i = 0; i < 60; ++i)
    s2.samples[i] = std::sin(2.0 * M_PI * 1.2 * i / 30.0 + 0.3);
  ModelParams unused;
  Signal r = reconstruct(s2, "duplication", unused, 0);
  oracle::BandPsd psd = oracle::psd_band(r.samples, 30);
  size_t peak = 0;
  double sidelobe = 0.0;
  for (size_t i = 1; i < psd.probs.size(); ++i)
    if (psd.probs[i] > psd.probs[peak]) peak = i;
  for (size_t i = 0; i < psd.probs.size(); ++i)
    if (i != peak) sidelobe += psd.probs[i];
  CHECK(sidelobe > 0.05);  // discontinuity energy spread across the band

  // A 10 s signal of the same tone keeps the sidelobes an order of
  // magnitude smaller.
  Signal full;
  full.fps = 30;
  full.samples.resize(300);
  for (size_t i = 0; i < 300; ++i)
    full.samples[i] = std::sin(2.0 * M_PI * 1.2 * i / 30.0 + 0.3);
  oracle::BandPsd ref = oracle::psd_band(full.samples, 30);
  size_t rpeak = 0;
  double rside = 0.0;
  for (size_t i = 1; i < ref.probs.size(); ++i)
    if (ref.probs[i] > ref.probs[rpeak]) rpeak = i;
  for (size_t i = 0; i < ref.probs.size(); ++i)
    if (i != rpeak) rside += ref.probs[i];
  CHECK(rside < sidelobe / 10.0);
}

TEST_CASE("reconstruct: generator strategies emit 10 s; unknown names fail") {
  ModelConfig c;
  ModelParams p = init_params(c, 41);
  Signal s2 = obs_signal(30, 15);
  for (const char* strategy : {"forward", "backward", "fwd-bwd"}) {
    Signal r = reconstruct(s2, strategy, p, 3);
    CHECK(r.samples.size() == 300);
  }
  CHECK_THROWS_AS(reconstruct(s2, "sideways", p, 3), Error);
}

TEST_CASE("checkpoint save/load round trip is bit exact") {
  ModelConfig c;
  c.channels = 4;
  ModelParams p = init_params(c, 51);
  p.t_trained = true;
  p.strategy = "backward";
  nlohmann::json meta;
  meta["epoch"] = 12;
  std::string path =
      (std::filesystem::temp_directory_path() / "pk_ckpt_test.bin").string();
  save_checkpoint(p, path, meta);

  nlohmann::json meta2;
  ModelParams r = load_checkpoint(path, &meta2);
  CHECK(meta2.at("epoch") == 12);
  CHECK(r.t_trained);
  CHECK_FALSE(r.g_trained);
  CHECK(r.strategy == "backward");
  CHECK(r.config.channels == 4);
  auto same = [](const ParamSet& a, const ParamSet& b) {
    REQUIRE(a.items.size() == b.items.size());
    for (size_t i = 0; i < a.items.size(); ++i) {
      CHECK(a.items[i].first == b.items[i].first);
      CHECK(a.items[i].second.data == b.items[i].second.data);
    }
  };
  same(p.enc, r.enc);
  same(p.est, r.est);
  same(p.gen, r.gen);
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint loader rejects foreign files") {
  std::string path =
      (std::filesystem::temp_directory_path() / "pk_not_ckpt.bin").string();
  {
    std::ofstream f(path);
    f << "{\"something\":\"else\"}\n";
  }
  CHECK_THROWS_AS(load_checkpoint(path), Error);
  std::filesystem::remove(path);
}

TEST_CASE("parameter budget stays under 50k with defaults") {
  ModelConfig c;
  ModelParams p = init_params(c, 61);
  size_t total = p.enc.total_size() + p.est.total_size() + p.gen.total_size();
  CHECK(total < 50000);
  CHECK(total > 1000);
}
