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

#include "doctest.h"
#include "oracles.hpp"
#include "xcorr.hpp"

using namespace pulsekit;

namespace {

Signal make(std::vector<double> v, int fps = 30) {
  Signal s;
  s.fps = fps;
  s.samples = std::move(v);
  return s;
}

Signal sinusoid(double freq_hz, double duration_s, int fps,
                double phase = 0.0) {
  Signal s;
  s.fps = fps;
  s.samples.resize(static_cast<size_t>(std::llround(duration_s * fps)));
  for (size_t i = 0; i < s.samples.size(); ++i)
    s.samples[i] = std::sin(2.0 * M_PI * freq_hz * i / fps + phase);
  return s;
}

RunningCorrelation tau_corr(std::vector<double> v) {
  RunningCorrelation c;
  c.index_kind = RunningCorrelation::IndexKind::window_position;
  c.index_origin = 0;
  c.values = std::move(v);
  return c;
}

}  // namespace

TEST_CASE("nc: self, negation, orthogonality") {
  Rng rng(1);
  Signal a = make(oracle::random_signal(rng, 64));
  CHECK(nc(a, a) == doctest::Approx(1.0));
  Signal na = a;
  for (double& v : na.samples) v = -v;
  CHECK(nc(a, na) == doctest::Approx(-1.0));

  // sin vs cos over one exact period: the inner product telescopes to 0.
  Signal s = sinusoid(1.0, 1.0, 30, 0.0);
  Signal c = sinusoid(1.0, 1.0, 30, M_PI / 2.0);
  CHECK(std::abs(nc(s, c)) <= 1e-12);
}

TEST_CASE("nc: zero-norm and length errors") {
  Signal z = make(std::vector<double>(16, 0.0));
  Rng rng(2);
  Signal a = make(oracle::random_signal(rng, 16));
  try {
    nc(a, z);
    FAIL("expected zero_norm");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::zero_norm);
  }
  Signal shorter = make({1.0, 2.0, 3.0});
  CHECK_THROWS_AS(nc(a, shorter), Error);
}

TEST_CASE("ncc: self-correlation peaks at lag zero with value one") {
  Rng rng(3);
  Signal a = make(oracle::random_signal(rng, 50));
  RunningCorrelation c = ncc(a, a);
  CHECK(c.index_kind == RunningCorrelation::IndexKind::lag);
  CHECK(c.index_origin == -49);
  CHECK(c.values.size() == 99);
  size_t best = 0;
  for (size_t i = 1; i < c.values.size(); ++i)
    if (c.values[i] > c.values[best]) best = i;
  CHECK(static_cast<int>(best) + c.index_origin == 0);
  CHECK(c.values[best] == doctest::Approx(1.0));
  for (double v : c.values) {
    CHECK(v <= 1.0 + 1e-9);
    CHECK(v >= -1.0 - 1e-9);
  }
}

TEST_CASE("ncc: impulse pair concentrates at lag i - j") {
  std::vector<double> a(20, 0.0), b(20, 0.0);
  a[12] = 1.0;
  b[5] = 1.0;
  RunningCorrelation c = ncc(make(a), make(b));
  for (size_t idx = 0; idx < c.values.size(); ++idx) {
    int k = static_cast<int>(idx) + c.index_origin;
    if (k == 12 - 5) {
      CHECK(c.values[idx] == doctest::Approx(1.0));
    } else {
      CHECK(c.values[idx] == doctest::Approx(0.0));
    }
  }
}

TEST_CASE("ncc: identical sinusoids peak at multiples of the period") {
  const int P = 25;  // 1.2 Hz at fps 30
  const int L = 150;
  Signal a = sinusoid(1.2, 5.0, 30, 0.3);
  RunningCorrelation c = ncc(a, a);
  for (int mult = -2; mult <= 2; ++mult) {
    int k = mult * P;
    double v = c.values[k - c.index_origin];
    // Shift-and-dot closed form: the truncated overlap attenuates the peak
    // to sqrt((L - |k|) / L); this is the padding bias the SWM variant avoids.
    CHECK(v == doctest::Approx(std::sqrt((L - std::abs(k)) /
                                         static_cast<double>(L)))
                   .epsilon(0.02));
    // Still a local peak relative to the half-period neighbourhood.
    CHECK(v > c.values[k + P / 2 - c.index_origin]);
    CHECK(v > c.values[k - P / 2 - c.index_origin]);
  }
}

TEST_CASE("swm_ncc: an exact window of the long signal scores one") {
  Rng rng(4);
  Signal lng = make(oracle::random_signal(rng, 200));
  const size_t tau_star = 63, len = 60;
  Signal shrt = make(std::vector<double>(lng.samples.begin() + tau_star,
                                         lng.samples.begin() + tau_star + len));
  RunningCorrelation m = swm_ncc(shrt, lng);
  CHECK(m.index_kind == RunningCorrelation::IndexKind::window_position);
  CHECK(m.values.size() == 141);
  CHECK(m.values[tau_star] == doctest::Approx(1.0));
}

TEST_CASE("swm_ncc: same-frequency sinusoids correlate despite phase") {
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    double hr = rng.next_uniform(0.8, 3.5);
    Signal shrt = sinusoid(hr, 2.0, 30, rng.next_uniform(0, 6.28));
    Signal lng = sinusoid(hr, 10.0, 30, rng.next_uniform(0, 6.28));
    RunningCorrelation m = swm_ncc(shrt, lng);
    double best = *std::max_element(m.values.begin(), m.values.end());
    CHECK(best >= 0.99);
  }
}

TEST_CASE("swm_ncc: mismatched frequencies stay below 0.9") {
  Signal shrt = sinusoid(1.2, 2.0, 30, 0.0);
  Signal lng = sinusoid(2.0, 10.0, 30, 0.0);
  RunningCorrelation m = swm_ncc(shrt, lng);
  double best = *std::max_element(m.values.begin(), m.values.end());
  CHECK(best < 0.9);
  // Pinned against the brute-force oracle value for this exact pair.
  std::vector<double> ref = oracle::swm_brute(shrt.samples, lng.samples);
  CHECK(best ==
        doctest::Approx(*std::max_element(ref.begin(), ref.end())).epsilon(1e-12));
}

TEST_CASE("swm_ncc: equals the brute-force double loop exactly") {
  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    size_t ls = 4 + rng.next_u64() % 60;
    size_t ll = ls + rng.next_u64() % 60;
    Signal shrt = make(oracle::random_signal(rng, ls));
    Signal lng = make(oracle::random_signal(rng, ll));
    RunningCorrelation m = swm_ncc(shrt, lng);
    std::vector<double> ref = oracle::swm_brute(shrt.samples, lng.samples);
    REQUIRE(m.values.size() == ref.size());
    for (size_t i = 0; i < ref.size(); ++i)
      CHECK(std::abs(m.values[i] - ref[i]) <= 1e-12);
  }
}

TEST_CASE("swm_ncc: self window position zero scores one; scale invariant") {
  Rng rng(7);
  Signal s = make(oracle::random_signal(rng, 80));
  RunningCorrelation m = swm_ncc(s, s);
  CHECK(m.values.size() == 1);
  CHECK(m.values[0] == doctest::Approx(1.0));

  Signal lng = make(oracle::random_signal(rng, 160));
  RunningCorrelation base = swm_ncc(s, lng);
  Signal scaled = s;
  for (double& v : scaled.samples) v *= 37.5;
  RunningCorrelation after = swm_ncc(scaled, lng);
  for (size_t i = 0; i < base.values.size(); ++i)
    CHECK(std::abs(after.values[i] - base.values[i]) <= 1e-12);
}

TEST_CASE("swm_ncc: fps mismatch and ordering errors") {
  Signal a = sinusoid(1.0, 2.0, 30);
  Signal b = sinusoid(1.0, 10.0, 20);
  try {
    swm_ncc(a, b);
    FAIL("expected fps_mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::fps_mismatch);
  }
  Signal lng = sinusoid(1.0, 10.0, 30);
  CHECK_THROWS_AS(swm_ncc(lng, a), Error);
}

TEST_CASE("segment_cycles: floor rule with the minimum of one") {
  CycleSegmentation seg = segment_cycles(241, 30, 1.5);
  CHECK(seg.segment_len == 45);
  CHECK(seg.n_segments == 5);
  seg = segment_cycles(40, 30, 1.5);
  CHECK(seg.n_segments == 1);
  CHECK_THROWS_AS(segment_cycles(100, 30, 1.0), Error);
}

TEST_CASE("fp: constants, short inputs, two-chunk mean") {
  CHECK(fp(tau_corr(std::vector<double>(200, 1.0)), 30, 1.5) ==
        doctest::Approx(1.0));

  // Shorter than one chunk: the single chunk max (positive values).
  CHECK(fp(tau_corr({0.1, 0.7, 0.3}), 30, 1.5) == doctest::Approx(0.7));

  std::vector<double> m(90, 0.0);
  for (size_t i = 0; i < 45; ++i) m[i] = 0.1;
  m[7] = 0.8;
  for (size_t i = 45; i < 90; ++i) m[i] = 0.2;
  m[63] = 0.6;
  CHECK(fp(tau_corr(m), 30, 1.5) == doctest::Approx(0.7));
}

TEST_CASE("fp: zero padding participates in the trailing chunk max") {
  // All-negative values shorter than a chunk: the pad value 0 wins.
  CHECK(fp(tau_corr(std::vector<double>(30, -0.5)), 30, 1.5) ==
        doctest::Approx(0.0));
  // Exactly one full chunk of negatives: no padding, the true max stays.
  CHECK(fp(tau_corr(std::vector<double>(45, -0.5)), 30, 1.5) ==
        doctest::Approx(-0.5));
}

TEST_CASE("fp: raising any single value never decreases the result") {
  Rng rng(8);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> m(10 + rng.next_u64() % 150);
    for (double& v : m) v = rng.next_uniform(-1.0, 1.0);
    double base = fp(tau_corr(m), 30, 1.5);
    size_t idx = rng.next_u64() % m.size();
    std::vector<double> up = m;
    up[idx] = std::min(1.0, up[idx] + rng.next_uniform(0.0, 0.5));
    CHECK(fp(tau_corr(up), 30, 1.5) >= base - 1e-12);
  }
}

TEST_CASE("fp: agrees with the literal chunk rule") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> m(1 + rng.next_u64() % 200);
    for (double& v : m) v = rng.next_uniform(-1.0, 1.0);
    CHECK(fp(tau_corr(m), 30, 1.5) ==
          doctest::Approx(oracle::fp_brute(m, 30, 1.5)).epsilon(1e-12));
  }
}

TEST_CASE("fp rejects lag-indexed input and empty input") {
  RunningCorrelation lag;
  lag.index_kind = RunningCorrelation::IndexKind::lag;
  lag.values = {0.5, 0.5};
  CHECK_THROWS_AS(fp(lag, 30, 1.5), Error);
  CHECK_THROWS_AS(fp(tau_corr({}), 30, 1.5), Error);
}

TEST_CASE("running correlation JSON uses tau/lag tags") {
  RunningCorrelation c = tau_corr({0.25, 0.5});
  std::string j = running_correlation_json(c);
  CHECK(j.find("\"index_kind\":\"tau\"") != std::string::npos);
  CHECK(j.find("\"origin\":0") != std::string::npos);
  CHECK(j.find("0.5") != std::string::npos);
}
