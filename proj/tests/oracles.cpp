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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

std::vector<std::complex<double>> dft(const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (size_t k = 0; k < n; ++k) {
    std::complex<long double> acc(0.0L, 0.0L);
    for (size_t i = 0; i < n; ++i) {
      long double a = -2.0L * kPi * static_cast<long double>(k) * i / n;
      acc += std::complex<long double>(
          x[i] * std::cos(static_cast<long double>(a)),
          x[i] * std::sin(static_cast<long double>(a)));
    }
    out[k] = std::complex<double>(static_cast<double>(acc.real()),
                                  static_cast<double>(acc.imag()));
  }
  return out;
}

BandPsd psd_band(const std::vector<double>& x, int fps) {
  const size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  std::vector<double> c(n);
  for (size_t i = 0; i < n; ++i) c[i] = x[i] - mean;

  BandPsd r;
  r.total_centered_power = 0.0;
  for (double v : c) r.total_centered_power += v * v;
  r.inband_power_unnormalized = 0.0;
  double duration = static_cast<double>(n) / fps;
  for (size_t k = 1; k <= n / 2; ++k) {
    double f = k / duration;
    if (f < 0.66 || f > 4.16) continue;
    std::complex<long double> acc(0.0L, 0.0L);
    for (size_t i = 0; i < n; ++i) {
      long double a = -2.0L * kPi * static_cast<long double>(k) * i / n;
      acc += std::complex<long double>(c[i] * std::cos(a), c[i] * std::sin(a));
    }
    double p = static_cast<double>(std::norm(acc));
    r.freqs_hz.push_back(f);
    r.probs.push_back(p);
    r.inband_power_unnormalized += p;
  }
  if (r.inband_power_unnormalized > 0.0) {
    for (double& p : r.probs) p /= r.inband_power_unnormalized;
  } else if (!r.probs.empty()) {
    std::fill(r.probs.begin(), r.probs.end(), 1.0 / r.probs.size());
  }
  return r;
}

std::vector<double> swm_brute(const std::vector<double>& s,
                              const std::vector<double>& l) {
  const int ls = static_cast<int>(s.size());
  const int ll = static_cast<int>(l.size());
  std::vector<double> m(ll - ls + 1, 0.0);
  for (int tau = 0; tau <= ll - ls; ++tau) {
    double best = -2.0;
    for (int k = -(ls - 1); k <= ls - 1; ++k) {
      double dot = 0.0, na2 = 0.0, nb2 = 0.0;
      for (int n = 0; n < ls; ++n) nb2 += l[tau + n] * l[tau + n];
      for (int n = std::max(0, k); n <= std::min(ls - 1, ls - 1 + k); ++n) {
        dot += s[n - k] * l[tau + n];
        na2 += s[n - k] * s[n - k];
      }
      double v = (na2 > 0.0 && nb2 > 0.0)
                     ? dot / (std::sqrt(na2) * std::sqrt(nb2))
                     : 0.0;
      best = std::max(best, v);
    }
    m[tau] = best;
  }
  return m;
}

double fp_brute(const std::vector<double>& m, int fps, double delta_t_s) {
  const int L = static_cast<int>(std::llround(fps * delta_t_s));
  const int N = std::max<int>(static_cast<int>(m.size()) / L, 1);
  double sum = 0.0;
  for (int h = 0; h < N; ++h) {
    double best = -2.0;
    for (int q = 0; q < L; ++q) {
      size_t idx = static_cast<size_t>(h) * L + q;
      double v = idx < m.size() ? m[idx] : 0.0;
      best = std::max(best, v);
    }
    sum += best;
  }
  return sum / N;
}

std::vector<double> random_signal(pulsekit::Rng& rng, size_t n) {
  std::vector<double> x(n, 0.0);
  int tones = 1 + static_cast<int>(rng.next_u64() % 3);
  for (int t = 0; t < tones; ++t) {
    double amp = rng.next_uniform(0.3, 1.0);
    double freq = rng.next_uniform(0.02, 0.45);  // cycles per sample
    double phase = rng.next_uniform(0.0, 2.0 * kPi);
    for (size_t i = 0; i < n; ++i)
      x[i] += amp * std::sin(2.0 * kPi * freq * i + phase);
  }
  for (size_t i = 0; i < n; ++i) x[i] += 0.05 * rng.next_gaussian();
  return x;
}

std::vector<double> random_noise(pulsekit::Rng& rng, size_t n) {
  std::vector<double> x(n);
  for (double& v : x) v = rng.next_gaussian();
  return x;
}

}  // namespace oracle
