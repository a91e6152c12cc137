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

#include "xcorr.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace pulsekit {

namespace {

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

std::vector<double> mean_removed(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= v.size();
  std::vector<double> out(v);
  for (double& x : out) x -= m;
  return out;
}

}  // namespace

std::string running_correlation_json(const RunningCorrelation& c) {
  nlohmann::json j;
  j["index_kind"] =
      c.index_kind == RunningCorrelation::IndexKind::lag ? "lag" : "tau";
  j["origin"] = c.index_origin;
  j["values"] = c.values;
  return j.dump();
}

namespace detail {

NcTerms nc_terms(const double* a, int la, const double* w, int W, int k) {
  NcTerms t;
  t.n_lo = std::max(0, k);
  t.n_hi = std::min(W - 1, la - 1 + k);
  for (int n = 0; n < W; ++n) t.nb2 += w[n] * w[n];
  if (t.n_lo > t.n_hi) return t;
  for (int n = t.n_lo; n <= t.n_hi; ++n) {
    double av = a[n - k];
    t.dot += av * w[n];
    t.na2 += av * av;
  }
  if (t.na2 > 0.0 && t.nb2 > 0.0)
    t.value = std::clamp(t.dot / (std::sqrt(t.na2) * std::sqrt(t.nb2)), -1.0, 1.0);
  return t;
}

std::vector<double> swm_values(const double* a, int la, const double* g,
                               int lg) {
  const int n_tau = lg - la + 1;
  // Truncated-short norms depend only on k; window norms only on tau.
  std::vector<double> na2(2 * la - 1, 0.0);
  for (int k = -(la - 1); k <= la - 1; ++k) {
    int m_lo = std::max(0, -k), m_hi = std::min(la - 1, la - 1 - k);
    double s = 0.0;
    for (int m = m_lo; m <= m_hi; ++m) s += a[m] * a[m];
    na2[k + la - 1] = s;
  }
  std::vector<double> m(n_tau, 0.0);
  for (int tau = 0; tau < n_tau; ++tau) {
    const double* w = g + tau;
    double nb2 = 0.0;
    for (int n = 0; n < la; ++n) nb2 += w[n] * w[n];
    double best = -2.0;
    for (int k = -(la - 1); k <= la - 1; ++k) {
      int n_lo = std::max(0, k), n_hi = std::min(la - 1, la - 1 + k);
      double dot = 0.0;
      for (int n = n_lo; n <= n_hi; ++n) dot += a[n - k] * w[n];
      double a2 = na2[k + la - 1];
      double v = (a2 > 0.0 && nb2 > 0.0)
                     ? std::clamp(dot / (std::sqrt(a2) * std::sqrt(nb2)), -1.0, 1.0)
                     : 0.0;
      if (v > best) best = v;
    }
    m[tau] = best;
  }
  return m;
}

std::vector<int> swm_tied_lags(const double* a, int la, const double* g,
                               int tau, double m_value) {
  std::vector<int> ks;
  const double* w = g + tau;
  double nb2 = 0.0;
  for (int n = 0; n < la; ++n) nb2 += w[n] * w[n];
  for (int k = -(la - 1); k <= la - 1; ++k) {
    int n_lo = std::max(0, k), n_hi = std::min(la - 1, la - 1 + k);
    double dot = 0.0, a2 = 0.0;
    for (int n = n_lo; n <= n_hi; ++n) {
      double av = a[n - k];
      dot += av * w[n];
      a2 += av * av;
    }
    double v = (a2 > 0.0 && nb2 > 0.0)
                   ? std::clamp(dot / (std::sqrt(a2) * std::sqrt(nb2)), -1.0, 1.0)
                   : 0.0;
    if (v == m_value) ks.push_back(k);
  }
  return ks;
}

std::vector<double> lag_values(const double* a, int la, const double* w,
                               int W) {
  std::vector<double> c(2 * W - 1, 0.0);
  double nb2 = 0.0;
  for (int n = 0; n < W; ++n) nb2 += w[n] * w[n];
  for (int k = -(W - 1); k <= W - 1; ++k) {
    int n_lo = std::max(0, k), n_hi = std::min(W - 1, la - 1 + k);
    double dot = 0.0, a2 = 0.0;
    for (int n = n_lo; n <= n_hi; ++n) {
      double av = a[n - k];
      dot += av * w[n];
      a2 += av * av;
    }
    c[k + W - 1] = (a2 > 0.0 && nb2 > 0.0)
                       ? std::clamp(dot / (std::sqrt(a2) * std::sqrt(nb2)),
                                    -1.0, 1.0)
                       : 0.0;
  }
  return c;
}

FpDetail fp_detail(const std::vector<double>& m, int fps, double delta_t_s) {
  FpDetail d;
  d.seg = segment_cycles(m.size(), fps, delta_t_s);
  const int L = d.seg.segment_len;
  const int N = d.seg.n_segments;
  double sum = 0.0;
  for (int h = 0; h < N; ++h) {
    const size_t base = static_cast<size_t>(h) * L;  // always < m.size()
    const size_t real_len = std::min<size_t>(L, m.size() - base);
    double best = m[base];
    for (size_t q = 1; q < real_len; ++q) best = std::max(best, m[base + q]);
    const size_t n_pad = L - real_len;
    if (n_pad > 0) best = std::max(best, 0.0);  // pad positions carry value 0
    std::vector<int> args;
    int ties = 0;
    for (size_t q = 0; q < real_len; ++q) {
      if (m[base + q] == best) {
        args.push_back(static_cast<int>(base + q));
        ++ties;
      }
    }
    if (n_pad > 0 && best == 0.0) ties += static_cast<int>(n_pad);
    d.chunk_max.push_back(best);
    d.chunk_argmax.push_back(std::move(args));
    d.chunk_ties.push_back(ties);
    sum += best;
  }
  d.value = sum / N;
  return d;
}

void accumulate_nc_grad(const double* a, int la, const double* w, int W, int k,
                        const NcTerms& t, double scale, double* ga,
                        double* gw) {
  (void)la;
  if (t.n_lo > t.n_hi || !(t.na2 > 0.0) || !(t.nb2 > 0.0)) return;
  double na = std::sqrt(t.na2), nb = std::sqrt(t.nb2);
  double inv = 1.0 / (na * nb);
  if (ga) {
    for (int n = t.n_lo; n <= t.n_hi; ++n)
      ga[n - k] += scale * (w[n] * inv - t.value * a[n - k] / t.na2);
  }
  if (gw) {
    for (int n = 0; n < W; ++n) {
      double g = -t.value * w[n] / t.nb2;
      if (n >= t.n_lo && n <= t.n_hi) g += a[n - k] * inv;
      gw[n] += scale * g;
    }
  }
}

}  // namespace detail

double nc(const Signal& a, const Signal& b, bool remove_mean) {
  validate(a);
  validate(b);
  require(a.samples.size() == b.samples.size(), ErrorCode::length_mismatch,
          "nc: signals must have equal length");
  std::vector<double> xa = remove_mean ? mean_removed(a.samples) : a.samples;
  std::vector<double> xb = remove_mean ? mean_removed(b.samples) : b.samples;
  double na2 = norm2(xa), nb2 = norm2(xb);
  require(na2 > 0.0 && nb2 > 0.0, ErrorCode::zero_norm, "nc: zero-norm signal");
  double dot = 0.0;
  for (size_t i = 0; i < xa.size(); ++i) dot += xa[i] * xb[i];
  return dot / (std::sqrt(na2) * std::sqrt(nb2));
}

RunningCorrelation ncc(const Signal& a, const Signal& b, bool remove_mean) {
  validate(a);
  validate(b);
  require(a.samples.size() == b.samples.size(), ErrorCode::length_mismatch,
          "ncc: signals must have equal length");
  std::vector<double> xa = remove_mean ? mean_removed(a.samples) : a.samples;
  std::vector<double> xb = remove_mean ? mean_removed(b.samples) : b.samples;
  require(norm2(xa) > 0.0 && norm2(xb) > 0.0, ErrorCode::zero_norm,
          "ncc: zero-norm signal");
  const int L = static_cast<int>(xa.size());
  RunningCorrelation c;
  c.index_kind = RunningCorrelation::IndexKind::lag;
  c.index_origin = -(L - 1);
  // Positive lag advances the first signal: an impulse pair (i, j) peaks at
  // k = i - j, so the kernel's delay axis gets reversed.
  c.values = detail::lag_values(xa.data(), L, xb.data(), L);
  std::reverse(c.values.begin(), c.values.end());
  return c;
}

RunningCorrelation swm_ncc(const Signal& shorter, const Signal& longer,
                           bool remove_mean) {
  validate(shorter);
  validate(longer);
  require(shorter.fps == longer.fps, ErrorCode::fps_mismatch,
          "swm_ncc: fps mismatch");
  require(shorter.samples.size() <= longer.samples.size(),
          ErrorCode::invalid_argument,
          "swm_ncc: first signal must not be longer than the second");
  std::vector<double> xs =
      remove_mean ? mean_removed(shorter.samples) : shorter.samples;
  std::vector<double> xl =
      remove_mean ? mean_removed(longer.samples) : longer.samples;
  RunningCorrelation m;
  m.index_kind = RunningCorrelation::IndexKind::window_position;
  m.index_origin = 0;
  m.values = detail::swm_values(xs.data(), static_cast<int>(xs.size()),
                                xl.data(), static_cast<int>(xl.size()));
  return m;
}

CycleSegmentation segment_cycles(size_t m_len, int fps, double delta_t_s) {
  require(m_len > 0, ErrorCode::invalid_argument, "fp: empty correlation");
  require(fps > 0, ErrorCode::invalid_argument, "fp: fps must be positive");
  require(delta_t_s >= 1.5, ErrorCode::invalid_argument,
          "fp: delta_t must cover a full heartbeat cycle (>= 1.5 s)");
  CycleSegmentation seg;
  seg.delta_t_s = delta_t_s;
  seg.segment_len = static_cast<int>(std::llround(fps * delta_t_s));
  seg.n_segments = std::max<int>(
      static_cast<int>(m_len / static_cast<size_t>(seg.segment_len)), 1);
  return seg;
}

double fp(const RunningCorrelation& m, int fps, double delta_t_s) {
  require(m.index_kind == RunningCorrelation::IndexKind::window_position,
          ErrorCode::invalid_argument, "fp: expects a window-position index");
  return detail::fp_detail(m.values, fps, delta_t_s).value;
}

}  // namespace pulsekit
