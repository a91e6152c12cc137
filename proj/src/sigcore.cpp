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

#include "sigcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace pulsekit {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void validate(const Signal& s) {
  require(s.fps > 0, ErrorCode::invalid_argument, "fps must be positive");
  require(s.samples.size() >= 2, ErrorCode::signal_too_short,
          "signal needs at least 2 samples");
}

Signal window(const Signal& s, size_t start, size_t len) {
  require(start + len <= s.samples.size(), ErrorCode::invalid_argument,
          "window exceeds signal length");
  Signal out;
  out.fps = s.fps;
  out.samples.assign(s.samples.begin() + start, s.samples.begin() + start + len);
  return out;
}

Signal read_signal_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::io,
          path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  int fps = 0;
  if (std::sscanf(line.c_str(), "fps=%d", &fps) != 1 || fps <= 0)
    fail(ErrorCode::io, path + ": first line must be fps=<positive int>");
  Signal s;
  s.fps = fps;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t pos = 0;
    double v = std::stod(line, &pos);
    require(pos == line.size(), ErrorCode::io, path + ": bad sample '" + line + "'");
    s.samples.push_back(v);
  }
  validate(s);
  return s;
}

void write_signal_csv(const Signal& s, const std::string& path) {
  validate(s);
  std::ofstream out(path);
  require(out.good(), ErrorCode::io, "cannot write " + path);
  out << "fps=" << s.fps << "\n";
  char buf[64];
  for (double v : s.samples) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf << "\n";
  }
  require(out.good(), ErrorCode::io, "write failed: " + path);
}

std::vector<size_t> band_bins(size_t n, int fps, double lo, double hi) {
  require(fps > 0 && n >= 2, ErrorCode::invalid_argument, "bad signal shape");
  double duration = static_cast<double>(n) / fps;
  std::vector<size_t> bins;
  for (size_t k = 1; k <= n / 2; ++k) {
    double f = k / duration;
    if (f >= lo && f <= hi) bins.push_back(k);
  }
  require(bins.size() >= 2, ErrorCode::signal_too_short,
          "signal too short: fewer than 2 DFT bins in the HR band");
  return bins;
}

BandDistribution psd_band(const Signal& s, const PsdOptions& opts) {
  validate(s);
  require(opts.zero_pad_factor >= 0, ErrorCode::invalid_argument,
          "zero_pad_factor must be >= 0");
  std::vector<double> x(s.samples);
  double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  for (double& v : x) v -= mean;
  size_t n = x.size() * (1 + opts.zero_pad_factor);
  x.resize(n, 0.0);

  double duration = static_cast<double>(n) / s.fps;
  std::vector<size_t> bins = band_bins(n, s.fps, opts.band_lo_hz, opts.band_hi_hz);

  BandDistribution d;
  d.band_lo_hz = opts.band_lo_hz;
  d.band_hi_hz = opts.band_hi_hz;
  d.bin_freqs_hz.reserve(bins.size());
  d.probs.reserve(bins.size());
  double total = 0.0;
  for (size_t k : bins) {
    double re = 0.0, im = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double a = kTwoPi * k * i / n;
      re += x[i] * std::cos(a);
      im -= x[i] * std::sin(a);
    }
    double p = re * re + im * im;
    d.bin_freqs_hz.push_back(k / duration);
    d.probs.push_back(p);
    total += p;
  }
  if (!(total > 1e-300)) {
    // Degenerate rule: constant input has zero in-band power; report uniform.
    std::fill(d.probs.begin(), d.probs.end(), 1.0 / d.probs.size());
  } else {
    for (double& p : d.probs) p /= total;
  }
  return d;
}

double entropy(const BandDistribution& d) {
  double h = 0.0;
  for (double p : d.probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

std::vector<double> entropy_weights(const std::vector<double>& entropies) {
  require(!entropies.empty(), ErrorCode::invalid_argument,
          "entropy_weights needs at least one element");
  auto [lo, hi] = std::minmax_element(entropies.begin(), entropies.end());
  std::vector<double> w(entropies.size(), 1.0);
  if (*hi > *lo) {
    double span = *hi - *lo;
    for (size_t i = 0; i < entropies.size(); ++i)
      w[i] = 1.0 - (entropies[i] - *lo) / span;
  }
  return w;
}

std::vector<double> entropy_weights(const std::vector<BandDistribution>& dists) {
  std::vector<double> h;
  h.reserve(dists.size());
  for (const auto& d : dists) h.push_back(entropy(d));
  return entropy_weights(h);
}

HrEstimate hr_from_psd(const BandDistribution& d) {
  require(!d.probs.empty() && d.probs.size() == d.bin_freqs_hz.size(),
          ErrorCode::invalid_argument, "empty distribution");
  size_t best = 0;
  for (size_t i = 1; i < d.probs.size(); ++i)
    if (d.probs[i] > d.probs[best]) best = i;  // ties keep the lower frequency
  HrEstimate e;
  e.method = HrMethod::psd_peak;
  e.bpm = 60.0 * d.bin_freqs_hz[best];
  e.confidence = d.probs.size() > 1
                     ? 1.0 - entropy(d) / std::log(static_cast<double>(d.probs.size()))
                     : 1.0;
  return e;
}

std::vector<size_t> detect_peaks(const Signal& s) {
  validate(s);
  const auto& x = s.samples;
  const size_t n = x.size();
  auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  double prom_threshold = 0.2 * (*mx - *mn);
  size_t min_dist =
      std::max<size_t>(1, static_cast<size_t>(std::ceil(s.fps * 60.0 / 250.0)));

  // Candidate local maxima (plateaus count once, at their left edge).
  std::vector<size_t> cand;
  for (size_t i = 1; i + 1 < n; ++i) {
    if (x[i] <= x[i - 1]) continue;
    size_t j = i;
    while (j + 1 < n && x[j + 1] == x[i]) ++j;
    if (j + 1 < n && x[j + 1] < x[i]) cand.push_back(i);
    i = j;
  }

  // Prominence: height above the higher of the two valley minima reached
  // before a strictly taller sample on each side.
  std::vector<size_t> prominent;
  for (size_t p : cand) {
    double left_min = x[p];
    for (size_t i = p; i-- > 0;) {
      if (x[i] > x[p]) break;
      left_min = std::min(left_min, x[i]);
    }
    double right_min = x[p];
    for (size_t i = p + 1; i < n; ++i) {
      if (x[i] > x[p]) break;
      right_min = std::min(right_min, x[i]);
    }
    double prom = x[p] - std::max(left_min, right_min);
    if (prom >= prom_threshold) prominent.push_back(p);
  }

  // Enforce the minimum distance, keeping taller peaks first.
  std::vector<size_t> order(prominent.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return x[prominent[a]] > x[prominent[b]];
  });
  std::vector<bool> keep(prominent.size(), false);
  for (size_t oi : order) {
    bool ok = true;
    for (size_t j = 0; j < prominent.size(); ++j) {
      if (!keep[j]) continue;
      size_t a = prominent[oi], b = prominent[j];
      if ((a > b ? a - b : b - a) < min_dist) {
        ok = false;
        break;
      }
    }
    if (ok) keep[oi] = true;
  }
  std::vector<size_t> peaks;
  for (size_t j = 0; j < prominent.size(); ++j)
    if (keep[j]) peaks.push_back(prominent[j]);
  std::sort(peaks.begin(), peaks.end());
  return peaks;
}

HrEstimate hr_from_ibi(const Signal& s) {
  std::vector<size_t> peaks = detect_peaks(s);
  require(peaks.size() >= 2, ErrorCode::insufficient_beats,
          "insufficient beats: fewer than 2 peaks detected");
  std::vector<double> intervals;
  intervals.reserve(peaks.size() - 1);
  for (size_t i = 1; i < peaks.size(); ++i)
    intervals.push_back(static_cast<double>(peaks[i] - peaks[i - 1]) / s.fps);
  double mean =
      std::accumulate(intervals.begin(), intervals.end(), 0.0) / intervals.size();
  HrEstimate e;
  e.method = HrMethod::ibi;
  e.bpm = std::clamp(60.0 / mean, 60.0 * kBandLoHz, 60.0 * kBandHiHz);
  double var = 0.0;
  for (double v : intervals) var += (v - mean) * (v - mean);
  var /= intervals.size();
  e.confidence = std::clamp(1.0 - std::sqrt(var) / mean, 0.0, 1.0);
  return e;
}

MetricsReport metrics(const std::vector<double>& pred,
                      const std::vector<double>& gt) {
  require(!pred.empty(), ErrorCode::invalid_argument, "metrics: empty input");
  require(pred.size() == gt.size(), ErrorCode::length_mismatch,
          "metrics: length mismatch");
  const size_t n = pred.size();
  double mae = 0.0, mse = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double d = pred[i] - gt[i];
    mae += std::abs(d);
    mse += d * d;
  }
  MetricsReport r;
  r.mae = mae / n;
  r.rmse = std::sqrt(mse / n);

  double mp = std::accumulate(pred.begin(), pred.end(), 0.0) / n;
  double mg = std::accumulate(gt.begin(), gt.end(), 0.0) / n;
  double spp = 0.0, sgg = 0.0, spg = 0.0;
  for (size_t i = 0; i < n; ++i) {
    spp += (pred[i] - mp) * (pred[i] - mp);
    sgg += (gt[i] - mg) * (gt[i] - mg);
    spg += (pred[i] - mp) * (gt[i] - mg);
  }
  r.pearson_r = (spp > 0.0 && sgg > 0.0) ? spg / std::sqrt(spp * sgg) : 0.0;
  return r;
}

std::string band_distribution_json(const BandDistribution& d) {
  nlohmann::json j;
  j["band"] = {d.band_lo_hz, d.band_hi_hz};
  j["freqs"] = d.bin_freqs_hz;
  j["probs"] = d.probs;
  return j.dump();
}

}  // namespace pulsekit
