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

#ifndef PULSEKIT_SIGCORE_HPP_
#define PULSEKIT_SIGCORE_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "error.hpp"

namespace pulsekit {

// Admissible human heart-rate band, 40-250 bpm.
inline constexpr double kBandLoHz = 0.66;
inline constexpr double kBandHiHz = 4.16;

// Uniformly sampled 1-D waveform.
struct Signal {
  std::vector<double> samples;
  int fps = 30;  // samples per second, > 0

  double duration_s() const {
    return static_cast<double>(samples.size()) / fps;
  }
};

// Throws unless len >= 2 and fps > 0.
void validate(const Signal& s);

Signal window(const Signal& s, size_t start, size_t len);

// CSV format: line 1 is "fps=<int>", then one sample per line.
Signal read_signal_csv(const std::string& path);
void write_signal_csv(const Signal& s, const std::string& path);

// Normalized PSD restricted to the HR band. probs sums to 1.
struct BandDistribution {
  double band_lo_hz = kBandLoHz;
  double band_hi_hz = kBandHiHz;
  std::vector<double> bin_freqs_hz;  // strictly increasing
  std::vector<double> probs;         // >= 0, sums to 1
};

struct PsdOptions {
  double band_lo_hz = kBandLoHz;
  double band_hi_hz = kBandHiHz;
  // Diagnostics only: factor N of extra zero-padding (total length (1+N)*len).
  // The default 0 keeps the raw-window bin spacing of 1/duration Hz.
  int zero_pad_factor = 0;
};

// Indices k of the DFT bins k/duration that land inside [lo, hi], given a
// sample count n at rate fps. Throws signal_too_short when fewer than 2.
std::vector<size_t> band_bins(size_t n, int fps, double lo = kBandLoHz,
                              double hi = kBandHiHz);

// Magnitude-squared DFT of the mean-removed signal on the in-band bins,
// normalized by the in-band sum. A constant (zero-power) input yields the
// uniform distribution so downstream entropy weighting stays defined.
BandDistribution psd_band(const Signal& s, const PsdOptions& opts = {});

// Shannon entropy -sum p ln p, with 0 ln 0 := 0. In [0, ln(#bins)].
double entropy(const BandDistribution& d);

// Eq-style rescale: w_i = 1 - (H_i - min) / (max - min). The minimum-entropy
// member gets 1, the maximum-entropy member 0. Degenerate spread (max == min)
// yields all ones.
std::vector<double> entropy_weights(const std::vector<double>& entropies);
std::vector<double> entropy_weights(const std::vector<BandDistribution>& dists);

enum class HrMethod { psd_peak, ibi };

struct HrEstimate {
  double bpm = 0.0;
  HrMethod method = HrMethod::psd_peak;
  double confidence = 0.0;  // in [0, 1]
};

// 60 x argmax-bin frequency; ties break toward the lower frequency.
// confidence = 1 - entropy / ln(#bins).
HrEstimate hr_from_psd(const BandDistribution& d);

// Local maxima subject to a minimum inter-peak distance of fps*60/250 samples
// and prominence >= 0.2 * (max - min) of the window.
std::vector<size_t> detect_peaks(const Signal& s);

// 60 / mean inter-peak interval, clamped to the HR band. Throws
// insufficient_beats with fewer than 2 peaks. confidence is
// 1 - coefficient of variation of the intervals, clamped to [0, 1].
HrEstimate hr_from_ibi(const Signal& s);

struct MetricsReport {
  double mae = 0.0;
  double rmse = 0.0;
  double pearson_r = 0.0;
};

// Standard MAE / RMSE / Pearson R over paired sequences. R := 0 when either
// side has zero variance.
MetricsReport metrics(const std::vector<double>& pred,
                      const std::vector<double>& gt);

// {"band":[lo,hi],"freqs":[...],"probs":[...]}
std::string band_distribution_json(const BandDistribution& d);

}  // namespace pulsekit

#endif  // PULSEKIT_SIGCORE_HPP_
