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

#ifndef PULSEKIT_XCORR_HPP_
#define PULSEKIT_XCORR_HPP_

#include <string>
#include <vector>

#include "sigcore.hpp"

namespace pulsekit {

// Lag- or position-indexed correlation sequence. All values lie in [-1, 1].
struct RunningCorrelation {
  enum class IndexKind { lag, window_position };
  IndexKind index_kind = IndexKind::lag;
  int index_origin = 0;  // integer index of values[0]
  std::vector<double> values;
};

// {"index_kind":"lag"|"tau","origin":...,"values":[...]}
std::string running_correlation_json(const RunningCorrelation& c);

// Cosine similarity of the raw sample vectors; no mean removal. The
// remove_mean variant first subtracts each signal's own mean (sensitivity
// analysis only). Throws zero_norm on an all-zero input.
double nc(const Signal& a, const Signal& b, bool remove_mean = false);

// Classical running NCC over lags k in {-(L-1), ..., L-1}. The shifted
// signal is zero-filled, so its norm covers only the overlapping samples.
RunningCorrelation ncc(const Signal& a, const Signal& b,
                       bool remove_mean = false);

// Sliding-window-maximum NCC: for each placement tau of a short-length
// window over the long signal, the maximum NC over all lags. Windows or
// shifted overlaps with zero norm contribute value 0.
RunningCorrelation swm_ncc(const Signal& shorter, const Signal& longer,
                           bool remove_mean = false);

// Heartbeat-cycle segmentation of a running correlation of length m_len.
struct CycleSegmentation {
  int segment_len = 0;   // fps * delta_t samples
  int n_segments = 0;    // max(floor(m_len / segment_len), 1)
  double delta_t_s = 0;  // >= 1.5
};

CycleSegmentation segment_cycles(size_t m_len, int fps, double delta_t_s);

// Mean over cycle-length chunks of each chunk's maximum. Chunk positions
// beyond the end of m contribute value 0.
double fp(const RunningCorrelation& m, int fps, double delta_t_s);

namespace detail {

// One NC evaluation between (a shifted by k, zero-filled) and the length-W
// window w. n_lo..n_hi is the overlap in window coordinates; a's norm covers
// only that overlap while the window norm always covers all W samples.
struct NcTerms {
  double dot = 0.0;
  double na2 = 0.0;  // sum of a^2 over the overlap
  double nb2 = 0.0;  // sum of w^2 over the full window
  int n_lo = 0, n_hi = -1;
  double value = 0.0;  // 0 when the overlap is empty or a norm vanishes
};

NcTerms nc_terms(const double* a, int la, const double* w, int W, int k);

// m[tau] for tau in 0..lg-la (value-only fast path; all sums are direct,
// index-ascending loops so results agree bit-for-bit with a naive oracle).
std::vector<double> swm_values(const double* a, int la, const double* g, int lg);

// Lags attaining m_value at window position tau (exact == comparison).
std::vector<int> swm_tied_lags(const double* a, int la, const double* g,
                               int tau, double m_value);

// c[k] for k in {-(L-1), ..., L-1} against the full window w of length W
// (used by both ncc and the padded-NCC loss; la <= W).
std::vector<double> lag_values(const double* a, int la, const double* w, int W);

struct FpDetail {
  CycleSegmentation seg;
  double value = 0.0;
  std::vector<double> chunk_max;
  // Per chunk: indices into m attaining the max, and the tie count including
  // any zero-pad positions that also attain it.
  std::vector<std::vector<int>> chunk_argmax;
  std::vector<int> chunk_ties;
};

FpDetail fp_detail(const std::vector<double>& m, int fps, double delta_t_s);

// Adds scale * dNC/da into ga and scale * dNC/dw into gw (both nullable).
void accumulate_nc_grad(const double* a, int la, const double* w, int W, int k,
                        const NcTerms& t, double scale, double* ga, double* gw);

}  // namespace detail

}  // namespace pulsekit

#endif  // PULSEKIT_XCORR_HPP_
