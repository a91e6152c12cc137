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

#ifndef PULSEKIT_LOSSES_HPP_
#define PULSEKIT_LOSSES_HPP_

#include <map>
#include <string>

#include "autodiff.hpp"
#include "sigcore.hpp"
#include "xcorr.hpp"

namespace pulsekit {

// The spectral cross-entropy is implemented exactly as printed (predicted
// distribution outside the log, ground truth inside); `conventional` swaps
// the arguments for comparison experiments.
enum class CeOrientation { as_printed, conventional };

CeOrientation parse_ce_orientation(const std::string& s);
std::string to_string(CeOrientation o);

inline constexpr double kLogClamp = 1e-12;

struct LossValue {
  double value = 0.0;
  std::map<std::string, double> term_breakdown;
};

// -sum_i pred_i * log(max(gt_i, 1e-12)). Distributions must share a bin grid.
LossValue loss_ce(const BandDistribution& pred, const BandDistribution& gt,
                  CeOrientation orientation = CeOrientation::as_printed);

// weight * loss_ce, weight in [0, 1] from entropy_weights.
LossValue loss_wce(const BandDistribution& pred, const BandDistribution& gt,
                   double weight,
                   CeOrientation orientation = CeOrientation::as_printed);

// 1 - FP(SWM-NCC(pred_short, gt_long), delta_t).
LossValue loss_mps(const Signal& pred_short, const Signal& gt_long,
                   double delta_t_s = 1.5);

// Classical baseline: 1 - max over lags of the zero-padded running NCC.
LossValue loss_ncc(const Signal& pred, const Signal& gt);

// Generative loss over durations {4, 6, 8, 10} s: four ground-truth
// consistency terms against gt_10 plus three chain-consistency terms between
// consecutive generated signals. term_breakdown exposes all seven.
LossValue loss_mps_g(const std::map<int, Signal>& generated,
                     const Signal& gt_10, double delta_t_s = 1.5);

// Differentiable graph builders used by training. Values agree with the
// plain evaluations above.
namespace graph {

// Normalized in-band PSD of a signal node: mean-removed DFT magnitude
// squared over the band bins of band_bins(len, fps), divided by its sum.
ad::NodeRef psd_band_node(ad::Tape& t, ad::NodeRef sig, int fps);

ad::NodeRef loss_ce_node(ad::Tape& t, ad::NodeRef pred_sig,
                         const BandDistribution& gt, int fps,
                         CeOrientation orientation);

ad::NodeRef loss_wce_node(ad::Tape& t, ad::NodeRef pred_sig,
                          const BandDistribution& gt, int fps, double weight,
                          CeOrientation orientation);

ad::NodeRef loss_mps_node(ad::Tape& t, ad::NodeRef pred_short,
                          ad::NodeRef gt_long, int fps, double delta_t_s);

ad::NodeRef loss_ncc_node(ad::Tape& t, ad::NodeRef pred, ad::NodeRef gt);

// generated maps duration seconds -> signal node. Per-term values are
// appended to *breakdown when provided (keys gt_<t> and chain_<t>_<t+2>).
ad::NodeRef loss_mps_g_node(ad::Tape& t,
                            const std::map<int, ad::NodeRef>& generated,
                            ad::NodeRef gt_10, int fps, double delta_t_s,
                            std::map<std::string, double>* breakdown = nullptr);

}  // namespace graph

}  // namespace pulsekit

#endif  // PULSEKIT_LOSSES_HPP_
