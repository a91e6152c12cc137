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

#include "losses.hpp"

#include <algorithm>
#include <cmath>

namespace pulsekit {

namespace {

void require_same_grid(const BandDistribution& a, const BandDistribution& b) {
  bool ok = a.bin_freqs_hz.size() == b.bin_freqs_hz.size();
  for (size_t i = 0; ok && i < a.bin_freqs_hz.size(); ++i)
    ok = std::abs(a.bin_freqs_hz[i] - b.bin_freqs_hz[i]) <= 1e-9;
  require(ok, ErrorCode::invalid_argument, "cross-entropy: bin-grid mismatch");
}

double ce_value(const std::vector<double>& outside,
                const std::vector<double>& inside) {
  double s = 0.0;
  for (size_t i = 0; i < outside.size(); ++i)
    s -= outside[i] * std::log(std::max(inside[i], kLogClamp));
  return s;
}

const int kDurations[] = {4, 6, 8, 10};
const int kChainStarts[] = {4, 6, 8};

}  // namespace

CeOrientation parse_ce_orientation(const std::string& s) {
  if (s == "as-printed") return CeOrientation::as_printed;
  if (s == "conventional") return CeOrientation::conventional;
  fail(ErrorCode::invalid_argument, "unknown ce orientation: " + s);
}

std::string to_string(CeOrientation o) {
  return o == CeOrientation::as_printed ? "as-printed" : "conventional";
}

LossValue loss_ce(const BandDistribution& pred, const BandDistribution& gt,
                  CeOrientation orientation) {
  require_same_grid(pred, gt);
  LossValue v;
  v.value = orientation == CeOrientation::as_printed
                ? ce_value(pred.probs, gt.probs)
                : ce_value(gt.probs, pred.probs);
  v.term_breakdown["l_ce"] = v.value;
  return v;
}

LossValue loss_wce(const BandDistribution& pred, const BandDistribution& gt,
                   double weight, CeOrientation orientation) {
  require(weight >= 0.0 && weight <= 1.0, ErrorCode::invalid_argument,
          "loss_wce: weight must lie in [0, 1]");
  LossValue ce = loss_ce(pred, gt, orientation);
  LossValue v;
  v.value = weight * ce.value;
  v.term_breakdown["l_ce"] = ce.value;
  v.term_breakdown["weight"] = weight;
  return v;
}

LossValue loss_mps(const Signal& pred_short, const Signal& gt_long,
                   double delta_t_s) {
  RunningCorrelation m = swm_ncc(pred_short, gt_long);
  LossValue v;
  double f = fp(m, pred_short.fps, delta_t_s);
  v.value = 1.0 - f;
  v.term_breakdown["fp"] = f;
  return v;
}

LossValue loss_ncc(const Signal& pred, const Signal& gt) {
  Signal a = pred, b = gt;
  size_t len = std::max(a.samples.size(), b.samples.size());
  a.samples.resize(len, 0.0);
  b.samples.resize(len, 0.0);
  RunningCorrelation c = ncc(a, b);
  double best = *std::max_element(c.values.begin(), c.values.end());
  LossValue v;
  v.value = 1.0 - best;
  v.term_breakdown["max_ncc"] = best;
  return v;
}

LossValue loss_mps_g(const std::map<int, Signal>& generated,
                     const Signal& gt_10, double delta_t_s) {
  for (int t : kDurations)
    require(generated.count(t), ErrorCode::invalid_argument,
            "loss_mps_g: missing duration " + std::to_string(t) + " s");
  validate(gt_10);
  require(gt_10.samples.size() == static_cast<size_t>(10 * gt_10.fps),
          ErrorCode::invalid_argument, "loss_mps_g: gt must last 10 s");
  LossValue v;
  for (int t : kDurations) {
    double term =
        loss_mps(generated.at(t), gt_10, delta_t_s).value;
    v.term_breakdown["gt_" + std::to_string(t)] = term;
    v.value += term;
  }
  for (int t : kChainStarts) {
    double term =
        loss_mps(generated.at(t), generated.at(t + 2), delta_t_s).value;
    v.term_breakdown["chain_" + std::to_string(t) + "_" + std::to_string(t + 2)] =
        term;
    v.value += term;
  }
  return v;
}

namespace graph {

ad::NodeRef psd_band_node(ad::Tape& t, ad::NodeRef sig, int fps) {
  const int len = t.value(sig).size();
  std::vector<size_t> bins = band_bins(len, fps);
  std::vector<int> bins_i(bins.begin(), bins.end());
  ad::NodeRef x = t.mean_center(sig);
  ad::NodeRef re = t.dft_real(x, bins_i);
  ad::NodeRef im = t.dft_imag(x, bins_i);
  ad::NodeRef p = t.add(t.mul(re, re), t.mul(im, im));
  return t.div_scalar(p, t.sum_reduce(p));
}

ad::NodeRef loss_ce_node(ad::Tape& t, ad::NodeRef pred_sig,
                         const BandDistribution& gt, int fps,
                         CeOrientation orientation) {
  const int len = t.value(pred_sig).size();
  std::vector<size_t> bins = band_bins(len, fps);
  require(bins.size() == gt.bin_freqs_hz.size(), ErrorCode::invalid_argument,
          "loss_ce: bin-grid mismatch");
  double duration = static_cast<double>(len) / fps;
  for (size_t i = 0; i < bins.size(); ++i)
    require(std::abs(bins[i] / duration - gt.bin_freqs_hz[i]) <= 1e-9,
            ErrorCode::invalid_argument, "loss_ce: bin-grid mismatch");

  ad::NodeRef z = psd_band_node(t, pred_sig, fps);
  if (orientation == CeOrientation::as_printed) {
    std::vector<double> log_gt(gt.probs.size());
    for (size_t i = 0; i < gt.probs.size(); ++i)
      log_gt[i] = std::log(std::max(gt.probs[i], kLogClamp));
    ad::NodeRef lg = t.constant(ad::Tensor::row(std::move(log_gt)));
    return t.affine(t.sum_reduce(t.mul(z, lg)), -1.0, 0.0);
  }
  ad::NodeRef gtn = t.constant(ad::Tensor::row(gt.probs));
  ad::NodeRef logz = t.log(t.clamp_min(z, kLogClamp));
  return t.affine(t.sum_reduce(t.mul(gtn, logz)), -1.0, 0.0);
}

ad::NodeRef loss_wce_node(ad::Tape& t, ad::NodeRef pred_sig,
                          const BandDistribution& gt, int fps, double weight,
                          CeOrientation orientation) {
  require(weight >= 0.0 && weight <= 1.0, ErrorCode::invalid_argument,
          "loss_wce: weight must lie in [0, 1]");
  return t.affine(loss_ce_node(t, pred_sig, gt, fps, orientation), weight, 0.0);
}

ad::NodeRef loss_mps_node(ad::Tape& t, ad::NodeRef pred_short,
                          ad::NodeRef gt_long, int fps, double delta_t_s) {
  return t.affine(t.periodic_similarity(pred_short, gt_long, fps, delta_t_s),
                  -1.0, 1.0);
}

ad::NodeRef loss_ncc_node(ad::Tape& t, ad::NodeRef pred, ad::NodeRef gt) {
  return t.affine(t.padded_ncc_max(pred, gt), -1.0, 1.0);
}

ad::NodeRef loss_mps_g_node(ad::Tape& t,
                            const std::map<int, ad::NodeRef>& generated,
                            ad::NodeRef gt_10, int fps, double delta_t_s,
                            std::map<std::string, double>* breakdown) {
  for (int d : kDurations)
    require(generated.count(d), ErrorCode::invalid_argument,
            "loss_mps_g: missing duration " + std::to_string(d) + " s");
  ad::NodeRef total;
  auto accumulate = [&](const std::string& key, ad::NodeRef term) {
    if (breakdown) (*breakdown)[key] = t.scalar_value(term);
    total = total.valid() ? t.add(total, term) : term;
  };
  for (int d : kDurations)
    accumulate("gt_" + std::to_string(d),
               loss_mps_node(t, generated.at(d), gt_10, fps, delta_t_s));
  for (int d : kChainStarts)
    accumulate("chain_" + std::to_string(d) + "_" + std::to_string(d + 2),
               loss_mps_node(t, generated.at(d), generated.at(d + 2), fps,
                             delta_t_s));
  return total;
}

}  // namespace graph

}  // namespace pulsekit
