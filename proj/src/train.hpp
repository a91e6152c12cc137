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

#ifndef PULSEKIT_TRAIN_HPP_
#define PULSEKIT_TRAIN_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "losses.hpp"
#include "models.hpp"
#include "synth.hpp"

namespace pulsekit {

// The strategy fixes where the 2 s training window is cropped from each 10 s
// record (start / end / center) and how the 10 s signal is rebuilt at
// inference. duplication shares the center crop and tiles instead of
// generating.
enum class Strategy { duplication, forward, backward, fwd_bwd };

Strategy parse_strategy(const std::string& s);
std::string to_string(Strategy s);
size_t crop_offset(Strategy s, int fps);

// Ablation hook: which loss terms train T. The default is the weighted
// spectral cross-entropy plus the maximized periodic similarity.
struct LossCombo {
  bool ce = false;
  bool wce = true;
  bool ncc = false;
  bool mps = true;
};

struct TrainConfig {
  double lr_t = 1e-5;
  double lr_g = 5e-5;
  int epochs = 100;
  int batch_size = 16;
  uint64_t seed = 7;
  double delta_t_s = 1.5;
  Strategy strategy = Strategy::fwd_bwd;
  CeOrientation ce_orientation = CeOrientation::as_printed;
  bool anchoring = false;
  int checkpoint_every = 25;
  int eval_every = 1;
  int threads = 0;  // 0 = hardware concurrency
  LossCombo t_loss;
  ModelConfig model;
};

void validate(const TrainConfig& c);
nlohmann::json train_config_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

// JSON-lines run log; the buffer is what gets persisted, so identical runs
// produce byte-identical files.
class RunLog {
 public:
  void add(const nlohmann::json& j);
  const std::string& text() const { return buffer_; }
  void save(const std::string& path) const;

 private:
  std::string buffer_;
};

struct EvalRow {
  std::string record_id;  // "<record>#<clip>"
  double gt_bpm = 0.0;
  double raw2s_psd = 0.0;
  double raw2s_ibi = 0.0;     // NaN when too few beats
  double recon10s_psd = 0.0;  // NaN without a reconstruction path
  double recon10s_ibi = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  MetricsReport raw_psd, raw_ibi, recon_psd, recon_ibi;
  nlohmann::json metrics_json() const;
};

enum class ReconMode { none, duplication, generator };

// Slices every held-out record into non-overlapping 2 s clips and computes
// the four HR variants per clip. NaN cells are excluded pairwise from the
// per-variant metrics.
EvalReport evaluate(const Corpus& corpus, const ModelParams& params,
                    const TrainConfig& cfg, ReconMode recon);
EvalReport evaluate(const Corpus& corpus, const ModelParams& params,
                    const TrainConfig& cfg);
void write_eval_csv(const EvalReport& report, const std::string& path);

// T-only optimization of L_wce + L_mps (or the configured combo).
ModelParams train_T(const Corpus& corpus, const TrainConfig& cfg,
                    RunLog* log = nullptr);

// G optimization of L_mps-g with F and E frozen; updates params->gen only.
void train_G(const Corpus& corpus, const TrainConfig& cfg, ModelParams* params,
             RunLog* log = nullptr);

// Alternating run: per epoch one T epoch then one G epoch with F, E fixed.
// Checkpoints land in checkpoint_dir (when non-empty) every checkpoint_every
// epochs plus a final checkpoint.bin; resume_from restarts bit-exactly from
// a mid-run checkpoint.
ModelParams alternate(const Corpus& corpus, const TrainConfig& cfg,
                      RunLog* log = nullptr,
                      const std::string& checkpoint_dir = "",
                      const std::string& resume_from = "");

struct InferResult {
  HrEstimate hr;
  Signal s2;             // E(F(obs))
  Signal reconstructed;  // 10 s
};

// obs2 -> s2 -> 10 s reconstruction -> PSD-peak HR.
InferResult infer(const Signal& obs2, const ModelParams& params,
                  uint64_t noise_seed);

}  // namespace pulsekit

#endif  // PULSEKIT_TRAIN_HPP_
