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

#include "experiments.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "rng.hpp"

namespace pulsekit {

namespace {

nlohmann::json psd_report(const Signal& s, double true_hr_bpm,
                          const std::string& label) {
  BandDistribution d = psd_band(s);
  HrEstimate hr = hr_from_psd(d);
  nlohmann::json j;
  j["window"] = label;
  j["duration_s"] = s.duration_s();
  j["bin_spacing_hz"] = 1.0 / s.duration_s();
  j["n_bins"] = d.probs.size();
  j["peak_hz"] = hr.bpm / 60.0;
  j["hr_bpm"] = hr.bpm;
  j["abs_err_bpm"] = std::abs(hr.bpm - true_hr_bpm);
  j["entropy"] = entropy(d);
  return j;
}

void write_bins_csv(const nlohmann::json& r2, const nlohmann::json& r10,
                    const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::io, "cannot write " + path);
  out << "window,duration_s,bin_spacing_hz,n_bins,peak_hz,hr_bpm,abs_err_bpm\n";
  for (const auto* r : {&r2, &r10}) {
    out << (*r)["window"].get<std::string>() << ","
        << (*r)["duration_s"].get<double>() << ","
        << (*r)["bin_spacing_hz"].get<double>() << ","
        << (*r)["n_bins"].get<size_t>() << "," << (*r)["peak_hz"].get<double>()
        << "," << (*r)["hr_bpm"].get<double>() << ","
        << (*r)["abs_err_bpm"].get<double>() << "\n";
  }
}

}  // namespace

nlohmann::json leakage_demo(int fps, double hr_bpm, uint64_t seed,
                            const std::string& out_dir) {
  require(fps > 0, ErrorCode::invalid_argument, "fps must be positive");
  require(hr_bpm >= kHrMinBpm && hr_bpm <= kHrMaxBpm, ErrorCode::out_of_band,
          "hr outside [45, 240] bpm");
  std::filesystem::create_directories(out_dir);

  PpgParams p;
  p.fps = fps;
  p.duration_s = 10.0;
  p.noise_snr_db = std::numeric_limits<double>::infinity();
  p.drift_amp = 0.0;
  SynthRecord rec = synth_ppg(p, hr_bpm, seed);

  Signal s2 = window(rec.clean, 0, static_cast<size_t>(2 * fps));
  write_signal_csv(rec.clean, out_dir + "/signal_10s.csv");

  BandDistribution d10 = psd_band(rec.clean);
  BandDistribution d2 = psd_band(s2);
  {
    std::ofstream f(out_dir + "/psd_10s.json");
    f << band_distribution_json(d10) << "\n";
  }
  {
    std::ofstream f(out_dir + "/psd_2s.json");
    f << band_distribution_json(d2) << "\n";
  }

  nlohmann::json r2 = psd_report(s2, hr_bpm, "2s");
  nlohmann::json r10 = psd_report(rec.clean, hr_bpm, "10s");
  write_bins_csv(r2, r10, out_dir + "/bins.csv");

  nlohmann::json summary;
  summary["fps"] = fps;
  summary["true_hr_bpm"] = hr_bpm;
  summary["seed"] = seed;
  summary["window_2s"] = r2;
  summary["window_10s"] = r10;
  summary["err_2s_bpm"] = r2["abs_err_bpm"];
  summary["err_10s_bpm"] = r10["abs_err_bpm"];
  {
    std::ofstream f(out_dir + "/summary.json");
    require(f.good(), ErrorCode::io, "cannot write summary.json");
    f << summary.dump(2) << "\n";
  }
  return summary;
}

namespace {

struct AblateRow {
  std::string variant;
  MetricsReport m;
  double extra = std::numeric_limits<double>::quiet_NaN();
};

void write_rows(const std::vector<AblateRow>& rows, const std::string& path,
                const std::string& extra_header) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::io, "cannot write " + path);
  out << "variant,mae,rmse,r";
  if (!extra_header.empty()) out << "," << extra_header;
  out << "\n";
  char buf[64];
  auto cell = [&](double v) {
    if (!std::isfinite(v)) return std::string("nan");
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    out << r.variant << "," << cell(r.m.mae) << "," << cell(r.m.rmse) << ","
        << cell(r.m.pearson_r);
    if (!extra_header.empty()) out << "," << cell(r.extra);
    out << "\n";
  }
}

nlohmann::json rows_json(const std::vector<AblateRow>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json e;
    e["variant"] = r.variant;
    e["mae"] = r.m.mae;
    e["rmse"] = r.m.rmse;
    e["r"] = r.m.pearson_r;
    if (std::isfinite(r.extra)) e["extra"] = r.extra;
    j.push_back(e);
  }
  return j;
}

std::vector<AblateRow> ablate_loss(const Corpus& corpus,
                                   const TrainConfig& cfg) {
  struct Variant {
    const char* name;
    LossCombo combo;
  };
  const Variant variants[] = {
      {"L_ce", {true, false, false, false}},
      {"L_wce", {false, true, false, false}},
      {"L_ncc", {false, false, true, false}},
      {"L_mps", {false, false, false, true}},
      {"L_ncc+L_ce", {true, false, true, false}},
      {"L_mps+L_wce", {false, true, false, true}},
  };
  std::vector<AblateRow> rows;
  for (const auto& v : variants) {
    TrainConfig c = cfg;
    c.t_loss = v.combo;
    ModelParams params = train_T(corpus, c);
    EvalReport rep = evaluate(corpus, params, c, ReconMode::none);
    rows.push_back({v.name, rep.raw_psd, {}});
  }
  return rows;
}

std::vector<AblateRow> ablate_strategy(const Corpus& corpus,
                                       const TrainConfig& cfg) {
  std::vector<AblateRow> rows;
  // w/o reconstruction and duplication share one T (center crop).
  TrainConfig base = cfg;
  base.strategy = Strategy::fwd_bwd;
  ModelParams t_only = train_T(corpus, base);
  rows.push_back(
      {"w/o", evaluate(corpus, t_only, base, ReconMode::none).raw_psd, {}});
  rows.push_back({"duplication",
                  evaluate(corpus, t_only, base, ReconMode::duplication)
                      .recon_psd,
                  {}});
  for (Strategy s :
       {Strategy::forward, Strategy::backward, Strategy::fwd_bwd}) {
    TrainConfig c = cfg;
    c.strategy = s;
    ModelParams params = alternate(corpus, c);
    rows.push_back({to_string(s),
                    evaluate(corpus, params, c, ReconMode::generator).recon_psd,
                    {}});
  }
  return rows;
}

std::vector<AblateRow> ablate_blocks(const Corpus& corpus,
                                     const TrainConfig& cfg) {
  struct Variant {
    const char* name;
    std::vector<int> durations;
  };
  const Variant variants[] = {
      {"B1-B4", {4, 10}},
      {"B1-B2-B4", {4, 6, 10}},
      {"B1-B3-B4", {4, 8, 10}},
      {"B1-B2-B3-B4", {4, 6, 8, 10}},
  };
  std::vector<AblateRow> rows;
  for (const auto& v : variants) {
    TrainConfig c = cfg;
    c.model.gen_durations = v.durations;
    ModelParams params = alternate(corpus, c);
    rows.push_back({v.name,
                    evaluate(corpus, params, c, ReconMode::generator).recon_psd,
                    {}});
  }
  return rows;
}

std::vector<AblateRow> ablate_hr_calc(const Corpus& corpus,
                                      const TrainConfig& cfg) {
  ModelParams params = alternate(corpus, cfg);
  EvalReport rep = evaluate(corpus, params, cfg, ReconMode::generator);
  return {{"raw2s-ibi", rep.raw_ibi, {}},
          {"raw2s-psd", rep.raw_psd, {}},
          {"recon10s-ibi", rep.recon_ibi, {}},
          {"recon10s-psd", rep.recon_psd, {}}};
}

std::vector<AblateRow> ablate_sudden(const Corpus& corpus,
                                     const TrainConfig& cfg) {
  const double factor = 1.33;
  ModelParams params = alternate(corpus, cfg);
  const int fps = corpus.spec.fps;

  std::vector<double> gt, full_window, pipeline;
  for (const auto* rec : corpus.split(/*test=*/true)) {
    if (rec->hr_bpm * factor > kHrMaxBpm) continue;
    SynthRecord comp = sudden_change(rec->rec, factor);
    double gt_bpm = comp.hr_trajectory.back();
    // A sliding 10 s window that still covers the old-rate 8 s prefix.
    double hr10 = hr_from_psd(psd_band(comp.observed)).bpm;
    // The 2 s pipeline sees only the post-change clip.
    Signal obs2 = window(comp.observed, static_cast<size_t>(8 * fps),
                         static_cast<size_t>(2 * fps));
    uint64_t noise_seed = derive_seed(cfg.seed, 0x51DD, rec->id);
    double hr2 = infer(obs2, params, noise_seed).hr.bpm;
    gt.push_back(gt_bpm);
    full_window.push_back(hr10);
    pipeline.push_back(hr2);
  }
  require(!gt.empty(), ErrorCode::invalid_argument,
          "sudden: no composite stays inside the HR band");

  auto within = [&](const std::vector<double>& est, double tol) {
    int n = 0;
    for (size_t i = 0; i < est.size(); ++i)
      if (std::abs(est[i] - gt[i]) <= tol) ++n;
    return 100.0 * n / est.size();
  };
  return {{"psd-10s-window", metrics(full_window, gt), within(full_window, 6.0)},
          {"pipeline-2s", metrics(pipeline, gt), within(pipeline, 6.0)}};
}

}  // namespace

nlohmann::json ablate(const std::string& which, const Corpus& corpus,
                      const TrainConfig& cfg, const std::string& out_csv) {
  std::vector<AblateRow> rows;
  std::string extra;
  if (which == "loss") {
    rows = ablate_loss(corpus, cfg);
  } else if (which == "strategy") {
    rows = ablate_strategy(corpus, cfg);
  } else if (which == "blocks") {
    rows = ablate_blocks(corpus, cfg);
  } else if (which == "hr-calc") {
    rows = ablate_hr_calc(corpus, cfg);
  } else if (which == "sudden") {
    rows = ablate_sudden(corpus, cfg);
    extra = "pct_within_6bpm";
  } else {
    fail(ErrorCode::invalid_argument, "unknown ablation: " + which);
  }
  write_rows(rows, out_csv, extra);
  return rows_json(rows);
}

}  // namespace pulsekit
