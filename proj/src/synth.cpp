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

#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "rng.hpp"

namespace pulsekit {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Fixed stream tags for per-record RNG derivation.
enum Stream : uint64_t { kPhase = 1, kDriftPhase = 2, kNoise = 3 };

void validate_params(const PpgParams& p) {
  require(p.fps > 0, ErrorCode::invalid_argument, "fps must be positive");
  require(p.duration_s > 0, ErrorCode::invalid_argument,
          "duration must be positive");
  require(p.drift_amp == 0.0 || p.drift_period_s > 5.0,
          ErrorCode::invalid_argument,
          "drift period must exceed 5 s (below 0.2 Hz)");
}

}  // namespace

PpgParams CorpusSpec::ppg() const {
  PpgParams p;
  p.fps = fps;
  p.duration_s = duration_s;
  p.harmonic_amps = harmonic_amps;
  p.noise_snr_db = noise_snr_db;
  p.drift_amp = drift_amp;
  p.drift_period_s = drift_period_s;
  return p;
}

SynthRecord synth_ppg(const PpgParams& p, double hr_bpm, uint64_t seed) {
  size_t n = static_cast<size_t>(std::llround(p.duration_s * p.fps));
  return synth_ppg(p, std::vector<double>(n, hr_bpm), seed);
}

SynthRecord synth_ppg(const PpgParams& p, const std::vector<double>& hr_bpm,
                      uint64_t seed) {
  validate_params(p);
  size_t n = static_cast<size_t>(std::llround(p.duration_s * p.fps));
  require(hr_bpm.size() == n, ErrorCode::invalid_argument,
          "hr trajectory length must equal duration * fps");
  for (double hr : hr_bpm)
    require(hr >= kHrMinBpm && hr <= kHrMaxBpm, ErrorCode::out_of_band,
            "hr outside [45, 240] bpm");

  SynthRecord r;
  r.seed = seed;
  r.params = p;
  r.hr_trajectory = hr_bpm;
  r.clean.fps = p.fps;
  r.observed.fps = p.fps;
  r.clean.samples.resize(n);

  Rng phase_rng(derive_seed(seed, kPhase));
  double phi = phase_rng.next_uniform(0.0, kTwoPi);
  for (size_t i = 0; i < n; ++i) {
    phi += kTwoPi * hr_bpm[i] / 60.0 / p.fps;
    double v = 0.0;
    for (size_t h = 0; h < p.harmonic_amps.size(); ++h)
      v += p.harmonic_amps[h] * std::sin((h + 1) * phi);
    r.clean.samples[i] = v;
  }

  r.observed.samples = r.clean.samples;
  if (p.drift_amp != 0.0) {
    Rng drift_rng(derive_seed(seed, kDriftPhase));
    double psi = drift_rng.next_uniform(0.0, kTwoPi);
    for (size_t i = 0; i < n; ++i) {
      double ts = static_cast<double>(i) / p.fps;
      r.observed.samples[i] +=
          p.drift_amp * std::sin(kTwoPi * ts / p.drift_period_s + psi);
    }
  }
  if (std::isfinite(p.noise_snr_db)) {
    double power = 0.0;
    for (double v : r.clean.samples) power += v * v;
    power /= n;
    double sigma = std::sqrt(power / std::pow(10.0, p.noise_snr_db / 10.0));
    Rng noise_rng(derive_seed(seed, kNoise));
    for (size_t i = 0; i < n; ++i)
      r.observed.samples[i] += sigma * noise_rng.next_gaussian();
  }
  return r;
}

SynthRecord sudden_change(const SynthRecord& r, double factor) {
  require(std::abs(r.params.duration_s - 10.0) < 1e-9,
          ErrorCode::invalid_argument, "sudden_change: record must last 10 s");
  std::vector<double> traj = r.hr_trajectory;
  size_t boundary = static_cast<size_t>(8 * r.params.fps);
  for (size_t i = boundary; i < traj.size(); ++i) traj[i] *= factor;
  // synth_ppg re-validates the scaled trajectory against [45, 240].
  return synth_ppg(r.params, traj, r.seed);
}

std::vector<const CorpusRecord*> Corpus::split(bool test) const {
  std::vector<const CorpusRecord*> out;
  for (const auto& r : records)
    if (r.is_test == test) out.push_back(&r);
  return out;
}

Corpus build_corpus(const CorpusSpec& spec) {
  require(spec.n_records >= 1, ErrorCode::invalid_argument,
          "corpus needs at least one record");
  require(spec.hr_lo_bpm >= kHrMinBpm && spec.hr_hi_bpm <= kHrMaxBpm &&
              spec.hr_lo_bpm <= spec.hr_hi_bpm,
          ErrorCode::out_of_band, "hr range must lie inside [45, 240]");
  Corpus corpus;
  corpus.spec = spec;
  corpus.records.resize(spec.n_records);
  for (int i = 0; i < spec.n_records; ++i) {
    CorpusRecord& cr = corpus.records[i];
    cr.id = i;
    uint64_t rec_seed = derive_seed(spec.seed, 100 + static_cast<uint64_t>(i));
    Rng hr_rng(derive_seed(rec_seed, 1ULL << 32));
    cr.hr_bpm = hr_rng.next_uniform(spec.hr_lo_bpm, spec.hr_hi_bpm);
    cr.rec = synth_ppg(spec.ppg(), cr.hr_bpm, rec_seed);
  }
  // Exact 80/20 split: order ids by a seed-derived hash, first fifth is test.
  std::vector<int> order(spec.n_records);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    uint64_t ha = derive_seed(corpus.records[a].rec.seed, 0x5157);
    uint64_t hb = derive_seed(corpus.records[b].rec.seed, 0x5157);
    return ha != hb ? ha < hb : a < b;
  });
  int n_test = static_cast<int>(
      std::ceil(spec.n_records * 0.2));
  if (spec.n_records >= 2 && n_test == 0) n_test = 1;
  for (int j = 0; j < n_test && j < spec.n_records; ++j)
    corpus.records[order[j]].is_test = true;
  return corpus;
}

namespace {

std::string record_stem(int id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "record_%04d", id);
  return buf;
}

nlohmann::json spec_json(const CorpusSpec& s) {
  nlohmann::json j;
  j["n_records"] = s.n_records;
  j["fps"] = s.fps;
  j["hr_lo_bpm"] = s.hr_lo_bpm;
  j["hr_hi_bpm"] = s.hr_hi_bpm;
  j["harmonic_amps"] = s.harmonic_amps;
  if (std::isfinite(s.noise_snr_db))
    j["noise_snr_db"] = s.noise_snr_db;
  else
    j["noise_snr_db"] = "inf";
  j["drift_amp"] = s.drift_amp;
  j["drift_period_s"] = s.drift_period_s;
  j["duration_s"] = s.duration_s;
  j["seed"] = s.seed;
  return j;
}

CorpusSpec spec_from_json(const nlohmann::json& j) {
  CorpusSpec s;
  s.n_records = j.at("n_records").get<int>();
  s.fps = j.at("fps").get<int>();
  s.hr_lo_bpm = j.at("hr_lo_bpm").get<double>();
  s.hr_hi_bpm = j.at("hr_hi_bpm").get<double>();
  auto amps = j.at("harmonic_amps");
  for (size_t i = 0; i < 3; ++i) s.harmonic_amps[i] = amps.at(i).get<double>();
  if (j.at("noise_snr_db").is_string())
    s.noise_snr_db = std::numeric_limits<double>::infinity();
  else
    s.noise_snr_db = j.at("noise_snr_db").get<double>();
  s.drift_amp = j.at("drift_amp").get<double>();
  s.drift_period_s = j.at("drift_period_s").get<double>();
  s.duration_s = j.at("duration_s").get<double>();
  s.seed = j.at("seed").get<uint64_t>();
  return s;
}

}  // namespace

std::string corpus_manifest_json(const Corpus& corpus) {
  nlohmann::json j;
  j["spec"] = spec_json(corpus.spec);
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : corpus.records) {
    nlohmann::json e;
    e["id"] = r.id;
    e["seed"] = r.rec.seed;
    e["hr_bpm"] = r.hr_bpm;
    e["split"] = r.is_test ? "test" : "train";
    e["clean_csv"] = record_stem(r.id) + ".clean.csv";
    e["observed_csv"] = record_stem(r.id) + ".observed.csv";
    recs.push_back(e);
  }
  j["records"] = recs;
  return j.dump(2);
}

void save_corpus(const Corpus& corpus, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream mf(dir + "/manifest.json");
  require(mf.good(), ErrorCode::io, "cannot write manifest in " + dir);
  mf << corpus_manifest_json(corpus) << "\n";
  for (const auto& r : corpus.records) {
    write_signal_csv(r.rec.clean, dir + "/" + record_stem(r.id) + ".clean.csv");
    write_signal_csv(r.rec.observed,
                     dir + "/" + record_stem(r.id) + ".observed.csv");
  }
}

Corpus load_corpus(const std::string& dir) {
  std::ifstream mf(dir + "/manifest.json");
  require(mf.good(), ErrorCode::io, "cannot open " + dir + "/manifest.json");
  nlohmann::json j = nlohmann::json::parse(mf, nullptr, false);
  require(!j.is_discarded(), ErrorCode::io, "corrupt manifest in " + dir);
  Corpus corpus;
  corpus.spec = spec_from_json(j.at("spec"));
  for (const auto& e : j.at("records")) {
    CorpusRecord r;
    r.id = e.at("id").get<int>();
    r.is_test = e.at("split").get<std::string>() == "test";
    r.hr_bpm = e.at("hr_bpm").get<double>();
    r.rec.seed = e.at("seed").get<uint64_t>();
    r.rec.params = corpus.spec.ppg();
    r.rec.clean =
        read_signal_csv(dir + "/" + e.at("clean_csv").get<std::string>());
    r.rec.observed =
        read_signal_csv(dir + "/" + e.at("observed_csv").get<std::string>());
    r.rec.hr_trajectory.assign(r.rec.clean.samples.size(), r.hr_bpm);
    corpus.records.push_back(std::move(r));
  }
  return corpus;
}

}  // namespace pulsekit
