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

#ifndef PULSEKIT_SYNTH_HPP_
#define PULSEKIT_SYNTH_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sigcore.hpp"

namespace pulsekit {

inline constexpr double kHrMinBpm = 45.0;
inline constexpr double kHrMaxBpm = 240.0;

struct PpgParams {
  int fps = 30;
  double duration_s = 10.0;
  // Fundamental plus two overtones; the overtones give the waveform a
  // dicrotic-notch-like asymmetry.
  std::array<double, 3> harmonic_amps{1.0, 0.5, 0.25};
  double noise_snr_db = 10.0;  // +infinity disables noise
  double drift_amp = 0.3;
  double drift_period_s = 8.0;  // must stay below 0.2 Hz, i.e. > 5 s
};

// Paired clean/observed signal with a known per-sample HR trajectory. The
// clean waveform is phase-continuous frequency modulation: the instantaneous
// frequency equals hr(t)/60 Hz.
struct SynthRecord {
  Signal clean;
  Signal observed;
  std::vector<double> hr_trajectory;  // bpm per sample, within [45, 240]
  uint64_t seed = 0;
  PpgParams params;
};

SynthRecord synth_ppg(const PpgParams& p, double hr_bpm, uint64_t seed);
SynthRecord synth_ppg(const PpgParams& p, const std::vector<double>& hr_bpm,
                      uint64_t seed);

// First 8 s at the original HR, final 2 s at factor x HR, phase-continuous
// at the boundary so only the frequency jumps. Errors when the scaled HR
// leaves [45, 240].
SynthRecord sudden_change(const SynthRecord& r, double factor = 1.33);

struct CorpusSpec {
  int n_records = 200;
  int fps = 30;
  double hr_lo_bpm = 50.0;
  double hr_hi_bpm = 110.0;
  std::array<double, 3> harmonic_amps{1.0, 0.5, 0.25};
  double noise_snr_db = 10.0;
  double drift_amp = 0.3;
  double drift_period_s = 8.0;
  double duration_s = 10.0;
  uint64_t seed = 1;

  PpgParams ppg() const;
};

struct CorpusRecord {
  int id = 0;
  bool is_test = false;
  double hr_bpm = 0.0;
  SynthRecord rec;
};

struct Corpus {
  CorpusSpec spec;
  std::vector<CorpusRecord> records;

  std::vector<const CorpusRecord*> split(bool test) const;
};

// Deterministic corpus: per-record HRs uniform in [hr_lo, hr_hi], seeds
// derived from spec.seed, and an exact 80/20 train/test split ordered by a
// seed-derived hash.
Corpus build_corpus(const CorpusSpec& spec);

// On disk: manifest.json plus a clean/observed CSV pair per record.
void save_corpus(const Corpus& corpus, const std::string& dir);
Corpus load_corpus(const std::string& dir);
std::string corpus_manifest_json(const Corpus& corpus);

}  // namespace pulsekit

#endif  // PULSEKIT_SYNTH_HPP_
