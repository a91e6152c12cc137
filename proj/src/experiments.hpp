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

#ifndef PULSEKIT_EXPERIMENTS_HPP_
#define PULSEKIT_EXPERIMENTS_HPP_

#include <string>

#include "train.hpp"

namespace pulsekit {

// Demonstrates the bin-resolution effect: PSDs of the same clean synthetic
// pulse at 2 s and 10 s, the bin-resolution table, and the PSD-peak HR
// errors. Writes signal_10s.csv, psd_{2s,10s}.json, bins.csv and
// summary.json into out_dir; returns the summary.
nlohmann::json leakage_demo(int fps, double hr_bpm, uint64_t seed,
                            const std::string& out_dir);

// Ablation grids over a shared corpus and seed. `which` is one of
// loss | strategy | blocks | hr-calc | sudden. Writes one CSV row per
// variant and returns the rows.
nlohmann::json ablate(const std::string& which, const Corpus& corpus,
                      const TrainConfig& cfg, const std::string& out_csv);

}  // namespace pulsekit

#endif  // PULSEKIT_EXPERIMENTS_HPP_
