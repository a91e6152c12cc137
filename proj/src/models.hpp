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

#ifndef PULSEKIT_MODELS_HPP_
#define PULSEKIT_MODELS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "autodiff.hpp"
#include "sigcore.hpp"

#include "json.hpp"

namespace pulsekit {

// The observed window is always 2 s; the generator extends it through the
// block chain to the listed durations (seconds).
struct ModelConfig {
  int fps = 30;
  int channels = 8;      // latent feature channels C
  int enc_layers = 3;    // 1 -> C then C -> C convolutions
  int enc_kernel = 7;
  int est_hidden = 8;    // width of the 1x1 projection head
  int gen_hidden = 28;   // hidden width of each linear block
  int noise_dim = 8;     // width of the Gaussian noise fed to the first block
  int dec_layers = 6;    // decoder D convolutions, 1 -> C then C -> C
  int dec_kernel = 5;
  std::vector<int> gen_durations = {4, 6, 8, 10};
  bool activations = true;  // test configurations may disable the ReLUs

  int obs_len() const { return 2 * fps; }
};

void validate(const ModelConfig& c);
nlohmann::json model_config_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);

// Ordered, named parameter tensors.
struct ParamSet {
  std::vector<std::pair<std::string, ad::Tensor>> items;

  void add(const std::string& name, ad::Tensor t);
  ad::Tensor& find(const std::string& name);
  const ad::Tensor& find(const std::string& name) const;
  size_t total_size() const;
};

// Full bundle: encoder F, estimator E, generator G (blocks B1..B4 plus
// decoder D), with training provenance for the checkpoint manifest.
struct ModelParams {
  ModelConfig config;
  ParamSet enc;
  ParamSet est;
  ParamSet gen;
  bool t_trained = false;
  bool g_trained = false;
  std::string strategy = "fwd-bwd";
};

ModelParams init_params(const ModelConfig& c, uint64_t seed);
ModelParams zero_params(const ModelConfig& c);

// Binds the three parameter sets into a tape, as trainable inputs or as
// constants, and resolves them by name during graph construction.
class Binding {
 public:
  Binding(ad::Tape& tape, const ModelParams& p, bool train_t, bool train_g);
  ad::NodeRef node(const std::string& name) const;

 private:
  std::map<std::string, ad::NodeRef> nodes_;
};

// Graph builders. obs/s2 are 1 x (2 fps) rows; features are C x L.
ad::NodeRef encode_node(ad::Tape& t, const Binding& b, ad::NodeRef obs,
                        const ModelConfig& c);
ad::NodeRef estimate_node(ad::Tape& t, const Binding& b, ad::NodeRef feats,
                          const ModelConfig& c);
std::map<int, ad::NodeRef> generate_node(ad::Tape& t, const Binding& b,
                                         ad::NodeRef s2,
                                         const std::vector<double>& noise,
                                         const ModelConfig& c);

std::vector<double> draw_noise(const ModelConfig& c, uint64_t seed);

// Plain (value-only) paths on a throwaway tape.
ad::Tensor encode(const Signal& obs, const ModelParams& p);
Signal estimate(const ad::Tensor& feats, const ModelParams& p);
std::map<int, ad::Tensor> generate(const Signal& s2, uint64_t noise_seed,
                                   const ModelParams& p);
Signal predict_s2(const Signal& obs, const ModelParams& p);  // E(F(obs))

// duplication tiles s2 to 10 s; the generator strategies emit the fully
// generated 10 s signal (the strategy choice matters at training time, via
// the window the model was trained on).
Signal reconstruct(const Signal& s2, const std::string& strategy,
                   const ModelParams& p, uint64_t noise_seed);

// Checkpoints: one JSON manifest line (shapes, config, provenance, extra
// metadata) followed by the tensors as raw little-endian 64-bit floats.
void save_checkpoint(const ModelParams& p, const std::string& path,
                     const nlohmann::json& extra_meta = nlohmann::json::object(),
                     const ParamSet* opt_state = nullptr);
ModelParams load_checkpoint(const std::string& path,
                            nlohmann::json* meta_out = nullptr,
                            ParamSet* opt_state_out = nullptr);

}  // namespace pulsekit

#endif  // PULSEKIT_MODELS_HPP_
