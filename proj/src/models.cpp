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

#include "models.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "rng.hpp"

namespace pulsekit {

void validate(const ModelConfig& c) {
  require(c.fps > 0 && c.channels > 0 && c.enc_layers >= 1 &&
              c.enc_kernel % 2 == 1 && c.est_hidden > 0 && c.gen_hidden > 0 &&
              c.noise_dim >= 0 && c.dec_layers >= 1 && c.dec_kernel % 2 == 1,
          ErrorCode::invalid_argument, "invalid model config");
  require(!c.gen_durations.empty(), ErrorCode::invalid_argument,
          "generator needs at least one target duration");
  int prev = 2;
  for (int t : c.gen_durations) {
    require(t > prev && t % 2 == 0 && t <= 10, ErrorCode::invalid_argument,
            "generator durations must be even, increasing, in (2, 10]");
    prev = t;
  }
  require(c.gen_durations.back() == 10, ErrorCode::invalid_argument,
          "generator chain must end at 10 s");
}

nlohmann::json model_config_json(const ModelConfig& c) {
  nlohmann::json j;
  j["fps"] = c.fps;
  j["channels"] = c.channels;
  j["enc_layers"] = c.enc_layers;
  j["enc_kernel"] = c.enc_kernel;
  j["est_hidden"] = c.est_hidden;
  j["gen_hidden"] = c.gen_hidden;
  j["noise_dim"] = c.noise_dim;
  j["dec_layers"] = c.dec_layers;
  j["dec_kernel"] = c.dec_kernel;
  j["gen_durations"] = c.gen_durations;
  j["activations"] = c.activations;
  return j;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.fps = j.at("fps").get<int>();
  c.channels = j.at("channels").get<int>();
  c.enc_layers = j.at("enc_layers").get<int>();
  c.enc_kernel = j.at("enc_kernel").get<int>();
  c.est_hidden = j.at("est_hidden").get<int>();
  c.gen_hidden = j.at("gen_hidden").get<int>();
  c.noise_dim = j.at("noise_dim").get<int>();
  c.dec_layers = j.at("dec_layers").get<int>();
  c.dec_kernel = j.at("dec_kernel").get<int>();
  c.gen_durations = j.at("gen_durations").get<std::vector<int>>();
  c.activations = j.at("activations").get<bool>();
  validate(c);
  return c;
}

void ParamSet::add(const std::string& name, ad::Tensor t) {
  items.emplace_back(name, std::move(t));
}

ad::Tensor& ParamSet::find(const std::string& name) {
  for (auto& [n, t] : items)
    if (n == name) return t;
  fail(ErrorCode::invalid_argument, "unknown parameter: " + name);
}

const ad::Tensor& ParamSet::find(const std::string& name) const {
  for (const auto& [n, t] : items)
    if (n == name) return t;
  fail(ErrorCode::invalid_argument, "unknown parameter: " + name);
}

size_t ParamSet::total_size() const {
  size_t n = 0;
  for (const auto& [name, t] : items) n += t.data.size();
  return n;
}

namespace {

ad::Tensor he_init(int rows, int cols, int fan_in, Rng& rng) {
  ad::Tensor t = ad::Tensor::zeros({rows, cols});
  double std = std::sqrt(2.0 / fan_in);
  for (double& v : t.data) v = std * rng.next_gaussian();
  return t;
}

void add_conv_stack(ParamSet& set, const std::string& prefix, int layers,
                    int kernel, int channels, Rng* rng) {
  for (int i = 1; i <= layers; ++i) {
    int cin = i == 1 ? 1 : channels;
    std::string base = prefix + std::to_string(i);
    if (rng) {
      set.add(base + ".w", he_init(channels, cin * kernel, cin * kernel, *rng));
    } else {
      set.add(base + ".w", ad::Tensor::zeros({channels, cin * kernel}));
    }
    set.add(base + ".b", ad::Tensor::zeros({channels, 1}));
  }
}

int block_index(int target_duration) { return (target_duration - 2) / 2; }

ModelParams make_params(const ModelConfig& c, Rng* rng) {
  validate(c);
  ModelParams p;
  p.config = c;

  add_conv_stack(p.enc, "enc.conv", c.enc_layers, c.enc_kernel, c.channels, rng);

  auto dense = [&](ParamSet& set, const std::string& base, int out, int in) {
    if (rng) {
      set.add(base + ".w", he_init(out, in, in, *rng));
    } else {
      set.add(base + ".w", ad::Tensor::zeros({out, in}));
    }
    set.add(base + ".b", ad::Tensor::zeros({out, 1}));
  };

  // Estimator: a 1x1 projection head, duration-agnostic by construction.
  if (rng) {
    p.est.add("est.proj1.w", he_init(c.est_hidden, c.channels, c.channels, *rng));
  } else {
    p.est.add("est.proj1.w", ad::Tensor::zeros({c.est_hidden, c.channels}));
  }
  p.est.add("est.proj1.b", ad::Tensor::zeros({c.est_hidden, 1}));
  if (rng) {
    p.est.add("est.proj2.w", he_init(1, c.est_hidden, c.est_hidden, *rng));
  } else {
    p.est.add("est.proj2.w", ad::Tensor::zeros({1, c.est_hidden}));
  }
  p.est.add("est.proj2.b", ad::Tensor::zeros({1, 1}));

  // Hierarchical linear blocks: block B_i extends the previous temporal
  // length to gen_durations[i] * fps samples.
  int prev_len = c.obs_len() + c.noise_dim;
  for (int t : c.gen_durations) {
    int out_len = t * c.fps;
    std::string base = "gen.b" + std::to_string(block_index(t));
    dense(p.gen, base + ".l1", c.gen_hidden, prev_len);
    dense(p.gen, base + ".l2", out_len, c.gen_hidden);
    prev_len = out_len;
  }
  add_conv_stack(p.gen, "gen.dec", c.dec_layers, c.dec_kernel, c.channels, rng);
  return p;
}

}  // namespace

ModelParams init_params(const ModelConfig& c, uint64_t seed) {
  Rng rng(derive_seed(seed, 0x1417));
  return make_params(c, &rng);
}

ModelParams zero_params(const ModelConfig& c) { return make_params(c, nullptr); }

Binding::Binding(ad::Tape& tape, const ModelParams& p, bool train_t,
                 bool train_g) {
  auto bind = [&](const ParamSet& set, bool trainable) {
    for (const auto& [name, t] : set.items)
      nodes_[name] = trainable ? tape.input(t, name) : tape.constant(t);
  };
  bind(p.enc, train_t);
  bind(p.est, train_t);
  bind(p.gen, train_g);
}

ad::NodeRef Binding::node(const std::string& name) const {
  auto it = nodes_.find(name);
  require(it != nodes_.end(), ErrorCode::invalid_argument,
          "unbound parameter: " + name);
  return it->second;
}

namespace {

ad::NodeRef conv_stack(ad::Tape& t, const Binding& b, ad::NodeRef x,
                       const std::string& prefix, int layers, int kernel,
                       int channels, bool activations) {
  ad::NodeRef h = x;
  for (int i = 1; i <= layers; ++i) {
    std::string base = prefix + std::to_string(i);
    h = t.conv1d(h, b.node(base + ".w"), b.node(base + ".b"), channels, kernel);
    if (activations && i < layers) h = t.relu(h);
  }
  return h;
}

}  // namespace

ad::NodeRef encode_node(ad::Tape& t, const Binding& b, ad::NodeRef obs,
                        const ModelConfig& c) {
  require(t.value(obs).shape == ad::Shape{1, c.obs_len()},
          ErrorCode::invalid_argument,
          "encode: observation must be 1 x " + std::to_string(c.obs_len()));
  ad::NodeRef x = t.mean_center(obs);
  return conv_stack(t, b, x, "enc.conv", c.enc_layers, c.enc_kernel,
                    c.channels, c.activations);
}

ad::NodeRef estimate_node(ad::Tape& t, const Binding& b, ad::NodeRef feats,
                          const ModelConfig& c) {
  const ad::Shape s = t.value(feats).shape;
  require(s.rows == c.channels, ErrorCode::invalid_argument,
          "estimate: feature channel mismatch");
  ad::NodeRef h = t.conv1d(feats, b.node("est.proj1.w"), b.node("est.proj1.b"),
                           c.est_hidden, 1);
  if (c.activations) h = t.relu(h);
  h = t.conv1d(h, b.node("est.proj2.w"), b.node("est.proj2.b"), 1, 1);
  return h;  // 1 x L
}

std::map<int, ad::NodeRef> generate_node(ad::Tape& t, const Binding& b,
                                         ad::NodeRef s2,
                                         const std::vector<double>& noise,
                                         const ModelConfig& c) {
  require(t.value(s2).shape.size() == c.obs_len(), ErrorCode::invalid_argument,
          "generate: input must hold 2 s of samples");
  require(static_cast<int>(noise.size()) == c.noise_dim,
          ErrorCode::invalid_argument, "generate: noise width mismatch");
  ad::NodeRef prev = t.reshape(s2, {c.obs_len(), 1});
  if (c.noise_dim > 0)
    prev = t.concat_rows(prev, t.constant(ad::Tensor::col(noise)));
  std::map<int, ad::NodeRef> out;
  for (int dur : c.gen_durations) {
    std::string base = "gen.b" + std::to_string(block_index(dur));
    ad::NodeRef h = t.add(t.matvec(b.node(base + ".l1.w"), prev),
                          b.node(base + ".l1.b"));
    if (c.activations) h = t.relu(h);
    ad::NodeRef block = t.add(t.matvec(b.node(base + ".l2.w"), h),
                              b.node(base + ".l2.b"));
    ad::NodeRef g = conv_stack(t, b, t.reshape(block, {1, dur * c.fps}),
                               "gen.dec", c.dec_layers, c.dec_kernel,
                               c.channels, c.activations);
    out[dur] = g;
    prev = block;
  }
  return out;
}

std::vector<double> draw_noise(const ModelConfig& c, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> n(c.noise_dim);
  for (double& v : n) v = rng.next_gaussian();
  return n;
}

ad::Tensor encode(const Signal& obs, const ModelParams& p) {
  ad::Tape t;
  Binding b(t, p, false, false);
  ad::NodeRef o = t.constant(ad::Tensor::row(obs.samples));
  return t.value(encode_node(t, b, o, p.config));
}

Signal estimate(const ad::Tensor& feats, const ModelParams& p) {
  ad::Tape t;
  Binding b(t, p, false, false);
  ad::NodeRef f = t.constant(feats);
  ad::NodeRef s = estimate_node(t, b, f, p.config);
  Signal out;
  out.fps = p.config.fps;
  out.samples = t.value(s).data;
  return out;
}

std::map<int, ad::Tensor> generate(const Signal& s2, uint64_t noise_seed,
                                   const ModelParams& p) {
  ad::Tape t;
  Binding b(t, p, false, false);
  ad::NodeRef s = t.constant(ad::Tensor::row(s2.samples));
  auto nodes =
      generate_node(t, b, s, draw_noise(p.config, noise_seed), p.config);
  std::map<int, ad::Tensor> out;
  for (const auto& [dur, node] : nodes) out[dur] = t.value(node);
  return out;
}

Signal predict_s2(const Signal& obs, const ModelParams& p) {
  ad::Tape t;
  Binding b(t, p, false, false);
  ad::NodeRef o = t.constant(ad::Tensor::row(obs.samples));
  ad::NodeRef s = estimate_node(t, b, encode_node(t, b, o, p.config), p.config);
  Signal out;
  out.fps = p.config.fps;
  out.samples = t.value(s).data;
  return out;
}

Signal reconstruct(const Signal& s2, const std::string& strategy,
                   const ModelParams& p, uint64_t noise_seed) {
  validate(s2);
  if (strategy == "duplication") {
    Signal out;
    out.fps = s2.fps;
    size_t target = static_cast<size_t>(10 * s2.fps);
    out.samples.resize(target);
    for (size_t i = 0; i < target; ++i)
      out.samples[i] = s2.samples[i % s2.samples.size()];
    return out;
  }
  if (strategy == "forward" || strategy == "backward" ||
      strategy == "fwd-bwd") {
    ad::Tape t;
    Binding b(t, p, false, false);
    ad::NodeRef s = t.constant(ad::Tensor::row(s2.samples));
    auto g = generate_node(t, b, s, draw_noise(p.config, noise_seed), p.config);
    ad::NodeRef rec = estimate_node(t, b, g.at(10), p.config);
    Signal out;
    out.fps = p.config.fps;
    out.samples = t.value(rec).data;
    return out;
  }
  fail(ErrorCode::invalid_argument, "unknown strategy: " + strategy);
}

void save_checkpoint(const ModelParams& p, const std::string& path,
                     const nlohmann::json& extra_meta,
                     const ParamSet* opt_state) {
  nlohmann::json manifest;
  manifest["format"] = "pulsekit-checkpoint-v1";
  manifest["config"] = model_config_json(p.config);
  manifest["t_trained"] = p.t_trained;
  manifest["g_trained"] = p.g_trained;
  manifest["strategy"] = p.strategy;
  manifest["meta"] = extra_meta;
  nlohmann::json shapes = nlohmann::json::array();
  auto describe = [&](const ParamSet& set) {
    for (const auto& [name, t] : set.items)
      shapes.push_back({{"name", name},
                        {"rows", t.shape.rows},
                        {"cols", t.shape.cols}});
  };
  describe(p.enc);
  describe(p.est);
  describe(p.gen);
  if (opt_state) describe(*opt_state);
  manifest["params"] = shapes;

  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::io, "cannot write " + path);
  out << manifest.dump() << "\n";
  auto dump = [&](const ParamSet& set) {
    for (const auto& [name, t] : set.items)
      out.write(reinterpret_cast<const char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  };
  dump(p.enc);
  dump(p.est);
  dump(p.gen);
  if (opt_state) dump(*opt_state);
  require(out.good(), ErrorCode::io, "write failed: " + path);
}

ModelParams load_checkpoint(const std::string& path, nlohmann::json* meta_out,
                            ParamSet* opt_state_out) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::io, "cannot open " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::bad_checkpoint,
          path + ": missing manifest");
  nlohmann::json manifest = nlohmann::json::parse(line, nullptr, false);
  require(!manifest.is_discarded() &&
              manifest.value("format", "") == "pulsekit-checkpoint-v1",
          ErrorCode::bad_checkpoint, path + ": not a pulsekit checkpoint");

  ModelParams p;
  p.config = model_config_from_json(manifest.at("config"));
  p.t_trained = manifest.at("t_trained").get<bool>();
  p.g_trained = manifest.at("g_trained").get<bool>();
  p.strategy = manifest.at("strategy").get<std::string>();
  if (meta_out) *meta_out = manifest.at("meta");

  for (const auto& e : manifest.at("params")) {
    std::string name = e.at("name").get<std::string>();
    int rows = e.at("rows").get<int>(), cols = e.at("cols").get<int>();
    ad::Tensor t = ad::Tensor::zeros({rows, cols});
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    require(in.good(), ErrorCode::bad_checkpoint, path + ": truncated tensor data");
    if (name.starts_with("enc.")) {
      p.enc.add(name, std::move(t));
    } else if (name.starts_with("est.")) {
      p.est.add(name, std::move(t));
    } else if (name.starts_with("gen.")) {
      p.gen.add(name, std::move(t));
    } else if (name.starts_with("opt.")) {
      if (opt_state_out) opt_state_out->add(name, std::move(t));
    } else {
      fail(ErrorCode::bad_checkpoint, path + ": unknown tensor " + name);
    }
  }
  return p;
}

}  // namespace pulsekit
