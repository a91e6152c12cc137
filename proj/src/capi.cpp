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

#include "pulsekit.h"

#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <string>

#include "experiments.hpp"
#include "json.hpp"
#include "rng.hpp"
#include "train.hpp"

using nlohmann::json;

struct pk_signal_s {
  pulsekit::Signal sig;
};
struct pk_dist_s {
  pulsekit::BandDistribution dist;
};
struct pk_corr_s {
  pulsekit::RunningCorrelation corr;
};
struct pk_model_s {
  pulsekit::ModelParams params;
  json meta;
};

namespace {

thread_local std::string g_last_error;

pk_status to_status(pulsekit::ErrorCode code) {
  using pulsekit::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return PK_ERR_INVALID_ARGUMENT;
    case ErrorCode::signal_too_short: return PK_ERR_SIGNAL_TOO_SHORT;
    case ErrorCode::zero_norm: return PK_ERR_ZERO_NORM;
    case ErrorCode::insufficient_beats: return PK_ERR_INSUFFICIENT_BEATS;
    case ErrorCode::fps_mismatch: return PK_ERR_FPS_MISMATCH;
    case ErrorCode::length_mismatch: return PK_ERR_LENGTH_MISMATCH;
    case ErrorCode::io: return PK_ERR_IO;
    case ErrorCode::bad_checkpoint: return PK_ERR_BAD_CHECKPOINT;
    case ErrorCode::numeric: return PK_ERR_NUMERIC;
    case ErrorCode::out_of_band: return PK_ERR_OUT_OF_BAND;
  }
  return PK_ERR_UNKNOWN;
}

template <typename Fn>
pk_status guard(Fn&& fn) {
  try {
    fn();
    return PK_OK;
  } catch (const pulsekit::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PK_ERR_UNKNOWN;
  }
}

pk_status invalid(const char* msg) {
  g_last_error = msg;
  return PK_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// ---- config resolution -------------------------------------------------

json parse_user_config(const char* config_json) {
  if (config_json == nullptr || std::string(config_json).empty())
    return json::object();
  json j = json::parse(config_json, nullptr, false);
  pulsekit::require(!j.is_discarded() && j.is_object(),
                    pulsekit::ErrorCode::invalid_argument,
                    "config must be a JSON object");
  return j;
}

json corpus_defaults() {
  pulsekit::CorpusSpec s;
  json j;
  j["n-records"] = s.n_records;
  j["fps"] = s.fps;
  j["hr-lo"] = s.hr_lo_bpm;
  j["hr-hi"] = s.hr_hi_bpm;
  j["harmonic-amps"] = s.harmonic_amps;
  j["noise-snr-db"] = s.noise_snr_db;
  j["drift-amp"] = s.drift_amp;
  j["drift-period-s"] = s.drift_period_s;
  j["duration-s"] = s.duration_s;
  j["seed"] = s.seed;
  return j;
}

json leakage_defaults() {
  json j;
  j["fps"] = 30;
  j["hr"] = 72.0;
  j["seed"] = 1;
  return j;
}

json train_defaults() {
  pulsekit::TrainConfig c;
  json j;
  j["lr-t"] = c.lr_t;
  j["lr-g"] = c.lr_g;
  j["epochs"] = c.epochs;
  j["batch-size"] = c.batch_size;
  j["seed"] = c.seed;
  j["delta-t"] = c.delta_t_s;
  j["strategy"] = pulsekit::to_string(c.strategy);
  j["ce-orientation"] = pulsekit::to_string(c.ce_orientation);
  j["anchoring"] = c.anchoring;
  j["checkpoint-every"] = c.checkpoint_every;
  j["eval-every"] = c.eval_every;
  j["threads"] = c.threads;
  j["resume"] = "";
  j["channels"] = c.model.channels;
  j["enc-layers"] = c.model.enc_layers;
  j["enc-kernel"] = c.model.enc_kernel;
  j["est-hidden"] = c.model.est_hidden;
  j["gen-hidden"] = c.model.gen_hidden;
  j["noise-dim"] = c.model.noise_dim;
  j["dec-layers"] = c.model.dec_layers;
  j["dec-kernel"] = c.model.dec_kernel;
  j["gen-durations"] = c.model.gen_durations;
  j["activations"] = c.model.activations;
  return j;
}

json reconstruct_defaults() {
  json j;
  j["strategy"] = "fwd-bwd";
  j["seed"] = 1;
  return j;
}

json resolve_for(const std::string& command, const json& user) {
  json defaults;
  if (command == "corpus") {
    defaults = corpus_defaults();
  } else if (command == "leakage-demo") {
    defaults = leakage_defaults();
  } else if (command == "train" || command == "eval" || command == "ablate") {
    defaults = train_defaults();
  } else if (command == "reconstruct") {
    defaults = reconstruct_defaults();
  } else {
    pulsekit::fail(pulsekit::ErrorCode::invalid_argument,
                   "unknown command: " + command);
  }
  for (const auto& [key, value] : user.items()) {
    pulsekit::require(defaults.contains(key),
                      pulsekit::ErrorCode::invalid_argument,
                      "unknown config key for " + command + ": " + key);
    defaults[key] = value;
  }
  return defaults;
}

double snr_from_json(const json& v) {
  if (v.is_string()) {
    pulsekit::require(v.get<std::string>() == "inf",
                      pulsekit::ErrorCode::invalid_argument,
                      "noise-snr-db must be a number or \"inf\"");
    return std::numeric_limits<double>::infinity();
  }
  return v.get<double>();
}

pulsekit::CorpusSpec corpus_spec_from(const json& cfg) {
  pulsekit::CorpusSpec s;
  s.n_records = cfg.at("n-records").get<int>();
  s.fps = cfg.at("fps").get<int>();
  s.hr_lo_bpm = cfg.at("hr-lo").get<double>();
  s.hr_hi_bpm = cfg.at("hr-hi").get<double>();
  auto amps = cfg.at("harmonic-amps");
  pulsekit::require(amps.is_array() && amps.size() == 3,
                    pulsekit::ErrorCode::invalid_argument,
                    "harmonic-amps must hold 3 values");
  for (size_t i = 0; i < 3; ++i) s.harmonic_amps[i] = amps[i].get<double>();
  s.noise_snr_db = snr_from_json(cfg.at("noise-snr-db"));
  s.drift_amp = cfg.at("drift-amp").get<double>();
  s.drift_period_s = cfg.at("drift-period-s").get<double>();
  s.duration_s = cfg.at("duration-s").get<double>();
  s.seed = cfg.at("seed").get<uint64_t>();
  return s;
}

pulsekit::TrainConfig train_config_from(const json& cfg, int fps) {
  pulsekit::TrainConfig c;
  c.lr_t = cfg.at("lr-t").get<double>();
  c.lr_g = cfg.at("lr-g").get<double>();
  c.epochs = cfg.at("epochs").get<int>();
  c.batch_size = cfg.at("batch-size").get<int>();
  c.seed = cfg.at("seed").get<uint64_t>();
  c.delta_t_s = cfg.at("delta-t").get<double>();
  c.strategy = pulsekit::parse_strategy(cfg.at("strategy").get<std::string>());
  c.ce_orientation =
      pulsekit::parse_ce_orientation(cfg.at("ce-orientation").get<std::string>());
  c.anchoring = cfg.at("anchoring").get<bool>();
  c.checkpoint_every = cfg.at("checkpoint-every").get<int>();
  c.eval_every = cfg.at("eval-every").get<int>();
  c.threads = cfg.at("threads").get<int>();
  c.model.fps = fps;
  c.model.channels = cfg.at("channels").get<int>();
  c.model.enc_layers = cfg.at("enc-layers").get<int>();
  c.model.enc_kernel = cfg.at("enc-kernel").get<int>();
  c.model.est_hidden = cfg.at("est-hidden").get<int>();
  c.model.gen_hidden = cfg.at("gen-hidden").get<int>();
  c.model.noise_dim = cfg.at("noise-dim").get<int>();
  c.model.dec_layers = cfg.at("dec-layers").get<int>();
  c.model.dec_kernel = cfg.at("dec-kernel").get<int>();
  c.model.gen_durations = cfg.at("gen-durations").get<std::vector<int>>();
  c.model.activations = cfg.at("activations").get<bool>();
  pulsekit::validate(c);
  return c;
}

}  // namespace

extern "C" {

const char* pk_status_name(pk_status status) {
  switch (status) {
    case PK_OK: return "ok";
    case PK_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PK_ERR_SIGNAL_TOO_SHORT: return "signal too short";
    case PK_ERR_ZERO_NORM: return "zero-norm signal";
    case PK_ERR_INSUFFICIENT_BEATS: return "insufficient beats";
    case PK_ERR_FPS_MISMATCH: return "fps mismatch";
    case PK_ERR_LENGTH_MISMATCH: return "length mismatch";
    case PK_ERR_IO: return "i/o error";
    case PK_ERR_BAD_CHECKPOINT: return "bad checkpoint";
    case PK_ERR_NUMERIC: return "numerical failure";
    case PK_ERR_OUT_OF_BAND: return "heart rate out of band";
    case PK_ERR_UNKNOWN: return "unknown error";
  }
  return "unknown error";
}

const char* pk_last_error(void) { return g_last_error.c_str(); }

void pk_string_free(char* s) { std::free(s); }

pk_status pk_signal_create(const double* samples, size_t len, int fps,
                           pk_signal** out) {
  if (!samples || !out) return invalid("null argument");
  return guard([&] {
    auto sig = std::make_unique<pk_signal_s>();
    sig->sig.fps = fps;
    sig->sig.samples.assign(samples, samples + len);
    pulsekit::validate(sig->sig);
    *out = sig.release();
  });
}

pk_status pk_signal_from_csv(const char* path, pk_signal** out) {
  if (!path || !out) return invalid("null argument");
  return guard([&] {
    auto sig = std::make_unique<pk_signal_s>();
    sig->sig = pulsekit::read_signal_csv(path);
    *out = sig.release();
  });
}

pk_status pk_signal_to_csv(const pk_signal* sig, const char* path) {
  if (!sig || !path) return invalid("null argument");
  return guard([&] { pulsekit::write_signal_csv(sig->sig, path); });
}

void pk_signal_free(pk_signal* sig) { delete sig; }

size_t pk_signal_len(const pk_signal* sig) {
  return sig ? sig->sig.samples.size() : 0;
}

int pk_signal_fps(const pk_signal* sig) { return sig ? sig->sig.fps : 0; }

pk_status pk_signal_copy_samples(const pk_signal* sig, double* buf,
                                 size_t buf_len) {
  if (!sig || !buf) return invalid("null argument");
  if (buf_len < sig->sig.samples.size())
    return invalid("buffer too small");
  std::memcpy(buf, sig->sig.samples.data(),
              sig->sig.samples.size() * sizeof(double));
  return PK_OK;
}

pk_status pk_psd_band(const pk_signal* sig, pk_dist** out) {
  if (!sig || !out) return invalid("null argument");
  return guard([&] {
    auto d = std::make_unique<pk_dist_s>();
    d->dist = pulsekit::psd_band(sig->sig);
    *out = d.release();
  });
}

void pk_dist_free(pk_dist* dist) { delete dist; }

size_t pk_dist_bins(const pk_dist* dist) {
  return dist ? dist->dist.probs.size() : 0;
}

pk_status pk_dist_copy(const pk_dist* dist, double* freqs_hz, double* probs,
                       size_t cap) {
  if (!dist || !freqs_hz || !probs) return invalid("null argument");
  if (cap < dist->dist.probs.size()) return invalid("buffer too small");
  std::memcpy(freqs_hz, dist->dist.bin_freqs_hz.data(),
              dist->dist.bin_freqs_hz.size() * sizeof(double));
  std::memcpy(probs, dist->dist.probs.data(),
              dist->dist.probs.size() * sizeof(double));
  return PK_OK;
}

pk_status pk_dist_entropy(const pk_dist* dist, double* out) {
  if (!dist || !out) return invalid("null argument");
  return guard([&] { *out = pulsekit::entropy(dist->dist); });
}

pk_status pk_dist_to_json(const pk_dist* dist, char** out) {
  if (!dist || !out) return invalid("null argument");
  return guard(
      [&] { *out = dup_string(pulsekit::band_distribution_json(dist->dist)); });
}

pk_status pk_hr_from_psd(const pk_dist* dist, double* bpm, double* confidence) {
  if (!dist || !bpm) return invalid("null argument");
  return guard([&] {
    pulsekit::HrEstimate e = pulsekit::hr_from_psd(dist->dist);
    *bpm = e.bpm;
    if (confidence) *confidence = e.confidence;
  });
}

pk_status pk_hr_from_ibi(const pk_signal* sig, double* bpm) {
  if (!sig || !bpm) return invalid("null argument");
  return guard([&] { *bpm = pulsekit::hr_from_ibi(sig->sig).bpm; });
}

pk_status pk_metrics(const double* pred, const double* gt, size_t len,
                     double* mae, double* rmse, double* pearson_r) {
  if (!pred || !gt || !mae || !rmse || !pearson_r)
    return invalid("null argument");
  return guard([&] {
    pulsekit::MetricsReport m =
        pulsekit::metrics(std::vector<double>(pred, pred + len),
                          std::vector<double>(gt, gt + len));
    *mae = m.mae;
    *rmse = m.rmse;
    *pearson_r = m.pearson_r;
  });
}

pk_status pk_nc(const pk_signal* a, const pk_signal* b, double* out) {
  if (!a || !b || !out) return invalid("null argument");
  return guard([&] { *out = pulsekit::nc(a->sig, b->sig); });
}

pk_status pk_ncc(const pk_signal* a, const pk_signal* b, pk_corr** out) {
  if (!a || !b || !out) return invalid("null argument");
  return guard([&] {
    auto c = std::make_unique<pk_corr_s>();
    c->corr = pulsekit::ncc(a->sig, b->sig);
    *out = c.release();
  });
}

pk_status pk_swm_ncc(const pk_signal* shorter, const pk_signal* longer,
                     pk_corr** out) {
  if (!shorter || !longer || !out) return invalid("null argument");
  return guard([&] {
    auto c = std::make_unique<pk_corr_s>();
    c->corr = pulsekit::swm_ncc(shorter->sig, longer->sig);
    *out = c.release();
  });
}

void pk_corr_free(pk_corr* corr) { delete corr; }

size_t pk_corr_len(const pk_corr* corr) {
  return corr ? corr->corr.values.size() : 0;
}

int pk_corr_origin(const pk_corr* corr) {
  return corr ? corr->corr.index_origin : 0;
}

pk_status pk_corr_values(const pk_corr* corr, double* buf, size_t cap) {
  if (!corr || !buf) return invalid("null argument");
  if (cap < corr->corr.values.size()) return invalid("buffer too small");
  std::memcpy(buf, corr->corr.values.data(),
              corr->corr.values.size() * sizeof(double));
  return PK_OK;
}

pk_status pk_corr_to_json(const pk_corr* corr, char** out) {
  if (!corr || !out) return invalid("null argument");
  return guard([&] {
    *out = dup_string(pulsekit::running_correlation_json(corr->corr));
  });
}

pk_status pk_fp(const pk_corr* corr, int fps, double delta_t_s, double* out) {
  if (!corr || !out) return invalid("null argument");
  return guard([&] { *out = pulsekit::fp(corr->corr, fps, delta_t_s); });
}

pk_status pk_loss_mps(const pk_signal* pred_short, const pk_signal* gt_long,
                      double delta_t_s, double* out) {
  if (!pred_short || !gt_long || !out) return invalid("null argument");
  return guard([&] {
    *out = pulsekit::loss_mps(pred_short->sig, gt_long->sig, delta_t_s).value;
  });
}

pk_status pk_loss_ncc(const pk_signal* pred, const pk_signal* gt, double* out) {
  if (!pred || !gt || !out) return invalid("null argument");
  return guard([&] { *out = pulsekit::loss_ncc(pred->sig, gt->sig).value; });
}

pk_status pk_model_load(const char* path, pk_model** out) {
  if (!path || !out) return invalid("null argument");
  return guard([&] {
    auto m = std::make_unique<pk_model_s>();
    m->params = pulsekit::load_checkpoint(path, &m->meta);
    *out = m.release();
  });
}

void pk_model_free(pk_model* model) { delete model; }

int pk_model_trained(const pk_model* model) {
  return model && model->params.t_trained && model->params.g_trained ? 1 : 0;
}

pk_status pk_model_infer(const pk_model* model, const pk_signal* obs2,
                         uint64_t noise_seed, double* bpm,
                         pk_signal** reconstructed) {
  if (!model || !obs2 || !bpm) return invalid("null argument");
  return guard([&] {
    pulsekit::InferResult r =
        pulsekit::infer(obs2->sig, model->params, noise_seed);
    *bpm = r.hr.bpm;
    if (reconstructed) {
      auto s = std::make_unique<pk_signal_s>();
      s->sig = std::move(r.reconstructed);
      *reconstructed = s.release();
    }
  });
}

pk_status pk_model_reconstruct(const pk_model* model, const pk_signal* s2,
                               const char* strategy, uint64_t noise_seed,
                               pk_signal** out) {
  if (!model || !s2 || !strategy || !out) return invalid("null argument");
  return guard([&] {
    auto s = std::make_unique<pk_signal_s>();
    s->sig = pulsekit::reconstruct(s2->sig, strategy, model->params, noise_seed);
    *out = s.release();
  });
}

pk_status pk_resolve_config(const char* command, const char* config_json,
                            char** resolved_json) {
  if (!command || !resolved_json) return invalid("null argument");
  return guard([&] {
    json resolved = resolve_for(command, parse_user_config(config_json));
    *resolved_json = dup_string(resolved.dump());
  });
}

pk_status pk_corpus_build(const char* config_json, const char* out_dir) {
  if (!out_dir) return invalid("null argument");
  return guard([&] {
    json cfg = resolve_for("corpus", parse_user_config(config_json));
    pulsekit::Corpus corpus = pulsekit::build_corpus(corpus_spec_from(cfg));
    pulsekit::save_corpus(corpus, out_dir);
  });
}

pk_status pk_leakage_demo(const char* config_json, const char* out_dir,
                          char** summary_json) {
  if (!out_dir) return invalid("null argument");
  return guard([&] {
    json cfg = resolve_for("leakage-demo", parse_user_config(config_json));
    json summary = pulsekit::leakage_demo(
        cfg.at("fps").get<int>(), cfg.at("hr").get<double>(),
        cfg.at("seed").get<uint64_t>(), out_dir);
    if (summary_json) *summary_json = dup_string(summary.dump());
  });
}

pk_status pk_train(const char* config_json, const char* corpus_dir,
                   const char* out_dir) {
  if (!corpus_dir || !out_dir) return invalid("null argument");
  return guard([&] {
    json cfg = resolve_for("train", parse_user_config(config_json));
    pulsekit::Corpus corpus = pulsekit::load_corpus(corpus_dir);
    pulsekit::TrainConfig tc = train_config_from(cfg, corpus.spec.fps);
    pulsekit::RunLog log;
    pulsekit::alternate(corpus, tc, &log, out_dir,
                        cfg.at("resume").get<std::string>());
    log.save(std::string(out_dir) + "/train_log.jsonl");
  });
}

pk_status pk_eval(const char* config_json, const char* corpus_dir,
                  const char* checkpoint, const char* out_csv,
                  char** metrics_json) {
  if (!corpus_dir || !checkpoint || !out_csv) return invalid("null argument");
  return guard([&] {
    json cfg = resolve_for("eval", parse_user_config(config_json));
    pulsekit::Corpus corpus = pulsekit::load_corpus(corpus_dir);
    pulsekit::TrainConfig tc = train_config_from(cfg, corpus.spec.fps);
    pulsekit::ModelParams params = pulsekit::load_checkpoint(checkpoint);
    pulsekit::require(params.t_trained, pulsekit::ErrorCode::bad_checkpoint,
                      "checkpoint manifest marks the model untrained");
    tc.strategy = pulsekit::parse_strategy(params.strategy);
    if (tc.strategy != pulsekit::Strategy::duplication)
      pulsekit::require(params.g_trained, pulsekit::ErrorCode::bad_checkpoint,
                        "checkpoint manifest marks the generator untrained");
    pulsekit::EvalReport rep = pulsekit::evaluate(corpus, params, tc);
    pulsekit::write_eval_csv(rep, out_csv);
    if (metrics_json) *metrics_json = dup_string(rep.metrics_json().dump());
  });
}

pk_status pk_reconstruct(const char* config_json, const char* input_csv,
                         const char* checkpoint, const char* out_csv) {
  if (!input_csv || !out_csv) return invalid("null argument");
  return guard([&] {
    json cfg = resolve_for("reconstruct", parse_user_config(config_json));
    std::string strategy = cfg.at("strategy").get<std::string>();
    uint64_t seed = cfg.at("seed").get<uint64_t>();
    pulsekit::Signal s2 = pulsekit::read_signal_csv(input_csv);
    pulsekit::Signal out;
    if (strategy == "duplication") {
      pulsekit::ModelParams unused;
      out = pulsekit::reconstruct(s2, strategy, unused, seed);
    } else {
      pulsekit::require(checkpoint != nullptr,
                        pulsekit::ErrorCode::invalid_argument,
                        "strategy " + strategy + " needs a checkpoint");
      pulsekit::ModelParams params = pulsekit::load_checkpoint(checkpoint);
      pulsekit::require(params.strategy == strategy,
                        pulsekit::ErrorCode::invalid_argument,
                        "checkpoint was trained for strategy " +
                            params.strategy + ", not " + strategy);
      out = pulsekit::reconstruct(s2, strategy, params, seed);
    }
    pulsekit::write_signal_csv(out, out_csv);
  });
}

pk_status pk_ablate(const char* which, const char* config_json,
                    const char* corpus_dir, const char* out_csv,
                    char** rows_json) {
  if (!which || !corpus_dir || !out_csv) return invalid("null argument");
  return guard([&] {
    json cfg = resolve_for("ablate", parse_user_config(config_json));
    pulsekit::Corpus corpus = pulsekit::load_corpus(corpus_dir);
    pulsekit::TrainConfig tc = train_config_from(cfg, corpus.spec.fps);
    json rows = pulsekit::ablate(which, corpus, tc, out_csv);
    if (rows_json) *rows_json = dup_string(rows.dump());
  });
}

}  // extern "C"
