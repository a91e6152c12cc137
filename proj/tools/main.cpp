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

// Command-line front end. Everything runs through the public C API; flags
// are folded into a JSON config, echoed on the first line of output so any
// run is reproducible from its own log.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pulsekit.h"

namespace {

// Exit codes: 0 success, 2 usage/input error, 3 numerical failure.
int exit_code(pk_status s) {
  if (s == PK_OK) return 0;
  if (s == PK_ERR_NUMERIC) return 3;
  return 2;
}

int finish(pk_status s) {
  if (s != PK_OK)
    std::fprintf(stderr, "error: %s (%s)\n", pk_last_error(), pk_status_name(s));
  return exit_code(s);
}

// Collects only flags the user actually passed, so library defaults stay in
// one place (pk_resolve_config).
class ConfigBuilder {
 public:
  explicit ConfigBuilder(CLI::App* app) : app_(app) {}

  void flag_double(const std::string& name, const std::string& desc) {
    auto v = std::make_shared<double>();
    app_->add_option(
        "--" + name, [this, name, v](const CLI::results_t& r) {
          if (!CLI::detail::lexical_cast(r[0], *v)) return false;
          set(name, std::to_string(*v));
          return true;
        },
        desc);
  }

  void flag_int(const std::string& name, const std::string& desc) {
    auto v = std::make_shared<long long>();
    app_->add_option(
        "--" + name, [this, name, v](const CLI::results_t& r) {
          if (!CLI::detail::lexical_cast(r[0], *v)) return false;
          set(name, std::to_string(*v));
          return true;
        },
        desc);
  }

  void flag_uint(const std::string& name, const std::string& desc) {
    auto v = std::make_shared<unsigned long long>();
    app_->add_option(
        "--" + name, [this, name, v](const CLI::results_t& r) {
          if (!CLI::detail::lexical_cast(r[0], *v)) return false;
          set(name, std::to_string(*v));
          return true;
        },
        desc);
  }

  void flag_bool(const std::string& name, const std::string& desc) {
    app_->add_option(
        "--" + name, [this, name](const CLI::results_t& r) {
          bool b = false;
          if (!CLI::detail::lexical_cast(r[0], b)) return false;
          set(name, b ? "true" : "false");
          return true;
        },
        desc + " (true/false)");
  }

  void flag_string(const std::string& name, const std::string& desc) {
    app_->add_option(
        "--" + name, [this, name](const CLI::results_t& r) {
          set(name, "\"" + r[0] + "\"");
          return true;
        },
        desc);
  }

  // Comma-separated list of numbers -> JSON array.
  void flag_list(const std::string& name, const std::string& desc) {
    app_->add_option(
        "--" + name, [this, name](const CLI::results_t& r) {
          std::string arr = "[";
          std::string item;
          for (char c : r[0]) {
            if (c == ',') {
              arr += item + ",";
              item.clear();
            } else {
              item += c;
            }
          }
          arr += item + "]";
          set(name, arr);
          return true;
        },
        desc + " (comma separated)");
  }

  // "inf" or a number.
  void flag_snr(const std::string& name, const std::string& desc) {
    app_->add_option(
        "--" + name, [this, name](const CLI::results_t& r) {
          if (r[0] == "inf") {
            set(name, "\"inf\"");
          } else {
            double v = 0;
            if (!CLI::detail::lexical_cast(r[0], v)) return false;
            set(name, std::to_string(v));
          }
          return true;
        },
        desc);
  }

  std::string json() const {
    std::string out = "{";
    for (size_t i = 0; i < entries_.size(); ++i) {
      if (i) out += ",";
      out += entries_[i];
    }
    out += "}";
    return out;
  }

 private:
  void set(const std::string& name, const std::string& json_value) {
    entries_.push_back("\"" + name + "\":" + json_value);
  }

  CLI::App* app_;
  std::vector<std::string> entries_;
};

void add_corpus_flags(ConfigBuilder& b) {
  b.flag_int("n-records", "number of records");
  b.flag_int("fps", "sample rate");
  b.flag_double("hr-lo", "lower HR bound (bpm)");
  b.flag_double("hr-hi", "upper HR bound (bpm)");
  b.flag_list("harmonic-amps", "fundamental + 2 overtone amplitudes");
  b.flag_snr("noise-snr-db", "observation SNR in dB, or inf");
  b.flag_double("drift-amp", "baseline drift amplitude");
  b.flag_double("drift-period-s", "baseline drift period (s, > 5)");
  b.flag_double("duration-s", "record duration (s)");
  b.flag_uint("seed", "corpus seed");
}

void add_train_flags(ConfigBuilder& b) {
  b.flag_double("lr-t", "estimation model learning rate");
  b.flag_double("lr-g", "generator learning rate");
  b.flag_int("epochs", "training epochs");
  b.flag_int("batch-size", "records per optimization step");
  b.flag_uint("seed", "run seed");
  b.flag_double("delta-t", "heartbeat-cycle window (s, >= 1.5)");
  b.flag_string("strategy", "duplication|forward|backward|fwd-bwd");
  b.flag_string("ce-orientation", "as-printed|conventional");
  b.flag_bool("anchoring", "add the experimental anchoring term");
  b.flag_int("checkpoint-every", "epochs between checkpoints");
  b.flag_int("eval-every", "epochs between held-out evaluations");
  b.flag_int("threads", "worker threads (0 = hardware)");
  b.flag_string("resume", "checkpoint to resume from");
  b.flag_int("channels", "latent feature channels");
  b.flag_int("enc-layers", "encoder conv layers");
  b.flag_int("enc-kernel", "encoder kernel width (odd)");
  b.flag_int("est-hidden", "estimator hidden width");
  b.flag_int("gen-hidden", "linear block hidden width");
  b.flag_int("noise-dim", "generator noise width");
  b.flag_int("dec-layers", "decoder conv layers");
  b.flag_int("dec-kernel", "decoder kernel width (odd)");
  b.flag_list("gen-durations", "generator target durations (s)");
  b.flag_bool("activations", "enable ReLU activations");
}

// Echoes the resolved config as the first line of output.
int echo_config(const char* command, const std::string& user_json,
                std::string* resolved_out) {
  char* resolved = nullptr;
  pk_status s = pk_resolve_config(command, user_json.c_str(), &resolved);
  if (s != PK_OK) return finish(s);
  std::printf("%s\n", resolved);
  std::fflush(stdout);
  *resolved_out = resolved;
  pk_string_free(resolved);
  return -1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pulsekit: ultra-short-window heart-rate estimation toolkit"};
  app.require_subcommand(1);

  // corpus
  auto* corpus = app.add_subcommand("corpus", "generate a synthetic corpus");
  ConfigBuilder corpus_cfg(corpus);
  add_corpus_flags(corpus_cfg);
  std::string corpus_out;
  corpus->add_option("--out", corpus_out, "output directory")->required();

  // leakage-demo
  auto* demo = app.add_subcommand(
      "leakage-demo", "show the 2 s vs 10 s PSD resolution effect");
  ConfigBuilder demo_cfg(demo);
  demo_cfg.flag_int("fps", "sample rate");
  demo_cfg.flag_double("hr", "true heart rate (bpm)");
  demo_cfg.flag_uint("seed", "phase seed");
  std::string demo_out;
  demo->add_option("--out", demo_out, "output directory")->required();

  // train
  auto* train = app.add_subcommand("train", "alternating model training");
  ConfigBuilder train_cfg(train);
  add_train_flags(train_cfg);
  std::string train_corpus, train_out;
  train->add_option("--corpus", train_corpus, "corpus directory")->required();
  train->add_option("--out", train_out, "output directory")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "held-out evaluation of a checkpoint");
  ConfigBuilder eval_cfg(eval);
  add_train_flags(eval_cfg);
  std::string eval_corpus, eval_ckpt, eval_out;
  eval->add_option("--corpus", eval_corpus, "corpus directory")->required();
  eval->add_option("--checkpoint", eval_ckpt, "trained checkpoint")->required();
  eval->add_option("--out", eval_out, "output CSV")->required();

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "extend a 2 s signal to 10 s");
  ConfigBuilder rec_cfg(rec);
  rec_cfg.flag_string("strategy", "duplication|forward|backward|fwd-bwd");
  rec_cfg.flag_uint("seed", "generator noise seed");
  std::string rec_in, rec_ckpt, rec_out;
  rec->add_option("--input", rec_in, "2 s signal CSV")->required();
  rec->add_option("--checkpoint", rec_ckpt,
                  "trained checkpoint (not needed for duplication)");
  rec->add_option("--out", rec_out, "output CSV")->required();

  // ablate
  auto* ablate = app.add_subcommand("ablate", "run an ablation grid");
  ConfigBuilder ablate_cfg(ablate);
  add_train_flags(ablate_cfg);
  std::string ablate_which, ablate_corpus, ablate_out;
  ablate
      ->add_option("--which", ablate_which,
                   "loss|strategy|blocks|hr-calc|sudden")
      ->required();
  ablate->add_option("--corpus", ablate_corpus, "corpus directory")->required();
  ablate->add_option("--out", ablate_out, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string resolved;
  if (corpus->parsed()) {
    int rc = echo_config("corpus", corpus_cfg.json(), &resolved);
    if (rc >= 0) return rc;
    return finish(pk_corpus_build(resolved.c_str(), corpus_out.c_str()));
  }
  if (demo->parsed()) {
    int rc = echo_config("leakage-demo", demo_cfg.json(), &resolved);
    if (rc >= 0) return rc;
    char* summary = nullptr;
    pk_status s = pk_leakage_demo(resolved.c_str(), demo_out.c_str(), &summary);
    if (s == PK_OK && summary) {
      std::printf("%s\n", summary);
      pk_string_free(summary);
    }
    return finish(s);
  }
  if (train->parsed()) {
    int rc = echo_config("train", train_cfg.json(), &resolved);
    if (rc >= 0) return rc;
    return finish(
        pk_train(resolved.c_str(), train_corpus.c_str(), train_out.c_str()));
  }
  if (eval->parsed()) {
    int rc = echo_config("eval", eval_cfg.json(), &resolved);
    if (rc >= 0) return rc;
    char* metrics = nullptr;
    pk_status s = pk_eval(resolved.c_str(), eval_corpus.c_str(),
                          eval_ckpt.c_str(), eval_out.c_str(), &metrics);
    if (s == PK_OK && metrics) {
      std::printf("%s\n", metrics);
      pk_string_free(metrics);
    }
    return finish(s);
  }
  if (rec->parsed()) {
    int rc = echo_config("reconstruct", rec_cfg.json(), &resolved);
    if (rc >= 0) return rc;
    return finish(pk_reconstruct(resolved.c_str(), rec_in.c_str(),
                                 rec_ckpt.empty() ? nullptr : rec_ckpt.c_str(),
                                 rec_out.c_str()));
  }
  if (ablate->parsed()) {
    int rc = echo_config("ablate", ablate_cfg.json(), &resolved);
    if (rc >= 0) return rc;
    char* rows = nullptr;
    pk_status s = pk_ablate(ablate_which.c_str(), resolved.c_str(),
                            ablate_corpus.c_str(), ablate_out.c_str(), &rows);
    if (s == PK_OK && rows) {
      std::printf("%s\n", rows);
      pk_string_free(rows);
    }
    return finish(s);
  }
  return 2;
}
