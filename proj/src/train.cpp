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

#include "train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include "rng.hpp"

namespace pulsekit {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

Strategy parse_strategy(const std::string& s) {
  if (s == "duplication") return Strategy::duplication;
  if (s == "forward") return Strategy::forward;
  if (s == "backward") return Strategy::backward;
  if (s == "fwd-bwd") return Strategy::fwd_bwd;
  fail(ErrorCode::invalid_argument, "unknown strategy: " + s);
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::duplication: return "duplication";
    case Strategy::forward: return "forward";
    case Strategy::backward: return "backward";
    case Strategy::fwd_bwd: return "fwd-bwd";
  }
  fail(ErrorCode::invalid_argument, "bad strategy enum");
}

size_t crop_offset(Strategy s, int fps) {
  switch (s) {
    case Strategy::forward: return 0;                              // start
    case Strategy::backward: return static_cast<size_t>(8 * fps);  // end
    case Strategy::fwd_bwd:
    case Strategy::duplication: return static_cast<size_t>(4 * fps);  // center
  }
  fail(ErrorCode::invalid_argument, "bad strategy enum");
}

void validate(const TrainConfig& c) {
  require(c.lr_t >= 0.0 && c.lr_g >= 0.0, ErrorCode::invalid_argument,
          "learning rates must not be negative");
  require(c.epochs >= 1, ErrorCode::invalid_argument, "epochs must be >= 1");
  require(c.batch_size >= 1, ErrorCode::invalid_argument,
          "batch size must be >= 1");
  require(c.delta_t_s >= 1.5, ErrorCode::invalid_argument,
          "delta_t must be >= 1.5 s");
  require(c.checkpoint_every >= 1 && c.eval_every >= 1 && c.threads >= 0,
          ErrorCode::invalid_argument, "bad cadence/threads settings");
  require(c.t_loss.ce || c.t_loss.wce || c.t_loss.ncc || c.t_loss.mps,
          ErrorCode::invalid_argument, "T loss combo is empty");
  validate(c.model);
}

nlohmann::json train_config_json(const TrainConfig& c) {
  nlohmann::json j;
  j["lr_t"] = c.lr_t;
  j["lr_g"] = c.lr_g;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["delta_t_s"] = c.delta_t_s;
  j["strategy"] = to_string(c.strategy);
  j["ce_orientation"] = to_string(c.ce_orientation);
  j["anchoring"] = c.anchoring;
  j["checkpoint_every"] = c.checkpoint_every;
  j["eval_every"] = c.eval_every;
  j["threads"] = c.threads;
  j["t_loss"] = {{"ce", c.t_loss.ce},
                 {"wce", c.t_loss.wce},
                 {"ncc", c.t_loss.ncc},
                 {"mps", c.t_loss.mps}};
  j["model"] = model_config_json(c.model);
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.lr_t = j.at("lr_t").get<double>();
  c.lr_g = j.at("lr_g").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.seed = j.at("seed").get<uint64_t>();
  c.delta_t_s = j.at("delta_t_s").get<double>();
  c.strategy = parse_strategy(j.at("strategy").get<std::string>());
  c.ce_orientation = parse_ce_orientation(j.at("ce_orientation").get<std::string>());
  c.anchoring = j.at("anchoring").get<bool>();
  c.checkpoint_every = j.at("checkpoint_every").get<int>();
  c.eval_every = j.at("eval_every").get<int>();
  c.threads = j.at("threads").get<int>();
  const auto& tl = j.at("t_loss");
  c.t_loss.ce = tl.at("ce").get<bool>();
  c.t_loss.wce = tl.at("wce").get<bool>();
  c.t_loss.ncc = tl.at("ncc").get<bool>();
  c.t_loss.mps = tl.at("mps").get<bool>();
  c.model = model_config_from_json(j.at("model"));
  validate(c);
  return c;
}

void RunLog::add(const nlohmann::json& j) {
  buffer_ += j.dump();
  buffer_ += '\n';
}

void RunLog::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::io, "cannot write " + path);
  out << buffer_;
  require(out.good(), ErrorCode::io, "write failed: " + path);
}

namespace {

int resolve_threads(int configured) {
  if (configured > 0) return configured;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n) over a fixed shard layout. Results must be
// written to per-index slots; the caller reduces them in index order, so the
// outcome does not depend on the thread count.
void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn) {
  int nt = std::min<int>(threads, static_cast<int>(n));
  if (nt <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(nt);
  std::vector<std::thread> pool;
  for (int w = 0; w < nt; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (size_t i = w; i < n; i += nt) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct TrainView {
  const CorpusRecord* rec = nullptr;
  Signal obs2, gt2;
  BandDistribution gt_dist;
  double weight = 1.0;
};

std::vector<TrainView> make_views(const Corpus& corpus,
                                  const TrainConfig& cfg) {
  std::vector<TrainView> views;
  size_t off = crop_offset(cfg.strategy, corpus.spec.fps);
  size_t len = static_cast<size_t>(2 * corpus.spec.fps);
  for (const auto& r : corpus.records) {
    if (r.is_test) continue;
    TrainView v;
    v.rec = &r;
    v.obs2 = window(r.rec.observed, off, len);
    v.gt2 = window(r.rec.clean, off, len);
    v.gt_dist = psd_band(v.gt2);
    views.push_back(std::move(v));
  }
  require(!views.empty(), ErrorCode::invalid_argument,
          "corpus has no training records");
  // Eq-style entropy weights over the whole training corpus, from ground
  // truth windows only; fixed before any optimization step.
  std::vector<double> ent;
  ent.reserve(views.size());
  for (const auto& v : views) ent.push_back(entropy(v.gt_dist));
  std::vector<double> w = entropy_weights(ent);
  for (size_t i = 0; i < views.size(); ++i) views[i].weight = w[i];
  return views;
}

struct RecordResult {
  std::map<std::string, ad::Tensor> grads;
  std::map<std::string, double> losses;
};

RecordResult t_record_loss(const TrainView& v, const ModelParams& p,
                           const TrainConfig& cfg) {
  RecordResult res;
  ad::Tape t;
  Binding b(t, p, /*train_t=*/true, /*train_g=*/false);
  ad::NodeRef obs = t.constant(ad::Tensor::row(v.obs2.samples));
  ad::NodeRef pred =
      estimate_node(t, b, encode_node(t, b, obs, cfg.model), cfg.model);
  ad::NodeRef gt10 = t.constant(ad::Tensor::row(v.rec->rec.clean.samples));
  ad::NodeRef total;
  auto add_term = [&](const std::string& key, ad::NodeRef n) {
    res.losses[key] = t.scalar_value(n);
    total = total.valid() ? t.add(total, n) : n;
  };
  int fps = cfg.model.fps;
  if (cfg.t_loss.ce)
    add_term("l_ce",
             graph::loss_ce_node(t, pred, v.gt_dist, fps, cfg.ce_orientation));
  if (cfg.t_loss.wce)
    add_term("l_wce", graph::loss_wce_node(t, pred, v.gt_dist, fps, v.weight,
                                           cfg.ce_orientation));
  if (cfg.t_loss.ncc) add_term("l_ncc", graph::loss_ncc_node(t, pred, gt10));
  if (cfg.t_loss.mps)
    add_term("l_mps",
             graph::loss_mps_node(t, pred, gt10, fps, cfg.delta_t_s));
  res.losses["loss"] = t.scalar_value(total);
  t.backward(total);
  res.grads = t.param_grads();
  return res;
}

RecordResult g_record_loss(const TrainView& v, const ModelParams& p,
                           const TrainConfig& cfg, uint64_t noise_seed) {
  RecordResult res;
  Signal s2 = predict_s2(v.obs2, p);  // F and E are frozen here

  ad::Tape t;
  Binding b(t, p, /*train_t=*/false, /*train_g=*/true);
  ad::NodeRef s2c = t.constant(ad::Tensor::row(s2.samples));
  auto gmap =
      generate_node(t, b, s2c, draw_noise(cfg.model, noise_seed), cfg.model);
  std::map<int, ad::NodeRef> sig;
  for (const auto& [dur, g] : gmap) sig[dur] = estimate_node(t, b, g, cfg.model);
  ad::NodeRef gt10 = t.constant(ad::Tensor::row(v.rec->rec.clean.samples));

  const int fps = cfg.model.fps;
  ad::NodeRef total;
  auto add_term = [&](const std::string& key, ad::NodeRef n) {
    res.losses[key] = t.scalar_value(n);
    total = total.valid() ? t.add(total, n) : n;
  };
  for (int dur : cfg.model.gen_durations)
    add_term("gt_" + std::to_string(dur),
             graph::loss_mps_node(t, sig.at(dur), gt10, fps, cfg.delta_t_s));
  for (size_t i = 0; i + 1 < cfg.model.gen_durations.size(); ++i) {
    int a = cfg.model.gen_durations[i], c = cfg.model.gen_durations[i + 1];
    add_term("chain_" + std::to_string(a) + "_" + std::to_string(c),
             graph::loss_mps_node(t, sig.at(a), sig.at(c), fps, cfg.delta_t_s));
  }
  if (cfg.anchoring) {
    // Optional experiment: pin the generated window at the crop position to
    // the observed-window estimate (not part of the default objective).
    int off = static_cast<int>(crop_offset(cfg.strategy, fps));
    ad::NodeRef piece = t.slice(sig.at(10), 0, off, 1, cfg.model.obs_len());
    ad::NodeRef diff = t.sub(piece, s2c);
    add_term("anchor", t.affine(t.sum_reduce(t.mul(diff, diff)),
                                1.0 / cfg.model.obs_len(), 0.0));
  }
  res.losses["total"] = t.scalar_value(total);
  t.backward(total);
  res.grads = t.param_grads();
  return res;
}

// Adam with the paper's constant learning rate; moment constants 0.9/0.999,
// epsilon 1e-8.
struct Adam {
  double lr = 1e-5;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  int64_t t = 0;
  std::map<std::string, std::vector<double>> m, v;

  void step(std::vector<ParamSet*> sets,
            const std::map<std::string, ad::Tensor>& grads) {
    ++t;
    double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (ParamSet* set : sets) {
      for (auto& [name, tensor] : set->items) {
        const ad::Tensor& g = grads.at(name);
        auto& mi = m[name];
        auto& vi = v[name];
        if (mi.empty()) mi.assign(tensor.data.size(), 0.0);
        if (vi.empty()) vi.assign(tensor.data.size(), 0.0);
        for (size_t i = 0; i < tensor.data.size(); ++i) {
          double gi = g.data[i];
          mi[i] = beta1 * mi[i] + (1.0 - beta1) * gi;
          vi[i] = beta2 * vi[i] + (1.0 - beta2) * gi * gi;
          double mhat = mi[i] / c1;
          double vhat = vi[i] / c2;
          tensor.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
      }
    }
  }
};

void accumulate(std::map<std::string, ad::Tensor>* acc,
                const std::map<std::string, ad::Tensor>& grads, double scale) {
  for (const auto& [name, g] : grads) {
    auto it = acc->find(name);
    if (it == acc->end()) {
      ad::Tensor t = ad::Tensor::zeros(g.shape);
      it = acc->emplace(name, std::move(t)).first;
    }
    for (size_t i = 0; i < g.data.size(); ++i)
      it->second.data[i] += scale * g.data[i];
  }
}

std::vector<size_t> epoch_order(size_t n, uint64_t seed, uint64_t phase_tag,
                                int epoch) {
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(seed, phase_tag, static_cast<uint64_t>(epoch)));
  for (size_t i = n; i > 1; --i) {
    size_t j = rng.next_u64() % i;
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

// One optimization epoch over the training split. phase is "T" or "G".
void run_epoch(const std::string& phase, const std::vector<TrainView>& views,
               ModelParams* params, Adam* adam, const TrainConfig& cfg,
               int epoch, int* step_counter, RunLog* log) {
  const int threads = resolve_threads(cfg.threads);
  uint64_t phase_tag = phase == "T" ? 0x7001 : 0x7002;
  std::vector<size_t> order = epoch_order(views.size(), cfg.seed, phase_tag, epoch);

  std::vector<ParamSet*> sets;
  if (phase == "T") {
    sets = {&params->enc, &params->est};
  } else {
    sets = {&params->gen};
  }

  for (size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
    size_t end = std::min(order.size(), begin + cfg.batch_size);
    size_t bn = end - begin;
    std::vector<RecordResult> slots(bn);
    parallel_for(bn, threads, [&](size_t i) {
      const TrainView& v = views[order[begin + i]];
      if (phase == "T") {
        slots[i] = t_record_loss(v, *params, cfg);
      } else {
        uint64_t noise_seed = derive_seed(
            cfg.seed, 0x6E, static_cast<uint64_t>(epoch) * 1000000ULL +
                                static_cast<uint64_t>(v.rec->id));
        slots[i] = g_record_loss(v, *params, cfg, noise_seed);
      }
    });

    std::map<std::string, ad::Tensor> grads;
    std::map<std::string, double> loss_means;
    for (size_t i = 0; i < bn; ++i) {
      accumulate(&grads, slots[i].grads, 1.0 / bn);
      for (const auto& [k, val] : slots[i].losses) loss_means[k] += val / bn;
    }
    double batch_loss = phase == "T" ? loss_means["loss"] : loss_means["total"];
    require(std::isfinite(batch_loss), ErrorCode::numeric,
            "divergence guard: non-finite loss at step " +
                std::to_string(*step_counter));
    adam->step(sets, grads);

    if (log) {
      nlohmann::json rec;
      rec["step"] = (*step_counter);
      rec["epoch"] = epoch;
      rec["phase"] = phase;
      if (phase == "T") {
        for (const auto& [k, val] : loss_means) rec[k] = val;
      } else {
        nlohmann::json g;
        for (const auto& [k, val] : loss_means) g[k] = val;
        rec["l_mps_g"] = g;
      }
      log->add(rec);
    }
    ++(*step_counter);
  }
}

nlohmann::json metrics_entry(const MetricsReport& m) {
  nlohmann::json j;
  j["mae"] = m.mae;
  j["rmse"] = m.rmse;
  j["r"] = m.pearson_r;
  return j;
}

MetricsReport metrics_over_valid(const std::vector<EvalRow>& rows,
                                 double EvalRow::*field) {
  std::vector<double> pred, gt;
  for (const auto& r : rows) {
    double v = r.*field;
    if (std::isfinite(v)) {
      pred.push_back(v);
      gt.push_back(r.gt_bpm);
    }
  }
  if (pred.empty()) {
    MetricsReport m;
    m.mae = m.rmse = m.pearson_r = kNaN;
    return m;
  }
  return metrics(pred, gt);
}

void log_eval(RunLog* log, int epoch, const EvalReport& rep) {
  if (!log) return;
  nlohmann::json j;
  j["epoch"] = epoch;
  j["eval"] = rep.metrics_json();
  log->add(j);
}

// Per-run Adam state serialization for bit-exact resume.
ParamSet serialize_opt(const Adam& t_adam, const Adam& g_adam) {
  ParamSet set;
  auto dump = [&](const Adam& a, const std::string& tag) {
    set.add("opt." + tag + ".t",
            ad::Tensor::scalar(static_cast<double>(a.t)));
    for (const auto& [name, vec] : a.m)
      set.add("opt." + tag + ".m." + name,
              ad::Tensor::row(std::vector<double>(vec)));
    for (const auto& [name, vec] : a.v)
      set.add("opt." + tag + ".v." + name,
              ad::Tensor::row(std::vector<double>(vec)));
  };
  dump(t_adam, "t_adam");
  dump(g_adam, "g_adam");
  return set;
}

void deserialize_opt(const ParamSet& set, Adam* t_adam, Adam* g_adam) {
  for (const auto& [name, tensor] : set.items) {
    Adam* target = nullptr;
    std::string rest;
    if (name.starts_with("opt.t_adam.")) {
      target = t_adam;
      rest = name.substr(11);
    } else if (name.starts_with("opt.g_adam.")) {
      target = g_adam;
      rest = name.substr(11);
    } else {
      fail(ErrorCode::bad_checkpoint, "unknown optimizer tensor: " + name);
    }
    if (rest == "t") {
      target->t = static_cast<int64_t>(tensor.data[0]);
    } else if (rest.starts_with("m.")) {
      target->m[rest.substr(2)] = tensor.data;
    } else if (rest.starts_with("v.")) {
      target->v[rest.substr(2)] = tensor.data;
    } else {
      fail(ErrorCode::bad_checkpoint, "unknown optimizer tensor: " + name);
    }
  }
}

}  // namespace

nlohmann::json EvalReport::metrics_json() const {
  nlohmann::json j;
  j["raw2s"] = {{"psd", metrics_entry(raw_psd)}, {"ibi", metrics_entry(raw_ibi)}};
  j["recon10s"] = {{"psd", metrics_entry(recon_psd)},
                   {"ibi", metrics_entry(recon_ibi)}};
  return j;
}

EvalReport evaluate(const Corpus& corpus, const ModelParams& params,
                    const TrainConfig& cfg, ReconMode recon) {
  EvalReport rep;
  const int fps = corpus.spec.fps;
  const size_t clip_len = static_cast<size_t>(2 * fps);
  for (const auto* rec : corpus.split(/*test=*/true)) {
    size_t n_clips = rec->rec.observed.samples.size() / clip_len;
    for (size_t clip = 0; clip < n_clips; ++clip) {
      EvalRow row;
      row.record_id = std::to_string(rec->id) + "#" + std::to_string(clip);
      size_t off = clip * clip_len;
      double gt = 0.0;
      for (size_t i = 0; i < clip_len; ++i)
        gt += rec->rec.hr_trajectory[off + i];
      row.gt_bpm = gt / clip_len;

      Signal obs = window(rec->rec.observed, off, clip_len);
      Signal s2 = predict_s2(obs, params);
      row.raw2s_psd = hr_from_psd(psd_band(s2)).bpm;
      try {
        row.raw2s_ibi = hr_from_ibi(s2).bpm;
      } catch (const Error&) {
        row.raw2s_ibi = kNaN;
      }

      if (recon == ReconMode::none) {
        row.recon10s_psd = kNaN;
        row.recon10s_ibi = kNaN;
      } else {
        uint64_t noise_seed =
            derive_seed(cfg.seed, 0xEA11,
                        static_cast<uint64_t>(rec->id) * 64 + clip);
        Signal r10 =
            recon == ReconMode::duplication
                ? reconstruct(s2, "duplication", params, noise_seed)
                : reconstruct(s2, to_string(cfg.strategy), params, noise_seed);
        row.recon10s_psd = hr_from_psd(psd_band(r10)).bpm;
        try {
          row.recon10s_ibi = hr_from_ibi(r10).bpm;
        } catch (const Error&) {
          row.recon10s_ibi = kNaN;
        }
      }
      rep.rows.push_back(std::move(row));
    }
  }
  rep.raw_psd = metrics_over_valid(rep.rows, &EvalRow::raw2s_psd);
  rep.raw_ibi = metrics_over_valid(rep.rows, &EvalRow::raw2s_ibi);
  rep.recon_psd = metrics_over_valid(rep.rows, &EvalRow::recon10s_psd);
  rep.recon_ibi = metrics_over_valid(rep.rows, &EvalRow::recon10s_ibi);
  return rep;
}

EvalReport evaluate(const Corpus& corpus, const ModelParams& params,
                    const TrainConfig& cfg) {
  ReconMode mode;
  if (cfg.strategy == Strategy::duplication) {
    mode = ReconMode::duplication;
  } else {
    mode = params.g_trained ? ReconMode::generator : ReconMode::none;
  }
  return evaluate(corpus, params, cfg, mode);
}

void write_eval_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::io, "cannot write " + path);
  out << "record_id,gt_bpm,raw2s_psd,raw2s_ibi,recon10s_psd,recon10s_ibi\n";
  char buf[64];
  auto cell = [&](double v) {
    if (!std::isfinite(v)) return std::string("nan");
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : report.rows) {
    out << r.record_id << "," << cell(r.gt_bpm) << "," << cell(r.raw2s_psd)
        << "," << cell(r.raw2s_ibi) << "," << cell(r.recon10s_psd) << ","
        << cell(r.recon10s_ibi) << "\n";
  }
  require(out.good(), ErrorCode::io, "write failed: " + path);
}

ModelParams train_T(const Corpus& corpus, const TrainConfig& cfg, RunLog* log) {
  validate(cfg);
  require(corpus.spec.fps == cfg.model.fps, ErrorCode::fps_mismatch,
          "corpus fps differs from model fps");
  std::vector<TrainView> views = make_views(corpus, cfg);
  ModelParams params = init_params(cfg.model, derive_seed(cfg.seed, 0x1));
  params.strategy = to_string(cfg.strategy);
  Adam adam;
  adam.lr = cfg.lr_t;
  int step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    run_epoch("T", views, &params, &adam, cfg, epoch, &step, log);
    if ((epoch + 1) % cfg.eval_every == 0)
      log_eval(log, epoch, evaluate(corpus, params, cfg, ReconMode::none));
  }
  params.t_trained = true;
  return params;
}

void train_G(const Corpus& corpus, const TrainConfig& cfg, ModelParams* params,
             RunLog* log) {
  validate(cfg);
  require(params != nullptr, ErrorCode::invalid_argument, "params required");
  std::vector<TrainView> views = make_views(corpus, cfg);
  Adam adam;
  adam.lr = cfg.lr_g;
  int step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    run_epoch("G", views, params, &adam, cfg, epoch, &step, log);
    if ((epoch + 1) % cfg.eval_every == 0)
      log_eval(log, epoch, evaluate(corpus, *params, cfg, ReconMode::generator));
  }
  params->g_trained = true;
}

ModelParams alternate(const Corpus& corpus, const TrainConfig& cfg, RunLog* log,
                      const std::string& checkpoint_dir,
                      const std::string& resume_from) {
  validate(cfg);
  require(corpus.spec.fps == cfg.model.fps, ErrorCode::fps_mismatch,
          "corpus fps differs from model fps");
  std::vector<TrainView> views = make_views(corpus, cfg);

  ModelParams params;
  Adam t_adam, g_adam;
  t_adam.lr = cfg.lr_t;
  g_adam.lr = cfg.lr_g;
  int start_epoch = 0;
  if (!resume_from.empty()) {
    nlohmann::json meta;
    ParamSet opt;
    params = load_checkpoint(resume_from, &meta, &opt);
    deserialize_opt(opt, &t_adam, &g_adam);
    t_adam.lr = cfg.lr_t;
    g_adam.lr = cfg.lr_g;
    start_epoch = meta.at("epoch").get<int>();
  } else {
    params = init_params(cfg.model, derive_seed(cfg.seed, 0x1));
    params.strategy = to_string(cfg.strategy);
  }

  if (!checkpoint_dir.empty())
    std::filesystem::create_directories(checkpoint_dir);

  const int steps_per_epoch = static_cast<int>(
      (views.size() + cfg.batch_size - 1) / cfg.batch_size);
  int step = start_epoch * 2 * steps_per_epoch;
  for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
    run_epoch("T", views, &params, &t_adam, cfg, epoch, &step, log);
    run_epoch("G", views, &params, &g_adam, cfg, epoch, &step, log);
    if ((epoch + 1) % cfg.eval_every == 0)
      log_eval(log, epoch, evaluate(corpus, params, cfg, ReconMode::generator));
    if (!checkpoint_dir.empty() && (epoch + 1) % cfg.checkpoint_every == 0 &&
        epoch + 1 < cfg.epochs) {
      ParamSet opt = serialize_opt(t_adam, g_adam);
      nlohmann::json meta;
      meta["epoch"] = epoch + 1;
      meta["config"] = train_config_json(cfg);
      save_checkpoint(params, checkpoint_dir + "/checkpoint_epoch" +
                                  std::to_string(epoch + 1) + ".bin",
                      meta, &opt);
    }
  }
  params.t_trained = true;
  params.g_trained = true;
  if (!checkpoint_dir.empty()) {
    nlohmann::json meta;
    meta["epoch"] = cfg.epochs;
    meta["config"] = train_config_json(cfg);
    save_checkpoint(params, checkpoint_dir + "/checkpoint.bin", meta);
  }
  return params;
}

InferResult infer(const Signal& obs2, const ModelParams& params,
                  uint64_t noise_seed) {
  validate(obs2);
  require(obs2.samples.size() == static_cast<size_t>(params.config.obs_len()),
          ErrorCode::invalid_argument, "infer: observation must last 2 s");
  InferResult res;
  res.s2 = predict_s2(obs2, params);
  res.reconstructed =
      reconstruct(res.s2, params.strategy, params, noise_seed);
  res.hr = hr_from_psd(psd_band(res.reconstructed));
  return res;
}

}  // namespace pulsekit
