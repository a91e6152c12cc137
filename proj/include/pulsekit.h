/* Copyright 2026 The pulsekit authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* pulsekit: heart-rate estimation from ultra-short pulse windows.
 *
 * The library estimates heart rate from 2-second windows of a 1-D pulse
 * signal, demonstrates the spectral-leakage failure mode of short-window
 * PSDs, and trains a periodicity-guided model pair (estimator + generator)
 * that reconstructs 10-second signals from 2-second ones for finer frequency
 * resolution.
 *
 * All objects are opaque handles; every fallible call returns a pk_status
 * and a thread-local message is available from pk_last_error(). Strings
 * returned through char** are heap-allocated; release them with
 * pk_string_free().
 */

#ifndef PULSEKIT_H_
#define PULSEKIT_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pk_status {
  PK_OK = 0,
  PK_ERR_INVALID_ARGUMENT = 1,
  PK_ERR_SIGNAL_TOO_SHORT = 2,
  PK_ERR_ZERO_NORM = 3,
  PK_ERR_INSUFFICIENT_BEATS = 4,
  PK_ERR_FPS_MISMATCH = 5,
  PK_ERR_LENGTH_MISMATCH = 6,
  PK_ERR_IO = 7,
  PK_ERR_BAD_CHECKPOINT = 8,
  PK_ERR_NUMERIC = 9,
  PK_ERR_OUT_OF_BAND = 10,
  PK_ERR_UNKNOWN = 127
} pk_status;

const char* pk_status_name(pk_status status);

/* Message for the most recent failing call on this thread. */
const char* pk_last_error(void);

void pk_string_free(char* s);

/* ---- signals ------------------------------------------------------- */

typedef struct pk_signal_s pk_signal;

pk_status pk_signal_create(const double* samples, size_t len, int fps,
                           pk_signal** out);
/* CSV format: line 1 "fps=<int>", then one sample per line. */
pk_status pk_signal_from_csv(const char* path, pk_signal** out);
pk_status pk_signal_to_csv(const pk_signal* sig, const char* path);
void pk_signal_free(pk_signal* sig);
size_t pk_signal_len(const pk_signal* sig);
int pk_signal_fps(const pk_signal* sig);
pk_status pk_signal_copy_samples(const pk_signal* sig, double* buf,
                                 size_t buf_len);

/* ---- spectral analysis --------------------------------------------- */

typedef struct pk_dist_s pk_dist;

/* Normalized PSD over the 0.66-4.16 Hz heart-rate band. */
pk_status pk_psd_band(const pk_signal* sig, pk_dist** out);
void pk_dist_free(pk_dist* dist);
size_t pk_dist_bins(const pk_dist* dist);
pk_status pk_dist_copy(const pk_dist* dist, double* freqs_hz, double* probs,
                       size_t cap);
pk_status pk_dist_entropy(const pk_dist* dist, double* out);
/* {"band":[0.66,4.16],"freqs":[...],"probs":[...]} */
pk_status pk_dist_to_json(const pk_dist* dist, char** out);

pk_status pk_hr_from_psd(const pk_dist* dist, double* bpm, double* confidence);
pk_status pk_hr_from_ibi(const pk_signal* sig, double* bpm);
pk_status pk_metrics(const double* pred, const double* gt, size_t len,
                     double* mae, double* rmse, double* pearson_r);

/* ---- correlation primitives ----------------------------------------- */

typedef struct pk_corr_s pk_corr;

/* Normalized correlation of equal-length signals (no mean removal). */
pk_status pk_nc(const pk_signal* a, const pk_signal* b, double* out);
/* Classical running NCC over lags -(L-1)..L-1. */
pk_status pk_ncc(const pk_signal* a, const pk_signal* b, pk_corr** out);
/* Sliding-window-maximum NCC of a short signal against a long one. */
pk_status pk_swm_ncc(const pk_signal* shorter, const pk_signal* longer,
                     pk_corr** out);
void pk_corr_free(pk_corr* corr);
size_t pk_corr_len(const pk_corr* corr);
int pk_corr_origin(const pk_corr* corr);
pk_status pk_corr_values(const pk_corr* corr, double* buf, size_t cap);
/* {"index_kind":"lag"|"tau","origin":...,"values":[...]} */
pk_status pk_corr_to_json(const pk_corr* corr, char** out);
/* Mean over heartbeat-cycle chunks of each chunk's maximum. */
pk_status pk_fp(const pk_corr* corr, int fps, double delta_t_s, double* out);

/* ---- loss values ----------------------------------------------------- */

pk_status pk_loss_mps(const pk_signal* pred_short, const pk_signal* gt_long,
                      double delta_t_s, double* out);
pk_status pk_loss_ncc(const pk_signal* pred, const pk_signal* gt, double* out);

/* ---- models ---------------------------------------------------------- */

typedef struct pk_model_s pk_model;

pk_status pk_model_load(const char* path, pk_model** out);
void pk_model_free(pk_model* model);
/* 1 if both the estimation model and the generator have been trained. */
int pk_model_trained(const pk_model* model);

/* 2 s observation -> PSD-peak HR of the 10 s reconstruction. */
pk_status pk_model_infer(const pk_model* model, const pk_signal* obs2,
                         uint64_t noise_seed, double* bpm,
                         pk_signal** reconstructed);
/* strategy: duplication | forward | backward | fwd-bwd. */
pk_status pk_model_reconstruct(const pk_model* model, const pk_signal* s2,
                               const char* strategy, uint64_t noise_seed,
                               pk_signal** out);

/* ---- pipeline commands ----------------------------------------------- */
/* config_json accepts the subcommand's flag names (see pk_resolve_config);
 * unknown keys are rejected. */

/* Fills every omitted field with its default; returns the canonical config
 * echoed by the CLI. command is one of corpus | leakage-demo | train | eval |
 * reconstruct | ablate. */
pk_status pk_resolve_config(const char* command, const char* config_json,
                            char** resolved_json);

pk_status pk_corpus_build(const char* config_json, const char* out_dir);

pk_status pk_leakage_demo(const char* config_json, const char* out_dir,
                          char** summary_json);

/* Trains with the alternating schedule; writes checkpoint.bin and
 * train_log.jsonl (plus periodic checkpoint_epochN.bin) into out_dir. */
pk_status pk_train(const char* config_json, const char* corpus_dir,
                   const char* out_dir);

/* Evaluates a trained checkpoint over the corpus test split; writes the
 * per-clip eval CSV and returns the four-variant metrics. */
pk_status pk_eval(const char* config_json, const char* corpus_dir,
                  const char* checkpoint, const char* out_csv,
                  char** metrics_json);

/* Reads a 2 s signal CSV and writes its 10 s reconstruction. checkpoint may
 * be NULL for the parameter-free duplication strategy. */
pk_status pk_reconstruct(const char* config_json, const char* input_csv,
                         const char* checkpoint, const char* out_csv);

/* which: loss | strategy | blocks | hr-calc | sudden. */
pk_status pk_ablate(const char* which, const char* config_json,
                    const char* corpus_dir, const char* out_csv,
                    char** rows_json);

#ifdef __cplusplus
}
#endif

#endif /* PULSEKIT_H_ */
