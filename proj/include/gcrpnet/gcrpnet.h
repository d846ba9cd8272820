/* C interface to the gcrpnet saliency library.
 *
 * Conventions:
 *   - Every fallible call returns a gcrp_status; 0 is success. On failure,
 *     gcrp_last_error() returns a message for the calling thread, valid
 *     until that thread's next library call.
 *   - Strings returned through char** out-parameters are heap-allocated;
 *     release them with gcrp_string_free. They are written only on the
 *     statuses documented per function.
 *   - Config files and config text are flat key=value lines; '#' starts a
 *     comment. Unknown keys are ignored, so one file can carry model and
 *     training keys together.
 */
#ifndef GCRPNET_H
#define GCRPNET_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gcrp_status {
    GCRP_OK = 0,
    GCRP_ERROR_VALIDATION = 2, /* bad arguments, config, files, or formats */
    GCRP_ERROR_NUMERIC = 3     /* NaN/divergence or a failed numerical check */
} gcrp_status;

const char* gcrp_last_error(void);

void gcrp_string_free(char* s);

/* Caps worker threads (n >= 1). The GCRP_THREADS environment variable, read
 * at library load, has the same effect. */
void gcrp_set_threads(int n);

/* ---- model handles ---- */

typedef struct gcrp_model gcrp_model;

/* Fresh model with seeded random initialization from config text. */
gcrp_status gcrp_model_create(const char* config_text, gcrp_model** out);

/* Model restored from a checkpoint file (config embedded in the file). */
gcrp_status gcrp_model_load(const char* ckpt_path, gcrp_model** out);

void gcrp_model_free(gcrp_model* m);

gcrp_status gcrp_model_param_count(const gcrp_model* m, int64_t* out);

/* Side length S of the square input the model expects. */
gcrp_status gcrp_model_input_size(const gcrp_model* m, int64_t* out);

/* One forward pass. input is CHW float, 3*S*S values, already normalized;
 * out receives the primary saliency map, S*S values in (0, 1). */
gcrp_status gcrp_model_forward(const gcrp_model* m, const float* input, int64_t input_len,
                               float* out, int64_t out_len);

/* ---- pipeline one-shots ---- */

/* Synthetic dataset (images/ + GT/ under out_dir): n images of side `size`,
 * deterministic per seed. */
gcrp_status gcrp_synth(int64_t n, int64_t size, uint64_t seed, const char* out_dir);

/* Trains per the config file (model + training keys), writing loss_log.csv,
 * periodic checkpoints, and final.gcrp under out_dir. resume_ckpt may be
 * NULL or empty; otherwise training continues from that checkpoint. On
 * success *out_summary (if non-NULL) receives a short text summary. */
gcrp_status gcrp_train(const char* config_path, const char* data_dir, const char* out_dir,
                       const char* resume_ckpt, char** out_summary);

/* Writes one 8-bit grayscale saliency PNG per image in images_dir. */
gcrp_status gcrp_infer(const char* ckpt_path, const char* images_dir, const char* out_dir);

/* Scores predictions against ground truth by file stem. Writes the summary
 * report (key=value) to report_path, the same summary as one CSV row to
 * <report_path>.csv, and mean threshold curves to <report_path>.curves.csv.
 * On success *out_summary (if non-NULL) receives the summary text. */
gcrp_status gcrp_eval(const char* pred_dir, const char* gt_dir, const char* report_path,
                      char** out_summary);

/* Finite-difference gradient verification. scope: "op", "block", "model",
 * or "all". Returns GCRP_OK when every case passes and GCRP_ERROR_NUMERIC
 * when any fails; in both cases *out_report receives a per-case text table. */
gcrp_status gcrp_gradcheck(const char* scope, char** out_report);

/* The scan visit order for an h x w map with a g x g block partition.
 * direction: "rightward", "downward", "leftward", or "upward". *out_text
 * receives the flat row-major spatial indices in visit order, space
 * separated. */
gcrp_status gcrp_scan_dump(int64_t h, int64_t w, int64_t grid, const char* direction,
                           char** out_text);

/* Times one op. op: matmul, conv2d, ssm_scan, ssm_scan_assoc, gat, or
 * model_forward; shape is 'x'-separated dims, e.g. "128x128x64". *out_text
 * receives a one-line timing summary. */
gcrp_status gcrp_bench(const char* op, const char* shape, char** out_text);

#ifdef __cplusplus
}
#endif

#endif /* GCRPNET_H */
