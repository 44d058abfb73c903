/* C interface to the opportunistic-factor authentication toolkit.
 *
 * Every function that can fail returns opf_status; OPF_OK means success and
 * anything else leaves a thread-local message retrievable via
 * opf_last_error(). Output handles are only written on success and must be
 * released with their matching *_free function. Strings returned through
 * char** out-parameters are heap copies owned by the caller; release them
 * with opf_string_free.
 */

#ifndef OPPFACTOR_H
#define OPPFACTOR_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum opf_status {
    OPF_OK = 0,
    OPF_E_INVALID_ARGUMENT = 1,
    OPF_E_DECODE = 2,
    OPF_E_UNSUPPORTED_FORMAT = 3,
    OPF_E_EMPTY_AUDIO = 4,
    OPF_E_TOO_SHORT = 5,
    OPF_E_ALL_SILENT = 6,
    OPF_E_DIMENSION_MISMATCH = 7,
    OPF_E_EMPTY_FOREGROUND = 8,
    OPF_E_INCOMPATIBLE_HISTOGRAM = 9,
    OPF_E_CONFLICT = 10,
    OPF_E_NOT_FOUND = 11,
    OPF_E_EMPTY_ENROLLMENT = 12,
    OPF_E_FACTOR_UNAVAILABLE = 13,
    OPF_E_HETEROGENEOUS_CORPUS = 14,
    OPF_E_IO = 15,
    OPF_E_PARSE = 16,
    OPF_E_BAD_VERSION = 17,
    OPF_E_NETWORK = 18,
    OPF_E_INTERNAL = 19
} opf_status;

typedef struct opf_config opf_config;
typedef struct opf_store opf_store;
typedef struct opf_signature opf_signature;
typedef struct opf_histogram opf_histogram;
typedef struct opf_decision opf_decision;
typedef struct opf_matrix opf_matrix;
typedef struct opf_server opf_server;

const char* opf_version(void);

/* Message for the most recent failure on this thread; never NULL. */
const char* opf_last_error(void);

void opf_string_free(char* s);

/* ---- configuration ---- */

opf_status opf_config_default(opf_config** out);
opf_status opf_config_load(const char* path, opf_config** out);
opf_status opf_config_save(const opf_config* cfg, const char* path);
opf_status opf_config_to_json(const opf_config* cfg, char** out);
opf_status opf_config_set_thresholds(opf_config* cfg, double audio_max_distance_hz,
                                     double visual_max_distance);
opf_status opf_config_get_thresholds(const opf_config* cfg, double* audio_max_distance_hz,
                                     double* visual_max_distance);
/* kind: "all" | "k_of_n" | "rfid_plus_any"; k used by k_of_n only. */
opf_status opf_config_set_policy(opf_config* cfg, const char* kind, uint32_t k);
opf_status opf_config_set_bind(opf_config* cfg, const char* bind_address);
void opf_config_free(opf_config* cfg);

/* ---- enrollment store ---- */

typedef enum opf_open_mode {
    OPF_OPEN_EXISTING = 0,
    OPF_CREATE_NEW = 1,
    OPF_OPEN_OR_CREATE = 2
} opf_open_mode;

opf_status opf_store_open(const char* root_dir, opf_open_mode mode, opf_store** out);
opf_status opf_store_count(const opf_store* store, size_t* out);
/* JSON array of {identity_id, rfid_tag, audio_refs, visual_refs}. */
opf_status opf_store_list_json(const opf_store* store, char** out);
opf_status opf_store_enroll(opf_store* store, const char* identity_id, const char* rfid_tag,
                            const opf_signature* const* audio_refs, size_t n_audio,
                            const opf_histogram* const* visual_refs, size_t n_visual,
                            uint32_t max_refs);
opf_status opf_store_add_audio_ref(opf_store* store, const char* identity_id,
                                   const opf_signature* ref, uint32_t max_refs);
opf_status opf_store_add_visual_ref(opf_store* store, const char* identity_id,
                                    const opf_histogram* ref, uint32_t max_refs);
opf_status opf_store_remove(opf_store* store, const char* identity_id);
void opf_store_free(opf_store* store);

/* ---- feature extraction ---- */

opf_status opf_signature_from_wav_file(const char* path, const opf_config* cfg,
                                       opf_signature** out);
opf_status opf_signature_from_wav_bytes(const uint8_t* bytes, size_t len, const opf_config* cfg,
                                        opf_signature** out);
opf_status opf_signature_mean_centroid(const opf_signature* sig, double* out_hz);
opf_status opf_audio_distance(const opf_signature* a, const opf_signature* b, double* out_hz);
void opf_signature_free(opf_signature* sig);

/* mask_path may be NULL; "<image-stem>.mask.pgm" beside the image is used
 * when present, else the whole image is foreground. */
opf_status opf_histogram_from_image_file(const char* image_path, const char* mask_path,
                                         const opf_config* cfg, opf_histogram** out);
opf_status opf_visual_distance(const opf_histogram* a, const opf_histogram* b, double* out);
void opf_histogram_free(opf_histogram* hist);

/* ---- verification ---- */

/* audio_path / image_path / mask_path may be NULL when that capture is
 * absent. Unreadable captures force a deny per the decision rules. */
opf_status opf_verify_files(opf_store* store, const opf_config* cfg, const char* rfid_tag,
                            const char* audio_path, const char* image_path, const char* mask_path,
                            opf_decision** out);
/* 1 = accept, 0 = deny. */
opf_status opf_decision_accepted(const opf_decision* d, int* out);
opf_status opf_decision_to_json(const opf_decision* d, char** out);
void opf_decision_free(opf_decision* d);

/* ---- evaluation kit ---- */

opf_status opf_matrix_from_corpus_manifest(const char* manifest_path, const opf_config* cfg,
                                           opf_matrix** out);
opf_status opf_matrix_identity_average(const opf_matrix* m, opf_matrix** out);
opf_status opf_matrix_read_csv(const char* path, opf_matrix** out);
opf_status opf_matrix_write_csv(const opf_matrix* m, const char* path);
opf_status opf_matrix_to_csv(const opf_matrix* m, char** out);
opf_status opf_matrix_size(const opf_matrix* m, size_t* out);
/* Absent entries read as NaN. */
opf_status opf_matrix_value(const opf_matrix* m, size_t row, size_t col, double* out);
/* Writes <base>.pgm and <base>.svg. */
opf_status opf_matrix_write_heatmap(const opf_matrix* m, const char* base_path, uint32_t cell_px);
opf_status opf_matrix_marked_table(const opf_matrix* m, double threshold, int precision,
                                   char** out);
opf_status opf_matrix_accuracy(const opf_matrix* m, double threshold, double* out);
opf_status opf_matrix_accuracy_text(const opf_matrix* m, double threshold, char** out);
opf_status opf_matrix_accuracy_csv(const opf_matrix* m, double threshold, char** out);
opf_status opf_matrix_calibrate(const opf_matrix* m, double* threshold_out, double* accuracy_out);
void opf_matrix_free(opf_matrix* m);

/* Generate the built-in synthetic fleet to a directory of WAV or PPM files
 * plus a corpus manifest; *manifest_path_out receives the manifest path. */
opf_status opf_synth_default_audio(const char* out_dir, uint64_t seed, double duration_s,
                                   uint32_t clips_per_profile, uint32_t sample_rate,
                                   char** manifest_path_out);
opf_status opf_synth_default_visual(const char* out_dir, uint64_t seed, uint32_t images_per_color,
                                    uint32_t width, uint32_t height, char** manifest_path_out);

/* Accuracy-vs-duration table for the built-in fleet at a fixed threshold. */
opf_status opf_duration_sweep(const opf_config* cfg, uint64_t seed, const double* durations,
                              size_t n_durations, double threshold, char** text_out,
                              char** csv_out);

/* ---- daemon ---- */

opf_status opf_server_create(opf_store* store, const opf_config* cfg, opf_server** out);
/* Bind + listen on the config's gateway.bind; port 0 picks a free port. */
opf_status opf_server_start(opf_server* srv);
opf_status opf_server_port(const opf_server* srv, uint16_t* out);
/* Blocks until opf_server_stop is called from another thread. */
opf_status opf_server_run(opf_server* srv);
opf_status opf_server_stop(opf_server* srv);
void opf_server_free(opf_server* srv);

/* One protocol round trip without a socket: feed a request line, get the
 * response line (no trailing newline). */
opf_status opf_handle_request_line(opf_store* store, const opf_config* cfg, const char* line,
                                   char** response_out);

#ifdef __cplusplus
}
#endif

#endif /* OPPFACTOR_H */
