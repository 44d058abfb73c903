#include "oppfactor.h"

#include "core/audio.hpp"
#include "core/config.hpp"
#include "core/decision.hpp"
#include "core/enrollment.hpp"
#include "core/errors.hpp"
#include "core/vision.hpp"
#include "core/wav.hpp"
#include "evalkit/corpus.hpp"
#include "evalkit/matrix.hpp"
#include "evalkit/render.hpp"
#include "evalkit/synth.hpp"
#include "gateway/gateway.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

using namespace opf;

struct opf_config {
    config::AppConfig cfg;
};

struct opf_store {
    std::unique_ptr<enroll::EnrollmentStore> store;
};

struct opf_signature {
    audio::AudioSignature sig;
};

struct opf_histogram {
    vision::ColorHistogram hist;
};

struct opf_decision {
    decision::AuthDecision d;
};

struct opf_matrix {
    evalkit::DistanceMatrix m;
};

struct opf_server {
    std::unique_ptr<gateway::GatewayServer> server;
};

namespace {

thread_local std::string g_last_error;

void set_last_error(const std::string& message) {
    g_last_error = message;
}

opf_status map_errc(Errc code) {
    switch (code) {
    case Errc::invalid_argument: return OPF_E_INVALID_ARGUMENT;
    case Errc::decode: return OPF_E_DECODE;
    case Errc::unsupported_format: return OPF_E_UNSUPPORTED_FORMAT;
    case Errc::empty_audio: return OPF_E_EMPTY_AUDIO;
    case Errc::too_short: return OPF_E_TOO_SHORT;
    case Errc::all_silent: return OPF_E_ALL_SILENT;
    case Errc::dimension_mismatch: return OPF_E_DIMENSION_MISMATCH;
    case Errc::empty_foreground: return OPF_E_EMPTY_FOREGROUND;
    case Errc::incompatible_histogram: return OPF_E_INCOMPATIBLE_HISTOGRAM;
    case Errc::conflict: return OPF_E_CONFLICT;
    case Errc::not_found: return OPF_E_NOT_FOUND;
    case Errc::empty_enrollment: return OPF_E_EMPTY_ENROLLMENT;
    case Errc::factor_unavailable: return OPF_E_FACTOR_UNAVAILABLE;
    case Errc::heterogeneous_corpus: return OPF_E_HETEROGENEOUS_CORPUS;
    case Errc::io: return OPF_E_IO;
    case Errc::parse: return OPF_E_PARSE;
    case Errc::bad_version: return OPF_E_BAD_VERSION;
    case Errc::network: return OPF_E_NETWORK;
    case Errc::internal: return OPF_E_INTERNAL;
    }
    return OPF_E_INTERNAL;
}

template <typename F> opf_status guarded(F&& body) noexcept {
    try {
        body();
        return OPF_OK;
    } catch (const Error& e) {
        set_last_error(e.what());
        return map_errc(e.code());
    } catch (const std::bad_alloc&) {
        set_last_error("out of memory");
        return OPF_E_INTERNAL;
    } catch (const std::exception& e) {
        set_last_error(e.what());
        return OPF_E_INTERNAL;
    }
}

opf_status require(bool ok, const char* message) {
    if (!ok) {
        set_last_error(message);
        return OPF_E_INVALID_ARGUMENT;
    }
    return OPF_OK;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out)
        throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

} // namespace

extern "C" {

const char* opf_version(void) {
    return "0.1.0";
}

const char* opf_last_error(void) {
    return g_last_error.c_str();
}

void opf_string_free(char* s) {
    std::free(s);
}

/* ---- configuration ---- */

opf_status opf_config_default(opf_config** out) {
    if (opf_status s = require(out != nullptr, "out is null"))
        return s;
    return guarded([&] { *out = new opf_config{config::default_config()}; });
}

opf_status opf_config_load(const char* path, opf_config** out) {
    if (opf_status s = require(path && out, "path/out is null"))
        return s;
    return guarded([&] { *out = new opf_config{config::load_config(path)}; });
}

opf_status opf_config_save(const opf_config* cfg, const char* path) {
    if (opf_status s = require(cfg && path, "cfg/path is null"))
        return s;
    return guarded([&] { config::save_config(cfg->cfg, path); });
}

opf_status opf_config_to_json(const opf_config* cfg, char** out) {
    if (opf_status s = require(cfg && out, "cfg/out is null"))
        return s;
    return guarded([&] { *out = dup_string(config::config_to_json(cfg->cfg)); });
}

opf_status opf_config_set_thresholds(opf_config* cfg, double audio_max_distance_hz,
                                     double visual_max_distance) {
    if (opf_status s = require(cfg != nullptr, "cfg is null"))
        return s;
    return guarded([&] {
        if (audio_max_distance_hz < 0 || visual_max_distance < 0)
            raise(Errc::invalid_argument, "thresholds must be non-negative");
        cfg->cfg.thresholds.audio_max_distance_hz = audio_max_distance_hz;
        cfg->cfg.thresholds.visual_max_distance = visual_max_distance;
    });
}

opf_status opf_config_get_thresholds(const opf_config* cfg, double* audio_max_distance_hz,
                                     double* visual_max_distance) {
    if (opf_status s = require(cfg != nullptr, "cfg is null"))
        return s;
    if (audio_max_distance_hz)
        *audio_max_distance_hz = cfg->cfg.thresholds.audio_max_distance_hz;
    if (visual_max_distance)
        *visual_max_distance = cfg->cfg.thresholds.visual_max_distance;
    return OPF_OK;
}

opf_status opf_config_set_policy(opf_config* cfg, const char* kind, uint32_t k) {
    if (opf_status s = require(cfg && kind, "cfg/kind is null"))
        return s;
    return guarded([&] {
        decision::PolicySpec p;
        p.kind = decision::policy_kind_from_name(kind);
        p.k = k;
        if (p.kind == decision::PolicyKind::k_of_n && (k < 1 || k > 3))
            raise(Errc::invalid_argument, "k must be between 1 and 3");
        cfg->cfg.policy = p;
    });
}

opf_status opf_config_set_bind(opf_config* cfg, const char* bind_address) {
    if (opf_status s = require(cfg && bind_address, "cfg/bind is null"))
        return s;
    cfg->cfg.gateway.bind = bind_address;
    return OPF_OK;
}

void opf_config_free(opf_config* cfg) {
    delete cfg;
}

/* ---- enrollment store ---- */

opf_status opf_store_open(const char* root_dir, opf_open_mode mode, opf_store** out) {
    if (opf_status s = require(root_dir && out, "root_dir/out is null"))
        return s;
    return guarded([&] {
        enroll::OpenMode m;
        switch (mode) {
        case OPF_OPEN_EXISTING: m = enroll::OpenMode::open_existing; break;
        case OPF_CREATE_NEW: m = enroll::OpenMode::create_new; break;
        case OPF_OPEN_OR_CREATE: m = enroll::OpenMode::open_or_create; break;
        default: raise(Errc::invalid_argument, "bad open mode");
        }
        auto store = std::make_unique<enroll::EnrollmentStore>(root_dir, m);
        *out = new opf_store{std::move(store)};
    });
}

opf_status opf_store_count(const opf_store* store, size_t* out) {
    if (opf_status s = require(store && out, "store/out is null"))
        return s;
    return guarded([&] { *out = store->store->size(); });
}

opf_status opf_store_list_json(const opf_store* store, char** out) {
    if (opf_status s = require(store && out, "store/out is null"))
        return s;
    return guarded([&] {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& rec : store->store->list()) {
            nlohmann::ordered_json j;
            j["identity_id"] = rec.identity_id;
            j["rfid_tag"] = rec.rfid_tag;
            j["audio_refs"] = rec.audio_refs.size();
            j["visual_refs"] = rec.visual_refs.size();
            arr.push_back(std::move(j));
        }
        *out = dup_string(arr.dump(2));
    });
}

opf_status opf_store_enroll(opf_store* store, const char* identity_id, const char* rfid_tag,
                            const opf_signature* const* audio_refs, size_t n_audio,
                            const opf_histogram* const* visual_refs, size_t n_visual,
                            uint32_t max_refs) {
    if (opf_status s = require(store && identity_id && rfid_tag, "store/id/tag is null"))
        return s;
    if (opf_status s = require(n_audio == 0 || audio_refs, "audio_refs is null"))
        return s;
    if (opf_status s = require(n_visual == 0 || visual_refs, "visual_refs is null"))
        return s;
    return guarded([&] {
        std::vector<audio::AudioSignature> sigs;
        sigs.reserve(n_audio);
        for (size_t i = 0; i < n_audio; ++i) {
            if (!audio_refs[i])
                raise(Errc::invalid_argument, "audio_refs contains a null handle");
            sigs.push_back(audio_refs[i]->sig);
        }
        std::vector<vision::ColorHistogram> hists;
        hists.reserve(n_visual);
        for (size_t i = 0; i < n_visual; ++i) {
            if (!visual_refs[i])
                raise(Errc::invalid_argument, "visual_refs contains a null handle");
            hists.push_back(visual_refs[i]->hist);
        }
        store->store->enroll(identity_id, rfid_tag, std::move(sigs), std::move(hists), max_refs);
    });
}

opf_status opf_store_add_audio_ref(opf_store* store, const char* identity_id,
                                   const opf_signature* ref, uint32_t max_refs) {
    if (opf_status s = require(store && identity_id && ref, "store/id/ref is null"))
        return s;
    return guarded([&] { store->store->add_audio_reference(identity_id, ref->sig, max_refs); });
}

opf_status opf_store_add_visual_ref(opf_store* store, const char* identity_id,
                                    const opf_histogram* ref, uint32_t max_refs) {
    if (opf_status s = require(store && identity_id && ref, "store/id/ref is null"))
        return s;
    return guarded([&] { store->store->add_visual_reference(identity_id, ref->hist, max_refs); });
}

opf_status opf_store_remove(opf_store* store, const char* identity_id) {
    if (opf_status s = require(store && identity_id, "store/id is null"))
        return s;
    return guarded([&] { store->store->remove(identity_id); });
}

void opf_store_free(opf_store* store) {
    delete store;
}

/* ---- feature extraction ---- */

opf_status opf_signature_from_wav_file(const char* path, const opf_config* cfg,
                                       opf_signature** out) {
    if (opf_status s = require(path && cfg && out, "path/cfg/out is null"))
        return s;
    return guarded([&] {
        *out = new opf_signature{audio::audio_signature(wav::decode_file(path), cfg->cfg.audio)};
    });
}

opf_status opf_signature_from_wav_bytes(const uint8_t* bytes, size_t len, const opf_config* cfg,
                                        opf_signature** out) {
    if (opf_status s = require(bytes && cfg && out, "bytes/cfg/out is null"))
        return s;
    return guarded([&] {
        *out = new opf_signature{
            audio::audio_signature(wav::decode({bytes, len}), cfg->cfg.audio)};
    });
}

opf_status opf_signature_mean_centroid(const opf_signature* sig, double* out_hz) {
    if (opf_status s = require(sig && out_hz, "sig/out is null"))
        return s;
    *out_hz = sig->sig.mean_centroid;
    return OPF_OK;
}

opf_status opf_audio_distance(const opf_signature* a, const opf_signature* b, double* out_hz) {
    if (opf_status s = require(a && b && out_hz, "a/b/out is null"))
        return s;
    return guarded([&] { *out_hz = audio::audio_distance(a->sig, b->sig); });
}

void opf_signature_free(opf_signature* sig) {
    delete sig;
}

opf_status opf_histogram_from_image_file(const char* image_path, const char* mask_path,
                                         const opf_config* cfg, opf_histogram** out) {
    if (opf_status s = require(image_path && cfg && out, "path/cfg/out is null"))
        return s;
    return guarded([&] {
        vision::MaskedImage img =
            vision::load_image_file(image_path, mask_path ? mask_path : "");
        *out = new opf_histogram{vision::color_histogram(img, cfg->cfg.vision_bins_per_channel)};
    });
}

opf_status opf_visual_distance(const opf_histogram* a, const opf_histogram* b, double* out) {
    if (opf_status s = require(a && b && out, "a/b/out is null"))
        return s;
    return guarded([&] { *out = vision::bhattacharyya_distance(a->hist, b->hist); });
}

void opf_histogram_free(opf_histogram* hist) {
    delete hist;
}

/* ---- verification ---- */

opf_status opf_verify_files(opf_store* store, const opf_config* cfg, const char* rfid_tag,
                            const char* audio_path, const char* image_path, const char* mask_path,
                            opf_decision** out) {
    if (opf_status s = require(store && cfg && rfid_tag && out, "store/cfg/tag/out is null"))
        return s;
    return guarded([&] {
        decision::ProbeInput probe = gateway::probe_from_files(
            rfid_tag, audio_path ? audio_path : "", image_path ? image_path : "",
            mask_path ? mask_path : "", cfg->cfg);
        decision::AuthOptions options;
        options.thresholds = cfg->cfg.thresholds;
        options.policy = cfg->cfg.policy;
        options.aggregation = cfg->cfg.identity_distance;
        options.refresh_on_accept = cfg->cfg.refresh_on_accept;
        options.max_refs = cfg->cfg.max_refs;
        *out = new opf_decision{decision::authenticate(*store->store, probe, options)};
    });
}

opf_status opf_decision_accepted(const opf_decision* d, int* out) {
    if (opf_status s = require(d && out, "decision/out is null"))
        return s;
    *out = d->d.verdict == decision::Verdict::accept ? 1 : 0;
    return OPF_OK;
}

opf_status opf_decision_to_json(const opf_decision* d, char** out) {
    if (opf_status s = require(d && out, "decision/out is null"))
        return s;
    return guarded([&] { *out = dup_string(gateway::decision_to_json(d->d)); });
}

void opf_decision_free(opf_decision* d) {
    delete d;
}

/* ---- evaluation kit ---- */

opf_status opf_matrix_from_corpus_manifest(const char* manifest_path, const opf_config* cfg,
                                           opf_matrix** out) {
    if (opf_status s = require(manifest_path && cfg && out, "path/cfg/out is null"))
        return s;
    return guarded([&] {
        evalkit::CorpusSpec spec = evalkit::load_corpus_manifest(manifest_path);
        auto samples =
            evalkit::realize_corpus(spec, cfg->cfg.audio, cfg->cfg.vision_bins_per_channel);
        *out = new opf_matrix{evalkit::distance_matrix(samples)};
    });
}

opf_status opf_matrix_identity_average(const opf_matrix* m, opf_matrix** out) {
    if (opf_status s = require(m && out, "matrix/out is null"))
        return s;
    return guarded([&] { *out = new opf_matrix{evalkit::identity_average_matrix(m->m)}; });
}

opf_status opf_matrix_read_csv(const char* path, opf_matrix** out) {
    if (opf_status s = require(path && out, "path/out is null"))
        return s;
    return guarded([&] { *out = new opf_matrix{evalkit::read_matrix_csv(path)}; });
}

opf_status opf_matrix_write_csv(const opf_matrix* m, const char* path) {
    if (opf_status s = require(m && path, "matrix/path is null"))
        return s;
    return guarded([&] { evalkit::write_matrix_csv(m->m, path); });
}

opf_status opf_matrix_to_csv(const opf_matrix* m, char** out) {
    if (opf_status s = require(m && out, "matrix/out is null"))
        return s;
    return guarded([&] { *out = dup_string(evalkit::matrix_to_csv(m->m)); });
}

opf_status opf_matrix_size(const opf_matrix* m, size_t* out) {
    if (opf_status s = require(m && out, "matrix/out is null"))
        return s;
    *out = m->m.size();
    return OPF_OK;
}

opf_status opf_matrix_value(const opf_matrix* m, size_t row, size_t col, double* out) {
    if (opf_status s = require(m && out, "matrix/out is null"))
        return s;
    if (opf_status s = require(row < m->m.size() && col < m->m.size(), "index out of range"))
        return s;
    *out = m->m.at(row, col);
    return OPF_OK;
}

opf_status opf_matrix_write_heatmap(const opf_matrix* m, const char* base_path,
                                    uint32_t cell_px) {
    if (opf_status s = require(m && base_path, "matrix/path is null"))
        return s;
    return guarded([&] { evalkit::write_heatmap(m->m, base_path, cell_px); });
}

opf_status opf_matrix_marked_table(const opf_matrix* m, double threshold, int precision,
                                   char** out) {
    if (opf_status s = require(m && out, "matrix/out is null"))
        return s;
    return guarded(
        [&] { *out = dup_string(evalkit::render_marked_table(m->m, threshold, precision)); });
}

opf_status opf_matrix_accuracy(const opf_matrix* m, double threshold, double* out) {
    if (opf_status s = require(m && out, "matrix/out is null"))
        return s;
    return guarded([&] { *out = evalkit::pairwise_accuracy(m->m, threshold).accuracy; });
}

opf_status opf_matrix_accuracy_text(const opf_matrix* m, double threshold, char** out) {
    if (opf_status s = require(m && out, "matrix/out is null"))
        return s;
    return guarded([&] {
        *out = dup_string(
            evalkit::accuracy_report_text(evalkit::pairwise_accuracy(m->m, threshold)));
    });
}

opf_status opf_matrix_accuracy_csv(const opf_matrix* m, double threshold, char** out) {
    if (opf_status s = require(m && out, "matrix/out is null"))
        return s;
    return guarded([&] {
        *out = dup_string(
            evalkit::accuracy_report_csv(evalkit::pairwise_accuracy(m->m, threshold)));
    });
}

opf_status opf_matrix_calibrate(const opf_matrix* m, double* threshold_out,
                                double* accuracy_out) {
    if (opf_status s = require(m && threshold_out && accuracy_out, "matrix/out is null"))
        return s;
    return guarded([&] {
        evalkit::Calibration c = evalkit::calibrate_threshold(m->m);
        *threshold_out = c.threshold;
        *accuracy_out = c.accuracy;
    });
}

void opf_matrix_free(opf_matrix* m) {
    delete m;
}

opf_status opf_synth_default_audio(const char* out_dir, uint64_t seed, double duration_s,
                                   uint32_t clips_per_profile, uint32_t sample_rate,
                                   char** manifest_path_out) {
    if (opf_status s = require(out_dir && manifest_path_out, "out_dir/out is null"))
        return s;
    return guarded([&] {
        evalkit::CorpusSpec spec;
        spec.kind = evalkit::CorpusKind::audio;
        evalkit::SynthAudioSpec a = evalkit::default_audio_spec();
        a.seed = seed;
        a.duration_s = duration_s;
        a.clips_per_profile = clips_per_profile;
        a.sample_rate = sample_rate;
        spec.synth_audio = std::move(a);
        *manifest_path_out = dup_string(evalkit::synth_corpus_to_dir(spec, out_dir).string());
    });
}

opf_status opf_synth_default_visual(const char* out_dir, uint64_t seed,
                                    uint32_t images_per_color, uint32_t width, uint32_t height,
                                    char** manifest_path_out) {
    if (opf_status s = require(out_dir && manifest_path_out, "out_dir/out is null"))
        return s;
    return guarded([&] {
        evalkit::CorpusSpec spec;
        spec.kind = evalkit::CorpusKind::visual;
        evalkit::SynthVisualSpec v = evalkit::default_visual_spec();
        v.seed = seed;
        v.images_per_color = images_per_color;
        v.width = width;
        v.height = height;
        spec.synth_visual = std::move(v);
        *manifest_path_out = dup_string(evalkit::synth_corpus_to_dir(spec, out_dir).string());
    });
}

opf_status opf_duration_sweep(const opf_config* cfg, uint64_t seed, const double* durations,
                              size_t n_durations, double threshold, char** text_out,
                              char** csv_out) {
    if (opf_status s = require(cfg && durations && n_durations > 0, "cfg/durations is null"))
        return s;
    return guarded([&] {
        evalkit::SynthAudioSpec spec = evalkit::default_audio_spec();
        spec.seed = seed;
        std::vector<double> ds(durations, durations + n_durations);
        auto rows = evalkit::duration_sweep(spec, ds, threshold, cfg->cfg.audio);
        if (text_out)
            *text_out = dup_string(evalkit::sweep_table_text(rows));
        if (csv_out)
            *csv_out = dup_string(evalkit::sweep_table_csv(rows));
    });
}

/* ---- daemon ---- */

opf_status opf_server_create(opf_store* store, const opf_config* cfg, opf_server** out) {
    if (opf_status s = require(store && cfg && out, "store/cfg/out is null"))
        return s;
    return guarded([&] {
        *out = new opf_server{
            std::make_unique<gateway::GatewayServer>(*store->store, cfg->cfg)};
    });
}

opf_status opf_server_start(opf_server* srv) {
    if (opf_status s = require(srv != nullptr, "server is null"))
        return s;
    return guarded([&] { srv->server->start(); });
}

opf_status opf_server_port(const opf_server* srv, uint16_t* out) {
    if (opf_status s = require(srv && out, "server/out is null"))
        return s;
    *out = srv->server->port();
    return OPF_OK;
}

opf_status opf_server_run(opf_server* srv) {
    if (opf_status s = require(srv != nullptr, "server is null"))
        return s;
    return guarded([&] { srv->server->run(); });
}

opf_status opf_server_stop(opf_server* srv) {
    if (opf_status s = require(srv != nullptr, "server is null"))
        return s;
    return guarded([&] { srv->server->stop(); });
}

void opf_server_free(opf_server* srv) {
    delete srv;
}

opf_status opf_handle_request_line(opf_store* store, const opf_config* cfg, const char* line,
                                   char** response_out) {
    if (opf_status s = require(store && cfg && line && response_out, "argument is null"))
        return s;
    return guarded([&] {
        *response_out = dup_string(gateway::handle_request_line(*store->store, cfg->cfg, line));
    });
}

} // extern "C"
