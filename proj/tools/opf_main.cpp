// opf: command-line front end over the liboppfactor C API.
//
// Exit codes: 0 success (and verify accept), 1 verify deny, 2 usage error,
// 3 I/O or data error.

#include <oppfactor.h>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace {

constexpr int kExitDeny = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

int fail(opf_status status) {
    std::fprintf(stderr, "opf: %s\n", opf_last_error());
    return status == OPF_E_INVALID_ARGUMENT ? kExitUsage : kExitData;
}

struct ConfigHandle {
    opf_config* cfg = nullptr;
    ~ConfigHandle() { opf_config_free(cfg); }
};

struct StoreHandle {
    opf_store* store = nullptr;
    ~StoreHandle() { opf_store_free(store); }
};

struct MatrixHandle {
    opf_matrix* m = nullptr;
    ~MatrixHandle() { opf_matrix_free(m); }
};

struct OwnedString {
    char* s = nullptr;
    ~OwnedString() { opf_string_free(s); }
};

// Shared flags for loading a config file plus the common overrides.
struct ConfigFlags {
    std::string config_path;
    std::string policy;
    uint32_t k = 2;
    double audio_threshold = -1.0;
    double visual_threshold = -1.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--policy", policy, "decision policy: all, k_of_n, rfid_plus_any");
        cmd->add_option("--k", k, "quorum for the k_of_n policy")->check(CLI::Range(1u, 3u));
        cmd->add_option("--audio-threshold", audio_threshold,
                        "audio distance threshold in Hz");
        cmd->add_option("--visual-threshold", visual_threshold,
                        "visual distance threshold");
    }

    opf_status build(ConfigHandle& out) const {
        opf_status s = config_path.empty() ? opf_config_default(&out.cfg)
                                           : opf_config_load(config_path.c_str(), &out.cfg);
        if (s != OPF_OK)
            return s;
        if (!policy.empty()) {
            s = opf_config_set_policy(out.cfg, policy.c_str(), k);
            if (s != OPF_OK)
                return s;
        }
        if (audio_threshold >= 0.0 || visual_threshold >= 0.0) {
            double a, v;
            opf_config_get_thresholds(out.cfg, &a, &v);
            if (audio_threshold >= 0.0)
                a = audio_threshold;
            if (visual_threshold >= 0.0)
                v = visual_threshold;
            s = opf_config_set_thresholds(out.cfg, a, v);
            if (s != OPF_OK)
                return s;
        }
        return OPF_OK;
    }
};

int cmd_enroll(const std::string& store_dir, const std::string& id, const std::string& tag,
               const std::vector<std::string>& audio_files,
               const std::vector<std::string>& image_files, uint32_t max_refs,
               const ConfigFlags& cf) {
    ConfigHandle cfg;
    if (opf_status s = cf.build(cfg))
        return fail(s);
    StoreHandle store;
    if (opf_status s = opf_store_open(store_dir.c_str(), OPF_OPEN_OR_CREATE, &store.store))
        return fail(s);

    std::vector<opf_signature*> sigs;
    std::vector<opf_histogram*> hists;
    opf_status status = OPF_OK;
    for (const auto& path : audio_files) {
        opf_signature* sig = nullptr;
        status = opf_signature_from_wav_file(path.c_str(), cfg.cfg, &sig);
        if (status != OPF_OK)
            break;
        sigs.push_back(sig);
    }
    if (status == OPF_OK) {
        for (const auto& path : image_files) {
            opf_histogram* hist = nullptr;
            status = opf_histogram_from_image_file(path.c_str(), nullptr, cfg.cfg, &hist);
            if (status != OPF_OK)
                break;
            hists.push_back(hist);
        }
    }
    if (status == OPF_OK) {
        status = opf_store_enroll(store.store, id.c_str(), tag.c_str(),
                                  const_cast<const opf_signature* const*>(sigs.data()),
                                  sigs.size(),
                                  const_cast<const opf_histogram* const*>(hists.data()),
                                  hists.size(), max_refs);
    }
    for (auto* sig : sigs)
        opf_signature_free(sig);
    for (auto* hist : hists)
        opf_histogram_free(hist);
    if (status != OPF_OK)
        return fail(status);
    std::printf("enrolled %s (tag %s): %zu audio, %zu visual reference(s)\n", id.c_str(),
                tag.c_str(), audio_files.size(), image_files.size());
    return 0;
}

int cmd_add_ref(const std::string& store_dir, const std::string& id, const std::string& audio,
                const std::string& image, uint32_t max_refs, const ConfigFlags& cf) {
    if (audio.empty() == image.empty()) {
        std::fprintf(stderr, "opf: give exactly one of --audio or --image\n");
        return kExitUsage;
    }
    ConfigHandle cfg;
    if (opf_status s = cf.build(cfg))
        return fail(s);
    StoreHandle store;
    if (opf_status s = opf_store_open(store_dir.c_str(), OPF_OPEN_EXISTING, &store.store))
        return fail(s);
    if (!audio.empty()) {
        opf_signature* sig = nullptr;
        if (opf_status s = opf_signature_from_wav_file(audio.c_str(), cfg.cfg, &sig))
            return fail(s);
        opf_status s = opf_store_add_audio_ref(store.store, id.c_str(), sig, max_refs);
        opf_signature_free(sig);
        if (s != OPF_OK)
            return fail(s);
    } else {
        opf_histogram* hist = nullptr;
        if (opf_status s = opf_histogram_from_image_file(image.c_str(), nullptr, cfg.cfg, &hist))
            return fail(s);
        opf_status s = opf_store_add_visual_ref(store.store, id.c_str(), hist, max_refs);
        opf_histogram_free(hist);
        if (s != OPF_OK)
            return fail(s);
    }
    std::printf("added reference to %s\n", id.c_str());
    return 0;
}

int cmd_verify(const std::string& store_dir, const std::string& tag, const std::string& audio,
               const std::string& image, const std::string& mask, const ConfigFlags& cf) {
    ConfigHandle cfg;
    if (opf_status s = cf.build(cfg))
        return fail(s);
    StoreHandle store;
    if (opf_status s = opf_store_open(store_dir.c_str(), OPF_OPEN_EXISTING, &store.store))
        return fail(s);
    opf_decision* d = nullptr;
    opf_status s = opf_verify_files(store.store, cfg.cfg, tag.c_str(),
                                    audio.empty() ? nullptr : audio.c_str(),
                                    image.empty() ? nullptr : image.c_str(),
                                    mask.empty() ? nullptr : mask.c_str(), &d);
    if (s != OPF_OK)
        return fail(s);
    OwnedString json;
    opf_decision_to_json(d, &json.s);
    std::printf("%s\n", json.s);
    int accepted = 0;
    opf_decision_accepted(d, &accepted);
    opf_decision_free(d);
    return accepted ? 0 : kExitDeny;
}

int load_matrix(const std::string& corpus, const std::string& csv, bool identity_average,
                const ConfigHandle& cfg, MatrixHandle& out) {
    opf_status s;
    if (!corpus.empty())
        s = opf_matrix_from_corpus_manifest(corpus.c_str(), cfg.cfg, &out.m);
    else
        s = opf_matrix_read_csv(csv.c_str(), &out.m);
    if (s != OPF_OK)
        return fail(s);
    if (identity_average) {
        opf_matrix* avg = nullptr;
        s = opf_matrix_identity_average(out.m, &avg);
        if (s != OPF_OK)
            return fail(s);
        opf_matrix_free(out.m);
        out.m = avg;
    }
    return 0;
}

int cmd_matrix(const std::string& corpus, bool identity_average, const std::string& out_path,
               const ConfigFlags& cf) {
    ConfigHandle cfg;
    if (opf_status s = cf.build(cfg))
        return fail(s);
    MatrixHandle m;
    if (int rc = load_matrix(corpus, "", identity_average, cfg, m))
        return rc;
    if (out_path.empty()) {
        OwnedString csv;
        if (opf_status s = opf_matrix_to_csv(m.m, &csv.s))
            return fail(s);
        std::fputs(csv.s, stdout);
    } else {
        if (opf_status s = opf_matrix_write_csv(m.m, out_path.c_str()))
            return fail(s);
        std::fprintf(stderr, "wrote %s\n", out_path.c_str());
    }
    return 0;
}

int cmd_heatmap(const std::string& corpus, const std::string& csv, bool identity_average,
                const std::string& out_base, uint32_t cell_px, const ConfigFlags& cf) {
    ConfigHandle cfg;
    if (opf_status s = cf.build(cfg))
        return fail(s);
    MatrixHandle m;
    if (int rc = load_matrix(corpus, csv, identity_average, cfg, m))
        return rc;
    if (opf_status s = opf_matrix_write_heatmap(m.m, out_base.c_str(), cell_px))
        return fail(s);
    std::fprintf(stderr, "wrote %s.pgm and %s.svg\n", out_base.c_str(), out_base.c_str());
    return 0;
}

int cmd_accuracy(const std::string& corpus, const std::string& csv, double threshold,
                 bool calibrate, bool as_csv, bool marked, const ConfigFlags& cf) {
    ConfigHandle cfg;
    if (opf_status s = cf.build(cfg))
        return fail(s);
    MatrixHandle m;
    if (int rc = load_matrix(corpus, csv, false, cfg, m))
        return rc;
    if (calibrate) {
        double acc = 0.0;
        if (opf_status s = opf_matrix_calibrate(m.m, &threshold, &acc))
            return fail(s);
        std::fprintf(stderr, "calibrated threshold %.17g (accuracy %.4f)\n", threshold, acc);
    }
    OwnedString report;
    opf_status s = as_csv ? opf_matrix_accuracy_csv(m.m, threshold, &report.s)
                          : opf_matrix_accuracy_text(m.m, threshold, &report.s);
    if (s != OPF_OK)
        return fail(s);
    std::fputs(report.s, stdout);
    if (marked) {
        OwnedString table;
        if (opf_status ts = opf_matrix_marked_table(m.m, threshold, 4, &table.s))
            return fail(ts);
        std::fputs(table.s, stdout);
    }
    return 0;
}

int cmd_sweep(std::vector<double> durations, double threshold, uint64_t seed, bool as_csv,
              const ConfigFlags& cf) {
    ConfigHandle cfg;
    if (opf_status s = cf.build(cfg))
        return fail(s);
    if (durations.empty())
        durations = {5.0, 2.0, 1.0};
    OwnedString text, csv;
    opf_status s = opf_duration_sweep(cfg.cfg, seed, durations.data(), durations.size(),
                                      threshold, &text.s, &csv.s);
    if (s != OPF_OK)
        return fail(s);
    std::fputs(as_csv ? csv.s : text.s, stdout);
    return 0;
}

int cmd_synth(const std::string& kind, const std::string& out_dir, uint64_t seed,
              double duration, uint32_t clips, uint32_t rate, uint32_t images, uint32_t width,
              uint32_t height) {
    OwnedString manifest;
    opf_status s;
    if (kind == "audio")
        s = opf_synth_default_audio(out_dir.c_str(), seed, duration, clips, rate, &manifest.s);
    else if (kind == "visual")
        s = opf_synth_default_visual(out_dir.c_str(), seed, images, width, height, &manifest.s);
    else {
        std::fprintf(stderr, "opf: --kind must be audio or visual\n");
        return kExitUsage;
    }
    if (s != OPF_OK)
        return fail(s);
    std::printf("%s\n", manifest.s);
    return 0;
}

int cmd_serve(const std::string& store_dir, const std::string& bind, const ConfigFlags& cf) {
    ConfigHandle cfg;
    if (opf_status s = cf.build(cfg))
        return fail(s);
    if (!bind.empty()) {
        if (opf_status s = opf_config_set_bind(cfg.cfg, bind.c_str()))
            return fail(s);
    }
    StoreHandle store;
    if (opf_status s = opf_store_open(store_dir.c_str(), OPF_OPEN_EXISTING, &store.store))
        return fail(s);
    opf_server* srv = nullptr;
    if (opf_status s = opf_server_create(store.store, cfg.cfg, &srv))
        return fail(s);
    opf_status s = opf_server_start(srv);
    if (s != OPF_OK) {
        opf_server_free(srv);
        return fail(s);
    }
    uint16_t port = 0;
    opf_server_port(srv, &port);
    std::fprintf(stderr, "listening on port %u\n", unsigned(port));
    s = opf_server_run(srv);
    opf_server_free(srv);
    if (s != OPF_OK)
        return fail(s);
    return 0;
}

int cmd_show_config(const ConfigFlags& cf) {
    ConfigHandle cfg;
    if (opf_status s = cf.build(cfg))
        return fail(s);
    OwnedString json;
    if (opf_status s = opf_config_to_json(cfg.cfg, &json.s))
        return fail(s);
    std::printf("%s\n", json.s);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-factor vehicle authentication toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", opf_version());

    std::string store_dir, id, tag, audio, image, mask, corpus, csv, out_path, bind;
    std::vector<std::string> audio_files, image_files;
    std::string kind = "audio";
    uint32_t max_refs = 10, cell_px = 16, clips = 10, rate = 44100, images = 8, width = 64,
             height = 64;
    uint64_t seed = 1;
    double threshold = -1.0, duration = 2.0;
    std::vector<double> durations;
    bool identity_average = false, calibrate = false, as_csv = false, marked = false;

    ConfigFlags enroll_cf, addref_cf, verify_cf, matrix_cf, heatmap_cf, accuracy_cf, sweep_cf,
        serve_cf, show_cf;

    auto* enroll = app.add_subcommand("enroll", "Register an identity with reference captures");
    enroll->add_option("--store", store_dir, "store directory")->required();
    enroll->add_option("--id", id, "identity id")->required();
    enroll->add_option("--tag", tag, "RFID tag")->required();
    enroll->add_option("--audio", audio_files, "reference WAV file(s)");
    enroll->add_option("--image", image_files, "reference PPM file(s)");
    enroll->add_option("--max-refs", max_refs, "reference cap per factor");
    enroll_cf.attach(enroll);

    auto* addref = app.add_subcommand("add-ref", "Append a reference capture to an identity");
    addref->add_option("--store", store_dir, "store directory")->required();
    addref->add_option("--id", id, "identity id")->required();
    addref->add_option("--audio", audio, "WAV file");
    addref->add_option("--image", image, "PPM file");
    addref->add_option("--max-refs", max_refs, "reference cap per factor");
    addref_cf.attach(addref);

    auto* verify = app.add_subcommand("verify", "Authenticate a probe against the store");
    verify->add_option("--store", store_dir, "store directory")->required();
    verify->add_option("--tag", tag, "RFID tag read at the gate")->required();
    verify->add_option("--audio", audio, "probe WAV file");
    verify->add_option("--image", image, "probe PPM file");
    verify->add_option("--mask", mask, "foreground mask PGM for the probe image");
    verify_cf.attach(verify);

    auto* matrix = app.add_subcommand("matrix", "Pairwise distance matrix for a corpus");
    matrix->add_option("--corpus", corpus, "corpus manifest JSON")->required();
    matrix->add_flag("--identity-average", identity_average, "average per identity");
    matrix->add_option("--out", out_path, "output CSV (default: stdout)");
    matrix_cf.attach(matrix);

    auto* heatmap = app.add_subcommand("heatmap", "Grayscale heatmap of a distance matrix");
    heatmap->add_option("--corpus", corpus, "corpus manifest JSON");
    heatmap->add_option("--matrix", csv, "matrix CSV produced by `matrix`");
    heatmap->add_flag("--identity-average", identity_average, "average per identity");
    heatmap->add_option("--out", out_path, "output base path (.pgm/.svg appended)")->required();
    heatmap->add_option("--cell-px", cell_px, "pixels per matrix cell");
    heatmap_cf.attach(heatmap);

    auto* accuracy = app.add_subcommand("accuracy", "Pairwise accuracy at a threshold");
    accuracy->add_option("--corpus", corpus, "corpus manifest JSON");
    accuracy->add_option("--matrix", csv, "matrix CSV produced by `matrix`");
    accuracy->add_option("--threshold", threshold, "distance threshold");
    accuracy->add_flag("--calibrate", calibrate, "pick the best threshold on this matrix");
    accuracy->add_flag("--csv", as_csv, "CSV output instead of text");
    accuracy->add_flag("--marked", marked, "also print the marked distance table");
    accuracy_cf.attach(accuracy);

    auto* sweep = app.add_subcommand("sweep", "Accuracy across clip durations (built-in fleet)");
    sweep->add_option("--durations", durations, "clip durations in seconds");
    sweep->add_option("--threshold", threshold, "audio distance threshold in Hz");
    sweep->add_option("--seed", seed, "base corpus seed");
    sweep->add_flag("--csv", as_csv, "CSV output instead of text");
    sweep_cf.attach(sweep);

    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus to a directory");
    synth->add_option("--kind", kind, "audio or visual")->required();
    synth->add_option("--out", out_path, "output directory")->required();
    synth->add_option("--seed", seed, "base corpus seed");
    synth->add_option("--duration", duration, "clip duration in seconds (audio)");
    synth->add_option("--clips", clips, "clips per profile (audio)");
    synth->add_option("--rate", rate, "sample rate in Hz (audio)");
    synth->add_option("--images", images, "images per color (visual)");
    synth->add_option("--width", width, "image width (visual)");
    synth->add_option("--height", height, "image height (visual)");

    auto* serve = app.add_subcommand("serve", "Run the authentication daemon");
    serve->add_option("--store", store_dir, "store directory")->required();
    serve->add_option("--bind", bind, "bind address host:port");
    serve_cf.attach(serve);

    auto* show = app.add_subcommand("show-config", "Print the effective configuration");
    show_cf.attach(show);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    if (enroll->parsed())
        return cmd_enroll(store_dir, id, tag, audio_files, image_files, max_refs, enroll_cf);
    if (addref->parsed())
        return cmd_add_ref(store_dir, id, audio, image, max_refs, addref_cf);
    if (verify->parsed())
        return cmd_verify(store_dir, tag, audio, image, mask, verify_cf);
    if (matrix->parsed())
        return cmd_matrix(corpus, identity_average, out_path, matrix_cf);
    if (heatmap->parsed()) {
        if (corpus.empty() == csv.empty()) {
            std::fprintf(stderr, "opf: give exactly one of --corpus or --matrix\n");
            return kExitUsage;
        }
        return cmd_heatmap(corpus, csv, identity_average, out_path, cell_px, heatmap_cf);
    }
    if (accuracy->parsed()) {
        if (corpus.empty() == csv.empty()) {
            std::fprintf(stderr, "opf: give exactly one of --corpus or --matrix\n");
            return kExitUsage;
        }
        if (!calibrate && threshold < 0.0) {
            std::fprintf(stderr, "opf: give --threshold or --calibrate\n");
            return kExitUsage;
        }
        return cmd_accuracy(corpus, csv, threshold, calibrate, as_csv, marked, accuracy_cf);
    }
    if (sweep->parsed()) {
        if (threshold < 0.0)
            threshold = 100.0;
        return cmd_sweep(durations, threshold, seed, as_csv, sweep_cf);
    }
    if (synth->parsed())
        return cmd_synth(kind, out_path, seed, duration, clips, rate, images, width, height);
    if (serve->parsed())
        return cmd_serve(store_dir, bind, serve_cf);
    if (show->parsed())
        return cmd_show_config(show_cf);
    return kExitUsage;
}
