#include <doctest.h>

#include <oppfactor.h>

#include "support/oracles.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <thread>
#include <vector>

using json = nlohmann::json;

namespace {

struct StringOut {
    char* s = nullptr;
    ~StringOut() { opf_string_free(s); }
    std::string str() const { return s ? s : ""; }
};

std::vector<uint8_t> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json read_manifest(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return json::parse(in);
}

// label -> sample paths, resolved against the manifest directory
std::map<std::string, std::vector<std::string>> samples_by_label(const std::string& manifest_path) {
    auto m = read_manifest(manifest_path);
    auto base = std::filesystem::path(manifest_path).parent_path();
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& s : m.at("samples"))
        out[s.at("label").get<std::string>()].push_back(
            (base / s.at("path").get<std::string>()).string());
    return out;
}

struct ConfigHandle {
    opf_config* cfg = nullptr;
    ConfigHandle() { REQUIRE(opf_config_default(&cfg) == OPF_OK); }
    ~ConfigHandle() { opf_config_free(cfg); }
};

} // namespace

TEST_CASE("version and error reporting basics") {
    const char* v = opf_version();
    REQUIRE(v != nullptr);
    CHECK(std::strlen(v) >= 5);
    CHECK(std::string(v).find('.') != std::string::npos);

    REQUIRE(opf_last_error() != nullptr);

    CHECK(opf_config_default(nullptr) == OPF_E_INVALID_ARGUMENT);
    CHECK(std::string(opf_last_error()) == "out is null");
}

TEST_CASE("last error is thread local") {
    CHECK(opf_config_default(nullptr) == OPF_E_INVALID_ARGUMENT);
    CHECK(std::string(opf_last_error()) == "out is null");

    std::string worker_initial;
    std::string worker_after;
    std::thread t([&] {
        worker_initial = opf_last_error();
        opf_store* s = nullptr;
        opf_store_open(nullptr, OPF_OPEN_EXISTING, &s);
        worker_after = opf_last_error();
    });
    t.join();

    CHECK(worker_initial == "");
    CHECK(worker_after == "root_dir/out is null");
    CHECK(std::string(opf_last_error()) == "out is null");
}

TEST_CASE("free functions accept null") {
    opf_string_free(nullptr);
    opf_config_free(nullptr);
    opf_store_free(nullptr);
    opf_signature_free(nullptr);
    opf_histogram_free(nullptr);
    opf_decision_free(nullptr);
    opf_matrix_free(nullptr);
    opf_server_free(nullptr);
}

TEST_CASE("config handles expose thresholds, policy, and persistence") {
    ConfigHandle h;

    double audio_hz = 0.0;
    double visual = 0.0;
    REQUIRE(opf_config_get_thresholds(h.cfg, &audio_hz, &visual) == OPF_OK);
    CHECK(audio_hz == 100.0);
    CHECK(visual == 0.2);

    REQUIRE(opf_config_set_thresholds(h.cfg, 55.0, 0.31) == OPF_OK);
    REQUIRE(opf_config_get_thresholds(h.cfg, &audio_hz, &visual) == OPF_OK);
    CHECK(audio_hz == 55.0);
    CHECK(visual == 0.31);
    CHECK(opf_config_set_thresholds(h.cfg, -1.0, 0.2) == OPF_E_INVALID_ARGUMENT);

    CHECK(opf_config_set_policy(h.cfg, "k_of_n", 2) == OPF_OK);
    CHECK(opf_config_set_policy(h.cfg, "sometimes", 2) == OPF_E_INVALID_ARGUMENT);
    CHECK(opf_config_set_policy(h.cfg, "k_of_n", 0) == OPF_E_INVALID_ARGUMENT);
    CHECK(opf_config_set_policy(h.cfg, "k_of_n", 4) == OPF_E_INVALID_ARGUMENT);

    StringOut text;
    REQUIRE(opf_config_to_json(h.cfg, &text.s) == OPF_OK);
    auto j = json::parse(text.str());
    CHECK(j["thresholds"]["audio_max_distance_hz"] == 55.0);
    CHECK(j["policy"]["kind"] == "k_of_n");

    testkit::TempDir dir("capicfg");
    REQUIRE(opf_config_save(h.cfg, dir.str("app.json").c_str()) == OPF_OK);
    opf_config* loaded = nullptr;
    REQUIRE(opf_config_load(dir.str("app.json").c_str(), &loaded) == OPF_OK);
    REQUIRE(opf_config_get_thresholds(loaded, &audio_hz, &visual) == OPF_OK);
    CHECK(audio_hz == 55.0);
    opf_config_free(loaded);

    CHECK(opf_config_load(dir.str("missing.json").c_str(), &loaded) == OPF_E_IO);
}

TEST_CASE("signatures, histograms, store, and verification over the shared library") {
    testkit::TempDir dir("capi");
    ConfigHandle h;

    StringOut audio_manifest;
    REQUIRE(opf_synth_default_audio(dir.str("audio").c_str(), 5, 1.0, 2, 44100,
                                    &audio_manifest.s) == OPF_OK);
    CHECK(std::filesystem::exists(audio_manifest.str()));
    auto clips = samples_by_label(audio_manifest.str());
    REQUIRE(clips.size() == 6);

    StringOut visual_manifest;
    REQUIRE(opf_synth_default_visual(dir.str("visual").c_str(), 6, 2, 64, 64,
                                     &visual_manifest.s) == OPF_OK);
    auto images = samples_by_label(visual_manifest.str());
    REQUIRE(images.size() == 4);

    auto first_engine = clips.begin();
    auto other_engine = std::next(first_engine);
    REQUIRE(first_engine->second.size() == 2);

    opf_signature* ref_sig = nullptr;
    opf_signature* probe_sig = nullptr;
    opf_signature* other_sig = nullptr;
    REQUIRE(opf_signature_from_wav_file(first_engine->second[0].c_str(), h.cfg, &ref_sig) ==
            OPF_OK);
    REQUIRE(opf_signature_from_wav_file(first_engine->second[1].c_str(), h.cfg, &probe_sig) ==
            OPF_OK);
    REQUIRE(opf_signature_from_wav_file(other_engine->second[0].c_str(), h.cfg, &other_sig) ==
            OPF_OK);

    double hz = 0.0;
    REQUIRE(opf_signature_mean_centroid(ref_sig, &hz) == OPF_OK);
    CHECK(hz > 0.0);

    double self_d = -1.0;
    double ab = 0.0;
    double ba = 0.0;
    REQUIRE(opf_audio_distance(ref_sig, ref_sig, &self_d) == OPF_OK);
    CHECK(self_d == 0.0);
    REQUIRE(opf_audio_distance(ref_sig, other_sig, &ab) == OPF_OK);
    REQUIRE(opf_audio_distance(other_sig, ref_sig, &ba) == OPF_OK);
    CHECK(ab == ba);
    CHECK(ab > 0.0);

    SUBCASE("byte and file decoding agree") {
        auto bytes = slurp(first_engine->second[0]);
        opf_signature* from_bytes = nullptr;
        REQUIRE(opf_signature_from_wav_bytes(bytes.data(), bytes.size(), h.cfg, &from_bytes) ==
                OPF_OK);
        double hz_bytes = 0.0;
        REQUIRE(opf_signature_mean_centroid(from_bytes, &hz_bytes) == OPF_OK);
        CHECK(hz_bytes == hz);
        opf_signature_free(from_bytes);

        const uint8_t junk[] = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
        opf_signature* bad = nullptr;
        CHECK(opf_signature_from_wav_bytes(junk, sizeof(junk), h.cfg, &bad) == OPF_E_DECODE);
        CHECK(std::string(opf_last_error()).find("RIFF") != std::string::npos);
    }

    SUBCASE("histograms pick up sidecar masks and measure distance") {
        auto same_color = images.begin();
        REQUIRE(same_color->second.size() == 2);
        opf_histogram* a = nullptr;
        opf_histogram* b = nullptr;
        REQUIRE(opf_histogram_from_image_file(same_color->second[0].c_str(), nullptr, h.cfg,
                                              &a) == OPF_OK);
        REQUIRE(opf_histogram_from_image_file(same_color->second[1].c_str(), nullptr, h.cfg,
                                              &b) == OPF_OK);

        double self_v = -1.0;
        REQUIRE(opf_visual_distance(a, a, &self_v) == OPF_OK);
        CHECK(self_v < 1e-12);

        double within = 0.0;
        REQUIRE(opf_visual_distance(a, b, &within) == OPF_OK);
        CHECK(within < 0.2);

        double max_cross = 0.0;
        for (auto it = std::next(images.begin()); it != images.end(); ++it) {
            opf_histogram* c = nullptr;
            REQUIRE(opf_histogram_from_image_file(it->second[0].c_str(), nullptr, h.cfg, &c) ==
                    OPF_OK);
            double d = 0.0;
            REQUIRE(opf_visual_distance(a, c, &d) == OPF_OK);
            max_cross = std::max(max_cross, d);
            opf_histogram_free(c);
        }
        CHECK(max_cross > 0.2);

        opf_histogram* missing = nullptr;
        CHECK(opf_histogram_from_image_file(dir.str("nope.ppm").c_str(), nullptr, h.cfg,
                                            &missing) == OPF_E_IO);
        opf_histogram_free(a);
        opf_histogram_free(b);
    }

    SUBCASE("stores enroll, list, verify, and refuse duplicates") {
        opf_store* store = nullptr;
        REQUIRE(opf_store_open(dir.str("store").c_str(), OPF_CREATE_NEW, &store) == OPF_OK);

        const opf_signature* audio_refs[] = {ref_sig};
        REQUIRE(opf_store_enroll(store, "car-1", "TAG-0001", audio_refs, 1, nullptr, 0, 10) ==
                OPF_OK);
        size_t count = 0;
        REQUIRE(opf_store_count(store, &count) == OPF_OK);
        CHECK(count == 1);

        CHECK(opf_store_enroll(store, "car-1", "TAG-0002", audio_refs, 1, nullptr, 0, 10) ==
              OPF_E_CONFLICT);
        CHECK(opf_store_enroll(store, "car-2", "TAG-0001", audio_refs, 1, nullptr, 0, 10) ==
              OPF_E_CONFLICT);

        opf_histogram* hist = nullptr;
        REQUIRE(opf_histogram_from_image_file(images.begin()->second[0].c_str(), nullptr, h.cfg,
                                              &hist) == OPF_OK);
        REQUIRE(opf_store_add_visual_ref(store, "car-1", hist, 10) == OPF_OK);
        CHECK(opf_store_add_visual_ref(store, "ghost", hist, 10) == OPF_E_NOT_FOUND);
        opf_histogram_free(hist);

        StringOut listing;
        REQUIRE(opf_store_list_json(store, &listing.s) == OPF_OK);
        auto rows = json::parse(listing.str());
        REQUIRE(rows.size() == 1);
        CHECK(rows[0]["identity_id"] == "car-1");
        CHECK(rows[0]["rfid_tag"] == "TAG-0001");
        CHECK(rows[0]["audio_refs"] == 1);
        CHECK(rows[0]["visual_refs"] == 1);

        opf_decision* d = nullptr;
        REQUIRE(opf_verify_files(store, h.cfg, "TAG-0001", first_engine->second[1].c_str(),
                                 nullptr, nullptr, &d) == OPF_OK);
        int accepted = -1;
        REQUIRE(opf_decision_accepted(d, &accepted) == OPF_OK);
        CHECK(accepted == 1);
        StringOut dj;
        REQUIRE(opf_decision_to_json(d, &dj.s) == OPF_OK);
        auto decision = json::parse(dj.str());
        CHECK(decision["verdict"] == "accept");
        CHECK(decision["identity_id"] == "car-1");
        opf_decision_free(d);

        // the accepted probe was appended as a fresh audio reference
        StringOut after;
        REQUIRE(opf_store_list_json(store, &after.s) == OPF_OK);
        CHECK(json::parse(after.str())[0]["audio_refs"] == 2);

        opf_decision* deny = nullptr;
        REQUIRE(opf_verify_files(store, h.cfg, "TAG-0001", other_engine->second[1].c_str(),
                                 nullptr, nullptr, &deny) == OPF_OK);
        REQUIRE(opf_decision_accepted(deny, &accepted) == OPF_OK);
        CHECK(accepted == 0);
        opf_decision_free(deny);

        opf_decision* unknown = nullptr;
        REQUIRE(opf_verify_files(store, h.cfg, "TAG-9999", nullptr, nullptr, nullptr,
                                 &unknown) == OPF_OK);
        REQUIRE(opf_decision_accepted(unknown, &accepted) == OPF_OK);
        CHECK(accepted == 0);
        opf_decision_free(unknown);

        StringOut resp;
        REQUIRE(opf_handle_request_line(store, h.cfg, "", &resp.s) == OPF_OK);
        CHECK(json::parse(resp.str())["error"] == "empty request");

        REQUIRE(opf_store_remove(store, "car-1") == OPF_OK);
        CHECK(opf_store_remove(store, "car-1") == OPF_E_NOT_FOUND);
        opf_store_free(store);

        opf_store* absent = nullptr;
        CHECK(opf_store_open(dir.str("no-such-store").c_str(), OPF_OPEN_EXISTING, &absent) ==
              OPF_E_NOT_FOUND);
    }

    SUBCASE("matrix pipeline round trips through the C surface") {
        opf_matrix* m = nullptr;
        REQUIRE(opf_matrix_from_corpus_manifest(audio_manifest.str().c_str(), h.cfg, &m) ==
                OPF_OK);
        size_t n = 0;
        REQUIRE(opf_matrix_size(m, &n) == OPF_OK);
        CHECK(n == 12);

        double diag = -1.0;
        REQUIRE(opf_matrix_value(m, 0, 0, &diag) == OPF_OK);
        CHECK(diag == 0.0);
        double v01 = 0.0;
        double v10 = 0.0;
        REQUIRE(opf_matrix_value(m, 0, 1, &v01) == OPF_OK);
        REQUIRE(opf_matrix_value(m, 1, 0, &v10) == OPF_OK);
        CHECK(v01 == v10);
        CHECK(opf_matrix_value(m, 0, 12, &v01) == OPF_E_INVALID_ARGUMENT);

        double acc = 0.0;
        REQUIRE(opf_matrix_accuracy(m, 100.0, &acc) == OPF_OK);
        CHECK(acc >= 0.9);
        double cal_t = 0.0;
        double cal_a = 0.0;
        REQUIRE(opf_matrix_calibrate(m, &cal_t, &cal_a) == OPF_OK);
        CHECK(cal_t > 0.0);
        CHECK(cal_a >= 0.9);

        StringOut table;
        REQUIRE(opf_matrix_marked_table(m, 100.0, 4, &table.s) == OPF_OK);
        CHECK(table.str().find("*0*") != std::string::npos);

        StringOut report;
        REQUIRE(opf_matrix_accuracy_text(m, 100.0, &report.s) == OPF_OK);
        CHECK(report.str().find("pairs:") != std::string::npos);
        StringOut report_csv;
        REQUIRE(opf_matrix_accuracy_csv(m, 100.0, &report_csv.s) == OPF_OK);
        CHECK(report_csv.str().find("(all)") != std::string::npos);

        opf_matrix* avg = nullptr;
        REQUIRE(opf_matrix_identity_average(m, &avg) == OPF_OK);
        size_t avg_n = 0;
        REQUIRE(opf_matrix_size(avg, &avg_n) == OPF_OK);
        CHECK(avg_n == 6);

        REQUIRE(opf_matrix_write_csv(avg, dir.str("avg.csv").c_str()) == OPF_OK);
        opf_matrix* reread = nullptr;
        REQUIRE(opf_matrix_read_csv(dir.str("avg.csv").c_str(), &reread) == OPF_OK);
        double a_val = 0.0;
        double b_val = 0.0;
        REQUIRE(opf_matrix_value(avg, 2, 3, &a_val) == OPF_OK);
        REQUIRE(opf_matrix_value(reread, 2, 3, &b_val) == OPF_OK);
        CHECK(a_val == b_val);
        StringOut csv_text;
        REQUIRE(opf_matrix_to_csv(reread, &csv_text.s) == OPF_OK);
        CHECK(csv_text.str().rfind(",", 0) == 0);

        REQUIRE(opf_matrix_write_heatmap(avg, dir.str("heat").c_str(), 24) == OPF_OK);
        CHECK(std::filesystem::exists(dir.str("heat.pgm")));
        CHECK(std::filesystem::exists(dir.str("heat.svg")));

        opf_matrix_free(reread);
        opf_matrix_free(avg);
        opf_matrix_free(m);
    }

    opf_signature_free(ref_sig);
    opf_signature_free(probe_sig);
    opf_signature_free(other_sig);
}

TEST_CASE("duration sweep renders both table formats") {
    ConfigHandle h;
    const double durations[] = {0.5};
    StringOut text;
    StringOut csv;
    REQUIRE(opf_duration_sweep(h.cfg, 9, durations, 1, 100.0, &text.s, &csv.s) == OPF_OK);
    CHECK(text.str().find("duration_s") != std::string::npos);
    CHECK(csv.str().rfind("duration_s,", 0) == 0);
    CHECK(csv.str().find("0.5,") != std::string::npos);
}

TEST_CASE("server lifecycle over the C surface") {
    testkit::TempDir dir("capisrv");
    ConfigHandle h;
    REQUIRE(opf_config_set_bind(h.cfg, "127.0.0.1:0") == OPF_OK);

    opf_store* store = nullptr;
    REQUIRE(opf_store_open(dir.str("store").c_str(), OPF_OPEN_OR_CREATE, &store) == OPF_OK);

    opf_server* srv = nullptr;
    REQUIRE(opf_server_create(store, h.cfg, &srv) == OPF_OK);
    REQUIRE(opf_server_start(srv) == OPF_OK);
    uint16_t port = 0;
    REQUIRE(opf_server_port(srv, &port) == OPF_OK);
    CHECK(port != 0);

    opf_status run_status = OPF_E_INTERNAL;
    std::thread runner([&] { run_status = opf_server_run(srv); });
    REQUIRE(opf_server_stop(srv) == OPF_OK);
    runner.join();
    CHECK(run_status == OPF_OK);

    opf_server_free(srv);
    opf_store_free(store);
}
