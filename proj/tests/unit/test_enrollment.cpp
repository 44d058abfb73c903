#include <doctest.h>

#include "core/enrollment.hpp"
#include "core/errors.hpp"
#include "support/oracles.hpp"

#include <fstream>
#include <functional>
#include <optional>
#include <string>

using namespace opf;
using namespace opf::enroll;

namespace {

audio::AudioSignature sig(double mean) {
    audio::AudioSignature s;
    s.mean_centroid = mean;
    s.frame_centroids = {mean};
    return s;
}

vision::ColorHistogram hist(size_t index, uint32_t bins = 2) {
    vision::ColorHistogram h;
    h.bins_per_channel = bins;
    h.values.assign(static_cast<size_t>(bins) * bins * bins, 0.0);
    h.values[index] = 1.0;
    return h;
}

std::optional<Errc> code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

std::string msg_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("aggregation names round-trip") {
    CHECK(aggregation_from_name("mean") == Aggregation::mean);
    CHECK(aggregation_from_name("min") == Aggregation::min);
    CHECK(std::string(aggregation_name(Aggregation::mean)) == "mean");
    CHECK_THROWS_AS(aggregation_from_name("max"), Error);
}

TEST_CASE("identity_audio_distance worked values") {
    EnrollmentRecord rec;
    rec.audio_refs = {sig(500.0), sig(520.0)};

    CHECK(identity_audio_distance(rec, sig(510.0)) == 10.0);
    CHECK(identity_audio_distance(rec, sig(510.0), Aggregation::min) == 10.0);
    CHECK(identity_audio_distance(rec, sig(500.0)) == 10.0);
    CHECK(identity_audio_distance(rec, sig(500.0), Aggregation::min) == 0.0);

    EnrollmentRecord single;
    single.audio_refs = {sig(432.1)};
    CHECK(identity_audio_distance(single, sig(432.1)) == 0.0);

    EnrollmentRecord empty;
    CHECK(code_of([&] { identity_audio_distance(empty, sig(1.0)); }) ==
          Errc::factor_unavailable);
}

TEST_CASE("identity_visual_distance worked values") {
    EnrollmentRecord rec;
    rec.visual_refs = {hist(0)};
    CHECK(identity_visual_distance(rec, hist(0)) < 1e-12);

    vision::ColorHistogram q;
    q.bins_per_channel = 2;
    q.values.assign(8, 0.0);
    q.values[0] = 0.5;
    q.values[1] = 0.5;
    CHECK(identity_visual_distance(rec, q) ==
          doctest::Approx(0.34657359027997264).epsilon(1e-9));

    EnrollmentRecord empty;
    CHECK(code_of([&] { identity_visual_distance(empty, hist(0)); }) ==
          Errc::factor_unavailable);
}

TEST_CASE("store open modes") {
    testkit::TempDir dir("store");
    auto missing = dir.path() / "absent";

    CHECK(code_of([&] { EnrollmentStore(missing, OpenMode::open_existing); }) ==
          Errc::not_found);
    {
        EnrollmentStore store(missing, OpenMode::open_or_create);
        CHECK(store.size() == 0);
    }
    CHECK(std::filesystem::exists(missing / "manifest.json"));
    { EnrollmentStore reopened(missing, OpenMode::open_existing); }
    CHECK(code_of([&] { EnrollmentStore(missing, OpenMode::create_new); }) == Errc::conflict);
}

TEST_CASE("enroll and lookups") {
    testkit::TempDir dir("store");
    EnrollmentStore store(dir.path(), OpenMode::open_or_create);

    auto rec = store.enroll("car-1", "TAG-0001", {sig(500.0)}, {});
    CHECK(rec.identity_id == "car-1");
    CHECK(rec.rfid_tag == "TAG-0001");
    CHECK(rec.audio_refs.size() == 1);
    CHECK(rec.visual_refs.empty());
    CHECK_FALSE(rec.created_at.empty());
    CHECK(rec.created_at.back() == 'Z');

    CHECK(store.get("car-1").rfid_tag == "TAG-0001");
    REQUIRE(store.find_by_rfid("TAG-0001").has_value());
    CHECK(store.find_by_rfid("TAG-0001")->identity_id == "car-1");
    CHECK_FALSE(store.find_by_rfid("TAG-9999").has_value());
    CHECK(store.size() == 1);

    CHECK(code_of([&] { store.get("car-2"); }) == Errc::not_found);
    CHECK(code_of([&] { store.remove("car-2"); }) == Errc::not_found);

    store.remove("car-1");
    CHECK(store.size() == 0);
    CHECK_FALSE(store.find_by_rfid("TAG-0001").has_value());
}

TEST_CASE("enroll rejects duplicates and empty reference sets") {
    testkit::TempDir dir("store");
    EnrollmentStore store(dir.path(), OpenMode::open_or_create);
    store.enroll("car-1", "TAG-0001", {sig(500.0)}, {});

    CHECK(code_of([&] { store.enroll("car-1", "TAG-0002", {sig(1.0)}, {}); }) ==
          Errc::conflict);
    CHECK(code_of([&] { store.enroll("car-2", "TAG-0001", {sig(1.0)}, {}); }) ==
          Errc::conflict);
    CHECK(code_of([&] { store.enroll("car-2", "TAG-0002", {}, {}); }) ==
          Errc::empty_enrollment);
    CHECK(msg_of([&] { store.enroll("car-2", "TAG-0001", {sig(1.0)}, {}); }).find("car-1") !=
          std::string::npos);
}

TEST_CASE("reference lists are FIFO-capped") {
    testkit::TempDir dir("store");
    EnrollmentStore store(dir.path(), OpenMode::open_or_create);
    store.enroll("car-1", "TAG-0001", {sig(0.0)}, {});

    for (int i = 1; i <= 10; ++i)
        store.add_audio_reference("car-1", sig(static_cast<double>(i)));

    auto rec = store.get("car-1");
    REQUIRE(rec.audio_refs.size() == 10);
    CHECK(rec.audio_refs.front().mean_centroid == 1.0);
    CHECK(rec.audio_refs.back().mean_centroid == 10.0);

    auto after = store.add_audio_reference("car-1", sig(99.0), 5);
    REQUIRE(after.audio_refs.size() == 5);
    CHECK(after.audio_refs.front().mean_centroid == 7.0);
    CHECK(after.audio_refs.back().mean_centroid == 99.0);

    CHECK(code_of([&] { store.add_audio_reference("ghost", sig(1.0)); }) == Errc::not_found);
}

TEST_CASE("visual references must share a bin count") {
    testkit::TempDir dir("store");
    EnrollmentStore store(dir.path(), OpenMode::open_or_create);
    store.enroll("car-1", "TAG-0001", {}, {hist(0, 8)});

    store.add_visual_reference("car-1", hist(1, 8));
    CHECK(store.get("car-1").visual_refs.size() == 2);
    CHECK(code_of([&] { store.add_visual_reference("car-1", hist(0, 16)); }) ==
          Errc::incompatible_histogram);
    CHECK(code_of([&] {
        store.enroll("car-2", "TAG-0002", {}, {hist(0, 8), hist(0, 16)});
    }) == Errc::incompatible_histogram);
}

TEST_CASE("store persists across reopen") {
    testkit::TempDir dir("store");
    {
        EnrollmentStore store(dir.path(), OpenMode::open_or_create);
        store.enroll("car-1", "TAG-0001", {sig(512.5)}, {hist(3, 4)});
        store.enroll("car-2", "TAG-0002", {sig(873.25), sig(871.0)}, {});
    }
    EnrollmentStore store(dir.path(), OpenMode::open_existing);
    CHECK(store.size() == 2);
    auto rec = store.get("car-1");
    CHECK(rec.rfid_tag == "TAG-0001");
    REQUIRE(rec.audio_refs.size() == 1);
    CHECK(rec.audio_refs[0].mean_centroid == 512.5);
    REQUIRE(rec.visual_refs.size() == 1);
    CHECK(rec.visual_refs[0].bins_per_channel == 4);
    CHECK(rec.visual_refs[0].values[3] == 1.0);
    CHECK(store.get("car-2").audio_refs[1].mean_centroid == 871.0);
}

TEST_CASE("signatures round-trip bit-for-bit through the manifest") {
    testkit::TempDir dir("store");
    audio::AudioSignature s;
    s.mean_centroid = 440.12345678901234;
    s.frame_centroids = {439.9999999999999, 440.2468013579246};
    s.params.frame_size = 1024;
    s.params.hop_size = 256;
    s.params.window = audio::Window::rectangular;
    {
        EnrollmentStore store(dir.path(), OpenMode::open_or_create);
        store.enroll("car-1", "TAG-0001", {s}, {});
    }
    EnrollmentStore store(dir.path(), OpenMode::open_existing);
    auto back = store.get("car-1").audio_refs[0];
    CHECK(back.mean_centroid == s.mean_centroid);
    CHECK(back.frame_centroids == s.frame_centroids);
    CHECK(back.params.frame_size == 1024);
    CHECK(back.params.hop_size == 256);
    CHECK(back.params.window == audio::Window::rectangular);
}

TEST_CASE("manifest load failure taxonomy") {
    testkit::TempDir dir("store");
    auto manifest = dir.path() / "manifest.json";

    auto write_manifest = [&](const std::string& text) {
        std::ofstream out(manifest);
        out << text;
    };

    write_manifest("{not json");
    CHECK(code_of([&] { EnrollmentStore(dir.path(), OpenMode::open_existing); }) ==
          Errc::parse);

    write_manifest(R"({"format_version": 2, "records": []})");
    CHECK(code_of([&] { EnrollmentStore(dir.path(), OpenMode::open_existing); }) ==
          Errc::bad_version);

    write_manifest(R"({"format_version": 1, "records": [
        {"identity_id": "a", "rfid_tag": "T1", "audio_refs": [], "visual_refs": [],
         "created_at": "", "updated_at": ""},
        {"identity_id": "a", "rfid_tag": "T2", "audio_refs": [], "visual_refs": [],
         "created_at": "", "updated_at": ""}]})");
    CHECK(code_of([&] { EnrollmentStore(dir.path(), OpenMode::open_existing); }) ==
          Errc::parse);

    write_manifest(R"({"format_version": 1, "records": [
        {"identity_id": "a", "rfid_tag": "T1", "audio_refs": [], "visual_refs": [],
         "created_at": "", "updated_at": ""},
        {"identity_id": "b", "rfid_tag": "T1", "audio_refs": [], "visual_refs": [],
         "created_at": "", "updated_at": ""}]})");
    CHECK(code_of([&] { EnrollmentStore(dir.path(), OpenMode::open_existing); }) ==
          Errc::conflict);
}
