#include "core/enrollment.hpp"

#include "core/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>

namespace opf::enroll {
namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ordered_json signature_to_json(const audio::AudioSignature& sig) {
    ordered_json j;
    j["mean_centroid_hz"] = sig.mean_centroid;
    j["frame_centroids_hz"] = sig.frame_centroids;
    j["frame_size"] = sig.params.frame_size;
    j["hop_size"] = sig.params.hop_size;
    j["window"] = audio::window_name(sig.params.window);
    return j;
}

audio::AudioSignature signature_from_json(const ordered_json& j) {
    audio::AudioSignature sig;
    sig.mean_centroid = j.at("mean_centroid_hz").get<double>();
    sig.frame_centroids = j.at("frame_centroids_hz").get<std::vector<double>>();
    sig.params.frame_size = j.at("frame_size").get<uint32_t>();
    sig.params.hop_size = j.at("hop_size").get<uint32_t>();
    sig.params.window = audio::window_from_name(j.at("window").get<std::string>());
    return sig;
}

ordered_json histogram_to_json(const vision::ColorHistogram& hist) {
    ordered_json j;
    j["bins_per_channel"] = hist.bins_per_channel;
    j["values"] = hist.values;
    return j;
}

vision::ColorHistogram histogram_from_json(const ordered_json& j) {
    vision::ColorHistogram hist;
    hist.bins_per_channel = j.at("bins_per_channel").get<uint32_t>();
    hist.values = j.at("values").get<std::vector<double>>();
    size_t expected = static_cast<size_t>(hist.bins_per_channel) * hist.bins_per_channel *
                      hist.bins_per_channel;
    if (hist.values.size() != expected)
        raise(Errc::parse, "histogram value count does not match bins_per_channel");
    return hist;
}

void trim_front(auto& refs, uint32_t max_refs) {
    if (max_refs == 0)
        raise(Errc::invalid_argument, "max_refs must be positive");
    while (refs.size() > max_refs)
        refs.erase(refs.begin());
}

void check_visual_bins(const std::vector<vision::ColorHistogram>& refs,
                       const vision::ColorHistogram& next) {
    if (!refs.empty() && refs.front().bins_per_channel != next.bins_per_channel)
        raise(Errc::incompatible_histogram,
              "visual reference uses " + std::to_string(next.bins_per_channel) +
                  " bins per channel but the record holds " +
                  std::to_string(refs.front().bins_per_channel));
}

} // namespace

Aggregation aggregation_from_name(const std::string& name) {
    if (name == "mean")
        return Aggregation::mean;
    if (name == "min")
        return Aggregation::min;
    raise(Errc::invalid_argument, "unknown aggregation: " + name);
}

const char* aggregation_name(Aggregation a) {
    return a == Aggregation::mean ? "mean" : "min";
}

namespace {

double aggregate(const std::vector<double>& distances, Aggregation agg) {
    if (agg == Aggregation::min)
        return *std::min_element(distances.begin(), distances.end());
    double sum = 0.0;
    for (double d : distances)
        sum += d;
    return sum / static_cast<double>(distances.size());
}

} // namespace

double identity_audio_distance(const EnrollmentRecord& record, const audio::AudioSignature& probe,
                               Aggregation agg) {
    if (record.audio_refs.empty())
        raise(Errc::factor_unavailable, "identity " + record.identity_id + " has no audio references");
    std::vector<double> distances;
    distances.reserve(record.audio_refs.size());
    for (const auto& ref : record.audio_refs)
        distances.push_back(audio::audio_distance(ref, probe));
    return aggregate(distances, agg);
}

double identity_visual_distance(const EnrollmentRecord& record, const vision::ColorHistogram& probe,
                                Aggregation agg) {
    if (record.visual_refs.empty())
        raise(Errc::factor_unavailable,
              "identity " + record.identity_id + " has no visual references");
    std::vector<double> distances;
    distances.reserve(record.visual_refs.size());
    for (const auto& ref : record.visual_refs)
        distances.push_back(vision::bhattacharyya_distance(ref, probe));
    return aggregate(distances, agg);
}

EnrollmentStore::EnrollmentStore(fs::path root, OpenMode mode) : root_(std::move(root)) {
    std::error_code ec;
    bool exists = fs::exists(root_ / "manifest.json", ec);
    switch (mode) {
    case OpenMode::open_existing:
        if (!exists)
            raise(Errc::not_found, "no enrollment store at " + root_.string());
        break;
    case OpenMode::create_new:
        if (exists)
            raise(Errc::conflict, "enrollment store already exists at " + root_.string());
        break;
    case OpenMode::open_or_create:
        break;
    }
    if (exists) {
        load();
    } else {
        fs::create_directories(root_, ec);
        if (ec)
            raise(Errc::io, "cannot create store directory " + root_.string() + ": " + ec.message());
        std::unique_lock lock(mutex_);
        persist_locked();
    }
}

void EnrollmentStore::load() {
    fs::path manifest = root_ / "manifest.json";
    std::ifstream in(manifest, std::ios::binary);
    if (!in)
        raise(Errc::io, "cannot open " + manifest.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::parse, "malformed store manifest: " + std::string(e.what()));
    }
    try {
        uint32_t version = j.at("format_version").get<uint32_t>();
        if (version != kFormatVersion)
            raise(Errc::bad_version,
                  "store format_version " + std::to_string(version) + " is not supported");
        std::map<std::string, EnrollmentRecord> loaded;
        for (const auto& rj : j.at("records")) {
            EnrollmentRecord rec;
            rec.identity_id = rj.at("identity_id").get<std::string>();
            rec.rfid_tag = rj.at("rfid_tag").get<std::string>();
            for (const auto& sj : rj.at("audio_refs"))
                rec.audio_refs.push_back(signature_from_json(sj));
            for (const auto& hj : rj.at("visual_refs"))
                rec.visual_refs.push_back(histogram_from_json(hj));
            rec.created_at = rj.at("created_at").get<std::string>();
            rec.updated_at = rj.at("updated_at").get<std::string>();
            if (rec.identity_id.empty())
                raise(Errc::parse, "record with empty identity_id");
            for (const auto& hist : rec.visual_refs)
                check_visual_bins(rec.visual_refs, hist);
            for (const auto& [id, other] : loaded)
                if (other.rfid_tag == rec.rfid_tag)
                    raise(Errc::conflict, "duplicate rfid_tag in manifest: " + rec.rfid_tag);
            if (!loaded.emplace(rec.identity_id, std::move(rec)).second)
                raise(Errc::parse, "duplicate identity_id in manifest");
        }
        std::unique_lock lock(mutex_);
        records_ = std::move(loaded);
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::parse, "malformed store manifest: " + std::string(e.what()));
    }
}

void EnrollmentStore::persist_locked() const {
    ordered_json j;
    j["format_version"] = kFormatVersion;
    ordered_json records = ordered_json::array();
    for (const auto& [id, rec] : records_) {
        ordered_json rj;
        rj["identity_id"] = rec.identity_id;
        rj["rfid_tag"] = rec.rfid_tag;
        ordered_json audio = ordered_json::array();
        for (const auto& sig : rec.audio_refs)
            audio.push_back(signature_to_json(sig));
        rj["audio_refs"] = std::move(audio);
        ordered_json visual = ordered_json::array();
        for (const auto& hist : rec.visual_refs)
            visual.push_back(histogram_to_json(hist));
        rj["visual_refs"] = std::move(visual);
        rj["created_at"] = rec.created_at;
        rj["updated_at"] = rec.updated_at;
        records.push_back(std::move(rj));
    }
    j["records"] = std::move(records);

    fs::path manifest = root_ / "manifest.json";
    fs::path tmp = root_ / "manifest.json.tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            raise(Errc::io, "cannot write " + tmp.string());
        out << j.dump(2) << '\n';
        out.flush();
        if (!out)
            raise(Errc::io, "short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, manifest, ec);
    if (ec)
        raise(Errc::io, "cannot replace " + manifest.string() + ": " + ec.message());
}

EnrollmentRecord EnrollmentStore::enroll(const std::string& identity_id,
                                         const std::string& rfid_tag,
                                         std::vector<audio::AudioSignature> audio_refs,
                                         std::vector<vision::ColorHistogram> visual_refs,
                                         uint32_t max_refs) {
    if (identity_id.empty())
        raise(Errc::invalid_argument, "identity_id must not be empty");
    if (rfid_tag.empty())
        raise(Errc::invalid_argument, "rfid_tag must not be empty");
    if (audio_refs.empty() && visual_refs.empty())
        raise(Errc::empty_enrollment, "enrollment needs at least one reference");
    for (const auto& hist : visual_refs)
        check_visual_bins(visual_refs, hist);
    trim_front(audio_refs, max_refs);
    trim_front(visual_refs, max_refs);

    std::unique_lock lock(mutex_);
    if (records_.count(identity_id))
        raise(Errc::conflict, "identity " + identity_id + " is already enrolled");
    for (const auto& [id, rec] : records_)
        if (rec.rfid_tag == rfid_tag)
            raise(Errc::conflict, "rfid tag " + rfid_tag + " is already assigned to " + id);

    EnrollmentRecord rec;
    rec.identity_id = identity_id;
    rec.rfid_tag = rfid_tag;
    rec.audio_refs = std::move(audio_refs);
    rec.visual_refs = std::move(visual_refs);
    rec.created_at = now_iso8601();
    rec.updated_at = rec.created_at;
    auto [it, inserted] = records_.emplace(identity_id, std::move(rec));
    (void)inserted;
    persist_locked();
    return it->second;
}

EnrollmentRecord EnrollmentStore::add_audio_reference(const std::string& identity_id,
                                                      const audio::AudioSignature& ref,
                                                      uint32_t max_refs) {
    std::unique_lock lock(mutex_);
    auto it = records_.find(identity_id);
    if (it == records_.end())
        raise(Errc::not_found, "identity " + identity_id + " is not enrolled");
    it->second.audio_refs.push_back(ref);
    trim_front(it->second.audio_refs, max_refs);
    it->second.updated_at = now_iso8601();
    persist_locked();
    return it->second;
}

EnrollmentRecord EnrollmentStore::add_visual_reference(const std::string& identity_id,
                                                       const vision::ColorHistogram& ref,
                                                       uint32_t max_refs) {
    std::unique_lock lock(mutex_);
    auto it = records_.find(identity_id);
    if (it == records_.end())
        raise(Errc::not_found, "identity " + identity_id + " is not enrolled");
    check_visual_bins(it->second.visual_refs, ref);
    it->second.visual_refs.push_back(ref);
    trim_front(it->second.visual_refs, max_refs);
    it->second.updated_at = now_iso8601();
    persist_locked();
    return it->second;
}

EnrollmentRecord EnrollmentStore::get(const std::string& identity_id) const {
    std::shared_lock lock(mutex_);
    auto it = records_.find(identity_id);
    if (it == records_.end())
        raise(Errc::not_found, "identity " + identity_id + " is not enrolled");
    return it->second;
}

std::optional<EnrollmentRecord> EnrollmentStore::find_by_rfid(const std::string& rfid_tag) const {
    std::shared_lock lock(mutex_);
    for (const auto& [id, rec] : records_)
        if (rec.rfid_tag == rfid_tag)
            return rec;
    return std::nullopt;
}

std::vector<EnrollmentRecord> EnrollmentStore::list() const {
    std::shared_lock lock(mutex_);
    std::vector<EnrollmentRecord> out;
    out.reserve(records_.size());
    for (const auto& [id, rec] : records_)
        out.push_back(rec);
    return out;
}

void EnrollmentStore::remove(const std::string& identity_id) {
    std::unique_lock lock(mutex_);
    auto it = records_.find(identity_id);
    if (it == records_.end())
        raise(Errc::not_found, "identity " + identity_id + " is not enrolled");
    records_.erase(it);
    persist_locked();
}

size_t EnrollmentStore::size() const {
    std::shared_lock lock(mutex_);
    return records_.size();
}

} // namespace opf::enroll
