#pragma once

#include "core/audio.hpp"
#include "core/vision.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace opf::enroll {

// One authorized identity: its RFID tag plus the reference signature sets a
// fresh capture is compared against.
struct EnrollmentRecord {
    std::string identity_id;
    std::string rfid_tag;
    std::vector<audio::AudioSignature> audio_refs;
    std::vector<vision::ColorHistogram> visual_refs;
    std::string created_at; // ISO-8601 UTC
    std::string updated_at;
};

enum class Aggregation { mean, min };

Aggregation aggregation_from_name(const std::string& name);
const char* aggregation_name(Aggregation a);

// Mean (or minimum) of audio_distance between the probe and every audio
// reference of the record.
double identity_audio_distance(const EnrollmentRecord& record, const audio::AudioSignature& probe,
                               Aggregation agg = Aggregation::mean);

double identity_visual_distance(const EnrollmentRecord& record, const vision::ColorHistogram& probe,
                                Aggregation agg = Aggregation::mean);

enum class OpenMode { open_existing, create_new, open_or_create };

// Directory-backed record store. A single JSON `manifest` file holds every
// record with feature payloads inline; each committed mutation rewrites it
// atomically (write temp, rename). Reads may run concurrently; mutations are
// serialized internally.
class EnrollmentStore {
public:
    static constexpr uint32_t kFormatVersion = 1;
    static constexpr uint32_t kDefaultMaxRefs = 10;

    EnrollmentStore(std::filesystem::path root, OpenMode mode);

    EnrollmentStore(const EnrollmentStore&) = delete;
    EnrollmentStore& operator=(const EnrollmentStore&) = delete;

    EnrollmentRecord enroll(const std::string& identity_id, const std::string& rfid_tag,
                            std::vector<audio::AudioSignature> audio_refs,
                            std::vector<vision::ColorHistogram> visual_refs,
                            uint32_t max_refs = kDefaultMaxRefs);

    // Appends a reference; the oldest reference is evicted once the list
    // exceeds max_refs.
    EnrollmentRecord add_audio_reference(const std::string& identity_id,
                                         const audio::AudioSignature& ref,
                                         uint32_t max_refs = kDefaultMaxRefs);
    EnrollmentRecord add_visual_reference(const std::string& identity_id,
                                          const vision::ColorHistogram& ref,
                                          uint32_t max_refs = kDefaultMaxRefs);

    EnrollmentRecord get(const std::string& identity_id) const;
    std::optional<EnrollmentRecord> find_by_rfid(const std::string& rfid_tag) const;
    std::vector<EnrollmentRecord> list() const;
    void remove(const std::string& identity_id);
    size_t size() const;

    const std::filesystem::path& root() const { return root_; }

private:
    void load();
    void persist_locked() const;

    std::filesystem::path root_;
    std::map<std::string, EnrollmentRecord> records_;
    mutable std::shared_mutex mutex_;
};

} // namespace opf::enroll
