#pragma once

#include "core/audio.hpp"
#include "core/enrollment.hpp"
#include "core/vision.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace opf::decision {

struct Thresholds {
    double audio_max_distance_hz = 100.0;
    double visual_max_distance = 0.2;
};

enum class Factor { rfid, audio, visual };
enum class FactorStatus { validated, rejected, unavailable };

const char* factor_name(Factor f);
const char* factor_status_name(FactorStatus s);

// Result of checking one factor. A rejected outcome always carries the score
// that crossed the threshold; an unavailable one carries neither score nor
// threshold, only a detail saying why it could not be checked.
struct FactorOutcome {
    Factor factor = Factor::rfid;
    FactorStatus status = FactorStatus::unavailable;
    std::optional<double> score;
    std::optional<double> threshold;
    std::string detail;
};

enum class PolicyKind { all, k_of_n, rfid_plus_any };

PolicyKind policy_kind_from_name(const std::string& name);
const char* policy_kind_name(PolicyKind kind);

struct PolicySpec {
    PolicyKind kind = PolicyKind::rfid_plus_any;
    uint32_t k = 2; // used by k_of_n only
};

enum class Verdict { accept, deny };

struct AuthDecision {
    Verdict verdict = Verdict::deny;
    std::string identity_id;
    std::vector<FactorOutcome> outcomes;
    PolicySpec policy;
    std::string reason;
    // Non-empty when reference refresh after an accept was skipped because
    // the store write failed. The verdict stands either way.
    std::string refresh_note;
};

// Pure policy evaluation over already-checked factors. Exactly one outcome
// per factor is expected; unavailable never counts toward a quorum.
Verdict evaluate_policy(const std::vector<FactorOutcome>& outcomes, const PolicySpec& policy);

// evaluate_policy plus a human-readable reason naming every factor that kept
// the policy from passing.
AuthDecision decide(const std::vector<FactorOutcome>& outcomes, const PolicySpec& policy);

struct ProbeInput {
    std::string rfid_tag;
    std::optional<audio::AudioSignature> audio_probe;
    // Set when an audio capture was supplied but could not be processed. The
    // attempt is treated as suspect: the outcome is unavailable and the
    // decision is forced to deny no matter what the policy says.
    std::string audio_error;
    std::optional<vision::ColorHistogram> visual_probe;
    std::string visual_error;
};

struct AuthOptions {
    Thresholds thresholds;
    PolicySpec policy;
    enroll::Aggregation aggregation = enroll::Aggregation::mean;
    bool refresh_on_accept = true;
    uint32_t max_refs = enroll::EnrollmentStore::kDefaultMaxRefs;
};

// Full verification pipeline: look up the tag, score the supplied factors
// against the matched record, apply the policy, and on acceptance append the
// passing probes as fresh references.
AuthDecision authenticate(enroll::EnrollmentStore& store, const ProbeInput& probe,
                          const AuthOptions& options);

} // namespace opf::decision
