#include "core/decision.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <sstream>

namespace opf::decision {

const char* factor_name(Factor f) {
    switch (f) {
    case Factor::rfid: return "rfid";
    case Factor::audio: return "audio";
    case Factor::visual: return "visual";
    }
    return "?";
}

const char* factor_status_name(FactorStatus s) {
    switch (s) {
    case FactorStatus::validated: return "validated";
    case FactorStatus::rejected: return "rejected";
    case FactorStatus::unavailable: return "unavailable";
    }
    return "?";
}

PolicyKind policy_kind_from_name(const std::string& name) {
    if (name == "all")
        return PolicyKind::all;
    if (name == "k_of_n")
        return PolicyKind::k_of_n;
    if (name == "rfid_plus_any")
        return PolicyKind::rfid_plus_any;
    raise(Errc::invalid_argument, "unknown policy: " + name);
}

const char* policy_kind_name(PolicyKind kind) {
    switch (kind) {
    case PolicyKind::all: return "all";
    case PolicyKind::k_of_n: return "k_of_n";
    case PolicyKind::rfid_plus_any: return "rfid_plus_any";
    }
    return "?";
}

namespace {

const FactorOutcome* find_outcome(const std::vector<FactorOutcome>& outcomes, Factor f) {
    for (const auto& o : outcomes)
        if (o.factor == f)
            return &o;
    return nullptr;
}

bool validated(const std::vector<FactorOutcome>& outcomes, Factor f) {
    const FactorOutcome* o = find_outcome(outcomes, f);
    return o && o->status == FactorStatus::validated;
}

void check_outcomes(const std::vector<FactorOutcome>& outcomes) {
    if (outcomes.empty())
        raise(Errc::invalid_argument, "no factor outcomes to evaluate");
    for (Factor f : {Factor::rfid, Factor::audio, Factor::visual}) {
        size_t n = std::count_if(outcomes.begin(), outcomes.end(),
                                 [f](const FactorOutcome& o) { return o.factor == f; });
        if (n > 1)
            raise(Errc::invalid_argument,
                  std::string("duplicate outcome for factor ") + factor_name(f));
    }
    for (const auto& o : outcomes)
        if (o.status == FactorStatus::rejected && !o.score)
            raise(Errc::invalid_argument,
                  std::string("rejected outcome for ") + factor_name(o.factor) +
                      " is missing its score");
}

} // namespace

Verdict evaluate_policy(const std::vector<FactorOutcome>& outcomes, const PolicySpec& policy) {
    check_outcomes(outcomes);
    size_t passed = std::count_if(outcomes.begin(), outcomes.end(), [](const FactorOutcome& o) {
        return o.status == FactorStatus::validated;
    });
    switch (policy.kind) {
    case PolicyKind::all:
        return passed == 3 ? Verdict::accept : Verdict::deny;
    case PolicyKind::k_of_n:
        if (policy.k < 1 || policy.k > 3)
            raise(Errc::invalid_argument, "k_of_n requires k between 1 and 3");
        return passed >= policy.k ? Verdict::accept : Verdict::deny;
    case PolicyKind::rfid_plus_any:
        return validated(outcomes, Factor::rfid) &&
                       (validated(outcomes, Factor::audio) || validated(outcomes, Factor::visual))
                   ? Verdict::accept
                   : Verdict::deny;
    }
    raise(Errc::internal, "unhandled policy kind");
}

AuthDecision decide(const std::vector<FactorOutcome>& outcomes, const PolicySpec& policy) {
    AuthDecision d;
    d.outcomes = outcomes;
    d.policy = policy;
    d.verdict = evaluate_policy(outcomes, policy);
    std::ostringstream reason;
    if (d.verdict == Verdict::accept) {
        reason << "policy " << policy_kind_name(policy.kind) << " satisfied";
    } else {
        reason << "policy " << policy_kind_name(policy.kind) << " not satisfied:";
        bool first = true;
        for (const auto& o : outcomes) {
            if (o.status == FactorStatus::validated)
                continue;
            reason << (first ? " " : "; ") << factor_name(o.factor) << ' '
                   << factor_status_name(o.status);
            if (o.status == FactorStatus::rejected && o.score && o.threshold)
                reason << " (" << *o.score << " > " << *o.threshold << ")";
            else if (!o.detail.empty())
                reason << " (" << o.detail << ")";
            first = false;
        }
        if (first)
            reason << " quorum not met";
    }
    d.reason = reason.str();
    return d;
}

namespace {

FactorOutcome score_audio(const enroll::EnrollmentRecord& rec, const ProbeInput& probe,
                          const AuthOptions& options) {
    FactorOutcome o;
    o.factor = Factor::audio;
    if (!probe.audio_error.empty()) {
        o.detail = probe.audio_error;
        return o;
    }
    if (!probe.audio_probe) {
        o.detail = "no audio capture provided";
        return o;
    }
    if (rec.audio_refs.empty()) {
        o.detail = "identity has no audio references";
        return o;
    }
    double d = enroll::identity_audio_distance(rec, *probe.audio_probe, options.aggregation);
    o.score = d;
    o.threshold = options.thresholds.audio_max_distance_hz;
    o.status = d <= *o.threshold ? FactorStatus::validated : FactorStatus::rejected;
    return o;
}

FactorOutcome score_visual(const enroll::EnrollmentRecord& rec, const ProbeInput& probe,
                           const AuthOptions& options) {
    FactorOutcome o;
    o.factor = Factor::visual;
    if (!probe.visual_error.empty()) {
        o.detail = probe.visual_error;
        return o;
    }
    if (!probe.visual_probe) {
        o.detail = "no image provided";
        return o;
    }
    if (rec.visual_refs.empty()) {
        o.detail = "identity has no visual references";
        return o;
    }
    double d = enroll::identity_visual_distance(rec, *probe.visual_probe, options.aggregation);
    o.score = d;
    o.threshold = options.thresholds.visual_max_distance;
    o.status = d <= *o.threshold ? FactorStatus::validated : FactorStatus::rejected;
    return o;
}

} // namespace

AuthDecision authenticate(enroll::EnrollmentStore& store, const ProbeInput& probe,
                          const AuthOptions& options) {
    if (probe.rfid_tag.empty())
        raise(Errc::invalid_argument, "rfid_tag must not be empty");

    std::optional<enroll::EnrollmentRecord> rec = store.find_by_rfid(probe.rfid_tag);

    std::vector<FactorOutcome> outcomes;
    FactorOutcome rfid;
    rfid.factor = Factor::rfid;
    if (rec) {
        rfid.status = FactorStatus::validated;
    } else {
        rfid.status = FactorStatus::rejected;
        rfid.score = 1.0;
        rfid.threshold = 0.0;
        rfid.detail = "tag not enrolled";
    }
    outcomes.push_back(rfid);

    if (rec) {
        outcomes.push_back(score_audio(*rec, probe, options));
        outcomes.push_back(score_visual(*rec, probe, options));
    } else {
        FactorOutcome audio;
        audio.factor = Factor::audio;
        audio.detail = "no enrolled identity to compare against";
        outcomes.push_back(audio);
        FactorOutcome visual;
        visual.factor = Factor::visual;
        visual.detail = "no enrolled identity to compare against";
        outcomes.push_back(visual);
    }

    AuthDecision d = decide(outcomes, options.policy);
    if (rec)
        d.identity_id = rec->identity_id;

    // A capture that was handed over but could not be processed is treated as
    // tampering, not as a missing factor: the request is denied outright.
    std::string forced;
    if (!probe.audio_error.empty())
        forced = "audio capture rejected: " + probe.audio_error;
    else if (!probe.visual_error.empty())
        forced = "image rejected: " + probe.visual_error;
    if (!forced.empty()) {
        d.verdict = Verdict::deny;
        d.reason = forced;
    }

    if (d.verdict == Verdict::accept && options.refresh_on_accept && rec) {
        try {
            for (const auto& o : d.outcomes) {
                if (o.status != FactorStatus::validated)
                    continue;
                if (o.factor == Factor::audio && probe.audio_probe)
                    store.add_audio_reference(rec->identity_id, *probe.audio_probe,
                                              options.max_refs);
                else if (o.factor == Factor::visual && probe.visual_probe)
                    store.add_visual_reference(rec->identity_id, *probe.visual_probe,
                                               options.max_refs);
            }
        } catch (const Error& e) {
            d.refresh_note = std::string("reference refresh skipped: ") + e.what();
        }
    }
    return d;
}

} // namespace opf::decision
