#include "evalkit/corpus.hpp"

#include "core/errors.hpp"
#include "core/netpbm.hpp"
#include "core/prng.hpp"
#include "core/vision.hpp"
#include "core/wav.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace opf::evalkit {
namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string clip_id(uint32_t k) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "c%02u", k);
    return buf;
}

ordered_json engine_profile_to_json(const EngineProfile& p) {
    ordered_json j;
    j["name"] = p.name;
    j["fundamental_hz"] = p.fundamental_hz;
    j["harmonic_amplitudes"] = p.harmonic_amplitudes;
    j["noise_level"] = p.noise_level;
    j["jitter"] = p.jitter;
    return j;
}

EngineProfile engine_profile_from_json(const ordered_json& j) {
    EngineProfile p;
    p.name = j.at("name").get<std::string>();
    p.fundamental_hz = j.at("fundamental_hz").get<double>();
    p.harmonic_amplitudes = j.at("harmonic_amplitudes").get<std::vector<double>>();
    p.noise_level = j.value("noise_level", 0.0);
    p.jitter = j.value("jitter", 0.0);
    return p;
}

ordered_json color_profile_to_json(const ColorProfile& c) {
    ordered_json j;
    j["name"] = c.name;
    j["rgb"] = {c.rgb[0], c.rgb[1], c.rgb[2]};
    j["noise_stddev"] = c.noise_stddev;
    return j;
}

ColorProfile color_profile_from_json(const ordered_json& j) {
    ColorProfile c;
    c.name = j.at("name").get<std::string>();
    auto rgb = j.at("rgb").get<std::vector<uint32_t>>();
    if (rgb.size() != 3 || rgb[0] > 255 || rgb[1] > 255 || rgb[2] > 255)
        raise(Errc::parse, "color rgb must be three values in 0..255");
    c.rgb = {static_cast<uint8_t>(rgb[0]), static_cast<uint8_t>(rgb[1]),
             static_cast<uint8_t>(rgb[2])};
    c.noise_stddev = j.value("noise_stddev", 0.0);
    return c;
}

uint64_t audio_clip_seed(const SynthAudioSpec& spec, size_t profile_idx, uint32_t k) {
    return derive_seed(spec.seed, 1, profile_idx, k);
}

uint64_t visual_image_seed(const SynthVisualSpec& spec, size_t color_idx, uint32_t k) {
    return derive_seed(spec.seed, 2, color_idx, k);
}

} // namespace

CorpusKind corpus_kind_from_name(const std::string& name) {
    if (name == "audio")
        return CorpusKind::audio;
    if (name == "visual")
        return CorpusKind::visual;
    raise(Errc::invalid_argument, "unknown corpus kind: " + name);
}

const char* corpus_kind_name(CorpusKind kind) {
    return kind == CorpusKind::audio ? "audio" : "visual";
}

CorpusSpec load_corpus_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        raise(Errc::io, "cannot open corpus manifest " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::parse, "malformed corpus manifest: " + std::string(e.what()));
    }

    CorpusSpec spec;
    spec.base_dir = path.parent_path();
    try {
        uint32_t version = j.at("format_version").get<uint32_t>();
        if (version != CorpusSpec::kFormatVersion)
            raise(Errc::bad_version,
                  "corpus format_version " + std::to_string(version) + " is not supported");
        spec.kind = corpus_kind_from_name(j.at("kind").get<std::string>());
        if (j.contains("samples")) {
            for (const auto& sj : j.at("samples")) {
                FileSample s;
                s.label = sj.at("label").get<std::string>();
                s.id = sj.at("id").get<std::string>();
                s.path = sj.at("path").get<std::string>();
                s.mask_path = sj.value("mask", "");
                if (s.label.empty())
                    raise(Errc::parse, "sample with empty label");
                spec.files.push_back(std::move(s));
            }
        }
        if (j.contains("synth")) {
            const auto& sj = j.at("synth");
            if (spec.kind == CorpusKind::audio) {
                SynthAudioSpec a;
                a.seed = sj.value("seed", uint64_t{1});
                a.sample_rate = sj.value("sample_rate", 44100u);
                a.duration_s = sj.value("duration_s", 2.0);
                a.clips_per_profile = sj.value("clips_per_profile", 10u);
                for (const auto& pj : sj.at("profiles"))
                    a.profiles.push_back(engine_profile_from_json(pj));
                spec.synth_audio = std::move(a);
            } else {
                SynthVisualSpec v;
                v.seed = sj.value("seed", uint64_t{1});
                v.width = sj.value("width", 64u);
                v.height = sj.value("height", 64u);
                v.images_per_color = sj.value("images_per_color", 8u);
                for (const auto& cj : sj.at("colors"))
                    v.colors.push_back(color_profile_from_json(cj));
                spec.synth_visual = std::move(v);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::parse, "malformed corpus manifest: " + std::string(e.what()));
    }
    if (spec.files.empty() && !spec.synth_audio && !spec.synth_visual)
        raise(Errc::parse, "corpus manifest lists no samples and no synth block");
    return spec;
}

void save_corpus_manifest(const CorpusSpec& spec, const fs::path& path) {
    ordered_json j;
    j["format_version"] = CorpusSpec::kFormatVersion;
    j["kind"] = corpus_kind_name(spec.kind);
    if (!spec.files.empty()) {
        ordered_json samples = ordered_json::array();
        for (const auto& s : spec.files) {
            ordered_json sj;
            sj["label"] = s.label;
            sj["id"] = s.id;
            sj["path"] = s.path;
            if (!s.mask_path.empty())
                sj["mask"] = s.mask_path;
            samples.push_back(std::move(sj));
        }
        j["samples"] = std::move(samples);
    }
    if (spec.kind == CorpusKind::audio && spec.synth_audio) {
        const auto& a = *spec.synth_audio;
        ordered_json sj;
        sj["seed"] = a.seed;
        sj["sample_rate"] = a.sample_rate;
        sj["duration_s"] = a.duration_s;
        sj["clips_per_profile"] = a.clips_per_profile;
        ordered_json profiles = ordered_json::array();
        for (const auto& p : a.profiles)
            profiles.push_back(engine_profile_to_json(p));
        sj["profiles"] = std::move(profiles);
        j["synth"] = std::move(sj);
    }
    if (spec.kind == CorpusKind::visual && spec.synth_visual) {
        const auto& v = *spec.synth_visual;
        ordered_json sj;
        sj["seed"] = v.seed;
        sj["width"] = v.width;
        sj["height"] = v.height;
        sj["images_per_color"] = v.images_per_color;
        ordered_json colors = ordered_json::array();
        for (const auto& c : v.colors)
            colors.push_back(color_profile_to_json(c));
        sj["colors"] = std::move(colors);
        j["synth"] = std::move(sj);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        raise(Errc::io, "cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out)
        raise(Errc::io, "short write to " + path.string());
}

SynthAudioSpec default_audio_spec() {
    SynthAudioSpec spec;
    spec.profiles = default_engine_profiles();
    return spec;
}

SynthVisualSpec default_visual_spec() {
    SynthVisualSpec spec;
    spec.colors = default_color_profiles();
    return spec;
}

std::vector<LabeledSample> synth_audio_samples(const SynthAudioSpec& spec,
                                               const audio::SignatureParams& params) {
    if (spec.profiles.empty())
        raise(Errc::invalid_argument, "synth spec has no profiles");
    if (spec.clips_per_profile == 0)
        raise(Errc::invalid_argument, "clips_per_profile must be positive");
    std::vector<LabeledSample> samples;
    samples.reserve(spec.profiles.size() * spec.clips_per_profile);
    for (size_t p = 0; p < spec.profiles.size(); ++p) {
        for (uint32_t k = 0; k < spec.clips_per_profile; ++k) {
            audio::AudioClip clip = synth_engine_sound(spec.profiles[p], spec.duration_s,
                                                       spec.sample_rate, audio_clip_seed(spec, p, k));
            LabeledSample s;
            s.label = spec.profiles[p].name;
            s.source_id = clip_id(k);
            s.feature = audio::audio_signature(clip, params);
            samples.push_back(std::move(s));
        }
    }
    return samples;
}

std::vector<LabeledSample> synth_visual_samples(const SynthVisualSpec& spec,
                                                uint32_t bins_per_channel) {
    if (spec.colors.empty())
        raise(Errc::invalid_argument, "synth spec has no colors");
    if (spec.images_per_color == 0)
        raise(Errc::invalid_argument, "images_per_color must be positive");
    std::vector<LabeledSample> samples;
    samples.reserve(spec.colors.size() * spec.images_per_color);
    for (size_t c = 0; c < spec.colors.size(); ++c) {
        for (uint32_t k = 0; k < spec.images_per_color; ++k) {
            vision::MaskedImage img = synth_vehicle_image(spec.colors[c], spec.width, spec.height,
                                                          visual_image_seed(spec, c, k));
            LabeledSample s;
            s.label = spec.colors[c].name;
            s.source_id = clip_id(k);
            s.feature = vision::color_histogram(img, bins_per_channel);
            samples.push_back(std::move(s));
        }
    }
    return samples;
}

std::vector<LabeledSample> realize_corpus(const CorpusSpec& spec,
                                          const audio::SignatureParams& params,
                                          uint32_t bins_per_channel) {
    std::vector<LabeledSample> samples;
    for (const auto& f : spec.files) {
        fs::path p(f.path);
        if (p.is_relative())
            p = spec.base_dir / p;
        LabeledSample s;
        s.label = f.label;
        s.source_id = f.id;
        if (spec.kind == CorpusKind::audio) {
            s.feature = audio::audio_signature(wav::decode_file(p), params);
        } else {
            fs::path mask;
            if (!f.mask_path.empty()) {
                fs::path mp(f.mask_path);
                mask = mp.is_relative() ? spec.base_dir / mp : mp;
            }
            s.feature =
                vision::color_histogram(vision::load_image_file(p, mask), bins_per_channel);
        }
        samples.push_back(std::move(s));
    }
    if (spec.kind == CorpusKind::audio && spec.synth_audio) {
        auto more = synth_audio_samples(*spec.synth_audio, params);
        samples.insert(samples.end(), std::make_move_iterator(more.begin()),
                       std::make_move_iterator(more.end()));
    }
    if (spec.kind == CorpusKind::visual && spec.synth_visual) {
        auto more = synth_visual_samples(*spec.synth_visual, bins_per_channel);
        samples.insert(samples.end(), std::make_move_iterator(more.begin()),
                       std::make_move_iterator(more.end()));
    }
    if (samples.empty())
        raise(Errc::invalid_argument, "corpus realized to zero samples");
    return samples;
}

std::filesystem::path synth_corpus_to_dir(const CorpusSpec& spec, const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        raise(Errc::io, "cannot create " + out_dir.string() + ": " + ec.message());

    CorpusSpec listing;
    listing.kind = spec.kind;
    listing.base_dir = out_dir;

    if (spec.kind == CorpusKind::audio) {
        if (!spec.synth_audio)
            raise(Errc::invalid_argument, "audio corpus spec has no synth block");
        const auto& a = *spec.synth_audio;
        if (a.profiles.empty())
            raise(Errc::invalid_argument, "synth spec has no profiles");
        for (size_t p = 0; p < a.profiles.size(); ++p) {
            for (uint32_t k = 0; k < a.clips_per_profile; ++k) {
                audio::AudioClip clip = synth_engine_sound(a.profiles[p], a.duration_s,
                                                           a.sample_rate, audio_clip_seed(a, p, k));
                std::string name = a.profiles[p].name + "_" + clip_id(k) + ".wav";
                wav::write_file(out_dir / name, clip);
                listing.files.push_back({a.profiles[p].name, clip_id(k), name, ""});
            }
        }
    } else {
        if (!spec.synth_visual)
            raise(Errc::invalid_argument, "visual corpus spec has no synth block");
        const auto& v = *spec.synth_visual;
        if (v.colors.empty())
            raise(Errc::invalid_argument, "synth spec has no colors");
        for (size_t c = 0; c < v.colors.size(); ++c) {
            for (uint32_t k = 0; k < v.images_per_color; ++k) {
                vision::MaskedImage img =
                    synth_vehicle_image(v.colors[c], v.width, v.height, visual_image_seed(v, c, k));
                std::string stem = v.colors[c].name + "_" + clip_id(k);
                netpbm::RgbImage rgb;
                rgb.width = img.width;
                rgb.height = img.height;
                rgb.pixels = img.pixels;
                netpbm::GrayImage mask;
                mask.width = img.width;
                mask.height = img.height;
                mask.pixels = img.mask;
                netpbm::write_ppm_file(out_dir / (stem + ".ppm"), rgb);
                netpbm::write_pgm_file(out_dir / (stem + ".mask.pgm"), mask);
                listing.files.push_back(
                    {v.colors[c].name, clip_id(k), stem + ".ppm", stem + ".mask.pgm"});
            }
        }
    }

    fs::path manifest = out_dir / "manifest.json";
    save_corpus_manifest(listing, manifest);
    return manifest;
}

std::vector<SweepRow> duration_sweep(const SynthAudioSpec& spec,
                                     const std::vector<double>& durations, double threshold,
                                     const audio::SignatureParams& params) {
    if (durations.empty())
        raise(Errc::invalid_argument, "no durations given");
    for (double d : durations)
        if (!(d > 0.0))
            raise(Errc::invalid_argument, "durations must be positive");

    std::vector<SweepRow> rows;
    for (size_t di = 0; di < durations.size(); ++di) {
        SweepRow row;
        row.duration_s = durations[di];
        SynthAudioSpec per = spec;
        per.duration_s = durations[di];
        per.seed = derive_seed(spec.seed, 3, di);
        size_t failed = 0;
        std::string first_error;
        std::vector<LabeledSample> samples;
        for (size_t p = 0; p < per.profiles.size(); ++p) {
            for (uint32_t k = 0; k < per.clips_per_profile; ++k) {
                audio::AudioClip clip = synth_engine_sound(per.profiles[p], per.duration_s,
                                                           per.sample_rate,
                                                           derive_seed(per.seed, 1, p, k));
                try {
                    LabeledSample s;
                    s.label = per.profiles[p].name;
                    s.source_id = clip_id(k);
                    s.feature = audio::audio_signature(clip, params);
                    samples.push_back(std::move(s));
                } catch (const Error& e) {
                    failed += 1;
                    if (first_error.empty())
                        first_error = e.what();
                }
            }
        }
        if (failed > 0 || samples.size() < 2) {
            row.valid = false;
            std::ostringstream note;
            note << failed << " sample(s) failed";
            if (!first_error.empty())
                note << ": " << first_error;
            row.note = note.str();
        } else {
            row.valid = true;
            row.report = pairwise_accuracy(distance_matrix(samples), threshold);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string sweep_table_text(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "duration_s  accuracy  pairs  fp  fn  status\n";
    for (const auto& row : rows) {
        char buf[64];
        if (row.valid) {
            std::snprintf(buf, sizeof(buf), "%-10g  %-8.4f  %-5zu  %-2zu  %-2zu  ok",
                          row.duration_s, row.report.accuracy, row.report.pair_count,
                          row.report.false_positives, row.report.false_negatives);
            out << buf << '\n';
        } else {
            std::snprintf(buf, sizeof(buf), "%-10g  %-8s  %-5s  %-2s  %-2s  invalid: ",
                          row.duration_s, "-", "-", "-", "-");
            out << buf << row.note << '\n';
        }
    }
    return out.str();
}

std::string sweep_table_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "duration_s,accuracy,pairs,true_positives,true_negatives,false_positives,"
           "false_negatives,status\n";
    for (const auto& row : rows) {
        char num[40];
        std::snprintf(num, sizeof(num), "%.17g", row.duration_s);
        out << num << ',';
        if (row.valid) {
            char acc[40];
            std::snprintf(acc, sizeof(acc), "%.17g", row.report.accuracy);
            out << acc << ',' << row.report.pair_count << ',' << row.report.true_positives << ','
                << row.report.true_negatives << ',' << row.report.false_positives << ','
                << row.report.false_negatives << ",ok\n";
        } else {
            out << "-,-,-,-,-,-,invalid\n";
        }
    }
    return out.str();
}

} // namespace opf::evalkit
