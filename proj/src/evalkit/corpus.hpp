#pragma once

#include "core/audio.hpp"
#include "evalkit/matrix.hpp"
#include "evalkit/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace opf::evalkit {

enum class CorpusKind { audio, visual };

CorpusKind corpus_kind_from_name(const std::string& name);
const char* corpus_kind_name(CorpusKind kind);

struct SynthAudioSpec {
    uint64_t seed = 1;
    uint32_t sample_rate = 44100;
    double duration_s = 2.0;
    uint32_t clips_per_profile = 10;
    std::vector<EngineProfile> profiles;
};

struct SynthVisualSpec {
    uint64_t seed = 1;
    uint32_t width = 64;
    uint32_t height = 64;
    uint32_t images_per_color = 8;
    std::vector<ColorProfile> colors;
};

struct FileSample {
    std::string label;
    std::string id;
    std::string path;      // relative paths resolve against the manifest dir
    std::string mask_path; // visual corpora only, optional
};

// A corpus is file samples, a synthesis block, or both concatenated.
struct CorpusSpec {
    static constexpr uint32_t kFormatVersion = 1;

    CorpusKind kind = CorpusKind::audio;
    std::vector<FileSample> files;
    std::optional<SynthAudioSpec> synth_audio;
    std::optional<SynthVisualSpec> synth_visual;
    std::filesystem::path base_dir;
};

CorpusSpec load_corpus_manifest(const std::filesystem::path& path);
void save_corpus_manifest(const CorpusSpec& spec, const std::filesystem::path& path);

SynthAudioSpec default_audio_spec();
SynthVisualSpec default_visual_spec();

// In-memory realization: every sample becomes a feature via the full
// extraction pipeline.
std::vector<LabeledSample> synth_audio_samples(const SynthAudioSpec& spec,
                                               const audio::SignatureParams& params);
std::vector<LabeledSample> synth_visual_samples(const SynthVisualSpec& spec,
                                                uint32_t bins_per_channel);
std::vector<LabeledSample> realize_corpus(const CorpusSpec& spec,
                                          const audio::SignatureParams& params,
                                          uint32_t bins_per_channel);

// Materializes the synthesis block of a spec as WAV or PPM (+ mask PGM)
// files under out_dir and writes a manifest.json listing them. Returns the
// manifest path.
std::filesystem::path synth_corpus_to_dir(const CorpusSpec& spec,
                                          const std::filesystem::path& out_dir);

struct SweepRow {
    double duration_s = 0.0;
    bool valid = false;
    std::string note;
    AccuracyReport report;
};

// Re-synthesizes the corpus per duration (fresh per-duration seeds) and
// scores pairwise accuracy at the given threshold. Samples that are too
// short to frame invalidate their row instead of aborting the sweep.
std::vector<SweepRow> duration_sweep(const SynthAudioSpec& spec,
                                     const std::vector<double>& durations, double threshold,
                                     const audio::SignatureParams& params);

std::string sweep_table_text(const std::vector<SweepRow>& rows);
std::string sweep_table_csv(const std::vector<SweepRow>& rows);

} // namespace opf::evalkit
