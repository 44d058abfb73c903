#pragma once

#include "core/audio.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace opf::wav {

enum class SampleFormat { pcm16, float32 };

// Decodes a RIFF/WAVE container holding uncompressed PCM (8/16/24/32-bit
// integer or 32-bit IEEE float, 1 or 2 channels). Integer samples are scaled
// to [-1, 1] by the type's full-scale value, stereo is downmixed to mono by
// per-frame channel average, unknown chunks are skipped.
audio::AudioClip decode(std::span<const uint8_t> bytes);
audio::AudioClip decode_file(const std::filesystem::path& path);

std::vector<uint8_t> encode(const audio::AudioClip& clip, SampleFormat format = SampleFormat::pcm16);
void write_file(const std::filesystem::path& path, const audio::AudioClip& clip,
                SampleFormat format = SampleFormat::pcm16);

} // namespace opf::wav
