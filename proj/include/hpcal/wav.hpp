#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace hpcal::wav {

enum class SampleFormat { Pcm16, Pcm24, Float32 };

struct StereoAudio {
    std::vector<double> left;
    std::vector<double> right;
    int sample_rate_hz = 0;
    SampleFormat format = SampleFormat::Pcm24;
};

// Parses a RIFF/WAVE image. Accepts PCM 16/24-bit and IEEE float 32-bit,
// including WAVE_FORMAT_EXTENSIBLE, with exactly two channels.
// Throws ConfigError on anything else.
StereoAudio decode(std::span<const std::uint8_t> bytes);
StereoAudio read(const std::filesystem::path& path);

std::vector<std::uint8_t> encode(const StereoAudio& audio);
void write(const std::filesystem::path& path, const StereoAudio& audio);

}  // namespace hpcal::wav
