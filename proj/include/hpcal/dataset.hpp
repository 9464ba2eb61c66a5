#pragma once

// Synthetic stand-ins for binaural recordings: deterministic multitone-plus-
// noise stereo tracks scaled to a requested A-weighted level, and the
// manifest/rig files that describe them.

#include "hpcal/config.hpp"
#include "hpcal/dsp.hpp"
#include "hpcal/wav.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace hpcal::dataset {

struct SynthOptions {
    int sample_rate_hz = 48000;
    double seconds = 2.0;
    // 0 dBFS sine = 100 dB SPL leaves headroom for the loudest bundled track.
    double cal_constant_db = 100.0;
    std::uint64_t seed = 2022;
};

// track_laeq of the result equals level_dba up to rounding.
CalibratedTrack synth_track(const std::string& track_id, double level_dba, const SynthOptions& options);

// Identical sine in both channels with amplitude `amplitude` (1 = full scale).
CalibratedTrack sine_track(const std::string& track_id, double frequency_hz, double amplitude, int sample_rate_hz,
                           double seconds, double cal_constant_db);

// Scales both channels so track_laeq equals level_dba.
void scale_to_level(CalibratedTrack& track, double level_dba);

struct TrackSpec {
    std::string track_id;
    double nominal_dba;
};

// Nominal levels of the 27 published stimuli.
std::vector<TrackSpec> table2_specs();

// The playback chain of the published comparison as a rig: 250 ohm headphones
// with 99.14 dB/V flat sensitivity on a zero-output-impedance soundcard, 41 dB(A) floor.
RigModel reference_rig();

// Writes <dir>/tracks/<id>.wav, <dir>/rig.json and <dir>/manifest.json.
config::Manifest write_dataset(const std::filesystem::path& dir, const std::vector<TrackSpec>& specs,
                               const SynthOptions& options, const RigModel& rig,
                               wav::SampleFormat format = wav::SampleFormat::Pcm24);

}  // namespace hpcal::dataset
