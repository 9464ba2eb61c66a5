#include "hpcal/dataset.hpp"

#include "hpcal/errors.hpp"
#include "hpcal/report.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace hpcal::dataset {

namespace {

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Uniform {
public:
    explicit Uniform(std::uint64_t seed) : engine_(seed) {}
    double operator()(double lo, double hi) {
        const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * unit;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace

CalibratedTrack sine_track(const std::string& track_id, double frequency_hz, double amplitude, int sample_rate_hz,
                           double seconds, double cal_constant_db) {
    CalibratedTrack t;
    t.track_id = track_id;
    t.sample_rate_hz = sample_rate_hz;
    t.cal_constant_db = cal_constant_db;
    const auto n = static_cast<std::size_t>(std::llround(seconds * sample_rate_hz));
    t.left.resize(n);
    const double w = 2.0 * std::numbers::pi * frequency_hz / sample_rate_hz;
    for (std::size_t i = 0; i < n; ++i) t.left[i] = amplitude * std::sin(w * static_cast<double>(i));
    t.right = t.left;
    return t;
}

void scale_to_level(CalibratedTrack& track, double level_dba) {
    const double current = track_laeq(track);
    if (is_silent(current)) throw ConfigError("cannot scale a silent track");
    const double g = std::pow(10.0, (level_dba - current) / 20.0);
    for (double& x : track.left) x *= g;
    for (double& x : track.right) x *= g;
}

CalibratedTrack synth_track(const std::string& track_id, double level_dba, const SynthOptions& options) {
    Uniform rnd(options.seed ^ fnv1a(track_id));
    CalibratedTrack t;
    t.track_id = track_id;
    t.sample_rate_hz = options.sample_rate_hz;
    t.cal_constant_db = options.cal_constant_db;
    t.nominal_laeq_db = level_dba;

    const auto n = static_cast<std::size_t>(std::llround(options.seconds * options.sample_rate_hz));
    t.left.assign(n, 0.0);
    t.right.assign(n, 0.0);

    // A handful of partials between 80 Hz and 6 kHz, log-uniformly placed.
    constexpr int kPartials = 6;
    const double fs = options.sample_rate_hz;
    for (int p = 0; p < kPartials; ++p) {
        const double f = 80.0 * std::pow(6000.0 / 80.0, rnd(0.0, 1.0));
        const double amp = std::pow(10.0, rnd(-12.0, 0.0) / 20.0);
        const double phase_l = rnd(0.0, 2.0 * std::numbers::pi);
        const double phase_r = rnd(0.0, 2.0 * std::numbers::pi);
        const double w = 2.0 * std::numbers::pi * f / fs;
        for (std::size_t i = 0; i < n; ++i) {
            t.left[i] += amp * std::sin(w * static_cast<double>(i) + phase_l);
            t.right[i] += amp * std::sin(w * static_cast<double>(i) + phase_r);
        }
    }
    // Broadband floor about 20 dB under the partials.
    for (std::size_t i = 0; i < n; ++i) {
        t.left[i] += rnd(-0.15, 0.15);
        t.right[i] += rnd(-0.15, 0.15);
    }
    // Binaural recordings are rarely balanced.
    const double right_gain = std::pow(10.0, rnd(-3.0, 0.0) / 20.0);
    for (double& x : t.right) x *= right_gain;

    scale_to_level(t, level_dba);
    if (t.peak() > 1.0)
        throw ConfigError("track '" + track_id + "' would clip at " + std::to_string(level_dba) +
                          " dB(A); raise the calibration constant");
    return t;
}

std::vector<TrackSpec> table2_specs() {
    std::vector<TrackSpec> out;
    for (const auto& r : golden::kTable2) out.push_back({std::string(r.track_id), r.nominal});
    return out;
}

RigModel reference_rig() {
    HeadphoneSpec hp;
    hp.sensitivity_value = 99.14;
    hp.sensitivity_unit = SensitivityUnit::DbPerVolt;
    hp.impedance_ohms = 250.0;
    return RigModel(SoundcardSpec{2.0, 0.0}, hp, RigModel::kDefaultNoiseFloorDba,
                    "synthetic reference chain; full-scale voltage is illustrative");
}

config::Manifest write_dataset(const std::filesystem::path& dir, const std::vector<TrackSpec>& specs,
                               const SynthOptions& options, const RigModel& rig, wav::SampleFormat format) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "tracks");

    config::Manifest manifest;
    manifest.rig_path = dir / "rig.json";
    manifest.session.seed = options.seed;
    for (const auto& spec : specs) {
        const auto track = synth_track(spec.track_id, spec.nominal_dba, options);
        const fs::path audio = dir / "tracks" / (spec.track_id + ".wav");
        wav::write(audio, {track.left, track.right, track.sample_rate_hz, format});
        manifest.tracks.push_back({spec.track_id, audio, options.cal_constant_db, spec.nominal_dba});
    }
    config::write_file_atomic(*manifest.rig_path, config::rig_to_json(rig).dump(2) + "\n");
    config::write_file_atomic(dir / "manifest.json", config::manifest_to_json(manifest, dir).dump(2) + "\n");
    return manifest;
}

}  // namespace hpcal::dataset
