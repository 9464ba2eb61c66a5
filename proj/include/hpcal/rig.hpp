#pragma once

// Simulated playback and measurement chain standing in for headphones on a
// head-and-torso simulator: soundcard output stage, the headphone as an
// electrical load and transducer, and the measurement system's noise floor.

#include "hpcal/dsp.hpp"
#include "hpcal/sensitivity.hpp"

#include <memory>
#include <string>
#include <vector>

namespace hpcal {

struct SoundcardSpec {
    // Open-circuit RMS voltage of a 0 dBFS sine at full analog gain.
    double full_scale_voltage_rms = 1.0;
    double output_impedance_ohms = 0.0;

    void validate() const;
};

// Per-channel flat gain from how the headphones sit on the head.
struct SeatingOffsets {
    double left_db = 0.0;
    double right_db = 0.0;
};

class RigModel {
public:
    static constexpr double kDefaultNoiseFloorDba = 41.0;

    RigModel(SoundcardSpec soundcard, HeadphoneSpec headphones,
             double noise_floor_dba = kDefaultNoiseFloorDba, std::string caveat = {});

    const SoundcardSpec& soundcard() const { return soundcard_; }
    const HeadphoneSpec& headphones() const { return headphones_; }
    double noise_floor_dba() const { return noise_floor_dba_; }
    double analog_gain() const { return analog_gain_; }
    const SeatingOffsets& seating() const { return seating_; }
    // Free-text note carried from the rig file, e.g. undisclosed current limiting.
    const std::string& caveat() const { return caveat_; }

    RigModel with_analog_gain(double gain) const;
    RigModel with_seating(SeatingOffsets offsets) const;

    // True when neither sensitivity nor impedance varies with frequency.
    bool is_flat() const;

    // Pressure level in dB SPL per volt RMS of open-circuit voltage, at f.
    // Curves are held at their end values outside their domain.
    double transfer_db(double frequency_hz) const;

    // Minimum-phase FIR realizing transfer_db relative to its 1 kHz value.
    // Designed once per sample rate and shared between copies of the model.
    const std::vector<double>& transfer_filter(int sample_rate_hz) const;

private:
    struct FilterCache;

    SoundcardSpec soundcard_;
    HeadphoneSpec headphones_;
    double noise_floor_dba_;
    double analog_gain_ = 1.0;
    SeatingOffsets seating_;
    std::string caveat_;
    std::shared_ptr<FilterCache> filters_;
};

double loading_loss(const RigModel& rig, double frequency_hz);
double loading_loss(double load_ohms, double source_ohms);

struct MeasurementResult {
    std::string track_id;
    double measured_laeq_dba = 0.0;
    LevelPair per_channel;
    double digital_gain_db = 0.0;
    // Level of the reproduced signal alone, before the floor is added.
    double signal_laeq_dba = 0.0;
    bool noise_floor_limited = false;
    bool clipped = false;
};

MeasurementResult simulate_measurement(const RigModel& rig, const CalibratedTrack& track, double digital_gain_db);

struct OcvSession {
    RigModel rig;  // with the analog gain the voltmeter procedure settles on
    std::vector<MeasurementResult> results;
};

// Analog gain at which the reference tone's open-circuit voltage equals the
// required voltage. The tone is a sine at ref.spl_db in the dataset's digital
// convention (cal_constant_db). Throws HeadroomError if more than full gain
// would be needed.
double ocv_analog_gain(const RigModel& rig, const ReferenceTone& ref, double cal_constant_db);

// Throws ConfigError if the tracks do not share one calibration constant.
OcvSession simulate_ocv_session(const RigModel& rig, const std::vector<CalibratedTrack>& tracks,
                                const ReferenceTone& ref);

}  // namespace hpcal
