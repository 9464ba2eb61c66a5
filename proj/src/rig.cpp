#include "hpcal/rig.hpp"

#include "hpcal/errors.hpp"
#include "hpcal/min_phase_fir.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace hpcal {

namespace {

constexpr double kFilterReferenceHz = 1000.0;

double energetic_sum(double a_db, double b_db) {
    if (is_silent(a_db)) return b_db;
    if (is_silent(b_db)) return a_db;
    const double top = std::max(a_db, b_db);
    return top + 10.0 * std::log10(std::pow(10.0, (a_db - top) / 10.0) + std::pow(10.0, (b_db - top) / 10.0));
}

}  // namespace

struct RigModel::FilterCache {
    std::mutex mutex;
    std::map<int, std::vector<double>> taps;
};

void SoundcardSpec::validate() const {
    if (!(full_scale_voltage_rms > 0.0)) throw std::domain_error("full-scale voltage must be positive");
    if (!(output_impedance_ohms >= 0.0)) throw std::domain_error("output impedance must be non-negative");
}

RigModel::RigModel(SoundcardSpec soundcard, HeadphoneSpec headphones, double noise_floor_dba, std::string caveat)
    : soundcard_(soundcard),
      headphones_(std::move(headphones)),
      noise_floor_dba_(noise_floor_dba),
      caveat_(std::move(caveat)),
      filters_(std::make_shared<FilterCache>()) {
    soundcard_.validate();
    headphones_.validate();
    if (!std::isfinite(noise_floor_dba_)) throw std::domain_error("noise floor must be finite");
}

RigModel RigModel::with_analog_gain(double gain) const {
    if (!(gain > 0.0 && gain <= 1.0)) throw std::domain_error("analog gain must be in (0, 1]");
    RigModel copy = *this;
    copy.analog_gain_ = gain;
    return copy;
}

RigModel RigModel::with_seating(SeatingOffsets offsets) const {
    if (!std::isfinite(offsets.left_db) || !std::isfinite(offsets.right_db))
        throw std::domain_error("seating offsets must be finite");
    RigModel copy = *this;
    copy.seating_ = offsets;
    return copy;
}

bool RigModel::is_flat() const { return !headphones_.frequency_response && !headphones_.impedance_curve; }

double RigModel::transfer_db(double frequency_hz) const {
    const double sensitivity = headphones_.frequency_response
                                   ? headphones_.frequency_response->at_clamped(frequency_hz)
                                   : headphones_.sensitivity_dbv();
    const double load = headphones_.impedance_curve ? headphones_.impedance_curve->at_clamped(frequency_hz)
                                                    : headphones_.impedance_ohms;
    return sensitivity + loading_loss(load, soundcard_.output_impedance_ohms);
}

const std::vector<double>& RigModel::transfer_filter(int sample_rate_hz) const {
    std::lock_guard lock(filters_->mutex);
    auto it = filters_->taps.find(sample_rate_hz);
    if (it == filters_->taps.end()) {
        const double reference = transfer_db(kFilterReferenceHz);
        auto fit = fir::design_min_phase(
            [this, reference](double f) { return transfer_db(std::max(f, 1.0)) - reference; }, sample_rate_hz);
        it = filters_->taps.emplace(sample_rate_hz, std::move(fit.taps)).first;
    }
    return it->second;
}

double loading_loss(double load_ohms, double source_ohms) {
    if (!(load_ohms > 0.0)) throw std::domain_error("load impedance must be positive");
    return 20.0 * std::log10(load_ohms / (load_ohms + source_ohms));
}

double loading_loss(const RigModel& rig, double frequency_hz) {
    return loading_loss(rig.headphones().impedance_at(frequency_hz), rig.soundcard().output_impedance_ohms);
}

MeasurementResult simulate_measurement(const RigModel& rig, const CalibratedTrack& track, double digital_gain_db) {
    track.validate();
    MeasurementResult result;
    result.track_id = track.track_id;
    result.digital_gain_db = digital_gain_db;
    result.clipped = track.peak() * std::pow(10.0, digital_gain_db / 20.0) > 1.0;

    // Everything between the digital samples and the ear is linear, so the chain
    // is evaluated at unity digital gain and the gains are added in dB.
    const double volts_db = digital_gain_db + 20.0 * std::log10(rig.analog_gain()) +
                            20.0 * std::log10(rig.soundcard().full_scale_voltage_rms);
    const double chain_db = volts_db + (rig.is_flat() ? rig.transfer_db(0.0) : rig.transfer_db(kFilterReferenceHz));

    auto channel_level = [&](const std::vector<double>& samples, double seating_db) {
        const std::vector<double> shaped =
            rig.is_flat() ? samples : fir::convolve(samples, rig.transfer_filter(track.sample_rate_hz));
        const double ms = mean_square(a_weight(shaped, track.sample_rate_hz));
        return level_from_mean_square(ms, chain_db + seating_db);
    };
    const LevelPair signal{channel_level(track.left, rig.seating().left_db),
                           channel_level(track.right, rig.seating().right_db)};

    result.signal_laeq_dba = energetic_average(signal);
    result.per_channel = {energetic_sum(signal.left_db, rig.noise_floor_dba()),
                          energetic_sum(signal.right_db, rig.noise_floor_dba())};
    result.measured_laeq_dba = energetic_average(result.per_channel);
    result.noise_floor_limited = result.signal_laeq_dba < rig.noise_floor_dba();
    return result;
}

double ocv_analog_gain(const RigModel& rig, const ReferenceTone& ref, double cal_constant_db) {
    const double tone_amplitude = std::pow(10.0, (ref.spl_db - cal_constant_db) / 20.0);
    if (tone_amplitude > 1.0)
        throw HeadroomError("reference tone at " + std::to_string(ref.spl_db) +
                            " dB SPL exceeds digital full scale for calibration constant " +
                            std::to_string(cal_constant_db) + " dB");
    const double target = required_voltage(ref, rig.headphones());
    const double at_full_gain = tone_amplitude * rig.soundcard().full_scale_voltage_rms;
    const double gain = target / at_full_gain;
    if (gain > 1.0)
        throw HeadroomError("insufficient output headroom: " + std::to_string(target) +
                            " V RMS required, soundcard delivers " + std::to_string(at_full_gain) +
                            " V RMS at full gain");
    return gain;
}

OcvSession simulate_ocv_session(const RigModel& rig, const std::vector<CalibratedTrack>& tracks,
                                const ReferenceTone& ref) {
    if (tracks.empty()) throw ConfigError("OCV session needs at least one track");
    const double cal = tracks.front().cal_constant_db;
    for (const auto& t : tracks)
        if (t.cal_constant_db != cal)
            throw ConfigError("OCV calibration needs one calibration constant for all tracks; '" + t.track_id +
                              "' differs");

    OcvSession session{rig.with_analog_gain(ocv_analog_gain(rig, ref, cal)), {}};
    session.results.reserve(tracks.size());
    for (const auto& t : tracks) session.results.push_back(simulate_measurement(session.rig, t, 0.0));
    return session;
}

}  // namespace hpcal
