#include "hpcal/dsp.hpp"

#include "hpcal/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace hpcal {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Pole frequencies of the analog A-weighting prototype (IEC 61672-1).
constexpr double kPoleLow = 20.598997;
constexpr double kPoleMid1 = 107.65265;
constexpr double kPoleMid2 = 737.86223;
constexpr double kPoleHigh = 12194.217;
// Gain that brings the analog curve to 0 dB at 1 kHz.
constexpr double kNormalizationDb = 2.000;
// The 12.2 kHz double pole sits close to Nyquist, where the plain bilinear map
// compresses the response by more than 1 dB at 10 kHz. That section is
// transformed with its frequency axis matched at this frequency instead.
constexpr double kHighSectionMatchHz = 10000.0;

double bilinear_pole(double k, double w) { return (k - w) / (k + w); }

// s^2 / (s + w)^2
Biquad highpass_double_pole(double k, double w) {
    const double p = bilinear_pole(k, w);
    const double g = (k / (k + w)) * (k / (k + w));
    return {g, -2.0 * g, g, -2.0 * p, p * p};
}

// s^2 / ((s + wa)(s + wb))
Biquad highpass_pole_pair(double k, double wa, double wb) {
    const double pa = bilinear_pole(k, wa);
    const double pb = bilinear_pole(k, wb);
    const double g = (k * k) / ((k + wa) * (k + wb));
    return {g, -2.0 * g, g, -(pa + pb), pa * pb};
}

// gain * w^2 / (s + w)^2
Biquad lowpass_double_pole(double k, double w, double gain) {
    const double p = bilinear_pole(k, w);
    const double g = gain * (w / (k + w)) * (w / (k + w));
    return {g, 2.0 * g, g, -2.0 * p, p * p};
}

SosCascade design_a_weighting(double fs) {
    const double k_plain = 2.0 * fs;
    const double k_matched = kTwoPi * kHighSectionMatchHz / std::tan(std::numbers::pi * kHighSectionMatchHz / fs);
    const double gain = std::pow(10.0, kNormalizationDb / 20.0);
    return SosCascade({
        highpass_double_pole(k_plain, kTwoPi * kPoleLow),
        highpass_pole_pair(k_plain, kTwoPi * kPoleMid1, kTwoPi * kPoleMid2),
        lowpass_double_pole(k_matched, kTwoPi * kPoleHigh, gain),
    });
}

}  // namespace

std::complex<double> Biquad::response(std::complex<double> z) const {
    const auto zi = 1.0 / z;
    return (b0 + zi * (b1 + zi * b2)) / (1.0 + zi * (a1 + zi * a2));
}

namespace {

// Direct form II transposed; state carries over between calls.
void run_section(const Biquad& s, std::vector<double>& samples, double& z1, double& z2) {
    for (double& x : samples) {
        const double y = s.b0 * x + z1;
        z1 = s.b1 * x - s.a1 * y + z2;
        z2 = s.b2 * x - s.a2 * y;
        x = y;
    }
}

}  // namespace

std::vector<double> SosCascade::process(std::span<const double> input) const {
    std::vector<double> out(input.begin(), input.end());
    for (const auto& s : sections_) {
        double z1 = 0.0, z2 = 0.0;
        run_section(s, out, z1, z2);
    }
    return out;
}

std::vector<double> SosCascade::process_looped(std::span<const double> input) const {
    std::vector<double> out(input.begin(), input.end());
    for (const auto& s : sections_) {
        double z1 = 0.0, z2 = 0.0;
        std::vector<double> settle = out;
        run_section(s, settle, z1, z2);
        run_section(s, out, z1, z2);
    }
    return out;
}

std::complex<double> SosCascade::response(double frequency_hz, double sample_rate_hz) const {
    const auto z = std::polar(1.0, kTwoPi * frequency_hz / sample_rate_hz);
    std::complex<double> h = 1.0;
    for (const auto& s : sections_) h *= s.response(z);
    return h;
}

double SosCascade::gain_db(double frequency_hz, double sample_rate_hz) const {
    return 20.0 * std::log10(std::abs(response(frequency_hz, sample_rate_hz)));
}

std::vector<std::complex<double>> SosCascade::poles() const {
    std::vector<std::complex<double>> out;
    for (const auto& s : sections_) {
        // z^2 + a1 z + a2 = 0
        const auto disc = std::sqrt(std::complex<double>(s.a1 * s.a1 - 4.0 * s.a2));
        out.push_back((-s.a1 + disc) / 2.0);
        out.push_back((-s.a1 - disc) / 2.0);
    }
    return out;
}

bool is_supported_sample_rate(int sample_rate_hz) {
    return sample_rate_hz == 44100 || sample_rate_hz == 48000;
}

const SosCascade& a_weighting_filter(int sample_rate_hz) {
    static const SosCascade at_44k1 = design_a_weighting(44100.0);
    static const SosCascade at_48k = design_a_weighting(48000.0);
    switch (sample_rate_hz) {
        case 44100: return at_44k1;
        case 48000: return at_48k;
        default:
            throw ConfigError("unsupported sample rate " + std::to_string(sample_rate_hz) +
                              " Hz (accepted: 44100, 48000)");
    }
}

std::vector<double> a_weight(std::span<const double> samples, int sample_rate_hz) {
    return a_weighting_filter(sample_rate_hz).process_looped(samples);
}

bool is_silent(double level_db) { return std::isinf(level_db) && level_db < 0.0; }

double mean_square(std::span<const double> samples) {
    if (samples.empty()) throw std::invalid_argument("mean_square of an empty signal");
    long double acc = 0.0L;
    for (double x : samples) acc += static_cast<long double>(x) * x;
    return static_cast<double>(acc / samples.size());
}

double level_from_mean_square(double mean_sq, double cal_constant_db) {
    if (mean_sq <= 0.0) return -std::numeric_limits<double>::infinity();
    // A full-scale sine has mean square 1/2.
    return 10.0 * std::log10(2.0 * mean_sq) + cal_constant_db;
}

double laeq(std::span<const double> samples, int sample_rate_hz, double cal_constant_db) {
    return level_from_mean_square(mean_square(a_weight(samples, sample_rate_hz)), cal_constant_db);
}

double energetic_average(const LevelPair& levels) {
    // Powers are taken relative to the larger level so very high levels do not overflow.
    const double top = std::max(levels.left_db, levels.right_db);
    if (is_silent(top)) return top;
    const double sum = std::pow(10.0, (levels.left_db - top) / 10.0) +
                       std::pow(10.0, (levels.right_db - top) / 10.0);
    return top + 10.0 * std::log10(sum / 2.0);
}

void CalibratedTrack::validate() const {
    if (left.empty()) throw ConfigError("track '" + track_id + "' has no samples");
    if (left.size() != right.size())
        throw ConfigError("track '" + track_id + "' has channels of different length");
    if (!is_supported_sample_rate(sample_rate_hz))
        throw ConfigError("track '" + track_id + "': unsupported sample rate " +
                          std::to_string(sample_rate_hz) + " Hz");
    if (!std::isfinite(cal_constant_db) || !std::isfinite(nominal_laeq_db))
        throw ConfigError("track '" + track_id + "' has a non-finite calibration value");
}

double CalibratedTrack::peak() const {
    double p = 0.0;
    for (double x : left) p = std::max(p, std::abs(x));
    for (double x : right) p = std::max(p, std::abs(x));
    return p;
}

LevelPair channel_laeq(const CalibratedTrack& track) {
    track.validate();
    return {laeq(track.left, track.sample_rate_hz, track.cal_constant_db),
            laeq(track.right, track.sample_rate_hz, track.cal_constant_db)};
}

double track_laeq(const CalibratedTrack& track) { return energetic_average(channel_laeq(track)); }

}  // namespace hpcal
