#pragma once

// Level metrology for stereo tracks: A-weighting as a cascade of biquads,
// whole-track A-weighted equivalent level and energetic channel averaging.

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace hpcal {

// Direct form II transposed section, a0 normalized to 1.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;

    std::complex<double> response(std::complex<double> z) const;
};

class SosCascade {
public:
    SosCascade() = default;
    explicit SosCascade(std::vector<Biquad> sections) : sections_(std::move(sections)) {}

    // Filters from zero initial state. Coefficients are never mutated, so one
    // cascade may be shared between threads.
    std::vector<double> process(std::span<const double> input) const;
    // Filters as if the input had already been playing on a loop: each section
    // runs over the input once to settle and the second pass is kept. A
    // periodic input then yields its steady-state output, free of start-up
    // transients and independent of where the period was cut.
    std::vector<double> process_looped(std::span<const double> input) const;

    std::complex<double> response(double frequency_hz, double sample_rate_hz) const;
    double gain_db(double frequency_hz, double sample_rate_hz) const;
    std::vector<std::complex<double>> poles() const;

    std::span<const Biquad> sections() const { return sections_; }

private:
    std::vector<Biquad> sections_;
};

bool is_supported_sample_rate(int sample_rate_hz);

// Throws ConfigError for unsupported rates.
const SosCascade& a_weighting_filter(int sample_rate_hz);

// Looped (steady-state) A-weighting, see SosCascade::process_looped.
std::vector<double> a_weight(std::span<const double> samples, int sample_rate_hz);

// A silent signal has level -infinity.
bool is_silent(double level_db);

double mean_square(std::span<const double> samples);

// Level of a signal whose 0 dBFS sine corresponds to cal_constant_db, without weighting.
double level_from_mean_square(double mean_sq, double cal_constant_db);

double laeq(std::span<const double> samples, int sample_rate_hz, double cal_constant_db);

struct LevelPair {
    double left_db = 0.0;
    double right_db = 0.0;
};

double energetic_average(const LevelPair& levels);

struct CalibratedTrack {
    std::string track_id;
    std::vector<double> left;
    std::vector<double> right;
    int sample_rate_hz = 48000;
    // dB SPL produced by a 0 dBFS sine.
    double cal_constant_db = 94.0;
    double nominal_laeq_db = 0.0;

    void validate() const;
    std::size_t frames() const { return left.size(); }
    double peak() const;
};

LevelPair channel_laeq(const CalibratedTrack& track);
double track_laeq(const CalibratedTrack& track);

}  // namespace hpcal
