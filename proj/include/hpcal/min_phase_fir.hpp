#pragma once

#include <functional>
#include <span>
#include <vector>

namespace hpcal::fir {

struct FitOptions {
    std::size_t initial_taps = 2048;
    std::size_t max_taps = 16384;
    double tolerance_db = 0.1;
    double band_low_hz = 20.0;
    double band_high_hz = 16000.0;
};

struct MinPhaseFir {
    std::vector<double> taps;
    // Largest |achieved - desired| in dB over the fit band.
    double max_fit_error_db = 0.0;
};

// Designs a minimum-phase FIR whose magnitude follows `magnitude_db(f)` for
// f in [0, fs/2], using the folded real cepstrum. The tap count doubles from
// initial_taps until the fit is within tolerance; throws std::runtime_error if
// max_taps is not enough.
MinPhaseFir design_min_phase(const std::function<double(double)>& magnitude_db, double sample_rate_hz,
                             const FitOptions& options = {});

// Magnitude of an FIR at one frequency, by direct evaluation.
double magnitude_db(std::span<const double> taps, double frequency_hz, double sample_rate_hz);

// Linear convolution truncated to the input length.
std::vector<double> convolve(std::span<const double> signal, std::span<const double> taps);

}  // namespace hpcal::fir
