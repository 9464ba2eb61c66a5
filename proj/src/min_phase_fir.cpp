#include "hpcal/min_phase_fir.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace hpcal::fir {

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

class RealFft {
public:
    explicit RealFft(std::size_t n)
        : n_(n),
          time_(fftw_alloc_real(n)),
          freq_(fftw_alloc_complex(n / 2 + 1)) {
        std::lock_guard lock(planner_mutex());
        const int size = static_cast<int>(n);
        forward_ = fftw_plan_dft_r2c_1d(size, time_, freq_, FFTW_ESTIMATE);
        inverse_ = fftw_plan_dft_c2r_1d(size, freq_, time_, FFTW_ESTIMATE);
    }
    ~RealFft() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(inverse_);
        fftw_free(time_);
        fftw_free(freq_);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::size_t size() const { return n_; }
    std::size_t bins() const { return n_ / 2 + 1; }
    double* time() { return time_; }
    std::complex<double>* freq() { return reinterpret_cast<std::complex<double>*>(freq_); }

    void forward() { fftw_execute(forward_); }
    // Unnormalized, like FFTW: the result is scaled by size().
    void inverse() { fftw_execute(inverse_); }

private:
    std::size_t n_;
    double* time_;
    fftw_complex* freq_;
    fftw_plan forward_;
    fftw_plan inverse_;
};

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

MinPhaseFir design_min_phase(const std::function<double(double)>& magnitude_db, double sample_rate_hz,
                             const FitOptions& options) {
    const std::size_t n = std::max<std::size_t>(65536, 8 * options.max_taps);
    RealFft fft(n);
    const double bin_hz = sample_rate_hz / static_cast<double>(n);

    std::vector<double> desired_db(fft.bins());
    for (std::size_t k = 0; k < fft.bins(); ++k) desired_db[k] = magnitude_db(k * bin_hz);

    // Real cepstrum of the log magnitude.
    for (std::size_t k = 0; k < fft.bins(); ++k)
        fft.freq()[k] = desired_db[k] * std::numbers::ln10 / 20.0;
    fft.inverse();
    std::vector<double> cepstrum(fft.time(), fft.time() + n);
    for (double& c : cepstrum) c /= static_cast<double>(n);

    // Fold onto positive quefrencies, which yields the minimum-phase spectrum.
    fft.time()[0] = cepstrum[0];
    for (std::size_t i = 1; i < n / 2; ++i) fft.time()[i] = 2.0 * cepstrum[i];
    fft.time()[n / 2] = cepstrum[n / 2];
    std::fill(fft.time() + n / 2 + 1, fft.time() + n, 0.0);
    fft.forward();
    for (std::size_t k = 0; k < fft.bins(); ++k) fft.freq()[k] = std::exp(fft.freq()[k]);
    fft.inverse();
    std::vector<double> impulse(fft.time(), fft.time() + n);
    for (double& h : impulse) h /= static_cast<double>(n);

    const double high = std::min(options.band_high_hz, sample_rate_hz / 2.0);
    MinPhaseFir best;
    for (std::size_t taps = options.initial_taps; taps <= options.max_taps; taps *= 2) {
        std::fill(fft.time(), fft.time() + n, 0.0);
        std::copy_n(impulse.begin(), taps, fft.time());
        fft.forward();
        double worst = 0.0;
        for (std::size_t k = 1; k < fft.bins(); ++k) {
            const double f = k * bin_hz;
            if (f < options.band_low_hz || f > high) continue;
            const double achieved = 20.0 * std::log10(std::abs(fft.freq()[k]));
            worst = std::max(worst, std::abs(achieved - desired_db[k]));
        }
        best.taps.assign(impulse.begin(), impulse.begin() + taps);
        best.max_fit_error_db = worst;
        if (worst < options.tolerance_db) return best;
    }
    throw std::runtime_error("minimum-phase fit error " + std::to_string(best.max_fit_error_db) +
                             " dB exceeds tolerance at " + std::to_string(options.max_taps) + " taps");
}

double magnitude_db(std::span<const double> taps, double frequency_hz, double sample_rate_hz) {
    const double w = 2.0 * std::numbers::pi * frequency_hz / sample_rate_hz;
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < taps.size(); ++i) acc += taps[i] * std::polar(1.0, -w * static_cast<double>(i));
    return 20.0 * std::log10(std::abs(acc));
}

std::vector<double> convolve(std::span<const double> signal, std::span<const double> taps) {
    if (signal.empty() || taps.empty()) return std::vector<double>(signal.size(), 0.0);
    const std::size_t m = next_pow2(signal.size() + taps.size() - 1);
    RealFft a(m);
    RealFft b(m);
    std::fill(a.time(), a.time() + m, 0.0);
    std::copy(signal.begin(), signal.end(), a.time());
    std::fill(b.time(), b.time() + m, 0.0);
    std::copy(taps.begin(), taps.end(), b.time());
    a.forward();
    b.forward();
    for (std::size_t k = 0; k < a.bins(); ++k) a.freq()[k] *= b.freq()[k] / static_cast<double>(m);
    a.inverse();
    return std::vector<double>(a.time(), a.time() + signal.size());
}

}  // namespace hpcal::fir
