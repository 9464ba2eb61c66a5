#pragma once

// Reference computations used only by tests. They evaluate closed-form
// expressions directly and share no code with the library.

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

namespace oracle {

// Analog A-weighting magnitude in dB (IEC 61672-1 closed form, 0 dB at 1 kHz after +2.0 dB).
inline double a_weighting_db(double f) {
    const double f1 = 20.598997, f2 = 107.65265, f3 = 737.86223, f4 = 12194.217;
    const double f_2 = f * f;
    const double ra = (f4 * f4 * f_2 * f_2) /
                      ((f_2 + f1 * f1) * std::sqrt((f_2 + f2 * f2) * (f_2 + f3 * f3)) * (f_2 + f4 * f4));
    return 20.0 * std::log10(ra) + 2.0;
}

// Level of a sine of amplitude `amp` (1 = full scale) under a calibration
// constant, A-weighted at its frequency.
inline double sine_laeq(double amp, double f, double cal_constant_db) {
    return cal_constant_db + 20.0 * std::log10(amp) + a_weighting_db(f);
}

inline double db_power_sum(double a, double b) {
    return 10.0 * std::log10(std::pow(10.0, a / 10.0) + std::pow(10.0, b / 10.0));
}

// Values frozen from a 30-digit mpmath evaluation of the same closed forms.
inline constexpr double kMw250ToV = 102.020599913279623904;    // 96 - 10 log10(0.25)
inline constexpr double kPowerDoubled = 99.0102999566398119521;  // 96 + 10 log10(2)
inline constexpr double kPowerHalved = 92.9897000433601880479;   // 96 + 10 log10(0.5)
inline constexpr double kVoltage94Over93 = 1.12201845430196343559;
inline constexpr double kVoltageDt990 = 0.553350109215736692657;
inline constexpr double kVoltage96DbmwAt1k = 0.794328234724281502066;
inline constexpr double kEnergetic60And70 = 67.4036268949424384554;
inline constexpr double kLoading250Over251 = -0.0346742561800105953605;
inline constexpr double kLoadingHalf = -6.02059991327962390427;
inline constexpr double kAWeight100 = -19.1424324793374454093;
inline constexpr double kAWeight10k = -2.49144226671143060978;

class TempDir {
public:
    explicit TempDir(const std::string& stem) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / (stem + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace oracle
