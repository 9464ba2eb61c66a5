#pragma once

// Open-circuit voltage calibration arithmetic: headphone sensitivity in dB/V
// and dB/mW, the SPL produced by a given power or voltage, and the voltage
// needed at the jack to reproduce a reference tone.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace hpcal {

enum class SensitivityUnit { DbPerVolt, DbPerMilliwatt };

SensitivityUnit parse_sensitivity_unit(std::string_view text);
std::string_view to_string(SensitivityUnit unit);

// One tabulated point of a frequency-dependent quantity.
struct CurvePoint {
    double frequency_hz;
    double value;
};

// Tabulated curve over a strictly increasing frequency axis.
// Values are interpolated linearly against log10(frequency); queries
// outside [front, back] throw std::out_of_range.
class FrequencyCurve {
public:
    FrequencyCurve() = default;
    explicit FrequencyCurve(std::vector<CurvePoint> points);

    double at(double frequency_hz) const;
    // Same interpolation, but holds the end values outside the domain.
    double at_clamped(double frequency_hz) const;

    bool contains(double frequency_hz) const;
    double min_frequency() const { return points_.front().frequency_hz; }
    double max_frequency() const { return points_.back().frequency_hz; }
    std::span<const CurvePoint> points() const { return points_; }

private:
    std::vector<CurvePoint> points_;
};

struct HeadphoneSpec {
    double sensitivity_value = 0.0;
    SensitivityUnit sensitivity_unit = SensitivityUnit::DbPerVolt;
    double impedance_ohms = 0.0;
    // Sensitivity in dB/V against frequency.
    std::optional<FrequencyCurve> frequency_response;
    // Impedance in ohms against frequency; every value must be positive.
    std::optional<FrequencyCurve> impedance_curve;

    // Throws std::domain_error when an invariant is violated.
    void validate() const;

    // Nominal sensitivity converted to dB/V using the scalar impedance.
    double sensitivity_dbv() const;
    // Sensitivity in dB/V at a frequency: the curve when present, otherwise flat.
    double sensitivity_dbv_at(double frequency_hz) const;
    double impedance_at(double frequency_hz) const;
};

struct ReferenceTone {
    double spl_db = 94.0;
    double frequency_hz = 1000.0;
};

double convert_mw_to_v(double sensitivity_dbmw, double impedance_ohms);
double convert_v_to_mw(double sensitivity_dbv, double impedance_ohms);

double spl_from_power(double sensitivity_dbmw, double power_watts);

// RMS volts at the jack that reproduce the reference tone's SPL.
double required_voltage(const ReferenceTone& ref, const HeadphoneSpec& spec);
double required_voltage(double spl_db, double sensitivity_dbv);

double spl_from_voltage(double volts_rms, const HeadphoneSpec& spec, double frequency_hz);
double spl_from_voltage(double volts_rms, double sensitivity_dbv);

}  // namespace hpcal
