#include "hpcal/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hpcal {

SensitivityUnit parse_sensitivity_unit(std::string_view text) {
    if (text == "dbv" || text == "dB/V" || text == "dB_per_volt") return SensitivityUnit::DbPerVolt;
    if (text == "dbmw" || text == "dB/mW" || text == "dB_per_milliwatt") return SensitivityUnit::DbPerMilliwatt;
    throw std::invalid_argument("unknown sensitivity unit '" + std::string(text) + "'");
}

std::string_view to_string(SensitivityUnit unit) {
    return unit == SensitivityUnit::DbPerVolt ? "dB/V" : "dB/mW";
}

FrequencyCurve::FrequencyCurve(std::vector<CurvePoint> points) : points_(std::move(points)) {
    if (points_.empty()) throw std::domain_error("frequency curve has no points");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!(points_[i].frequency_hz > 0.0) || !std::isfinite(points_[i].value))
            throw std::domain_error("frequency curve point " + std::to_string(i) + " is invalid");
        if (i > 0 && !(points_[i].frequency_hz > points_[i - 1].frequency_hz))
            throw std::domain_error("frequency curve axis must be strictly increasing");
    }
}

bool FrequencyCurve::contains(double frequency_hz) const {
    return !points_.empty() && frequency_hz >= points_.front().frequency_hz &&
           frequency_hz <= points_.back().frequency_hz;
}

double FrequencyCurve::at(double frequency_hz) const {
    if (!contains(frequency_hz))
        throw std::out_of_range("frequency " + std::to_string(frequency_hz) +
                                " Hz is outside the tabulated curve");
    return at_clamped(frequency_hz);
}

double FrequencyCurve::at_clamped(double frequency_hz) const {
    if (frequency_hz <= points_.front().frequency_hz) return points_.front().value;
    if (frequency_hz >= points_.back().frequency_hz) return points_.back().value;
    auto hi = std::upper_bound(points_.begin(), points_.end(), frequency_hz,
                               [](double f, const CurvePoint& p) { return f < p.frequency_hz; });
    auto lo = hi - 1;
    const double t = (std::log10(frequency_hz) - std::log10(lo->frequency_hz)) /
                     (std::log10(hi->frequency_hz) - std::log10(lo->frequency_hz));
    return lo->value + t * (hi->value - lo->value);
}

void HeadphoneSpec::validate() const {
    if (!std::isfinite(sensitivity_value)) throw std::domain_error("sensitivity must be finite");
    if (!(impedance_ohms > 0.0)) throw std::domain_error("impedance must be positive");
    if (impedance_curve) {
        for (const auto& p : impedance_curve->points())
            if (!(p.value > 0.0)) throw std::domain_error("impedance curve values must be positive");
    }
}

double HeadphoneSpec::sensitivity_dbv() const {
    if (sensitivity_unit == SensitivityUnit::DbPerVolt) return sensitivity_value;
    return convert_mw_to_v(sensitivity_value, impedance_ohms);
}

double HeadphoneSpec::sensitivity_dbv_at(double frequency_hz) const {
    if (frequency_response) return frequency_response->at(frequency_hz);
    return sensitivity_dbv();
}

double HeadphoneSpec::impedance_at(double frequency_hz) const {
    if (impedance_curve) return impedance_curve->at(frequency_hz);
    return impedance_ohms;
}

double convert_mw_to_v(double sensitivity_dbmw, double impedance_ohms) {
    if (!(impedance_ohms > 0.0)) throw std::domain_error("impedance must be positive");
    return sensitivity_dbmw - 10.0 * std::log10(impedance_ohms / 1000.0);
}

double convert_v_to_mw(double sensitivity_dbv, double impedance_ohms) {
    if (!(impedance_ohms > 0.0)) throw std::domain_error("impedance must be positive");
    return sensitivity_dbv + 10.0 * std::log10(impedance_ohms / 1000.0);
}

double spl_from_power(double sensitivity_dbmw, double power_watts) {
    if (!(power_watts > 0.0)) throw std::domain_error("power must be positive");
    return sensitivity_dbmw + 10.0 * std::log10(power_watts / 1e-3);
}

double required_voltage(double spl_db, double sensitivity_dbv) {
    return std::pow(10.0, (spl_db - sensitivity_dbv) / 20.0);
}

double required_voltage(const ReferenceTone& ref, const HeadphoneSpec& spec) {
    if (!(ref.frequency_hz > 0.0)) throw std::domain_error("reference frequency must be positive");
    spec.validate();
    return required_voltage(ref.spl_db, spec.sensitivity_dbv_at(ref.frequency_hz));
}

double spl_from_voltage(double volts_rms, double sensitivity_dbv) {
    if (!(volts_rms > 0.0)) throw std::domain_error("voltage must be positive");
    return sensitivity_dbv + 20.0 * std::log10(volts_rms);
}

double spl_from_voltage(double volts_rms, const HeadphoneSpec& spec, double frequency_hz) {
    if (!(volts_rms > 0.0)) throw std::domain_error("voltage must be positive");
    spec.validate();
    return spl_from_voltage(volts_rms, spec.sensitivity_dbv_at(frequency_hz));
}

}  // namespace hpcal
