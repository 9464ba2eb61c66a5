#include "hpcal/dataset.hpp"
#include "hpcal/errors.hpp"
#include "hpcal/rig.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace hpcal;

namespace {

HeadphoneSpec flat_headphones(double s_v = 99.14, double z = 250.0) {
    HeadphoneSpec hp;
    hp.sensitivity_value = s_v;
    hp.sensitivity_unit = SensitivityUnit::DbPerVolt;
    hp.impedance_ohms = z;
    return hp;
}

RigModel quiet_rig(double z_out = 0.0) { return RigModel(SoundcardSpec{2.0, z_out}, flat_headphones(), 10.0); }

double tilt_db(double f) { return std::clamp(-6.0 * std::log2(f / 1000.0), -6.0, 6.0); }

RigModel tilted_rig() {
    HeadphoneSpec hp = flat_headphones();
    std::vector<CurvePoint> pts;
    for (double f = 20.0; f <= 20000.0 * 1.0001; f *= std::pow(2.0, 1.0 / 12.0)) pts.push_back({f, 99.14 + tilt_db(f)});
    hp.frequency_response = FrequencyCurve(pts);
    return RigModel(SoundcardSpec{2.0, 0.0}, hp, 10.0);
}

}  // namespace

TEST_CASE("loading_loss") {
    CHECK(loading_loss(250.0, 0.0) == 0.0);
    CHECK(loading_loss(250.0, 250.0) == doctest::Approx(oracle::kLoadingHalf).epsilon(1e-13));
    CHECK(loading_loss(250.0, 1.0) == doctest::Approx(oracle::kLoading250Over251).epsilon(1e-12));
    CHECK_THROWS_AS(loading_loss(0.0, 1.0), std::domain_error);
    CHECK(loading_loss(quiet_rig(250.0), 1000.0) == doctest::Approx(oracle::kLoadingHalf).epsilon(1e-13));
}

TEST_CASE("a 94 dB reference sine measures 94 dB on a flat rig after OCV") {
    const RigModel base = quiet_rig();
    const ReferenceTone ref{94.0, 1000.0};
    const RigModel rig = base.with_analog_gain(ocv_analog_gain(base, ref, 100.0));
    const auto tone = dataset::sine_track("ref", 1000.0, std::pow(10.0, -6.0 / 20.0), 48000, 1.0, 100.0);
    const auto m = simulate_measurement(rig, tone, 0.0);
    CHECK(std::abs(m.measured_laeq_dba - 94.0) < 0.2);
    CHECK_FALSE(m.clipped);
    CHECK_FALSE(m.noise_floor_limited);
}

TEST_CASE("output impedance equal to the load costs 6.02 dB") {
    const auto t = dataset::synth_track("E02", 71.69, {});
    const double a = simulate_measurement(quiet_rig(0.0), t, 0.0).signal_laeq_dba;
    const double b = simulate_measurement(quiet_rig(250.0), t, 0.0).signal_laeq_dba;
    CHECK(std::abs((b - a) - oracle::kLoadingHalf) < 1e-6);
}

TEST_CASE("silence measures the noise floor") {
    auto t = dataset::sine_track("s", 1000.0, 0.0, 48000, 0.5, 100.0);
    const auto m = simulate_measurement(dataset::reference_rig(), t, 0.0);
    CHECK(m.measured_laeq_dba == doctest::Approx(41.0).epsilon(1e-12));
    CHECK(is_silent(m.signal_laeq_dba));
    CHECK(m.noise_floor_limited);
}

TEST_CASE("noise floor adds energetically") {
    const auto t = dataset::synth_track("KT01", 40.19, {});
    const RigModel base = dataset::reference_rig();
    const RigModel rig = base.with_analog_gain(ocv_analog_gain(base, {}, 100.0));
    const auto m = simulate_measurement(rig, t, 0.0);
    CHECK(m.noise_floor_limited);
    CHECK(std::abs(m.signal_laeq_dba - 40.19) < 0.01);
    CHECK(m.measured_laeq_dba == doctest::Approx(oracle::db_power_sum(m.signal_laeq_dba, 41.0)).epsilon(1e-3));
    CHECK(m.per_channel.left_db > 41.0);
    CHECK(m.measured_laeq_dba > m.signal_laeq_dba);
}

TEST_CASE("measurement is monotone in digital gain") {
    const auto t = dataset::synth_track("W01", 66.79, {});
    const RigModel rig = dataset::reference_rig();
    double prev = -INFINITY;
    for (double g = -30.0; g <= 0.0; g += 2.5) {
        const double m = simulate_measurement(rig, t, g).measured_laeq_dba;
        CHECK(m > prev);
        prev = m;
    }
    const double a = simulate_measurement(quiet_rig(), t, -6.0).measured_laeq_dba;
    const double b = simulate_measurement(quiet_rig(), t, -6.0 + 20.0 * std::log10(2.0)).measured_laeq_dba;
    CHECK(std::abs((b - a) - 6.0206) < 0.05);
}

TEST_CASE("clipping is flagged") {
    const auto t = dataset::sine_track("s", 1000.0, 0.5, 48000, 0.5, 100.0);
    CHECK_FALSE(simulate_measurement(quiet_rig(), t, 6.0).clipped);
    CHECK(simulate_measurement(quiet_rig(), t, 6.1).clipped);
}

TEST_CASE("OCV analog gain") {
    const RigModel rig = dataset::reference_rig();
    const ReferenceTone ref{94.0, 1000.0};
    const double g = ocv_analog_gain(rig, ref, 100.0);
    CHECK(g * 2.0 * std::pow(10.0, -6.0 / 20.0) == doctest::Approx(oracle::kVoltageDt990).epsilon(1e-12));

    SUBCASE("insufficient soundcard output") {
        const RigModel weak(SoundcardSpec{0.5, 0.0}, flat_headphones(), 41.0);
        CHECK_THROWS_AS(ocv_analog_gain(weak, ref, 100.0), HeadroomError);
    }
    SUBCASE("reference tone above full scale") { CHECK_THROWS_AS(ocv_analog_gain(rig, ref, 90.0), HeadroomError); }
    SUBCASE("gain range") {
        CHECK_THROWS_AS(rig.with_analog_gain(1.5), std::domain_error);
        CHECK_THROWS_AS(rig.with_analog_gain(0.0), std::domain_error);
    }
}

TEST_CASE("OCV session rejects mixed calibration constants") {
    const auto a = dataset::sine_track("a", 1000.0, 0.1, 48000, 0.2, 100.0);
    const auto b = dataset::sine_track("b", 1000.0, 0.1, 48000, 0.2, 94.0);
    CHECK_THROWS_AS(simulate_ocv_session(quiet_rig(), {a, b}, {}), ConfigError);
    CHECK_THROWS_AS(simulate_ocv_session(quiet_rig(), {}, {}), ConfigError);
}

TEST_CASE("OCV on a loaded source shifts every track by -6.02 dB") {
    std::vector<CalibratedTrack> tracks;
    for (const auto& s : dataset::table2_specs()) tracks.push_back(dataset::synth_track(s.track_id, s.nominal_dba, {}));
    const auto ideal = simulate_ocv_session(quiet_rig(0.0), tracks, {});
    const auto loaded = simulate_ocv_session(quiet_rig(250.0), tracks, {});
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        CAPTURE(tracks[i].track_id);
        CHECK(std::abs(loaded.results[i].measured_laeq_dba - ideal.results[i].measured_laeq_dba + 6.02) < 0.2);
    }
}

TEST_CASE("sensitivity tilt leaves 1 kHz exact and shifts narrowband tracks") {
    const RigModel tilted = tilted_rig();
    const RigModel flat = quiet_rig();
    CHECK_FALSE(tilted.is_flat());
    CHECK(tilted.transfer_db(1000.0) == doctest::Approx(99.14).epsilon(1e-12));

    for (double f : {1000.0, 250.0, 4000.0}) {
        CAPTURE(f);
        const auto t = dataset::sine_track("s", f, 0.1, 48000, 1.0, 100.0);
        const double a = simulate_ocv_session(flat, {t}, {}).results[0].measured_laeq_dba;
        const double b = simulate_ocv_session(tilted, {t}, {}).results[0].measured_laeq_dba;
        CHECK(std::abs((b - a) - tilt_db(f)) < 0.3);
    }
}

TEST_CASE("transfer follows the curves and clamps outside them") {
    HeadphoneSpec hp = flat_headphones();
    hp.frequency_response = FrequencyCurve({{100.0, 95.0}, {10000.0, 105.0}});
    hp.impedance_curve = FrequencyCurve({{100.0, 500.0}, {10000.0, 250.0}});
    const RigModel rig(SoundcardSpec{1.0, 250.0}, hp, 30.0);
    CHECK(rig.transfer_db(100.0) == doctest::Approx(95.0 + 20.0 * std::log10(500.0 / 750.0)));
    CHECK(rig.transfer_db(20.0) == rig.transfer_db(100.0));
    CHECK(rig.transfer_db(20000.0) == doctest::Approx(105.0 + oracle::kLoadingHalf));
    CHECK(rig.transfer_filter(48000).size() >= 2048);
    // Copies share the designed filter.
    const RigModel copy = rig.with_seating({0.2, -0.2});
    CHECK(&copy.transfer_filter(48000) == &rig.transfer_filter(48000));
}

TEST_CASE("seating offsets shift each channel") {
    const auto t = dataset::sine_track("s", 1000.0, 0.1, 48000, 0.5, 100.0);
    const auto a = simulate_measurement(quiet_rig(), t, 0.0);
    const auto b = simulate_measurement(quiet_rig().with_seating({1.0, -2.0}), t, 0.0);
    CHECK(std::abs(b.per_channel.left_db - a.per_channel.left_db - 1.0) < 1e-3);
    CHECK(std::abs(b.per_channel.right_db - a.per_channel.right_db + 2.0) < 1e-3);
}
