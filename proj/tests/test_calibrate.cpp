#include "hpcal/calibrate.hpp"
#include "hpcal/dataset.hpp"
#include "hpcal/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace hpcal;

namespace {

RigModel ocv_rig(double floor_dba = RigModel::kDefaultNoiseFloorDba) {
    const RigModel base = dataset::reference_rig();
    const RigModel rig(base.soundcard(), base.headphones(), floor_dba);
    return rig.with_analog_gain(ocv_analog_gain(rig, {}, 100.0));
}

}  // namespace

TEST_CASE("failure reason names") {
    for (auto r : {FailureReason::BelowNoiseFloor, FailureReason::MaxIterations, FailureReason::HeadroomExceeded})
        CHECK(parse_failure_reason(to_string(r)) == r);
    CHECK(to_string(FailureReason::BelowNoiseFloor) == "below_noise_floor");
    CHECK_THROWS_AS(parse_failure_reason("timeout"), ConfigError);
}

TEST_CASE("flat rig converges quickly") {
    const auto t = dataset::synth_track("E11b", 85.94, {});
    const auto run = search_gain(ocv_rig(), t, 85.94);
    CHECK(run.converged);
    CHECK_FALSE(run.failure_reason);
    CHECK(run.iterations <= 3);
    CHECK(std::abs(run.measured_dba - 85.94) <= 0.5);
    // The OCV setting already reproduces the nominal level on a flat rig.
    CHECK(std::abs(run.final_gain_db) < 0.05);
}

TEST_CASE("a different target moves the gain by the difference") {
    const auto t = dataset::synth_track("W01", 66.79, {});
    const auto run = search_gain(ocv_rig(10.0), t, 60.79, 0.01);
    CHECK(run.converged);
    CHECK(std::abs(run.final_gain_db + 6.0) < 0.02);
}

TEST_CASE("target under the noise floor fails") {
    const auto t = dataset::synth_track("KT01", 40.19, {});
    const auto run = search_gain(ocv_rig(), t, 40.19);
    CHECK_FALSE(run.converged);
    REQUIRE(run.failure_reason);
    CHECK(*run.failure_reason == FailureReason::BelowNoiseFloor);

    SUBCASE("silent track") {
        const auto s = dataset::sine_track("z", 1000.0, 0.0, 48000, 0.2, 100.0);
        const auto r = search_gain(ocv_rig(), s, 60.0);
        REQUIRE(r.failure_reason);
        CHECK(*r.failure_reason == FailureReason::BelowNoiseFloor);
    }
}

TEST_CASE("target beyond the clipping limit fails with headroom_exceeded") {
    const auto t = dataset::synth_track("E02", 71.69, {});
    const auto run = search_gain(ocv_rig(), t, 130.0);
    REQUIRE(run.failure_reason);
    CHECK(*run.failure_reason == FailureReason::HeadroomExceeded);
    CHECK(t.peak() * std::pow(10.0, run.final_gain_db / 20.0) <= 1.0);
}

TEST_CASE("iteration budget") {
    const auto t = dataset::synth_track("E02", 71.69, {});
    // A 41 dB floor bends the curve near 45 dB so one step cannot land within 1 mdB.
    const auto run = search_gain(ocv_rig(), t, 45.0, 1e-3, 1);
    CHECK_FALSE(run.converged);
    REQUIRE(run.failure_reason);
    CHECK(*run.failure_reason == FailureReason::MaxIterations);
    CHECK_THROWS_AS(search_gain(ocv_rig(), t, 45.0, 0.0), std::invalid_argument);
}

TEST_CASE("seating offsets") {
    const auto a = seating_offsets(7, 5, 0.5);
    const auto b = seating_offsets(7, 5, 0.5);
    REQUIRE(a.size() == 5);
    CHECK(a[0].left_db == 0.0);
    CHECK(a[0].right_db == 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].left_db == b[i].left_db);
        CHECK(std::abs(a[i].left_db) <= 0.5);
        CHECK(std::abs(a[i].right_db) <= 0.5);
    }
    CHECK(seating_offsets(8, 5, 0.5)[1].left_db != a[1].left_db);
    for (const auto& s : seating_offsets(7, 5, 0.0)) CHECK(s.left_db == 0.0);
}

TEST_CASE("sessions") {
    std::vector<CalibratedTrack> tracks;
    std::vector<TrackTarget> targets;
    for (const auto& [id, level] : {std::pair{"E11b", 85.94}, {"W01", 66.79}, {"KT01", 40.19}}) {
        tracks.push_back(dataset::synth_track(id, level, {}));
        targets.push_back({id, level});
    }
    const RigModel rig = ocv_rig();

    SUBCASE("single run equals a direct search") {
        SessionConfig cfg;
        cfg.run_count = 1;
        const auto s = run_session(rig, tracks, targets, cfg);
        REQUIRE(s.runs.size() == 1);
        for (std::size_t i = 0; i < tracks.size(); ++i)
            CHECK(s.runs[0].results[i] == search_gain(rig, tracks[i], targets[i].target_dba));
        CHECK_FALSE(s.all_converged());
    }
    SUBCASE("deterministic for a seed") {
        SessionConfig cfg;
        cfg.seed = 99;
        const auto a = run_session(rig, tracks, targets, cfg);
        const auto b = run_session(rig, tracks, targets, cfg);
        for (std::size_t k = 0; k < a.runs.size(); ++k) CHECK(a.runs[k].results == b.runs[k].results);
    }
    SUBCASE("converged runs are within tolerance") {
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            SessionConfig cfg;
            cfg.seed = seed;
            cfg.run_count = 4;
            for (const auto& run : run_session(rig, tracks, targets, cfg).runs)
                for (const auto& r : run.results) {
                    CHECK(r.converged != r.failure_reason.has_value());
                    if (r.converged) CHECK(std::abs(r.measured_dba - r.target_dba) <= cfg.tolerance_db);
                }
        }
    }
    SUBCASE("gain summaries") {
        SessionConfig cfg;
        cfg.reposition_db = 0.0;
        auto g = session_gains(run_session(rig, tracks, targets, cfg));
        REQUIRE(g.converged.size() == 2);
        CHECK(g.failed == std::vector<std::string>{"KT01"});
        for (const auto& s : g.converged) {
            CHECK(s.runs == 3);
            CHECK(s.spread_db == 0.0);
        }
        for (std::uint64_t seed : {4u, 5u, 6u, 7u}) {
            cfg.reposition_db = 0.5;
            cfg.seed = seed;
            g = session_gains(run_session(rig, tracks, targets, cfg));
            for (const auto& s : g.converged) CHECK(s.spread_db <= 1.0 + 1e-9);
        }
    }
    SUBCASE("configuration errors") {
        SessionConfig cfg;
        cfg.run_count = 0;
        CHECK_THROWS_AS(run_session(rig, tracks, targets, cfg), ConfigError);
        cfg = {};
        auto missing = targets;
        missing.pop_back();
        CHECK_THROWS_AS(run_session(rig, tracks, missing, cfg), ConfigError);
        missing = targets;
        missing.push_back(targets[0]);
        CHECK_THROWS_AS(run_session(rig, tracks, missing, cfg), ConfigError);
    }
}
