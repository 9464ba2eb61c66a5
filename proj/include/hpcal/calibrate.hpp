#pragma once

// Automated acoustic calibration: for each track, find the digital gain at
// which the measured channel-averaged L_A,eq lands within tolerance of the
// track's nominal level. Sessions repeat this over several headphone seatings.

#include "hpcal/dsp.hpp"
#include "hpcal/rig.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hpcal {

enum class FailureReason { BelowNoiseFloor, MaxIterations, HeadroomExceeded };

std::string_view to_string(FailureReason reason);
FailureReason parse_failure_reason(std::string_view text);

struct CalibrationRun {
    std::string track_id;
    double target_dba = 0.0;
    double final_gain_db = 0.0;
    double measured_dba = 0.0;
    int iterations = 0;
    bool converged = false;
    std::optional<FailureReason> failure_reason;

    friend bool operator==(const CalibrationRun&, const CalibrationRun&) = default;
};

inline constexpr double kDefaultToleranceDb = 0.5;
inline constexpr int kDefaultRunCount = 3;
inline constexpr int kDefaultMaxIterations = 10;
inline constexpr double kDefaultRepositionDb = 0.5;

// Fixed-point iteration in dB: gain += target - measured, starting from the
// correction measured at 0 dB. Every candidate is re-measured before it is
// accepted. Candidates above the largest unclipped gain are capped there.
CalibrationRun search_gain(const RigModel& rig, const CalibratedTrack& track, double target_dba,
                           double tolerance_db = kDefaultToleranceDb, int max_iterations = kDefaultMaxIterations);

struct SessionConfig {
    double tolerance_db = kDefaultToleranceDb;
    int run_count = kDefaultRunCount;
    int max_iterations = kDefaultMaxIterations;
    // Half-width of the uniform per-channel seating offset applied from the second run on.
    double reposition_db = kDefaultRepositionDb;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrackTarget {
    std::string track_id;
    double target_dba = 0.0;
};

struct SessionRun {
    int run_index = 0;
    SeatingOffsets seating;
    std::vector<CalibrationRun> results;
};

struct CalibrationSession {
    SessionConfig config;
    std::vector<SessionRun> runs;

    bool all_converged() const;
};

// Uniform draw in [-half_width, half_width] from the session's seed stream.
// Uses only the raw 64-bit engine output so results match across standard libraries.
std::vector<SeatingOffsets> seating_offsets(std::uint64_t seed, int run_count, double half_width_db);

CalibrationSession run_session(const RigModel& rig, const std::vector<CalibratedTrack>& tracks,
                               const std::vector<TrackTarget>& targets, const SessionConfig& config);

struct GainSummary {
    std::string track_id;
    double mean_gain_db = 0.0;
    // max - min of final gain over the runs.
    double spread_db = 0.0;
    int runs = 0;
};

struct SessionGains {
    std::vector<GainSummary> converged;
    // Tracks with at least one run that did not converge.
    std::vector<std::string> failed;
};

SessionGains session_gains(const CalibrationSession& session);

}  // namespace hpcal
