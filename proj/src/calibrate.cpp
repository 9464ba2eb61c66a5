#include "hpcal/calibrate.hpp"

#include "hpcal/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

namespace hpcal {

std::string_view to_string(FailureReason reason) {
    switch (reason) {
        case FailureReason::BelowNoiseFloor: return "below_noise_floor";
        case FailureReason::MaxIterations: return "max_iterations";
        case FailureReason::HeadroomExceeded: return "headroom_exceeded";
    }
    return "unknown";
}

FailureReason parse_failure_reason(std::string_view text) {
    if (text == "below_noise_floor") return FailureReason::BelowNoiseFloor;
    if (text == "max_iterations") return FailureReason::MaxIterations;
    if (text == "headroom_exceeded") return FailureReason::HeadroomExceeded;
    throw ConfigError("unknown failure reason '" + std::string(text) + "'");
}

CalibrationRun search_gain(const RigModel& rig, const CalibratedTrack& track, double target_dba,
                           double tolerance_db, int max_iterations) {
    if (!(tolerance_db > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");

    CalibrationRun run;
    run.track_id = track.track_id;
    run.target_dba = target_dba;

    const double peak = track.peak();
    // A hair below full scale so the capped gain itself never reads as clipped.
    const double max_gain_db =
        peak > 0.0 ? -20.0 * std::log10(peak) - 1e-9 : std::numeric_limits<double>::infinity();
    const bool target_in_floor = target_dba < rig.noise_floor_dba() + tolerance_db;

    auto fail = [&](FailureReason reason) {
        run.converged = false;
        run.failure_reason = reason;
        return run;
    };

    const MeasurementResult probe = simulate_measurement(rig, track, 0.0);
    double gain = target_dba - probe.measured_laeq_dba;

    for (int k = 1; k <= max_iterations; ++k) {
        const bool capped = gain >= max_gain_db;
        if (capped) gain = max_gain_db;

        const MeasurementResult m = simulate_measurement(rig, track, gain);
        run.iterations = k;
        run.final_gain_db = gain;
        run.measured_dba = m.measured_laeq_dba;

        const double error = target_dba - m.measured_laeq_dba;
        if (std::abs(error) <= tolerance_db) {
            run.converged = true;
            return run;
        }
        if (m.noise_floor_limited && (target_in_floor || is_silent(m.signal_laeq_dba)))
            return fail(FailureReason::BelowNoiseFloor);
        if (capped && error > 0.0)
            return fail(m.noise_floor_limited ? FailureReason::BelowNoiseFloor : FailureReason::HeadroomExceeded);
        gain += error;
    }
    return fail(FailureReason::MaxIterations);
}

void SessionConfig::validate() const {
    if (!(tolerance_db > 0.0)) throw ConfigError("tolerance must be positive");
    if (run_count < 1) throw ConfigError("run count must be at least 1");
    if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
    if (!(reposition_db >= 0.0)) throw ConfigError("reposition offset must be non-negative");
}

bool CalibrationSession::all_converged() const {
    for (const auto& r : runs)
        for (const auto& c : r.results)
            if (!c.converged) return false;
    return true;
}

std::vector<SeatingOffsets> seating_offsets(std::uint64_t seed, int run_count, double half_width_db) {
    std::mt19937_64 engine(seed);
    auto uniform = [&] {
        const double unit = static_cast<double>(engine() >> 11) * 0x1.0p-53;  // [0, 1)
        return (2.0 * unit - 1.0) * half_width_db;
    };
    std::vector<SeatingOffsets> out(static_cast<std::size_t>(std::max(run_count, 0)));
    // The first run uses the initial seating.
    for (std::size_t k = 1; k < out.size(); ++k) {
        const double left = uniform();
        const double right = uniform();
        out[k] = {left, right};
    }
    return out;
}

CalibrationSession run_session(const RigModel& rig, const std::vector<CalibratedTrack>& tracks,
                               const std::vector<TrackTarget>& targets, const SessionConfig& config) {
    config.validate();
    std::map<std::string, double> target_by_id;
    for (const auto& t : targets)
        if (!target_by_id.emplace(t.track_id, t.target_dba).second)
            throw ConfigError("duplicate target for track '" + t.track_id + "'");
    for (const auto& track : tracks)
        if (!target_by_id.contains(track.track_id))
            throw ConfigError("no target for track '" + track.track_id + "'");

    CalibrationSession session;
    session.config = config;
    const auto seatings = seating_offsets(config.seed, config.run_count, config.reposition_db);
    for (int k = 0; k < config.run_count; ++k) {
        SessionRun run;
        run.run_index = k;
        run.seating = seatings[static_cast<std::size_t>(k)];
        const RigModel seated = rig.with_seating(run.seating);
        run.results.reserve(tracks.size());
        for (const auto& track : tracks)
            run.results.push_back(search_gain(seated, track, target_by_id.at(track.track_id), config.tolerance_db,
                                              config.max_iterations));
        session.runs.push_back(std::move(run));
    }
    return session;
}

SessionGains session_gains(const CalibrationSession& session) {
    if (session.runs.empty()) throw std::invalid_argument("session has no runs");

    std::vector<std::string> order;
    std::map<std::string, std::vector<const CalibrationRun*>> by_track;
    for (const auto& run : session.runs)
        for (const auto& r : run.results) {
            auto& list = by_track[r.track_id];
            if (list.empty()) order.push_back(r.track_id);
            list.push_back(&r);
        }

    SessionGains out;
    for (const auto& id : order) {
        const auto& list = by_track.at(id);
        if (std::any_of(list.begin(), list.end(), [](const CalibrationRun* r) { return !r->converged; })) {
            out.failed.push_back(id);
            continue;
        }
        GainSummary s;
        s.track_id = id;
        s.runs = static_cast<int>(list.size());
        double lo = list.front()->final_gain_db, hi = lo, sum = 0.0;
        for (const auto* r : list) {
            sum += r->final_gain_db;
            lo = std::min(lo, r->final_gain_db);
            hi = std::max(hi, r->final_gain_db);
        }
        s.mean_gain_db = sum / static_cast<double>(list.size());
        s.spread_db = hi - lo;
        out.converged.push_back(s);
    }
    return out;
}

}  // namespace hpcal
