#include "hpcal/cli.hpp"

#include "hpcal/calibrate.hpp"
#include "hpcal/config.hpp"
#include "hpcal/dataset.hpp"
#include "hpcal/errors.hpp"
#include "hpcal/report.hpp"
#include "hpcal/rig.hpp"
#include "hpcal/sensitivity.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

namespace hpcal::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty())
        out << text;
    else
        config::write_file_atomic(out_path, text);
}

struct OcvVoltageArgs {
    double sensitivity = 0.0;
    std::string unit = "dbv";
    std::optional<double> impedance;
    double ref_spl = 94.0;
    double ref_freq = 1000.0;
};

int cmd_ocv_voltage(const OcvVoltageArgs& a, std::ostream& out) {
    HeadphoneSpec spec;
    spec.sensitivity_value = a.sensitivity;
    spec.sensitivity_unit = parse_sensitivity_unit(a.unit);
    if (spec.sensitivity_unit == SensitivityUnit::DbPerMilliwatt && !a.impedance)
        throw UsageError("--impedance is required when --unit dbmw");
    // The impedance only enters the dB/mW conversion.
    spec.impedance_ohms = a.impedance.value_or(1000.0);
    const double volts = required_voltage(ReferenceTone{a.ref_spl, a.ref_freq}, spec);
    out << fixed(volts, 4) << " V\n";
    return kOk;
}

struct ManifestArgs {
    std::string manifest;
    std::string rig;
    std::string out;
};

std::optional<fs::path> optional_path(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return fs::path(s);
}

std::vector<CalibratedTrack> load_tracks(const config::Manifest& m) {
    std::vector<CalibratedTrack> tracks;
    tracks.reserve(m.tracks.size());
    for (const auto& e : m.tracks) tracks.push_back(config::load_track(e));
    return tracks;
}

int cmd_analyze(const ManifestArgs& a, std::ostream& out, std::ostream& err) {
    const auto manifest = config::load_manifest(a.manifest);
    std::ostringstream csv;
    csv << "track_id,L_left,L_right,L_avg,L_nom,D,status\n";
    bool failed = false;
    for (const auto& entry : manifest.tracks) {
        try {
            const auto track = config::load_track(entry);
            const LevelPair ch = channel_laeq(track);
            const double avg = energetic_average(ch);
            auto level = [](double v) { return is_silent(v) ? std::string("-inf") : format_db(v); };
            csv << entry.track_id << ',' << level(ch.left_db) << ',' << level(ch.right_db) << ',' << level(avg) << ','
                << format_db(entry.nominal_laeq_db) << ','
                << (is_silent(avg) ? std::string() : format_db(delta(avg, entry.nominal_laeq_db)))
                << (is_silent(avg) ? ",silent\n" : ",ok\n");
        } catch (const std::exception& e) {
            failed = true;
            std::string msg = e.what();
            for (char& c : msg)
                if (c == ',' || c == '\n' || c == '"') c = ' ';
            csv << entry.track_id << ",,,," << format_db(entry.nominal_laeq_db) << ",,error: " << msg << '\n';
            err << "error: " << entry.track_id << ": " << e.what() << '\n';
        }
    }
    emit(csv.str(), a.out, out);
    return failed ? kPartialFailure : kOk;
}

struct CalibrateArgs {
    ManifestArgs files;
    std::optional<double> tolerance;
    std::optional<int> runs;
    std::optional<std::uint64_t> seed;
    std::optional<double> reposition_db;
    std::optional<int> max_iterations;
};

// The acoustic calibration starts from the analog setting found by the
// voltmeter procedure, as the published comparison did.
RigModel ocv_configured_rig(const RigModel& rig, const config::Manifest& m, std::ostream& err) {
    if (m.tracks.empty()) return rig;
    const double cal = m.tracks.front().cal_constant_db;
    for (const auto& t : m.tracks)
        if (t.cal_constant_db != cal) {
            err << "note: tracks use different calibration constants; analog gain left at 1\n";
            return rig;
        }
    const double gain = ocv_analog_gain(rig, m.reference, cal);
    err << "analog gain " << fixed(20.0 * std::log10(gain), 2) << " dB (open-circuit "
        << fixed(required_voltage(m.reference, rig.headphones()), 4) << " V for the reference tone)\n";
    return rig.with_analog_gain(gain);
}

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out, std::ostream& err) {
    const auto manifest = config::load_manifest(a.files.manifest);
    const auto rig_path = config::resolve_rig_path(optional_path(a.files.rig), manifest);
    const RigModel rig = ocv_configured_rig(config::load_rig(rig_path), manifest, err);

    SessionConfig cfg = manifest.session;
    if (a.tolerance) cfg.tolerance_db = *a.tolerance;
    if (a.runs) cfg.run_count = *a.runs;
    if (a.seed) cfg.seed = *a.seed;
    if (a.reposition_db) cfg.reposition_db = *a.reposition_db;
    if (a.max_iterations) cfg.max_iterations = *a.max_iterations;
    cfg.validate();

    const auto tracks = load_tracks(manifest);
    std::vector<TrackTarget> targets;
    for (const auto& t : manifest.tracks) targets.push_back({t.track_id, t.nominal_laeq_db});

    const auto session = run_session(rig, tracks, targets, cfg);
    const std::string session_path = a.files.out.empty() ? std::string("session.json") : a.files.out;
    config::write_file_atomic(session_path, config::session_to_json(session).dump(2) + "\n");

    std::map<std::string, std::vector<std::string>> failures;
    for (const auto& run : session.runs)
        for (const auto& r : run.results)
            if (!r.converged)
                failures[r.track_id].push_back("run " + std::to_string(run.run_index) + ": " +
                                               std::string(to_string(*r.failure_reason)));
    out << "session written to " << session_path << "\n";
    out << "converged " << tracks.size() - failures.size() << " of " << tracks.size() << " tracks over "
        << cfg.run_count << " run(s)\n";
    for (const auto& [id, list] : failures)
        for (const auto& f : list) out << "FAILED " << id << " " << f << "\n";
    return session.all_converged() ? kOk : kPartialFailure;
}

struct ReportArgs {
    std::string session;
    std::string levels;
    bool golden = false;
    std::string format = "csv";
    std::vector<std::string> exclude;
    std::string out;
};

void write_report(const DeltaReport& report, Format format, const std::string& out_path, std::ostream& out,
                  std::ostream& err) {
    emit(render(report, format), out_path, out);
    if (format == Format::Csv) err << render_stats(report);
}

std::vector<Exclusion> user_exclusions(const std::vector<std::string>& ids) {
    std::vector<Exclusion> out;
    for (const auto& id : ids) out.push_back({id, "excluded on the command line"});
    return out;
}

int cmd_simulate_ocv(const ManifestArgs& a, const std::string& format, const std::vector<std::string>& exclude,
                     std::ostream& out, std::ostream& err) {
    const auto manifest = config::load_manifest(a.manifest);
    const RigModel rig = config::load_rig(config::resolve_rig_path(optional_path(a.rig), manifest));
    const auto tracks = load_tracks(manifest);
    const auto session = simulate_ocv_session(rig, tracks, manifest.reference);
    err << "analog gain " << fixed(20.0 * std::log10(session.rig.analog_gain()), 2) << " dB\n";

    std::vector<TrackLevels> levels;
    auto exclusions = user_exclusions(exclude);
    bool flagged = false;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        const auto& r = session.results[i];
        levels.push_back({tracks[i].track_id, tracks[i].nominal_laeq_db, r.measured_laeq_dba, std::nullopt});
        if (r.clipped) exclusions.push_back({r.track_id, "clipped"});
        if (r.noise_floor_limited) err << "warning: " << r.track_id << " is below the measurement noise floor\n";
        flagged = flagged || r.clipped || r.noise_floor_limited;
    }
    write_report(summarize(levels, exclusions), parse_format(format), a.out, out, err);
    return flagged ? kPartialFailure : kOk;
}

int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
    const int sources = int(!a.session.empty()) + int(!a.levels.empty()) + int(a.golden);
    if (sources != 1) throw UsageError("give exactly one of --session, --levels, --golden");

    std::vector<TrackLevels> levels;
    auto exclusions = user_exclusions(a.exclude);
    bool failures = false;
    if (a.golden) {
        levels = golden::table2_levels();
    } else if (!a.levels.empty()) {
        levels = parse_levels_csv(config::read_text(a.levels));
    } else {
        const auto session = config::session_from_json(config::read_json(a.session));
        std::vector<std::string> order;
        std::map<std::string, std::pair<double, std::vector<double>>> by_track;
        std::map<std::string, std::string> failed;
        for (const auto& run : session.runs)
            for (const auto& r : run.results) {
                auto [it, inserted] = by_track.try_emplace(r.track_id, r.target_dba, std::vector<double>{});
                if (inserted) order.push_back(r.track_id);
                it->second.second.push_back(r.measured_dba);
                if (!r.converged) failed.try_emplace(r.track_id, std::string(to_string(*r.failure_reason)));
            }
        for (const auto& id : order) {
            const auto& [target, measured] = by_track.at(id);
            double sum = 0.0;
            for (double m : measured) sum += m;
            levels.push_back({id, target, std::nullopt, sum / static_cast<double>(measured.size())});
        }
        for (const auto& [id, reason] : failed) {
            bool already = false;
            for (const auto& e : exclusions) already = already || e.track_id == id;
            if (!already) exclusions.push_back({id, reason});
        }
        failures = !failed.empty();
    }
    write_report(summarize(levels, exclusions), parse_format(a.format), a.out, out, err);
    return failures ? kPartialFailure : kOk;
}

struct DatasetArgs {
    std::string out;
    int rate = 48000;
    double seconds = 2.0;
    std::uint64_t seed = 2022;
    double cal_constant = 100.0;
    std::string encoding = "pcm24";
};

int cmd_make_dataset(const DatasetArgs& a, std::ostream& out) {
    dataset::SynthOptions opts;
    opts.sample_rate_hz = a.rate;
    opts.seconds = a.seconds;
    opts.seed = a.seed;
    opts.cal_constant_db = a.cal_constant;
    if (!is_supported_sample_rate(a.rate)) throw UsageError("--rate must be 44100 or 48000");
    const auto format = a.encoding == "pcm16"   ? wav::SampleFormat::Pcm16
                        : a.encoding == "float" ? wav::SampleFormat::Float32
                                                : wav::SampleFormat::Pcm24;
    const auto manifest =
        dataset::write_dataset(a.out, dataset::table2_specs(), opts, dataset::reference_rig(), format);
    out << "wrote " << manifest.tracks.size() << " tracks and " << (fs::path(a.out) / "manifest.json").string()
        << "\n";
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Headphone playback calibration toolkit"};
    app.require_subcommand(1);

    OcvVoltageArgs ocv;
    auto* ocv_cmd = app.add_subcommand("ocv-voltage", "RMS voltage at the jack that reproduces the reference tone");
    ocv_cmd->add_option("--sensitivity", ocv.sensitivity, "Headphone sensitivity")->required();
    ocv_cmd->add_option("--unit", ocv.unit, "Sensitivity unit")->check(CLI::IsMember({"dbv", "dbmw"}));
    ocv_cmd->add_option("--impedance", ocv.impedance, "Headphone impedance in ohms (needed for dbmw)");
    ocv_cmd->add_option("--ref-spl", ocv.ref_spl, "Reference tone level in dB SPL");
    ocv_cmd->add_option("--ref-freq", ocv.ref_freq, "Reference tone frequency in Hz");

    ManifestArgs analyze;
    auto* analyze_cmd = app.add_subcommand("analyze", "A-weighted levels of every track in a manifest");
    analyze_cmd->add_option("manifest", analyze.manifest)->required();
    analyze_cmd->add_option("--out", analyze.out, "Write CSV here instead of stdout");

    CalibrateArgs cal;
    auto* cal_cmd = app.add_subcommand("calibrate", "Run the acoustic gain-search calibration session");
    cal_cmd->add_option("manifest", cal.files.manifest)->required();
    cal_cmd->add_option("--rig", cal.files.rig, "Rig description (JSON)");
    cal_cmd->add_option("--out", cal.files.out, "Session file to write (default session.json)");
    cal_cmd->add_option("--tolerance", cal.tolerance, "Tolerance in dB");
    cal_cmd->add_option("--runs", cal.runs, "Number of runs");
    cal_cmd->add_option("--seed", cal.seed, "Seed for the repositioning offsets");
    cal_cmd->add_option("--reposition-db", cal.reposition_db, "Half-width of the seating offset in dB");
    cal_cmd->add_option("--max-iter", cal.max_iterations, "Iteration cap per track");

    ManifestArgs sim;
    std::string sim_format = "csv";
    std::vector<std::string> sim_exclude;
    auto* sim_cmd = app.add_subcommand("simulate-ocv", "Measure every track after voltmeter (OCV) calibration");
    sim_cmd->add_option("manifest", sim.manifest)->required();
    sim_cmd->add_option("--rig", sim.rig, "Rig description (JSON)");
    sim_cmd->add_option("--out", sim.out, "Write the report here instead of stdout");
    sim_cmd->add_option("--format", sim_format)->check(CLI::IsMember({"csv", "md", "markdown"}));
    sim_cmd->add_option("--exclude", sim_exclude, "Track ids left out of the filtered statistics");

    ReportArgs rep;
    auto* rep_cmd = app.add_subcommand("report", "Render deviations from a session file or a levels CSV");
    rep_cmd->add_option("--session", rep.session, "Session JSON written by calibrate");
    rep_cmd->add_option("--levels", rep.levels, "CSV with track_id,L_nom,L_ocv,L_hats");
    rep_cmd->add_flag("--golden", rep.golden, "Use the bundled published comparison table");
    rep_cmd->add_option("--format", rep.format)->check(CLI::IsMember({"csv", "md", "markdown"}));
    rep_cmd->add_option("--exclude", rep.exclude, "Track ids left out of the filtered statistics");
    rep_cmd->add_option("--out", rep.out, "Write the report here instead of stdout");

    DatasetArgs ds;
    auto* ds_cmd = app.add_subcommand("make-dataset", "Write the synthetic 27-track dataset with manifest and rig");
    ds_cmd->add_option("--out", ds.out, "Output directory")->required();
    ds_cmd->add_option("--rate", ds.rate, "Sample rate (44100 or 48000)");
    ds_cmd->add_option("--seconds", ds.seconds, "Track duration");
    ds_cmd->add_option("--seed", ds.seed, "Synthesis and session seed");
    ds_cmd->add_option("--cal-constant", ds.cal_constant, "dB SPL of a 0 dBFS sine");
    ds_cmd->add_option("--encoding", ds.encoding)->check(CLI::IsMember({"pcm16", "pcm24", "float"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return kOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        if (*ocv_cmd) return cmd_ocv_voltage(ocv, out);
        if (*analyze_cmd) return cmd_analyze(analyze, out, err);
        if (*cal_cmd) return cmd_calibrate(cal, out, err);
        if (*sim_cmd) return cmd_simulate_ocv(sim, sim_format, sim_exclude, out, err);
        if (*rep_cmd) return cmd_report(rep, out, err);
        if (*ds_cmd) return cmd_make_dataset(ds, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kError;
    }
    return kUsage;
}

}  // namespace hpcal::cli
