#include "hpcal/config.hpp"

#include "hpcal/errors.hpp"
#include "hpcal/wav.hpp"

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace hpcal::config {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_schema(const json& doc, const std::string& what, int expected) {
    if (!doc.is_object()) throw ConfigError(what + ": expected a JSON object");
    if (!doc.contains("schema_version")) throw ConfigError(what + ": missing schema_version");
    const int found = doc.at("schema_version").get<int>();
    if (found != expected) throw SchemaVersionError(what, found, expected);
}

std::optional<FrequencyCurve> curve_from_json(const json& doc, const char* key) {
    if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
    std::vector<CurvePoint> points;
    for (const auto& p : doc.at(key)) {
        if (!p.is_array() || p.size() != 2) throw ConfigError(std::string(key) + ": points must be [frequency, value]");
        points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
    try {
        return FrequencyCurve(std::move(points));
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string(key) + ": " + e.what());
    }
}

json curve_to_json(const FrequencyCurve& curve) {
    json out = json::array();
    for (const auto& p : curve.points()) out.push_back({p.frequency_hz, p.value});
    return out;
}

template <typename T>
T value_or(const json& doc, const char* key, T fallback) {
    return doc.contains(key) ? doc.at(key).get<T>() : fallback;
}

}  // namespace

HeadphoneSpec headphones_from_json(const json& doc) {
    HeadphoneSpec spec;
    try {
        spec.sensitivity_value = doc.at("sensitivity").get<double>();
        spec.sensitivity_unit = parse_sensitivity_unit(value_or<std::string>(doc, "sensitivity_unit", "dB/V"));
        spec.impedance_ohms = doc.at("impedance_ohms").get<double>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("headphones: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("headphones: ") + e.what());
    }
    spec.frequency_response = curve_from_json(doc, "frequency_response");
    spec.impedance_curve = curve_from_json(doc, "impedance_curve");
    try {
        spec.validate();
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("headphones: ") + e.what());
    }
    return spec;
}

json headphones_to_json(const HeadphoneSpec& spec) {
    json out = {{"sensitivity", spec.sensitivity_value},
                {"sensitivity_unit", std::string(to_string(spec.sensitivity_unit))},
                {"impedance_ohms", spec.impedance_ohms}};
    if (spec.frequency_response) out["frequency_response"] = curve_to_json(*spec.frequency_response);
    if (spec.impedance_curve) out["impedance_curve"] = curve_to_json(*spec.impedance_curve);
    return out;
}

RigModel rig_from_json(const json& doc) {
    check_schema(doc, "rig", kRigSchemaVersion);
    try {
        const auto& sc = doc.at("soundcard");
        SoundcardSpec soundcard{sc.at("full_scale_voltage_rms").get<double>(),
                                value_or<double>(sc, "output_impedance_ohms", 0.0)};
        return RigModel(soundcard, headphones_from_json(doc.at("headphones")),
                        value_or<double>(doc, "noise_floor_dba", RigModel::kDefaultNoiseFloorDba),
                        value_or<std::string>(doc, "caveat", ""));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("rig: ") + e.what());
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("rig: ") + e.what());
    }
}

json rig_to_json(const RigModel& rig) {
    json out = {{"schema_version", kRigSchemaVersion},
                {"soundcard",
                 {{"full_scale_voltage_rms", rig.soundcard().full_scale_voltage_rms},
                  {"output_impedance_ohms", rig.soundcard().output_impedance_ohms}}},
                {"headphones", headphones_to_json(rig.headphones())},
                {"noise_floor_dba", rig.noise_floor_dba()}};
    if (!rig.caveat().empty()) out["caveat"] = rig.caveat();
    return out;
}

RigModel load_rig(const fs::path& path) {
    try {
        return rig_from_json(read_json(path));
    } catch (const SchemaVersionError&) {
        throw;
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

Manifest manifest_from_json(const json& doc, const fs::path& base_dir, bool check_files) {
    check_schema(doc, "manifest", kManifestSchemaVersion);
    Manifest m;
    try {
        if (doc.contains("rig")) m.rig_path = base_dir / doc.at("rig").get<std::string>();
        if (doc.contains("reference_tone")) {
            const auto& ref = doc.at("reference_tone");
            m.reference.spl_db = value_or<double>(ref, "spl_db", m.reference.spl_db);
            m.reference.frequency_hz = value_or<double>(ref, "frequency_hz", m.reference.frequency_hz);
        }
        if (doc.contains("session")) {
            const auto& s = doc.at("session");
            m.session.tolerance_db = value_or<double>(s, "tolerance_db", m.session.tolerance_db);
            m.session.run_count = value_or<int>(s, "runs", m.session.run_count);
            m.session.max_iterations = value_or<int>(s, "max_iterations", m.session.max_iterations);
            m.session.reposition_db = value_or<double>(s, "reposition_db", m.session.reposition_db);
            m.session.seed = value_or<std::uint64_t>(s, "seed", m.session.seed);
        }
        for (const auto& t : doc.at("tracks")) {
            TrackEntry e;
            e.track_id = t.at("track_id").get<std::string>();
            e.audio_path = base_dir / t.at("audio").get<std::string>();
            e.cal_constant_db = t.at("cal_constant_db").get<double>();
            e.nominal_laeq_db = t.at("nominal_laeq_db").get<double>();
            m.tracks.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("manifest: ") + e.what());
    }

    if (!(m.reference.frequency_hz > 0.0)) throw ConfigError("manifest: reference frequency must be positive");
    m.session.validate();
    std::set<std::string> ids;
    for (const auto& t : m.tracks) {
        if (t.track_id.empty()) throw ConfigError("manifest: empty track_id");
        if (!ids.insert(t.track_id).second) throw ConfigError("manifest: duplicate track_id '" + t.track_id + "'");
    }
    if (check_files) {
        for (const auto& t : m.tracks)
            if (!fs::is_regular_file(t.audio_path))
                throw ConfigError("manifest: audio for '" + t.track_id + "' not found at " + t.audio_path.string());
        if (m.rig_path && !fs::is_regular_file(*m.rig_path))
            throw ConfigError("manifest: rig file not found at " + m.rig_path->string());
    }
    return m;
}

Manifest load_manifest(const fs::path& path) {
    const auto base = path.has_parent_path() ? path.parent_path() : fs::path(".");
    try {
        return manifest_from_json(read_json(path), base);
    } catch (const SchemaVersionError&) {
        throw;
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

json manifest_to_json(const Manifest& manifest, const fs::path& base_dir) {
    json tracks = json::array();
    for (const auto& t : manifest.tracks)
        tracks.push_back({{"track_id", t.track_id},
                          {"audio", t.audio_path.lexically_relative(base_dir).generic_string()},
                          {"cal_constant_db", t.cal_constant_db},
                          {"nominal_laeq_db", t.nominal_laeq_db}});
    json out = {{"schema_version", kManifestSchemaVersion},
                {"reference_tone",
                 {{"spl_db", manifest.reference.spl_db}, {"frequency_hz", manifest.reference.frequency_hz}}},
                {"session",
                 {{"tolerance_db", manifest.session.tolerance_db},
                  {"runs", manifest.session.run_count},
                  {"max_iterations", manifest.session.max_iterations},
                  {"reposition_db", manifest.session.reposition_db},
                  {"seed", manifest.session.seed}}},
                {"tracks", tracks}};
    if (manifest.rig_path) out["rig"] = manifest.rig_path->lexically_relative(base_dir).generic_string();
    return out;
}

fs::path resolve_rig_path(const std::optional<fs::path>& cli_rig, const Manifest& manifest) {
    if (cli_rig) return *cli_rig;
    if (manifest.rig_path) return *manifest.rig_path;
    if (const char* dir = std::getenv(kConfigDirEnv); dir && *dir) {
        const fs::path candidate = fs::path(dir) / "rig.json";
        if (fs::is_regular_file(candidate)) return candidate;
    }
    throw ConfigError(std::string("no rig file: pass --rig, add \"rig\" to the manifest or set ") + kConfigDirEnv);
}

CalibratedTrack load_track(const TrackEntry& entry) {
    auto audio = wav::read(entry.audio_path);
    CalibratedTrack track;
    track.track_id = entry.track_id;
    track.left = std::move(audio.left);
    track.right = std::move(audio.right);
    track.sample_rate_hz = audio.sample_rate_hz;
    track.cal_constant_db = entry.cal_constant_db;
    track.nominal_laeq_db = entry.nominal_laeq_db;
    track.validate();
    return track;
}

json session_to_json(const CalibrationSession& session) {
    json runs = json::array();
    for (const auto& run : session.runs) {
        json results = json::array();
        for (const auto& r : run.results) {
            json item = {{"track_id", r.track_id},       {"target_dba", r.target_dba},
                         {"final_gain_db", r.final_gain_db}, {"measured_dba", r.measured_dba},
                         {"iterations", r.iterations},   {"converged", r.converged}};
            item["failure_reason"] = r.failure_reason ? json(std::string(to_string(*r.failure_reason))) : json();
            results.push_back(std::move(item));
        }
        runs.push_back({{"run_index", run.run_index},
                        {"seating", {{"left_db", run.seating.left_db}, {"right_db", run.seating.right_db}}},
                        {"results", std::move(results)}});
    }
    const auto& c = session.config;
    return {{"schema_version", kSessionSchemaVersion},
            {"config",
             {{"tolerance_db", c.tolerance_db},
              {"run_count", c.run_count},
              {"max_iterations", c.max_iterations},
              {"reposition_db", c.reposition_db},
              {"seed", c.seed}}},
            {"runs", std::move(runs)}};
}

CalibrationSession session_from_json(const json& doc) {
    check_schema(doc, "session", kSessionSchemaVersion);
    CalibrationSession session;
    try {
        const auto& c = doc.at("config");
        session.config.tolerance_db = c.at("tolerance_db").get<double>();
        session.config.run_count = c.at("run_count").get<int>();
        session.config.max_iterations = c.at("max_iterations").get<int>();
        session.config.reposition_db = c.at("reposition_db").get<double>();
        session.config.seed = c.at("seed").get<std::uint64_t>();
        for (const auto& r : doc.at("runs")) {
            SessionRun run;
            run.run_index = r.at("run_index").get<int>();
            run.seating = {r.at("seating").at("left_db").get<double>(), r.at("seating").at("right_db").get<double>()};
            for (const auto& item : r.at("results")) {
                CalibrationRun cr;
                cr.track_id = item.at("track_id").get<std::string>();
                cr.target_dba = item.at("target_dba").get<double>();
                cr.final_gain_db = item.at("final_gain_db").get<double>();
                cr.measured_dba = item.at("measured_dba").get<double>();
                cr.iterations = item.at("iterations").get<int>();
                cr.converged = item.at("converged").get<bool>();
                if (!item.at("failure_reason").is_null())
                    cr.failure_reason = parse_failure_reason(item.at("failure_reason").get<std::string>());
                if (cr.converged == cr.failure_reason.has_value())
                    throw ConfigError("session: run for '" + cr.track_id + "' has inconsistent convergence fields");
                run.results.push_back(std::move(cr));
            }
            session.runs.push_back(std::move(run));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("session: ") + e.what());
    }
    session.config.validate();
    return session;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json read_json(const fs::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
        out << contents;
        out.flush();
        if (!out) throw ConfigError("failed writing '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw ConfigError("cannot replace '" + path.string() + "': " + ec.message());
    }
}

}  // namespace hpcal::config
