#pragma once

// JSON manifests (dataset + session parameters), rig descriptions and
// session result files. Every document carries "schema_version".

#include "hpcal/calibrate.hpp"
#include "hpcal/dsp.hpp"
#include "hpcal/rig.hpp"
#include "hpcal/sensitivity.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hpcal::config {

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr int kRigSchemaVersion = 1;
inline constexpr int kSessionSchemaVersion = 1;

// Directory searched for rig.json when neither the command line nor the
// manifest names a rig file.
inline constexpr const char* kConfigDirEnv = "HPCAL_CONFIG_DIR";

struct TrackEntry {
    std::string track_id;
    std::filesystem::path audio_path;  // resolved against the manifest directory
    double cal_constant_db = 94.0;
    double nominal_laeq_db = 0.0;
};

struct Manifest {
    std::vector<TrackEntry> tracks;
    std::optional<std::filesystem::path> rig_path;
    ReferenceTone reference;
    SessionConfig session;
};

// Validates unique track ids, existing audio files and session parameters.
Manifest load_manifest(const std::filesystem::path& path);
Manifest manifest_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                            bool check_files = true);
nlohmann::json manifest_to_json(const Manifest& manifest, const std::filesystem::path& base_dir);

HeadphoneSpec headphones_from_json(const nlohmann::json& doc);
nlohmann::json headphones_to_json(const HeadphoneSpec& spec);

RigModel rig_from_json(const nlohmann::json& doc);
nlohmann::json rig_to_json(const RigModel& rig);
RigModel load_rig(const std::filesystem::path& path);

// --rig, then the manifest's rig entry, then $HPCAL_CONFIG_DIR/rig.json.
std::filesystem::path resolve_rig_path(const std::optional<std::filesystem::path>& cli_rig, const Manifest& manifest);

CalibratedTrack load_track(const TrackEntry& entry);

nlohmann::json session_to_json(const CalibrationSession& session);
CalibrationSession session_from_json(const nlohmann::json& doc);

nlohmann::json read_json(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);

// Writes a sibling temporary file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace hpcal::config
