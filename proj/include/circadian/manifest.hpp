#pragma once

#include "circadian/chronotype.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace circadian {

/// Keys of the per-participant signal file map.
namespace signal_key {
inline constexpr const char* watch_accel = "watch_accel";
inline constexpr const char* acti_accel = "acti_accel";
inline constexpr const char* watch_counts = "watch_counts";
inline constexpr const char* acti_counts = "acti_counts";
inline constexpr const char* hr = "hr";
inline constexpr const char* rri = "rri";
inline constexpr const char* temperature = "temperature";
} // namespace signal_key

struct ParticipantEntry {
    std::string id;
    double utc_offset_minutes = 0.0;
    std::int64_t collection_start_ms = 0;
    std::int64_t collection_end_ms = 0;
    /// Paths as written in the manifest (relative paths resolve against the manifest directory).
    std::map<std::string, std::string> signals;
    std::vector<MeqAdministration> meq;
    std::optional<double> age;
    std::optional<int> sex; // 0 female, 1 male

    double collection_start_s() const { return static_cast<double>(collection_start_ms) / 1000.0; }
    double collection_end_s() const { return static_cast<double>(collection_end_ms) / 1000.0; }
    double utc_offset_s() const { return utc_offset_minutes * 60.0; }
};

struct Manifest {
    static constexpr int kSchemaVersion = 1;
    std::vector<ParticipantEntry> participants;
    std::filesystem::path base_dir;

    std::optional<std::filesystem::path> signal_path(const ParticipantEntry& p, const std::string& key) const;
};

Manifest load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& m);

} // namespace circadian
