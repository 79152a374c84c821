#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace alora {

inline constexpr const char* kVersion = "0.1.0";

struct ManifestFile {
    std::string path; // relative to the run directory
    std::uint64_t bytes = 0;
    std::string hash_hex; // fnv1a64 of the file contents
};

// Snapshot of one run: resolved config, seed, timestamps, and the
// emitted-file inventory with content hashes. Written atomically at run
// end as <dir>/manifest.json.
struct RunManifest {
    std::string version = kVersion;
    std::uint64_t seed = 0;
    std::string config_text;
    std::string started_at;  // ISO 8601 UTC
    std::string finished_at; // ISO 8601 UTC
    std::vector<ManifestFile> files;
};

std::string iso8601_utc_now();

std::uint64_t hash_file(const std::filesystem::path& path);
std::string hash_file_hex(const std::filesystem::path& path);

void write_manifest(const RunManifest& manifest, const std::filesystem::path& dir);

// Throws ConfigError if the manifest is missing or malformed.
RunManifest load_manifest(const std::filesystem::path& dir);

// Re-hashes every file in the manifest; returns one message per
// mismatch or missing file (empty means the inventory verifies).
std::vector<std::string> verify_run_dir(const std::filesystem::path& dir);

} // namespace alora
