#include "alora/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include <json.hpp>

#include "alora/errors.hpp"
#include "alora/hashing.hpp"

namespace alora {

std::string iso8601_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

std::uint64_t hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read file '" + path.string() + "'");
    std::uint64_t h = kFnvOffset;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    }
    return h;
}

std::string hash_file_hex(const std::filesystem::path& path) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(hash_file(path)));
    return buf;
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& dir) {
    nlohmann::ordered_json j;
    j["version"] = manifest.version;
    j["seed"] = manifest.seed;
    j["config"] = manifest.config_text;
    j["started_at"] = manifest.started_at;
    j["finished_at"] = manifest.finished_at;
    j["files"] = nlohmann::ordered_json::array();
    for (const ManifestFile& f : manifest.files) {
        nlohmann::ordered_json e;
        e["path"] = f.path;
        e["bytes"] = f.bytes;
        e["fnv1a64"] = f.hash_hex;
        j["files"].push_back(e);
    }
    const std::filesystem::path tmp = dir / "manifest.json.tmp";
    const std::filesystem::path final_path = dir / "manifest.json";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
        out << j.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, final_path);
}

RunManifest load_manifest(const std::filesystem::path& dir) {
    const std::filesystem::path path = dir / "manifest.json";
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("no manifest at '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed manifest '" + path.string() + "': " + e.what());
    }
    RunManifest m;
    try {
        m.version = j.at("version").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.config_text = j.at("config").get<std::string>();
        m.started_at = j.at("started_at").get<std::string>();
        m.finished_at = j.at("finished_at").get<std::string>();
        for (const auto& e : j.at("files")) {
            ManifestFile f;
            f.path = e.at("path").get<std::string>();
            f.bytes = e.at("bytes").get<std::uint64_t>();
            f.hash_hex = e.at("fnv1a64").get<std::string>();
            m.files.push_back(std::move(f));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("manifest '" + path.string() + "' missing fields: " + e.what());
    }
    return m;
}

std::vector<std::string> verify_run_dir(const std::filesystem::path& dir) {
    const RunManifest m = load_manifest(dir);
    std::vector<std::string> problems;
    for (const ManifestFile& f : m.files) {
        const std::filesystem::path p = dir / f.path;
        std::error_code ec;
        const auto size = std::filesystem::file_size(p, ec);
        if (ec) {
            problems.push_back(f.path + ": missing");
            continue;
        }
        if (size != f.bytes) {
            problems.push_back(f.path + ": size " + std::to_string(size) + " != recorded " +
                               std::to_string(f.bytes));
            continue;
        }
        const std::string h = hash_file_hex(p);
        if (h != f.hash_hex)
            problems.push_back(f.path + ": hash " + h + " != recorded " + f.hash_hex);
    }
    return problems;
}

} // namespace alora
