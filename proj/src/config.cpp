#include "alora/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "alora/errors.hpp"

namespace alora {

namespace {

const std::set<std::string> kKnownKeys = {
    "r0",   "lambda", "beta",          "eta_theta", "eta_alpha", "clip_c",
    "steps", "layers", "heads",         "d",         "k",         "planted_ranks",
    "n_samples", "noise", "seed",       "mode",      "resize_every"};

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void bad_value(int line, const std::string& key, const std::string& expected,
                            const std::string& got) {
    throw ConfigError("line " + std::to_string(line) + ": key '" + key + "' expects " +
                          expected + ", got '" + got + "'",
                      line, key);
}

long long parse_int(int line, const std::string& key, const std::string& v, long long lo,
                    long long hi, const std::string& expected) {
    long long out = 0;
    const char* first = v.data();
    const char* last = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last || out < lo || out > hi)
        bad_value(line, key, expected, v);
    return out;
}

double parse_real(int line, const std::string& key, const std::string& v, bool non_negative,
                  bool strictly_positive, const std::string& expected) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
        bad_value(line, key, expected, v);
    if (non_negative && out < 0.0) bad_value(line, key, expected, v);
    if (strictly_positive && !(out > 0.0)) bad_value(line, key, expected, v);
    return out;
}

std::vector<int> parse_rank_list(int line, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            bad_value(line, "planted_ranks", "a comma-separated list of positive integers", v);
        out.push_back(static_cast<int>(parse_int(line, "planted_ranks", item, 1, 1 << 20,
                                                 "a comma-separated list of positive integers")));
    }
    if (out.empty())
        bad_value(line, "planted_ranks", "a comma-separated list of positive integers", v);
    return out;
}

} // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) +
                                  ": expected 'key = value', got '" + line + "'",
                              line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!kKnownKeys.count(key))
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'",
                              line_no, key);
        if (!seen.insert(key).second)
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'",
                              line_no, key);
        if (value.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": key '" + key +
                                  "' has no value",
                              line_no, key);

        if (key == "r0")
            cfg.trainer.r0 = static_cast<int>(parse_int(line_no, key, value, 1, 4096,
                                                        "a positive integer"));
        else if (key == "lambda")
            cfg.trainer.lambda = parse_real(line_no, key, value, true, false,
                                            "a non-negative real");
        else if (key == "beta")
            cfg.trainer.beta = parse_real(line_no, key, value, true, false, "a non-negative real");
        else if (key == "eta_theta")
            cfg.trainer.eta_theta = parse_real(line_no, key, value, false, true,
                                               "a positive real");
        else if (key == "eta_alpha")
            cfg.trainer.eta_alpha = parse_real(line_no, key, value, true, false,
                                               "a non-negative real");
        else if (key == "clip_c")
            cfg.trainer.clip_c = parse_real(line_no, key, value, false, true, "a positive real");
        else if (key == "steps")
            cfg.trainer.steps = parse_int(line_no, key, value, 1, 100000000,
                                          "a positive integer");
        else if (key == "layers")
            cfg.task.layers = static_cast<int>(parse_int(line_no, key, value, 1, 1024,
                                                         "a positive integer"));
        else if (key == "heads")
            cfg.task.heads = static_cast<int>(parse_int(line_no, key, value, 1, 1024,
                                                        "a positive integer"));
        else if (key == "d")
            cfg.task.d = static_cast<int>(parse_int(line_no, key, value, 1, 8192,
                                                    "a positive integer"));
        else if (key == "k")
            cfg.task.k = static_cast<int>(parse_int(line_no, key, value, 1, 8192,
                                                    "a positive integer"));
        else if (key == "planted_ranks")
            cfg.task.planted_ranks = parse_rank_list(line_no, value);
        else if (key == "n_samples")
            cfg.task.n_samples = static_cast<int>(parse_int(line_no, key, value, 1, 1 << 24,
                                                            "a positive integer"));
        else if (key == "noise")
            cfg.task.noise = parse_real(line_no, key, value, true, false, "a non-negative real");
        else if (key == "seed")
            cfg.trainer.seed = static_cast<std::uint64_t>(
                parse_int(line_no, key, value, 0, std::numeric_limits<long long>::max(),
                          "a non-negative integer"));
        else if (key == "mode") {
            if (value != "adaptive" && value != "uniform")
                bad_value(line_no, key, "'adaptive' or 'uniform'", value);
            cfg.trainer.mode = parse_mode(value);
        } else if (key == "resize_every")
            cfg.trainer.resize_every = static_cast<int>(parse_int(line_no, key, value, 1, 1 << 24,
                                                                  "a positive integer"));
    }

    cfg.trainer.validate();
    const int p = std::min(cfg.task.d, cfg.task.k);
    for (int r : cfg.task.planted_ranks)
        if (r > p)
            throw ConfigError("planted_ranks: rank " + std::to_string(r) +
                                  " exceeds min(d, k) = " + std::to_string(p),
                              -1, "planted_ranks");
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "r0 = " << cfg.trainer.r0 << "\n";
    out << "lambda = " << format_double(cfg.trainer.lambda) << "\n";
    out << "beta = " << format_double(cfg.trainer.beta) << "\n";
    out << "eta_theta = " << format_double(cfg.trainer.eta_theta) << "\n";
    out << "eta_alpha = " << format_double(cfg.trainer.eta_alpha) << "\n";
    out << "clip_c = " << format_double(cfg.trainer.clip_c) << "\n";
    out << "steps = " << cfg.trainer.steps << "\n";
    out << "layers = " << cfg.task.layers << "\n";
    out << "heads = " << cfg.task.heads << "\n";
    out << "d = " << cfg.task.d << "\n";
    out << "k = " << cfg.task.k << "\n";
    out << "planted_ranks = ";
    for (std::size_t i = 0; i < cfg.task.planted_ranks.size(); ++i) {
        if (i) out << ",";
        out << cfg.task.planted_ranks[i];
    }
    out << "\n";
    out << "n_samples = " << cfg.task.n_samples << "\n";
    out << "noise = " << format_double(cfg.task.noise) << "\n";
    out << "seed = " << cfg.trainer.seed << "\n";
    out << "mode = " << mode_name(cfg.trainer.mode) << "\n";
    out << "resize_every = " << cfg.trainer.resize_every << "\n";
    return out.str();
}

} // namespace alora
