#pragma once

#include <string>
#include <vector>

#include "alora/trainer.hpp"

namespace alora {

// Synthetic planted-rank task shape.
struct TaskConfig {
    int layers = 3;
    int heads = 4;
    int d = 32;
    int k = 32;
    std::vector<int> planted_ranks = {1, 2, 4, 8}; // cycled across (layer, head)
    int n_samples = 512;
    double noise = 0.0; // stddev of Gaussian target noise

    bool operator==(const TaskConfig&) const = default;
};

struct RunConfig {
    TrainerConfig trainer;
    TaskConfig task;

    bool operator==(const RunConfig&) const = default;
};

inline bool operator==(const TrainerConfig& a, const TrainerConfig& b) {
    return a.r0 == b.r0 && a.lambda == b.lambda && a.beta == b.beta &&
           a.eta_theta == b.eta_theta && a.eta_alpha == b.eta_alpha && a.clip_c == b.clip_c &&
           a.steps == b.steps && a.seed == b.seed && a.alpha_min == b.alpha_min &&
           a.alpha_max == b.alpha_max && a.mode == b.mode && a.resize_every == b.resize_every &&
           a.freeze_b == b.freeze_b;
}

// Flat `key = value` text, one pair per line; blank lines and lines
// starting with '#' are ignored. Unknown keys, duplicates and malformed
// values are rejected with a ConfigError naming the line and key.
// An empty file yields all defaults.
RunConfig parse_config(const std::string& text);

// Throws ConfigError if the file cannot be read.
RunConfig parse_config_file(const std::string& path);

// Canonical text form; parse(serialize(c)) == c for any parsed c.
std::string serialize_config(const RunConfig& cfg);

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

} // namespace alora
