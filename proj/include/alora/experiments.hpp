#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alora/analysis.hpp"
#include "alora/config.hpp"
#include "alora/model.hpp"
#include "alora/trainer.hpp"

namespace alora {

// Synthetic teacher whose per-head weight deltas have known heterogeneous
// ranks, with a dataset labeled by the teacher itself.
struct PlantedTask {
    ModelState teacher;             // adapters hold the planted deltas
    std::vector<int> planted_ranks; // per head, grid order
    Matrix x;                       // n x k inputs
    Matrix y;                       // teacher(x), plus optional noise
    double noise = 0.0;
    std::uint64_t seed = 0;
};

// Builds the teacher (planted delta of head i has exact rank
// planted_ranks[i % |planted_ranks|]), draws Gaussian inputs, labels them
// with the teacher forward. Bit-exactly regenerable from (cfg, seed).
// Throws std::invalid_argument when a planted rank exceeds min(d, k).
PlantedTask generate_task(const TaskConfig& cfg, std::uint64_t seed);

// Student sharing the teacher's frozen base and mixing, with fresh
// standard-init adapters at base rank r0.
ModelState make_student(const PlantedTask& task, int r0, std::uint64_t seed);

// Spearman rank correlation with average ranks for ties; 0 when either
// side has no variation. Throws std::invalid_argument for fewer than 3
// points.
double spearman(std::span<const double> a, std::span<const double> b);

// Spearman between planted ranks and the trained state's effective ranks.
double recovery_score(const ModelState& trained, const PlantedTask& task);

struct ModeSummary {
    std::string mode;
    std::int64_t steps = 0;
    double final_task_loss = 0.0;
    double final_meta_loss = 0.0;
    std::int64_t final_params = 0;
    RankStatistics stats;
    StabilityReport stability;
    ConvergenceReport convergence;
};

struct ExperimentResult {
    std::filesystem::path out_dir;
    std::vector<ModeSummary> modes;
    std::optional<double> recovery;    // adaptive ranks vs planted
    std::optional<double> param_ratio; // adaptive final params / uniform
    std::optional<double> loss_ratio;  // adaptive final task loss / uniform
};

struct ExperimentOptions {
    RunConfig config;
    std::filesystem::path out_dir;
    bool run_adaptive = true;
    bool run_uniform = true;
};

// End-to-end harness: trains the selected modes on the planted task,
// streams metrics.jsonl and ranks.csv per mode, writes summary.json and
// an atomically-renamed manifest.json with content hashes. Deterministic
// per seed (the manifest timestamps aside).
ExperimentResult run_experiment(const ExperimentOptions& opts);

} // namespace alora
