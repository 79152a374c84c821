#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "alora/model.hpp"
#include "alora/regularizer.hpp"

namespace alora {

enum class TrainMode { adaptive, uniform };

TrainMode parse_mode(const std::string& s); // "adaptive" | "uniform"
std::string mode_name(TrainMode m);

struct TrainerConfig {
    int r0 = 16;
    double lambda = 0.01;
    double beta = 0.1;
    double eta_theta = 1e-4;
    double eta_alpha = 5e-5;
    double clip_c = 10.0; // clip bound on the alpha meta-gradient
    std::int64_t steps = 3000;
    std::uint64_t seed = 0;
    double alpha_min = 0.0;
    double alpha_max = kAlphaMax;
    TrainMode mode = TrainMode::adaptive;
    int resize_every = 1; // rank-resize cadence in steps
    bool freeze_b = false; // train a only; used by the convex-toy checks

    int r_max() const { return default_rank_cap(r0); }

    // Throws ConfigError naming the offending field.
    void validate() const;
};

struct StepRecord {
    std::int64_t step = 0;  // 1-based
    double task_loss = 0.0;
    double meta_loss = 0.0; // task_loss + lambda*(l1 + beta*tv)
    double l1_part = 0.0;
    double tv_part = 0.0;
    std::vector<double> alpha; // per head (grid order), value after this step's update
    std::vector<int> rank;     // per head, rank in effect during this step
    double grad_sup_norm = 0.0; // pre-clip, over all active parameter groups
    std::int64_t param_count = 0;
};

// Test hooks; injection is added to the raw task gradient of alpha before
// regularization and clipping (models adversarial gradient spikes).
struct TrainHooks {
    std::function<double(std::int64_t step, int layer, int head)> alpha_grad_injection;
};

// Owns one training run: model state, per-head alpha traces, step count.
class Trainer {
public:
    Trainer(ModelState state, TrainerConfig cfg);

    // One full step of the training loop: rank sync, forward, losses,
    // clipped+projected alpha update, factor update.
    // Throws DivergedError on non-finite loss or gradient.
    StepRecord step(const Matrix& x, const Matrix& y, const TrainHooks& hooks = {});

    std::vector<StepRecord> run(const Matrix& x, const Matrix& y,
                                const TrainHooks& hooks = {});

    const ModelState& state() const { return state_; }
    const TrainerConfig& config() const { return cfg_; }
    std::span<const AlphaTrace> traces() const { return traces_; }
    std::int64_t steps_done() const { return steps_done_; }

private:
    ModelState state_;
    TrainerConfig cfg_;
    std::vector<AlphaTrace> traces_;
    std::int64_t steps_done_ = 0;
};

struct StabilityReport {
    double max_abs_delta = 0.0;
    double bound = 0.0; // clip_c * eta_alpha
    std::int64_t checked = 0;
    bool pass = false;
};

// Verifies |alpha_t - alpha_{t-1}| <= clip_c*eta_alpha for every head at
// every step (the first record is checked against the init value 1).
// The update rule guarantees this by construction; a violation is an
// implementation bug and throws InvariantBreachError.
StabilityReport stability_monitor(std::span<const StepRecord> records,
                                  const TrainerConfig& cfg);

struct ConvergenceReport {
    double fitted_c = 0.0;    // mean of m(t)*t over the fit segment
    double worst_ratio = 0.0; // max of m(T)*T / fitted_c over the check segment
    double threshold = 3.0;
    std::int64_t fit_count = 0;
    std::int64_t check_count = 0;
    bool pass = false;
};

// Empirical sublinear-decay check: with m(T) = min_{t<=T} ||g_t||^2
// (sup-norm from the records), fits the constant on the first `split`
// fraction of the run and requires m(T)*T <= 3*fitted constant on the
// rest. Consistency check, not a proof.
ConvergenceReport convergence_monitor(std::span<const StepRecord> records, double split);

} // namespace alora
