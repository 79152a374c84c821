#include "alora/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "alora/errors.hpp"

namespace alora {

TrainMode parse_mode(const std::string& s) {
    if (s == "adaptive") return TrainMode::adaptive;
    if (s == "uniform") return TrainMode::uniform;
    throw ConfigError("mode must be 'adaptive' or 'uniform', got '" + s + "'", -1, "mode");
}

std::string mode_name(TrainMode m) {
    return m == TrainMode::adaptive ? "adaptive" : "uniform";
}

void TrainerConfig::validate() const {
    if (r0 < 1) throw ConfigError("r0 must be a positive integer", -1, "r0");
    if (lambda < 0.0) throw ConfigError("lambda must be non-negative", -1, "lambda");
    if (beta < 0.0) throw ConfigError("beta must be non-negative", -1, "beta");
    if (!(eta_theta > 0.0)) throw ConfigError("eta_theta must be positive", -1, "eta_theta");
    if (eta_alpha < 0.0) throw ConfigError("eta_alpha must be non-negative", -1, "eta_alpha");
    if (!(clip_c > 0.0)) throw ConfigError("clip_c must be positive", -1, "clip_c");
    if (steps < 1) throw ConfigError("steps must be a positive integer", -1, "steps");
    if (resize_every < 1) throw ConfigError("resize_every must be >= 1", -1, "resize_every");
    if (!(alpha_max > alpha_min) || alpha_min < 0.0)
        throw ConfigError("alpha box must satisfy 0 <= alpha_min < alpha_max", -1, "alpha_box");
}

Trainer::Trainer(ModelState state, TrainerConfig cfg)
    : state_(std::move(state)), cfg_(cfg) {
    cfg_.validate();
    if (state_.adapters.empty())
        throw std::invalid_argument("Trainer: model has no adapters attached");
    traces_.assign(state_.adapters.size(), AlphaTrace());
    for (std::size_t i = 0; i < state_.adapters.size(); ++i)
        traces_[i] = AlphaTrace(state_.adapters[i].alpha);
}

namespace {

bool head_grads_finite(const GradientBundle& gb) {
    if (!std::isfinite(gb.loss)) return false;
    for (const HeadGradient& hg : gb.heads) {
        if (!hg.grad_b.all_finite() || !hg.grad_a.all_finite()) return false;
        if (!std::isfinite(hg.task_grad_alpha)) return false;
    }
    return true;
}

} // namespace

StepRecord Trainer::step(const Matrix& x, const Matrix& y, const TrainHooks& hooks) {
    const std::int64_t t = steps_done_ + 1;
    const int L = state_.cfg.layers, H = state_.cfg.heads;
    const bool adaptive = cfg_.mode == TrainMode::adaptive;
    const RegConfig reg{cfg_.lambda, cfg_.beta};

    // (1) Synchronize every head's rank to its scaling factor.
    if (adaptive && (t - 1) % cfg_.resize_every == 0) {
        const std::uint64_t resize_base = derive_seed(cfg_.seed, 0x5E512E);
        for (int l = 0; l < L; ++l) {
            for (int h = 0; h < H; ++h) {
                LoraAdapter& ad = state_.adapter_at(l, h);
                synchronize_rank(ad, derive_seed(resize_base, static_cast<std::uint64_t>(t), l, h),
                                 cfg_.r_max());
                check_invariants(ad, cfg_.r_max(), cfg_.alpha_max);
            }
        }
    }

    StepRecord rec;
    rec.step = t;
    rec.rank.reserve(state_.adapters.size());
    rec.alpha.reserve(state_.adapters.size());
    for (const LoraAdapter& ad : state_.adapters) {
        rec.rank.push_back(ad.r_cur);
        rec.param_count += param_count(ad);
    }

    // (2)-(3) Forward pass and task loss; exact gradients in one sweep.
    const GradientBundle gb = backward(state_, x, y);
    if (!head_grads_finite(gb))
        throw DivergedError("training diverged: non-finite loss or gradient at step " +
                                std::to_string(t),
                            t);
    rec.task_loss = gb.loss;

    // (4)-(5) Regularizer at the current trace head; meta loss.
    const std::size_t trace_t = static_cast<std::size_t>(t) - 1;
    const RegValue rv = regularizer_value(traces_, trace_t, reg);
    rec.l1_part = rv.l1_part;
    rec.tv_part = rv.tv_part;
    rec.meta_loss = rec.task_loss + cfg_.lambda * (rec.l1_part + cfg_.beta * rec.tv_part);

    double sup = 0.0;
    for (std::size_t i = 0; i < gb.heads.size(); ++i) {
        if (!cfg_.freeze_b) sup = std::max(sup, max_abs(gb.heads[i].grad_b));
        sup = std::max(sup, max_abs(gb.heads[i].grad_a));
    }

    // (6) Clipped, projected scaling-factor update.
    for (int l = 0; l < L; ++l) {
        for (int h = 0; h < H; ++h) {
            const std::size_t i = static_cast<std::size_t>(state_.index(l, h));
            LoraAdapter& ad = state_.adapters[i];
            if (adaptive) {
                double task_g = gb.heads[i].task_grad_alpha;
                if (hooks.alpha_grad_injection) task_g += hooks.alpha_grad_injection(t, l, h);
                const double g = alpha_gradient(task_g, traces_[i], trace_t, reg);
                if (!std::isfinite(g))
                    throw DivergedError("training diverged: non-finite alpha gradient at step " +
                                            std::to_string(t),
                                        t);
                sup = std::max(sup, std::abs(g));
                const double clipped = std::clamp(g, -cfg_.clip_c, cfg_.clip_c);
                const double updated =
                    std::clamp(ad.alpha - cfg_.eta_alpha * clipped, cfg_.alpha_min, cfg_.alpha_max);
                ad.alpha_prev = ad.alpha;
                ad.alpha = updated;
            } else {
                ad.alpha_prev = ad.alpha;
            }
            traces_[i].append(ad.alpha);
            rec.alpha.push_back(ad.alpha);
        }
    }
    rec.grad_sup_norm = sup;

    // (7) Factor update with the task gradients.
    for (std::size_t i = 0; i < state_.adapters.size(); ++i) {
        LoraAdapter& ad = state_.adapters[i];
        if (!cfg_.freeze_b) axpy(ad.b, -cfg_.eta_theta, gb.heads[i].grad_b);
        axpy(ad.a, -cfg_.eta_theta, gb.heads[i].grad_a);
    }

    ++steps_done_;
    return rec;
}

std::vector<StepRecord> Trainer::run(const Matrix& x, const Matrix& y, const TrainHooks& hooks) {
    std::vector<StepRecord> records;
    records.reserve(static_cast<std::size_t>(cfg_.steps));
    for (std::int64_t t = 0; t < cfg_.steps; ++t) records.push_back(step(x, y, hooks));
    return records;
}

StabilityReport stability_monitor(std::span<const StepRecord> records,
                                  const TrainerConfig& cfg) {
    if (records.size() < 2)
        throw std::invalid_argument("stability_monitor: need at least 2 records");
    StabilityReport rep;
    rep.bound = cfg.clip_c * cfg.eta_alpha;
    const double slack = rep.bound * 1e-12; // absorbs last-ulp rounding only
    const std::size_t heads = records[0].alpha.size();
    for (std::size_t r = 0; r < records.size(); ++r) {
        for (std::size_t h = 0; h < heads; ++h) {
            const double prev = r == 0 ? 1.0 : records[r - 1].alpha[h];
            const double delta = std::abs(records[r].alpha[h] - prev);
            rep.max_abs_delta = std::max(rep.max_abs_delta, delta);
            ++rep.checked;
            if (delta > rep.bound + slack)
                throw InvariantBreachError(
                    "stability bound violated at step " + std::to_string(records[r].step) +
                    ", head index " + std::to_string(h) + ": |delta alpha| = " +
                    std::to_string(delta) + " > " + std::to_string(rep.bound));
        }
    }
    rep.pass = true;
    return rep;
}

ConvergenceReport convergence_monitor(std::span<const StepRecord> records, double split) {
    if (records.empty())
        throw std::invalid_argument("convergence_monitor: no records");
    if (!(split > 0.0) || !(split < 1.0))
        throw std::invalid_argument("convergence_monitor: split must be in (0, 1)");

    const std::int64_t n = static_cast<std::int64_t>(records.size());
    const std::int64_t fit_end = std::max<std::int64_t>(1, static_cast<std::int64_t>(
                                                               static_cast<double>(n) * split));
    ConvergenceReport rep;
    rep.fit_count = fit_end;
    rep.check_count = n - fit_end;

    double running_min = std::numeric_limits<double>::infinity();
    double fit_sum = 0.0;
    double worst_product = 0.0;
    for (std::int64_t t = 1; t <= n; ++t) {
        const double g = records[static_cast<std::size_t>(t - 1)].grad_sup_norm;
        running_min = std::min(running_min, g * g);
        const double product = running_min * static_cast<double>(t);
        if (t <= fit_end)
            fit_sum += product;
        else
            worst_product = std::max(worst_product, product);
    }
    rep.fitted_c = fit_sum / static_cast<double>(fit_end);
    if (rep.check_count == 0) {
        rep.pass = true;
        return rep;
    }
    if (rep.fitted_c == 0.0) {
        rep.worst_ratio = worst_product == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
        rep.worst_ratio = worst_product / rep.fitted_c;
    }
    rep.pass = rep.worst_ratio <= rep.threshold;
    return rep;
}

} // namespace alora
