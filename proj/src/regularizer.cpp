#include "alora/regularizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace alora {

double AlphaTrace::at(std::size_t t) const {
    if (t >= values_.size())
        throw std::invalid_argument("AlphaTrace: step " + std::to_string(t) +
                                    " beyond trace of length " + std::to_string(values_.size()));
    return values_[t];
}

double temporal_gradient(const AlphaTrace& trace, std::size_t t) {
    if (t >= trace.size())
        throw std::invalid_argument("temporal_gradient: step " + std::to_string(t) +
                                    " beyond trace");
    if (t == 0) return 0.0;
    return trace.at(t) - trace.at(t - 1);
}

RegValue regularizer_value(std::span<const AlphaTrace> traces, std::size_t t,
                           const RegConfig& cfg) {
    RegValue out;
    for (const AlphaTrace& trace : traces) {
        if (t >= trace.size())
            throw std::invalid_argument("regularizer_value: a trace does not cover step " +
                                        std::to_string(t));
        out.l1_part += std::abs(trace.at(t));
        const double dt = temporal_gradient(trace, t);
        out.tv_part += dt * dt;
    }
    out.r_total = out.l1_part + cfg.beta * out.tv_part;
    return out;
}

namespace {
double sign(double x) {
    if (x > 0.0) return 1.0;
    if (x < 0.0) return -1.0;
    return 0.0; // subgradient choice: a fully pruned head stays at rest
}
} // namespace

double alpha_gradient(double task_grad_alpha, const AlphaTrace& trace, std::size_t t,
                      const RegConfig& cfg) {
    const double a_t = trace.at(t);
    const double dt = temporal_gradient(trace, t);
    return task_grad_alpha + cfg.lambda * (sign(a_t) + 2.0 * cfg.beta * dt);
}

} // namespace alora
