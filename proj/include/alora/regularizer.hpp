#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace alora {

// Append-only per-head history of the scaling factor, alpha(0) = 1.
class AlphaTrace {
public:
    AlphaTrace() : values_{1.0} {}
    explicit AlphaTrace(double alpha0) : values_{alpha0} {}

    void append(double alpha) { values_.push_back(alpha); }

    double at(std::size_t t) const;
    std::size_t last_step() const { return values_.size() - 1; }
    std::size_t size() const { return values_.size(); }
    double back() const { return values_.back(); }

private:
    std::vector<double> values_;
};

struct RegConfig {
    double lambda = 0.01; // overall regularization weight
    double beta = 0.1;    // TV weight
};

// alpha(t) - alpha(t-1); exactly 0 at t = 0.
// Throws std::invalid_argument when t is beyond the trace.
double temporal_gradient(const AlphaTrace& trace, std::size_t t);

struct RegValue {
    double r_total = 0.0; // l1 + beta * tv
    double l1_part = 0.0; // sum over heads of |alpha(t)|
    double tv_part = 0.0; // sum over heads of (alpha(t) - alpha(t-1))^2
};

// Per-step regularizer over all heads' traces at step t.
// Throws std::invalid_argument if any trace does not cover t.
RegValue regularizer_value(std::span<const AlphaTrace> traces, std::size_t t,
                           const RegConfig& cfg);

// Meta-gradient for one head's alpha at step t:
//   task_grad + lambda * (sign(alpha(t)) + 2*beta*(alpha(t) - alpha(t-1)))
// with sign(0) = 0. The temporal term at t = 0 is 0 by definition; the
// future difference in the full expression is dropped (causal form).
double alpha_gradient(double task_grad_alpha, const AlphaTrace& trace, std::size_t t,
                      const RegConfig& cfg);

} // namespace alora
