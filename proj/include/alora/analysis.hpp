#pragma once

#include <cstdint>
#include <span>

#include "alora/adapter.hpp"
#include "alora/matrix.hpp"

namespace alora {

// How well one head's adapter approximates a target update, against the
// spectral quantities of the target. epsilon == tail_sqrt (within solver
// accuracy) exactly when the adapter is the optimal rank-r truncation;
// tail_sqrt <= epsilon always; tail_sqrt <= loose_bound always.
struct ApproxErrorReport {
    double epsilon = 0.0;     // ||target - forward_delta(adapter)||_F
    double tail_sqrt = 0.0;   // sqrt(sum of sigma_i^2, i > rank)
    double loose_bound = 0.0; // sum of sigma_i, i > rank
    int rank = 0;             // adapter's current rank
};

// Throws std::invalid_argument on shape mismatch.
ApproxErrorReport approx_error(const Matrix& target, const LoraAdapter& ad);

struct AlphaForTolerance {
    double alpha = 0.0;
    int rank = 0;
    bool saturated = false; // no realizable rank met the tolerance
};

// Smallest alpha on the realizable grid {1/r0, ..., r_max/r0} whose
// effective rank brings the SVD tail residual of target within eps.
AlphaForTolerance min_alpha_for_tolerance(const Matrix& target, int r0, double eps, int r_max);
AlphaForTolerance min_alpha_for_tolerance(const Matrix& target, int r0, double eps);

// Capacity aggregate: sum over heads of ln(max(1, r0*alpha)). Heads at
// the rank floor contribute ln(1) = 0.
double capacity_term(std::span<const double> alphas, int r0);

struct RankStatistics {
    double frac_below = 0.0;  // heads with rank < 0.8*r0
    double frac_above = 0.0;  // heads with rank > 1.5*r0
    double frac_middle = 0.0; // remainder; the three sum to 1
    double avg_effective_rank = 0.0; // (1/N) * sum of r0*alpha_i
    std::int64_t total_params = 0;
    std::int64_t uniform_params = 0; // all heads at r0
    double relative_params = 0.0;    // total_params / uniform_params
};

RankStatistics rank_statistics(std::span<const LoraAdapter> adapters, int r0);

} // namespace alora
