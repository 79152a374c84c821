#pragma once

#include <cstdint>
#include <vector>

#include "alora/matrix.hpp"

namespace alora {

// Default projection box for the learnable scaling factor.
inline constexpr double kAlphaMax = 4.0;

// Default hard cap on the effective rank, relative to the base rank.
inline constexpr int kRankCapFactor = 2;

// One attention head's low-rank adaptation state: factor pair (b, a), the
// learnable scaling factor, and the bookkeeping needed to resize the
// factors when the rounded rank moves.
struct LoraAdapter {
    Matrix b;                 // d x r_cur
    Matrix a;                 // r_cur x k
    double alpha = 1.0;
    double alpha_prev = 1.0;  // value at the previous training step
    int r_cur = 1;
    int r0 = 1;               // base rank
    int layer_id = 0;
    int head_id = 0;

    int out_dim() const { return b.rows(); }
    int in_dim() const { return a.cols(); }
};

// Standard-LoRA style init: b all zeros (the adapter starts as an exact
// no-op), a rows Gaussian with stddev 1/sqrt(k), alpha = 1.
LoraAdapter make_adapter(int d, int k, int r0, std::uint64_t seed, int layer_id = 0,
                         int head_id = 0);

// max(1, round-half-away-from-zero(r0 * alpha)). The bare form is the
// uncapped rank formula; the capped overload is what adapters are
// synchronized against.
int effective_rank(int r0, double alpha);
int effective_rank(int r0, double alpha, int r_max);

inline int default_rank_cap(int r0) { return kRankCapFactor * r0; }

// alpha * (b * a): the adapter's additive weight update. alpha enters as
// a differentiable multiplicative gate; rounding the same alpha drives
// the discrete rank with no gradient through the rounding.
Matrix forward_delta(const LoraAdapter& ad);

// Rank indices sorted by descending pair importance
// s_i = ||b[:,i]||_2 * ||a[i,:]||_2, ties broken by ascending index.
std::vector<int> importance_order(const LoraAdapter& ad);

// Per-pair importance scores in original index order.
std::vector<double> importance_scores(const LoraAdapter& ad);

// Returns a copy resized to new_r. Shrinking keeps the new_r most
// important factor pairs in descending-importance order; growing appends
// zero columns to b and seeded Gaussian rows (stddev 1/sqrt(k)) to a, so
// the forward contribution is unchanged. No-op when new_r == r_cur.
// Throws std::invalid_argument unless 1 <= new_r <= r_max.
LoraAdapter resize(const LoraAdapter& ad, int new_r, std::uint64_t rng_seed, int r_max);
LoraAdapter resize(const LoraAdapter& ad, int new_r, std::uint64_t rng_seed);

// Trainable parameter count d*r_cur + r_cur*k.
std::int64_t param_count(const LoraAdapter& ad);

// Brings r_cur in line with the capped effective rank of alpha.
void synchronize_rank(LoraAdapter& ad, std::uint64_t rng_seed, int r_max);

// Self-check; throws InvariantBreachError on any violated adapter
// invariant (shape consistency, rank bounds, alpha box, rank/alpha sync).
void check_invariants(const LoraAdapter& ad, int r_max, double alpha_max = kAlphaMax);

} // namespace alora
