#pragma once

#include <cstdint>
#include <string>

#include "alora/model.hpp"

namespace alora {

struct GradCheckResult {
    double max_rel_error = 0.0;
    int coords_checked = 0;
    double tolerance = 0.0;
    bool pass = false;
    std::string worst_coord; // human-readable label of the worst coordinate
};

// Central-difference check of backward() against the loss surface.
// Samples n_coords coordinates uniformly over all adapter parameters
// (b and a entries and every alpha); relative error uses
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-5).
// State is perturbed in place and restored.
GradCheckResult gradient_check(ModelState& state, const Matrix& x, const Matrix& y,
                               int n_coords, double fd_step, double tolerance,
                               std::uint64_t seed);

struct LinalgCheckResult {
    int matrices = 0;
    double worst_reconstruction = 0.0; // ||m - u s v^T||_F / max(1, ||m||_F)
    double worst_orthonormality = 0.0; // max of ||U^T U - I||_F, ||V^T V - I||_F
    double worst_residual_gap = 0.0;   // |residual - sqrt tail| and |residual - direct norm|
    double worst_loose_excess = 0.0;   // max(residual - loose bound, 0)
    double worst_pythagorean = 0.0;    // relative defect of residual^2 + ||T_r||^2 = ||M||^2
    double worst_monotonicity = 0.0;   // max residual increase over consecutive ranks
    int random_factorization_losses = 0; // candidates that beat the truncation
    bool pass = false;
};

// Runs the SVD / best-rank-truncation oracle suite on seeded random
// matrices with dimensions up to max_rows x max_cols: reconstruction,
// orthonormality, tail identity, loose singular-value bound, Pythagorean
// identity, residual monotonicity, and optimality against n_candidates
// random rank-r factorizations (scaled to their best multiple) per
// (matrix, rank) pair.
LinalgCheckResult linalg_check(int n_matrices, int max_rows, int max_cols, int n_candidates,
                               std::uint64_t seed);

} // namespace alora
