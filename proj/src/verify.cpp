#include "alora/verify.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace alora {

namespace {

// Flat view of one adapter coordinate so the sampler can treat b entries,
// a entries and alpha uniformly.
struct CoordRef {
    int head_index;
    enum class Kind { b, a, alpha } kind;
    int flat; // index into the factor's data; unused for alpha
};

double* coord_ptr(ModelState& state, const CoordRef& c) {
    LoraAdapter& ad = state.adapters[static_cast<std::size_t>(c.head_index)];
    switch (c.kind) {
        case CoordRef::Kind::b: return &ad.b.data()[static_cast<std::size_t>(c.flat)];
        case CoordRef::Kind::a: return &ad.a.data()[static_cast<std::size_t>(c.flat)];
        default: return &ad.alpha;
    }
}

double analytic_grad(const GradientBundle& gb, const CoordRef& c) {
    const HeadGradient& hg = gb.heads[static_cast<std::size_t>(c.head_index)];
    switch (c.kind) {
        case CoordRef::Kind::b: return hg.grad_b.data()[static_cast<std::size_t>(c.flat)];
        case CoordRef::Kind::a: return hg.grad_a.data()[static_cast<std::size_t>(c.flat)];
        default: return hg.task_grad_alpha;
    }
}

std::string coord_label(const ModelState& state, const CoordRef& c) {
    const LoraAdapter& ad = state.adapters[static_cast<std::size_t>(c.head_index)];
    const std::string where =
        "(layer " + std::to_string(ad.layer_id) + ", head " + std::to_string(ad.head_id) + ")";
    switch (c.kind) {
        case CoordRef::Kind::b: return "b[" + std::to_string(c.flat) + "] " + where;
        case CoordRef::Kind::a: return "a[" + std::to_string(c.flat) + "] " + where;
        default: return "alpha " + where;
    }
}

} // namespace

GradCheckResult gradient_check(ModelState& state, const Matrix& x, const Matrix& y,
                               int n_coords, double fd_step, double tolerance,
                               std::uint64_t seed) {
    // Enumerate every trainable coordinate.
    std::vector<CoordRef> coords;
    for (int i = 0; i < static_cast<int>(state.adapters.size()); ++i) {
        const LoraAdapter& ad = state.adapters[static_cast<std::size_t>(i)];
        for (int f = 0; f < static_cast<int>(ad.b.size()); ++f)
            coords.push_back({i, CoordRef::Kind::b, f});
        for (int f = 0; f < static_cast<int>(ad.a.size()); ++f)
            coords.push_back({i, CoordRef::Kind::a, f});
        coords.push_back({i, CoordRef::Kind::alpha, 0});
    }

    const GradientBundle gb = backward(state, x, y);

    GradCheckResult res;
    res.tolerance = tolerance;
    Rng rng(seed);
    for (int c = 0; c < n_coords; ++c) {
        const CoordRef& ref = coords[static_cast<std::size_t>(rng.below(coords.size()))];
        double* slot = coord_ptr(state, ref);
        const double saved = *slot;

        *slot = saved + fd_step;
        const double up = task_loss(forward(state, x), y);
        *slot = saved - fd_step;
        const double down = task_loss(forward(state, x), y);
        *slot = saved;

        const double numeric = (up - down) / (2.0 * fd_step);
        const double analytic = analytic_grad(gb, ref);
        const double rel = std::abs(analytic - numeric) /
                           std::max({std::abs(analytic), std::abs(numeric), 1e-5});
        if (rel > res.max_rel_error) {
            res.max_rel_error = rel;
            res.worst_coord = coord_label(state, ref);
        }
        ++res.coords_checked;
    }
    res.pass = res.max_rel_error <= tolerance;
    return res;
}

namespace {

double orthonormality_defect(const Matrix& q) {
    const Matrix gram = matmul(transpose(q), q);
    return frobenius_norm(sub(gram, Matrix::identity(gram.rows())));
}

} // namespace

LinalgCheckResult linalg_check(int n_matrices, int max_rows, int max_cols, int n_candidates,
                               std::uint64_t seed) {
    LinalgCheckResult res;
    res.matrices = n_matrices;
    for (int m_i = 0; m_i < n_matrices; ++m_i) {
        Rng rng(derive_seed(seed, 0x11A16, m_i));
        const int rows = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_rows - 1)));
        const int cols = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_cols - 1)));
        const Matrix m = Matrix::gaussian(rows, cols, rng);
        const double m_norm = frobenius_norm(m);
        const int p = std::min(rows, cols);

        const SvdResult dec = svd(m);
        res.worst_orthonormality =
            std::max({res.worst_orthonormality, orthonormality_defect(dec.u),
                      orthonormality_defect(dec.v)});

        Matrix recon(rows, cols);
        for (int i = 0; i < p; ++i) {
            for (int a = 0; a < rows; ++a) {
                const double ua = dec.sigma[static_cast<std::size_t>(i)] * dec.u(a, i);
                for (int b = 0; b < cols; ++b) recon(a, b) += ua * dec.v(b, i);
            }
        }
        res.worst_reconstruction = std::max(
            res.worst_reconstruction, frobenius_norm(sub(m, recon)) / std::max(1.0, m_norm));

        double prev_residual = std::numeric_limits<double>::infinity();
        for (int r = 1; r <= p; ++r) {
            const auto [trunc, residual] = truncate_rank(m, r);

            double tail2 = 0.0, tail1 = 0.0;
            for (int i = r; i < p; ++i) {
                tail2 += dec.sigma[static_cast<std::size_t>(i)] * dec.sigma[static_cast<std::size_t>(i)];
                tail1 += dec.sigma[static_cast<std::size_t>(i)];
            }
            const double direct = frobenius_norm(sub(m, trunc));
            res.worst_residual_gap = std::max({res.worst_residual_gap,
                                               std::abs(residual - std::sqrt(tail2)),
                                               std::abs(residual - direct)});
            res.worst_loose_excess = std::max(res.worst_loose_excess, residual - tail1);

            const double pyth = std::abs(residual * residual +
                                         frobenius_norm(trunc) * frobenius_norm(trunc) -
                                         m_norm * m_norm) /
                                std::max(1.0, m_norm * m_norm);
            res.worst_pythagorean = std::max(res.worst_pythagorean, pyth);

            res.worst_monotonicity = std::max(res.worst_monotonicity, residual - prev_residual);
            prev_residual = residual;

            // Optimality against random factorizations, each scaled by its
            // best scalar multiple.
            for (int cand = 0; cand < n_candidates; ++cand) {
                const Matrix cf = Matrix::gaussian(rows, r, rng);
                const Matrix df = Matrix::gaussian(r, cols, rng);
                Matrix prod = matmul(cf, df);
                const double pn2 = frobenius_inner(prod, prod);
                if (pn2 > 0.0) {
                    const double best_scale = frobenius_inner(m, prod) / pn2;
                    prod = scale(prod, best_scale);
                }
                if (frobenius_norm(sub(m, prod)) < residual - 1e-9)
                    ++res.random_factorization_losses;
            }
        }
    }
    res.pass = res.worst_reconstruction <= 1e-8 && res.worst_orthonormality <= 1e-8 &&
               res.worst_residual_gap <= 1e-8 && res.worst_loose_excess <= 1e-8 &&
               res.worst_pythagorean <= 1e-6 && res.worst_monotonicity <= 1e-9 &&
               res.random_factorization_losses == 0;
    return res;
}

} // namespace alora
