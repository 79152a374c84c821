#include "alora/adapter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "alora/errors.hpp"

namespace alora {

LoraAdapter make_adapter(int d, int k, int r0, std::uint64_t seed, int layer_id, int head_id) {
    if (d < 1 || k < 1 || r0 < 1)
        throw std::invalid_argument("make_adapter: dimensions and base rank must be >= 1");
    Rng rng(seed);
    LoraAdapter ad;
    ad.b = Matrix::zeros(d, r0);
    ad.a = Matrix::gaussian(r0, k, rng, 1.0 / std::sqrt(static_cast<double>(k)));
    ad.alpha = 1.0;
    ad.alpha_prev = 1.0;
    ad.r_cur = r0;
    ad.r0 = r0;
    ad.layer_id = layer_id;
    ad.head_id = head_id;
    return ad;
}

int effective_rank(int r0, double alpha) {
    const long long r = std::llround(static_cast<double>(r0) * alpha);
    return static_cast<int>(std::max(1LL, r));
}

int effective_rank(int r0, double alpha, int r_max) {
    return std::min(r_max, effective_rank(r0, alpha));
}

Matrix forward_delta(const LoraAdapter& ad) {
    return scale(matmul(ad.b, ad.a), ad.alpha);
}

std::vector<double> importance_scores(const LoraAdapter& ad) {
    std::vector<double> s(ad.r_cur);
    for (int i = 0; i < ad.r_cur; ++i) {
        double bn = 0.0;
        for (int row = 0; row < ad.b.rows(); ++row) bn += ad.b(row, i) * ad.b(row, i);
        double an = 0.0;
        for (int col = 0; col < ad.a.cols(); ++col) an += ad.a(i, col) * ad.a(i, col);
        s[i] = std::sqrt(bn) * std::sqrt(an);
    }
    return s;
}

std::vector<int> importance_order(const LoraAdapter& ad) {
    const std::vector<double> s = importance_scores(ad);
    std::vector<int> order(ad.r_cur);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return s[x] > s[y]; });
    return order;
}

LoraAdapter resize(const LoraAdapter& ad, int new_r, std::uint64_t rng_seed, int r_max) {
    if (new_r < 1 || new_r > r_max)
        throw std::invalid_argument("resize: target rank " + std::to_string(new_r) +
                                    " outside [1, " + std::to_string(r_max) + "]");
    if (new_r == ad.r_cur) return ad;

    LoraAdapter out = ad;
    const int d = ad.out_dim(), k = ad.in_dim();
    if (new_r < ad.r_cur) {
        const std::vector<int> order = importance_order(ad);
        out.b = Matrix(d, new_r);
        out.a = Matrix(new_r, k);
        for (int i = 0; i < new_r; ++i) {
            const int src = order[i];
            for (int row = 0; row < d; ++row) out.b(row, i) = ad.b(row, src);
            for (int col = 0; col < k; ++col) out.a(i, col) = ad.a(src, col);
        }
    } else {
        Rng rng(rng_seed);
        out.b = Matrix(d, new_r);
        out.a = Matrix(new_r, k);
        for (int row = 0; row < d; ++row)
            for (int i = 0; i < ad.r_cur; ++i) out.b(row, i) = ad.b(row, i);
        for (int i = 0; i < ad.r_cur; ++i)
            for (int col = 0; col < k; ++col) out.a(i, col) = ad.a(i, col);
        const double std_a = 1.0 / std::sqrt(static_cast<double>(k));
        for (int i = ad.r_cur; i < new_r; ++i)
            for (int col = 0; col < k; ++col) out.a(i, col) = rng.gaussian(std_a);
        // Appended b columns stay zero: growth never changes forward_delta.
    }
    out.r_cur = new_r;
    return out;
}

LoraAdapter resize(const LoraAdapter& ad, int new_r, std::uint64_t rng_seed) {
    return resize(ad, new_r, rng_seed, default_rank_cap(ad.r0));
}

std::int64_t param_count(const LoraAdapter& ad) {
    return static_cast<std::int64_t>(ad.out_dim()) * ad.r_cur +
           static_cast<std::int64_t>(ad.r_cur) * ad.in_dim();
}

void synchronize_rank(LoraAdapter& ad, std::uint64_t rng_seed, int r_max) {
    const int target = effective_rank(ad.r0, ad.alpha, r_max);
    if (target != ad.r_cur) ad = resize(ad, target, rng_seed, r_max);
}

void check_invariants(const LoraAdapter& ad, int r_max, double alpha_max) {
    auto fail = [&](const std::string& what) {
        throw InvariantBreachError("adapter (layer " + std::to_string(ad.layer_id) + ", head " +
                                   std::to_string(ad.head_id) + "): " + what);
    };
    if (ad.b.cols() != ad.r_cur || ad.a.rows() != ad.r_cur)
        fail("factor shapes disagree with r_cur");
    if (ad.b.rows() < 1 || ad.a.cols() < 1) fail("empty factor dimensions");
    if (ad.r_cur < 1 || ad.r_cur > r_max) fail("r_cur outside [1, r_max]");
    if (!(ad.alpha >= 0.0) || ad.alpha > alpha_max) fail("alpha outside projection box");
    if (ad.r_cur != effective_rank(ad.r0, ad.alpha, r_max))
        fail("r_cur not synchronized with alpha");
    if (!ad.b.all_finite() || !ad.a.all_finite()) fail("non-finite factor entries");
    if (!std::isfinite(ad.alpha) || !std::isfinite(ad.alpha_prev)) fail("non-finite alpha");
}

} // namespace alora
