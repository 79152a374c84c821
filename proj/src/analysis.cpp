#include "alora/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace alora {

ApproxErrorReport approx_error(const Matrix& target, const LoraAdapter& ad) {
    if (target.rows() != ad.out_dim() || target.cols() != ad.in_dim())
        throw std::invalid_argument("approx_error: target shape does not match adapter");
    ApproxErrorReport rep;
    rep.rank = ad.r_cur;
    rep.epsilon = frobenius_norm(sub(target, forward_delta(ad)));
    const SvdResult dec = svd(target);
    double tail2 = 0.0, tail1 = 0.0;
    for (std::size_t i = static_cast<std::size_t>(rep.rank); i < dec.sigma.size(); ++i) {
        tail2 += dec.sigma[i] * dec.sigma[i];
        tail1 += dec.sigma[i];
    }
    rep.tail_sqrt = std::sqrt(tail2);
    rep.loose_bound = tail1;
    return rep;
}

AlphaForTolerance min_alpha_for_tolerance(const Matrix& target, int r0, double eps, int r_max) {
    if (r0 < 1) throw std::invalid_argument("min_alpha_for_tolerance: r0 must be >= 1");
    if (!(eps > 0.0)) throw std::invalid_argument("min_alpha_for_tolerance: eps must be > 0");
    const SvdResult dec = svd(target);
    const int p = static_cast<int>(dec.sigma.size());

    // tail(r) = sqrt(sum of sigma_i^2 for i > r); tail(r) = 0 for r >= p.
    auto tail = [&](int r) {
        double s = 0.0;
        for (int i = r; i < p; ++i) s += dec.sigma[i] * dec.sigma[i];
        return std::sqrt(s);
    };
    for (int r = 1; r <= r_max; ++r) {
        if (tail(r) <= eps)
            return {static_cast<double>(r) / static_cast<double>(r0), r, false};
    }
    return {static_cast<double>(r_max) / static_cast<double>(r0), r_max, true};
}

AlphaForTolerance min_alpha_for_tolerance(const Matrix& target, int r0, double eps) {
    return min_alpha_for_tolerance(target, r0, eps, default_rank_cap(r0));
}

double capacity_term(std::span<const double> alphas, int r0) {
    if (r0 < 1) throw std::invalid_argument("capacity_term: r0 must be >= 1");
    double s = 0.0;
    for (double a : alphas) s += std::log(std::max(1.0, static_cast<double>(r0) * a));
    return s;
}

RankStatistics rank_statistics(std::span<const LoraAdapter> adapters, int r0) {
    if (adapters.empty()) throw std::invalid_argument("rank_statistics: no adapters");
    RankStatistics st;
    const double lo = 0.8 * r0, hi = 1.5 * r0;
    for (const LoraAdapter& ad : adapters) {
        if (ad.r_cur < lo) st.frac_below += 1.0;
        if (ad.r_cur > hi) st.frac_above += 1.0;
        st.avg_effective_rank += static_cast<double>(r0) * ad.alpha;
        st.total_params += param_count(ad);
        st.uniform_params += static_cast<std::int64_t>(ad.out_dim()) * r0 +
                             static_cast<std::int64_t>(r0) * ad.in_dim();
    }
    const double n = static_cast<double>(adapters.size());
    st.frac_below /= n;
    st.frac_above /= n;
    st.frac_middle = 1.0 - st.frac_below - st.frac_above;
    st.avg_effective_rank /= n;
    st.relative_params =
        static_cast<double>(st.total_params) / static_cast<double>(st.uniform_params);
    return st;
}

} // namespace alora
