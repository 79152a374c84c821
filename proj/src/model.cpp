#include "alora/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "alora/hashing.hpp"

namespace alora {

ModelState make_base_model(const ModelConfig& cfg) {
    if (cfg.layers < 1 || cfg.heads < 1 || cfg.d < 1 || cfg.k < 1)
        throw std::invalid_argument("make_base_model: all dimensions must be >= 1");
    ModelState st;
    st.cfg = cfg;
    st.base.reserve(static_cast<std::size_t>(cfg.layers) * cfg.heads);
    const double w_std = 1.0 / std::sqrt(static_cast<double>(cfg.k));
    const double m_std = 1.0 / std::sqrt(static_cast<double>(cfg.heads) * cfg.d);
    for (int l = 0; l < cfg.layers; ++l) {
        for (int h = 0; h < cfg.heads; ++h) {
            Rng rng(derive_seed(cfg.seed, 0xBA5E, l, h));
            st.base.push_back(Matrix::gaussian(cfg.d, cfg.k, rng, w_std));
        }
        Rng rng(derive_seed(cfg.seed, 0x313C, l));
        st.mixing.push_back(Matrix::gaussian(cfg.heads * cfg.d, cfg.k, rng, m_std));
        st.mixing_t.push_back(transpose(st.mixing.back()));
    }
    return st;
}

void attach_adapters(ModelState& state, int r0, std::uint64_t adapter_seed) {
    state.adapters.clear();
    state.adapters.reserve(state.base.size());
    for (int l = 0; l < state.cfg.layers; ++l)
        for (int h = 0; h < state.cfg.heads; ++h)
            state.adapters.push_back(
                make_adapter(state.cfg.d, state.cfg.k, r0,
                             derive_seed(adapter_seed, 0xADA7, l, h), l, h));
}

namespace {

void apply_tanh(Matrix& m) {
    for (double& x : m.data()) x = std::tanh(x);
}

void check_state_shapes(const ModelState& state) {
    const auto expected = static_cast<std::size_t>(state.cfg.layers) * state.cfg.heads;
    if (state.adapters.size() != expected || state.base.size() != expected)
        throw std::invalid_argument("model: adapter grid does not match (layers, heads)");
}

} // namespace

Matrix forward(const ModelState& state, const Matrix& x) {
    ForwardCache cache;
    return forward(state, x, cache);
}

Matrix forward(const ModelState& state, const Matrix& x, ForwardCache& cache) {
    check_state_shapes(state);
    if (x.cols() != state.cfg.k)
        throw std::invalid_argument("forward: input width " + std::to_string(x.cols()) +
                                    " does not match k = " + std::to_string(state.cfg.k));
    const int L = state.cfg.layers, H = state.cfg.heads, d = state.cfg.d;
    const int n = x.rows();

    cache.layer_in.clear();
    cache.activated.clear();
    cache.w_eff.assign(L, {});

    Matrix cur = x;
    for (int l = 0; l < L; ++l) {
        cache.layer_in.push_back(cur);
        Matrix concat(n, H * d);
        cache.w_eff[l].reserve(H);
        for (int h = 0; h < H; ++h) {
            Matrix w_eff = add(state.base_at(l, h), forward_delta(state.adapter_at(l, h)));
            Matrix head_out = matmul(cur, transpose(w_eff)); // n x d
            for (int i = 0; i < n; ++i) {
                const double* src = head_out.row(i);
                double* dst = concat.row(i) + h * d;
                for (int j = 0; j < d; ++j) dst[j] = src[j];
            }
            cache.w_eff[l].push_back(std::move(w_eff));
        }
        cur = matmul(concat, state.mixing[l]); // n x k
        if (l + 1 < L) {
            apply_tanh(cur);
            cache.activated.push_back(cur);
        }
    }
    return cur;
}

double task_loss(const Matrix& pred, const Matrix& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw std::invalid_argument("task_loss: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred.data()[i] - target.data()[i];
        s += e * e;
    }
    return s / static_cast<double>(pred.size());
}

double GradientBundle::sup_norm() const {
    double s = 0.0;
    for (const HeadGradient& g : heads) {
        s = std::max(s, max_abs(g.grad_b));
        s = std::max(s, max_abs(g.grad_a));
        s = std::max(s, std::abs(g.task_grad_alpha));
    }
    return s;
}

GradientBundle backward(const ModelState& state, const Matrix& x, const Matrix& target) {
    ForwardCache cache;
    const Matrix pred = forward(state, x, cache);

    GradientBundle out;
    out.loss = task_loss(pred, target);
    out.heads.resize(state.adapters.size());

    const int L = state.cfg.layers, H = state.cfg.heads, d = state.cfg.d;
    const int n = x.rows();

    // d(loss)/d(pred) for mean squared error over all entries.
    Matrix grad = sub(pred, target);
    const double inv = 2.0 / static_cast<double>(pred.size());
    for (double& g : grad.data()) g *= inv;

    for (int l = L - 1; l >= 0; --l) {
        if (l != L - 1) {
            // Through tanh: derivative 1 - tanh^2 from the cached output.
            const Matrix& act = cache.activated[l];
            for (std::size_t i = 0; i < grad.size(); ++i)
                grad.data()[i] *= 1.0 - act.data()[i] * act.data()[i];
        }
        Matrix grad_concat = matmul(grad, state.mixing_t[l]); // n x H*d
        Matrix grad_in(n, state.cfg.k);
        const Matrix& layer_x = cache.layer_in[l];
        for (int h = 0; h < H; ++h) {
            Matrix grad_head(n, d);
            for (int i = 0; i < n; ++i) {
                const double* src = grad_concat.row(i) + h * d;
                double* dst = grad_head.row(i);
                for (int j = 0; j < d; ++j) dst[j] = src[j];
            }
            const LoraAdapter& ad = state.adapter_at(l, h);
            HeadGradient& hg = out.heads[state.index(l, h)];

            // dL/d(W + delta), d x k.
            const Matrix grad_w = matmul(transpose(grad_head), layer_x);
            const Matrix ba = matmul(ad.b, ad.a);
            hg.task_grad_alpha = frobenius_inner(grad_w, ba);
            hg.grad_b = scale(matmul(grad_w, transpose(ad.a)), ad.alpha);
            hg.grad_a = scale(matmul(transpose(ad.b), grad_w), ad.alpha);

            axpy(grad_in, 1.0, matmul(grad_head, cache.w_eff[l][h]));
        }
        grad = std::move(grad_in);
    }
    return out;
}

std::uint64_t frozen_hash(const ModelState& state) {
    std::uint64_t h = kFnvOffset;
    for (const Matrix& w : state.base)
        h = fnv1a64(w.data().data(), w.data().size() * sizeof(double), h);
    for (const Matrix& m : state.mixing)
        h = fnv1a64(m.data().data(), m.data().size() * sizeof(double), h);
    return h;
}

} // namespace alora
