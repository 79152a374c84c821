#pragma once

#include <cstdint>
#include <vector>

#include "alora/adapter.hpp"
#include "alora/matrix.hpp"

namespace alora {

// Stacked multi-head linear maps with frozen per-layer mixing and tanh
// between layers (final layer linear). Layer widths are uniform: every
// head maps k -> d, the mixing matrix maps the concatenated H*d head
// outputs back to k.
struct ModelConfig {
    int layers = 3;
    int heads = 4;
    int d = 32; // per-head output dim
    int k = 32; // input width (also the inter-layer width)
    std::uint64_t seed = 0;
};

struct ModelState {
    ModelConfig cfg;
    std::vector<Matrix> base;      // layers*heads frozen W_{l,h}, each d x k
    std::vector<Matrix> mixing;    // per layer, (heads*d) x k: maps concat -> k
    std::vector<Matrix> mixing_t;  // transposed copies, k x (heads*d)
    std::vector<LoraAdapter> adapters; // layers*heads, grid order (l major)

    int index(int l, int h) const { return l * cfg.heads + h; }
    const Matrix& base_at(int l, int h) const { return base[index(l, h)]; }
    LoraAdapter& adapter_at(int l, int h) { return adapters[index(l, h)]; }
    const LoraAdapter& adapter_at(int l, int h) const { return adapters[index(l, h)]; }
};

// Frozen base weights and mixing matrices drawn from cfg.seed
// (entries N(0, 1/k) resp. N(0, 1/(heads*d))); no adapters attached yet.
ModelState make_base_model(const ModelConfig& cfg);

// Fresh standard-init adapters at base rank r0 on every (layer, head),
// with per-head seeds derived from adapter_seed.
void attach_adapters(ModelState& state, int r0, std::uint64_t adapter_seed);

// Intermediate activations retained for the backward pass.
struct ForwardCache {
    std::vector<Matrix> layer_in;  // input to each layer; layer_in[0] = x
    std::vector<Matrix> activated; // tanh outputs per non-final layer
    std::vector<std::vector<Matrix>> w_eff; // per layer, per head W + delta
};

// Batch forward: x is n x k (one sample per row), result n x k.
// Throws std::invalid_argument on input width mismatch.
Matrix forward(const ModelState& state, const Matrix& x);
Matrix forward(const ModelState& state, const Matrix& x, ForwardCache& cache);

// Mean squared error over all entries.
double task_loss(const Matrix& pred, const Matrix& target);

struct HeadGradient {
    Matrix grad_b;
    Matrix grad_a;
    double task_grad_alpha = 0.0;
};

struct GradientBundle {
    std::vector<HeadGradient> heads; // grid order matching ModelState
    double loss = 0.0;
    double sup_norm() const; // max |entry| over all factor grads and alpha grads
};

// Exact reverse-mode gradients of task_loss(forward(state, x), target)
// with respect to every adapter's b, a and alpha. Frozen weights receive
// no gradient. alpha's gradient flows through the multiplicative gate
// only: <dL/d(delta), b*a>_F.
GradientBundle backward(const ModelState& state, const Matrix& x, const Matrix& target);

// Hash of all frozen tensors (base weights and mixing); used to prove
// base invariance across training.
std::uint64_t frozen_hash(const ModelState& state);

} // namespace alora
