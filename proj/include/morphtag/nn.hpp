#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace morphtag::nn {

struct Param {
    std::string name;
    size_t rows = 0, cols = 0;
    std::vector<double> w;  // values, row-major
    std::vector<double> g;  // gradient
    std::vector<double> m, v;  // Adam moments

    size_t size() const { return w.size(); }
    std::span<double> row(size_t r) { return {w.data() + r * cols, cols}; }
    std::span<const double> row(size_t r) const { return {w.data() + r * cols, cols}; }
    std::span<double> grad_row(size_t r) { return {g.data() + r * cols, cols}; }
};

// Owns all trainable parameters of a model; iteration order is creation
// order, which fixes both the save format and the Adam update order.
class ParamStore {
public:
    Param* add(const std::string& name, size_t rows, size_t cols);
    Param* find(const std::string& name) const;
    const std::vector<std::unique_ptr<Param>>& all() const { return params_; }
    size_t total_size() const;
    void zero_grads();

    std::vector<std::vector<double>> snapshot() const;
    void restore(const std::vector<std::vector<double>>& snap);
    // Rounds every weight to the nearest float32, the container precision,
    // so that a saved-and-reloaded model is bit-identical to this one.
    void round_to_f32();

private:
    std::vector<std::unique_ptr<Param>> params_;
};

void glorot_init(Param& p, std::mt19937_64& rng);
void uniform_init(Param& p, std::mt19937_64& rng, double radius);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class AdamOptimizer {
public:
    void step(ParamStore& params, const AdamConfig& config);
    uint64_t steps() const { return t_; }

private:
    uint64_t t_ = 0;
};

// --- layers -----------------------------------------------------------

// y = W x + b
void linear_forward(const Param& w, const Param& b, std::span<const double> x,
                    std::span<double> y);
// Accumulates into parameter grads and dx (dx may be empty to skip).
void linear_backward(Param& w, Param& b, std::span<const double> x,
                     std::span<const double> dy, std::span<double> dx);

struct GruParams {
    Param *wz, *uz, *bz;
    Param *wr, *ur, *br;
    Param *wc, *uc, *bc;
    size_t input_dim = 0, hidden_dim = 0;
};

GruParams make_gru(ParamStore& store, const std::string& prefix, size_t input_dim,
                   size_t hidden_dim, std::mt19937_64& rng);

// Activations recorded by gru_forward, needed for the backward pass.
// h[t] is aligned with input position t regardless of direction.
struct GruTrace {
    std::vector<std::vector<double>> z, r, c, h;
};

void gru_forward(const GruParams& p, const std::vector<std::vector<double>>& xs,
                 bool reverse, GruTrace& trace);

// dh[t]: loss gradient w.r.t. h[t]. Accumulates parameter grads and adds
// input gradients into dxs (which must be sized like xs).
void gru_backward(const GruParams& p, const std::vector<std::vector<double>>& xs,
                  bool reverse, const GruTrace& trace,
                  const std::vector<std::vector<double>>& dh,
                  std::vector<std::vector<double>>& dxs);

// Full softmax cross-entropy over all indices (training targets may be the
// reserved UNK index 0). Returns -log p[target].
double softmax_ce(std::span<const double> logits, size_t target,
                  std::vector<double>& probs);
// dlogits += scale * (probs - onehot(target)).
void softmax_ce_backward(std::span<const double> probs, size_t target, double scale,
                         std::span<double> dlogits);

// Prediction-time distribution: softmax over logits[1..n) with probs[0] = 0,
// so the reserved UNK label can never be emitted.
void masked_softmax(std::span<const double> logits, std::vector<double>& probs);

}  // namespace morphtag::nn
