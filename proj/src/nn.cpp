#include "morphtag/nn.hpp"

#include <cassert>
#include <cmath>

#include "morphtag/errors.hpp"
#include "morphtag/kernels.hpp"

namespace morphtag::nn {

Param* ParamStore::add(const std::string& name, size_t rows, size_t cols) {
    if (find(name)) throw DataError("duplicate parameter name " + name);
    auto p = std::make_unique<Param>();
    p->name = name;
    p->rows = rows;
    p->cols = cols;
    p->w.assign(rows * cols, 0.0);
    p->g.assign(rows * cols, 0.0);
    p->m.assign(rows * cols, 0.0);
    p->v.assign(rows * cols, 0.0);
    params_.push_back(std::move(p));
    return params_.back().get();
}

Param* ParamStore::find(const std::string& name) const {
    for (const auto& p : params_)
        if (p->name == name) return p.get();
    return nullptr;
}

size_t ParamStore::total_size() const {
    size_t n = 0;
    for (const auto& p : params_) n += p->size();
    return n;
}

void ParamStore::zero_grads() {
    for (const auto& p : params_) std::fill(p->g.begin(), p->g.end(), 0.0);
}

std::vector<std::vector<double>> ParamStore::snapshot() const {
    std::vector<std::vector<double>> snap;
    snap.reserve(params_.size());
    for (const auto& p : params_) snap.push_back(p->w);
    return snap;
}

void ParamStore::restore(const std::vector<std::vector<double>>& snap) {
    assert(snap.size() == params_.size());
    for (size_t i = 0; i < params_.size(); ++i) params_[i]->w = snap[i];
}

void ParamStore::round_to_f32() {
    for (const auto& p : params_)
        for (double& w : p->w) w = static_cast<double>(static_cast<float>(w));
}

void glorot_init(Param& p, std::mt19937_64& rng) {
    const double r = std::sqrt(6.0 / static_cast<double>(p.rows + p.cols));
    std::uniform_real_distribution<double> dist(-r, r);
    for (double& w : p.w) w = dist(rng);
}

void uniform_init(Param& p, std::mt19937_64& rng, double radius) {
    std::uniform_real_distribution<double> dist(-radius, radius);
    for (double& w : p.w) w = dist(rng);
}

void AdamOptimizer::step(ParamStore& params, const AdamConfig& config) {
    ++t_;
    const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(t_));
    const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(t_));
    for (const auto& p : params.all())
        kernels::adam_step(p->w, p->g, p->m, p->v, config.lr, config.beta1, config.beta2,
                           config.eps, bias1, bias2);
}

void linear_forward(const Param& w, const Param& b, std::span<const double> x,
                    std::span<double> y) {
    kernels::matvec(w.w, x, b.w, y);
}

void linear_backward(Param& w, Param& b, std::span<const double> x,
                     std::span<const double> dy, std::span<double> dx) {
    kernels::matvec_grad_params(dy, x, w.g, b.g);
    if (!dx.empty()) kernels::matvec_grad_input(w.w, dy, dx);
}

GruParams make_gru(ParamStore& store, const std::string& prefix, size_t input_dim,
                   size_t hidden_dim, std::mt19937_64& rng) {
    GruParams p;
    p.input_dim = input_dim;
    p.hidden_dim = hidden_dim;
    auto mk = [&](const char* tag, size_t rows, size_t cols, bool init) {
        Param* q = store.add(prefix + "_" + tag, rows, cols);
        if (init) glorot_init(*q, rng);
        return q;
    };
    p.wz = mk("wz", hidden_dim, input_dim, true);
    p.uz = mk("uz", hidden_dim, hidden_dim, true);
    p.bz = mk("bz", hidden_dim, 1, false);
    p.wr = mk("wr", hidden_dim, input_dim, true);
    p.ur = mk("ur", hidden_dim, hidden_dim, true);
    p.br = mk("br", hidden_dim, 1, false);
    p.wc = mk("wc", hidden_dim, input_dim, true);
    p.uc = mk("uc", hidden_dim, hidden_dim, true);
    p.bc = mk("bc", hidden_dim, 1, false);
    return p;
}

void gru_forward(const GruParams& p, const std::vector<std::vector<double>>& xs,
                 bool reverse, GruTrace& trace) {
    const size_t T = xs.size();
    const size_t H = p.hidden_dim;
    trace.z.assign(T, {});
    trace.r.assign(T, {});
    trace.c.assign(T, {});
    trace.h.assign(T, {});

    std::vector<double> h_prev(H, 0.0);
    std::vector<double> pre(H), tmp(H), rh(H);
    for (size_t k = 0; k < T; ++k) {
        const size_t t = reverse ? T - 1 - k : k;
        const std::vector<double>& x = xs[t];

        auto gate = [&](const Param* wx, const Param* uh, const Param* b,
                        std::vector<double>& out, std::span<const double> hin,
                        bool use_tanh) {
            kernels::matvec(wx->w, x, b->w, pre);
            kernels::matvec(uh->w, hin, std::vector<double>(H, 0.0), tmp);
            for (size_t i = 0; i < H; ++i) pre[i] += tmp[i];
            out.resize(H);
            if (use_tanh)
                kernels::tanh_forward(pre, out);
            else
                kernels::sigmoid_forward(pre, out);
        };

        gate(p.wz, p.uz, p.bz, trace.z[t], h_prev, false);
        gate(p.wr, p.ur, p.br, trace.r[t], h_prev, false);
        for (size_t i = 0; i < H; ++i) rh[i] = trace.r[t][i] * h_prev[i];
        gate(p.wc, p.uc, p.bc, trace.c[t], rh, true);

        trace.h[t].resize(H);
        for (size_t i = 0; i < H; ++i)
            trace.h[t][i] =
                (1.0 - trace.z[t][i]) * h_prev[i] + trace.z[t][i] * trace.c[t][i];
        h_prev = trace.h[t];
    }
}

void gru_backward(const GruParams& p, const std::vector<std::vector<double>>& xs,
                  bool reverse, const GruTrace& trace,
                  const std::vector<std::vector<double>>& dh,
                  std::vector<std::vector<double>>& dxs) {
    const size_t T = xs.size();
    const size_t H = p.hidden_dim;
    std::vector<double> dh_carry(H, 0.0);
    std::vector<double> dz(H), dr(H), dc(H), dpre(H), drh(H), rh(H);
    const std::vector<double> zero_h(H, 0.0);

    for (size_t k = T; k-- > 0;) {
        const size_t t = reverse ? T - 1 - k : k;
        const size_t t_prev_k = k;  // step index; h_prev is the h of step k-1
        const std::vector<double>* h_prev = nullptr;
        if (t_prev_k == 0) {
            h_prev = &zero_h;
        } else {
            const size_t tp = reverse ? T - t_prev_k : t_prev_k - 1;
            h_prev = &trace.h[tp];
        }

        std::vector<double> d(H);
        for (size_t i = 0; i < H; ++i) d[i] = dh[t][i] + dh_carry[i];
        std::fill(dh_carry.begin(), dh_carry.end(), 0.0);

        const std::vector<double>& z = trace.z[t];
        const std::vector<double>& r = trace.r[t];
        const std::vector<double>& c = trace.c[t];

        for (size_t i = 0; i < H; ++i) {
            dz[i] = d[i] * (c[i] - (*h_prev)[i]);
            dc[i] = d[i] * z[i];
            dh_carry[i] += d[i] * (1.0 - z[i]);
        }

        // candidate: c = tanh(wc x + uc (r*h_prev) + bc)
        for (size_t i = 0; i < H; ++i) dpre[i] = dc[i] * (1.0 - c[i] * c[i]);
        for (size_t i = 0; i < H; ++i) rh[i] = r[i] * (*h_prev)[i];
        kernels::matvec_grad_params(dpre, xs[t], p.wc->g, p.bc->g);
        {
            std::vector<double> bdummy(H, 0.0);
            kernels::matvec_grad_params(dpre, rh, p.uc->g, bdummy);
        }
        kernels::matvec_grad_input(p.wc->w, dpre, dxs[t]);
        std::fill(drh.begin(), drh.end(), 0.0);
        kernels::matvec_grad_input(p.uc->w, dpre, drh);
        for (size_t i = 0; i < H; ++i) {
            dr[i] = drh[i] * (*h_prev)[i];
            dh_carry[i] += drh[i] * r[i];
        }

        // update gate: z = sigmoid(wz x + uz h_prev + bz)
        for (size_t i = 0; i < H; ++i) dpre[i] = dz[i] * z[i] * (1.0 - z[i]);
        kernels::matvec_grad_params(dpre, xs[t], p.wz->g, p.bz->g);
        {
            std::vector<double> bdummy(H, 0.0);
            kernels::matvec_grad_params(dpre, *h_prev, p.uz->g, bdummy);
        }
        kernels::matvec_grad_input(p.wz->w, dpre, dxs[t]);
        kernels::matvec_grad_input(p.uz->w, dpre, dh_carry);

        // reset gate: r = sigmoid(wr x + ur h_prev + br)
        for (size_t i = 0; i < H; ++i) dpre[i] = dr[i] * r[i] * (1.0 - r[i]);
        kernels::matvec_grad_params(dpre, xs[t], p.wr->g, p.br->g);
        {
            std::vector<double> bdummy(H, 0.0);
            kernels::matvec_grad_params(dpre, *h_prev, p.ur->g, bdummy);
        }
        kernels::matvec_grad_input(p.wr->w, dpre, dxs[t]);
        kernels::matvec_grad_input(p.ur->w, dpre, dh_carry);
    }
}

double softmax_ce(std::span<const double> logits, size_t target,
                  std::vector<double>& probs) {
    probs.assign(logits.begin(), logits.end());
    kernels::softmax(probs);
    const double p = std::max(probs[target], 1e-300);
    return -std::log(p);
}

void softmax_ce_backward(std::span<const double> probs, size_t target, double scale,
                         std::span<double> dlogits) {
    for (size_t i = 0; i < probs.size(); ++i) dlogits[i] += scale * probs[i];
    dlogits[target] -= scale;
}

void masked_softmax(std::span<const double> logits, std::vector<double>& probs) {
    probs.assign(logits.size(), 0.0);
    if (logits.size() <= 1) return;
    std::vector<double> rest(logits.begin() + 1, logits.end());
    kernels::softmax(rest);
    for (size_t i = 1; i < logits.size(); ++i) probs[i] = rest[i - 1];
}

}  // namespace morphtag::nn
