#pragma once

#include "mint/common.hpp"
#include "mint/nn.hpp"

#include <string>
#include <vector>

namespace mint {

struct DinoHeadConfig {
    Index n_prototypes = 1024;  // paper scale 65,536
    Index hidden = 256;         // paper scale 2048
    Index bottleneck = 64;      // paper scale 256
};

template <typename S>
struct DinoHeadCache {
    MatX<S> x_in;
    MatX<S> h1_pre, h2_pre;
    MatX<S> u;          // bottleneck pre-normalization, (n, B)
    MatX<S> u_hat;      // row-normalized
    VecX<S> u_norm;     // clamped norms
    MatX<S> w_hat;      // row-normalized prototype directions, (K, B)
    VecX<S> w_norm;
};

// DINO projection head: 3-layer GELU MLP, L2 normalization, then a
// weight-normalized prototype layer (unit-norm rows, no bias).
template <typename S>
struct DinoHead {
    DinoHeadConfig cfg;
    nn::Linear<S> l1, l2, l3;
    nn::Tensor<S> prototypes;  // (K, bottleneck) direction parameters
    static constexpr double kNormEps = 1e-12;

    // Fan-in-scaled init keeps the pre-normalization bottleneck at O(1)
    // norm; a ViT-style 0.02 init shrinks it to ~1e-4 at toy widths, which
    // makes the normalization badly conditioned.
    void setup(Index dim, const DinoHeadConfig& c, const std::string& name, uint64_t seed) {
        cfg = c;
        l1.setup(cfg.hidden, dim, name + ".l1", seed, std::sqrt(2.0 / static_cast<double>(dim)));
        l2.setup(cfg.hidden, cfg.hidden, name + ".l2", seed,
                 std::sqrt(2.0 / static_cast<double>(cfg.hidden)));
        l3.setup(cfg.bottleneck, cfg.hidden, name + ".l3", seed,
                 std::sqrt(1.0 / static_cast<double>(cfg.hidden)));
        prototypes.setup(cfg.n_prototypes, cfg.bottleneck, name + ".prototypes", true);
        nn::init_trunc_normal(prototypes, seed, 0.02);
    }

    void collect(nn::ParamList<S>& out) {
        l1.collect(out);
        l2.collect(out);
        l3.collect(out);
        out.push_back(&prototypes);
    }

    static void normalize_rows(const MatX<S>& x, MatX<S>& x_hat, VecX<S>& norms) {
        x_hat.resize(x.rows(), x.cols());
        norms.resize(x.rows());
        for (Index i = 0; i < x.rows(); ++i) {
            S n = std::max(x.row(i).norm(), static_cast<S>(kNormEps));
            norms[i] = n;
            x_hat.row(i) = x.row(i) / n;
        }
    }

    // z rows are input vectors; returns prototype logits (n, K).
    MatX<S> forward(const MatX<S>& z, DinoHeadCache<S>& c) const {
        require(z.allFinite(), "non-finite input to DINO head");
        c.x_in = z;
        c.h1_pre = l1.forward(z);
        c.h2_pre = l2.forward(nn::gelu(c.h1_pre));
        c.u = l3.forward(nn::gelu(c.h2_pre));
        normalize_rows(c.u, c.u_hat, c.u_norm);
        normalize_rows(prototypes.v, c.w_hat, c.w_norm);
        return c.u_hat * c.w_hat.transpose();
    }

    // Returns dZ; accumulates parameter grads including the prototype
    // directions through their row normalization.
    MatX<S> backward(const DinoHeadCache<S>& c, const MatX<S>& d_logits) {
        MatX<S> d_uhat = d_logits * c.w_hat;
        MatX<S> d_what = d_logits.transpose() * c.u_hat;
        for (Index k = 0; k < prototypes.v.rows(); ++k) {
            S dot = d_what.row(k).dot(c.w_hat.row(k));
            prototypes.g.row(k) += (d_what.row(k) - dot * c.w_hat.row(k)) / c.w_norm[k];
        }
        MatX<S> d_u(c.u.rows(), c.u.cols());
        for (Index i = 0; i < c.u.rows(); ++i) {
            S dot = d_uhat.row(i).dot(c.u_hat.row(i));
            d_u.row(i) = (d_uhat.row(i) - dot * c.u_hat.row(i)) / c.u_norm[i];
        }
        MatX<S> d_h2act = l3.backward(nn::gelu(c.h2_pre), d_u);
        MatX<S> d_h2 = nn::gelu_backward(c.h2_pre, d_h2act);
        MatX<S> d_h1act = l2.backward(nn::gelu(c.h1_pre), d_h2);
        MatX<S> d_h1 = nn::gelu_backward(c.h1_pre, d_h1act);
        return l1.backward(c.x_in, d_h1);
    }
};

// Expression heads h_st / h_pst: 2-layer GELU MLP, hidden = 2D. Applied
// row-wise, so a patch-token matrix maps row-for-row.
template <typename S>
struct RegressionHead {
    nn::Mlp<S> mlp;
    Index dim_out = 0;

    void setup(Index dim_in, Index out, const std::string& name, uint64_t seed) {
        dim_out = out;
        mlp.setup(dim_in, 2 * dim_in, out, name, seed);
        nn::init_trunc_normal(mlp.fc1.W, seed, std::sqrt(2.0 / static_cast<double>(dim_in)));
        nn::init_trunc_normal(mlp.fc2.W, seed, std::sqrt(1.0 / static_cast<double>(2 * dim_in)));
    }

    void collect(nn::ParamList<S>& out) { mlp.collect(out); }

    MatX<S> forward(const MatX<S>& z, nn::MlpCache<S>& c) const {
        require(z.allFinite(), "non-finite input to regression head");
        return mlp.forward(z, c);
    }

    MatX<S> backward(const nn::MlpCache<S>& c, const MatX<S>& d_out) { return mlp.backward(c, d_out); }
};

}  // namespace mint
