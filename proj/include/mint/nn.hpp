#pragma once

#include "mint/common.hpp"
#include "mint/rng.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace mint::nn {

// Named parameter with its gradient accumulator. Training instantiates
// float, the gradient checker double.
template <typename S>
struct Tensor {
    std::string name;
    MatX<S> v;
    MatX<S> g;
    bool decay = true;

    void setup(Index rows, Index cols, const std::string& n, bool decay_flag = true) {
        name = n;
        v = MatX<S>::Zero(rows, cols);
        g = MatX<S>::Zero(rows, cols);
        decay = decay_flag;
    }

    void zero_grad() { g.setZero(); }
};

template <typename S>
using ParamList = std::vector<Tensor<S>*>;

// Truncated-normal init keyed by the tensor name, so values do not depend
// on construction order.
template <typename S>
void init_trunc_normal(Tensor<S>& t, uint64_t seed, double stdev) {
    Rng rng = Rng::stream(seed, "init/" + t.name);
    rng.fill_trunc_normal(t.v, stdev);
}

template <typename S>
MatX<S> gelu(const MatX<S>& x) {
    const S inv_sqrt2 = static_cast<S>(M_SQRT1_2);
    return x.unaryExpr([inv_sqrt2](S v) {
        return static_cast<S>(0.5) * v * (static_cast<S>(1) + std::erf(v * inv_sqrt2));
    });
}

template <typename S>
MatX<S> gelu_backward(const MatX<S>& x_pre, const MatX<S>& dy) {
    const S inv_sqrt2 = static_cast<S>(M_SQRT1_2);
    const S inv_sqrt2pi = static_cast<S>(0.3989422804014327);
    MatX<S> dx = x_pre.unaryExpr([=](S v) {
        S cdf = static_cast<S>(0.5) * (static_cast<S>(1) + std::erf(v * inv_sqrt2));
        S pdf = inv_sqrt2pi * std::exp(static_cast<S>(-0.5) * v * v);
        return cdf + v * pdf;
    });
    return dx.cwiseProduct(dy);
}

// Row-wise affine map: X (n,in) -> X W^T + b, W (out,in), b (out,1).
template <typename S>
struct Linear {
    Tensor<S> W;
    Tensor<S> b;

    void setup(Index out, Index in, const std::string& name, uint64_t seed, double init_std = 0.02) {
        W.setup(out, in, name + ".W", true);
        b.setup(out, 1, name + ".b", false);
        init_trunc_normal(W, seed, init_std);
    }

    MatX<S> forward(const MatX<S>& x) const {
        return (x * W.v.transpose()).rowwise() + b.v.col(0).transpose();
    }

    // Accumulates parameter grads, returns dX. x must be the forward input.
    MatX<S> backward(const MatX<S>& x, const MatX<S>& dy) {
        W.g.noalias() += dy.transpose() * x;
        b.g.col(0).noalias() += dy.colwise().sum().transpose();
        return dy * W.v;
    }

    void collect(ParamList<S>& out) {
        out.push_back(&W);
        out.push_back(&b);
    }
};

template <typename S>
struct LayerNormCache {
    MatX<S> xhat;     // (n, d)
    VecX<S> inv_std;  // (n)
};

// Per-row layer normalization with learned scale/shift.
template <typename S>
struct LayerNorm {
    Tensor<S> gamma;
    Tensor<S> beta;
    static constexpr double kEps = 1e-6;

    void setup(Index dim, const std::string& name) {
        gamma.setup(dim, 1, name + ".gamma", false);
        beta.setup(dim, 1, name + ".beta", false);
        gamma.v.setOnes();
    }

    MatX<S> forward(const MatX<S>& x, LayerNormCache<S>& c) const {
        const Index n = x.rows(), d = x.cols();
        c.xhat.resize(n, d);
        c.inv_std.resize(n);
        MatX<S> y(n, d);
        for (Index i = 0; i < n; ++i) {
            S mean = x.row(i).mean();
            S var = (x.row(i).array() - mean).square().sum() / static_cast<S>(d);
            S inv = static_cast<S>(1) / std::sqrt(var + static_cast<S>(kEps));
            c.inv_std[i] = inv;
            c.xhat.row(i) = (x.row(i).array() - mean) * inv;
            y.row(i) = c.xhat.row(i).cwiseProduct(gamma.v.col(0).transpose()) + beta.v.col(0).transpose();
        }
        return y;
    }

    MatX<S> backward(const LayerNormCache<S>& c, const MatX<S>& dy) {
        const Index n = dy.rows(), d = dy.cols();
        gamma.g.col(0).noalias() += dy.cwiseProduct(c.xhat).colwise().sum().transpose();
        beta.g.col(0).noalias() += dy.colwise().sum().transpose();
        MatX<S> dx(n, d);
        for (Index i = 0; i < n; ++i) {
            auto w = dy.row(i).cwiseProduct(gamma.v.col(0).transpose());
            S mw = w.mean();
            S mwx = w.cwiseProduct(c.xhat.row(i)).mean();
            dx.row(i) = ((w.array() - mw) - c.xhat.row(i).array() * mwx) * c.inv_std[i];
        }
        return dx;
    }

    void collect(ParamList<S>& out) {
        out.push_back(&gamma);
        out.push_back(&beta);
    }
};

template <typename S>
struct MlpCache {
    MatX<S> x_in;
    MatX<S> h_pre;
};

// Two-layer GELU MLP, the block used inside transformer blocks and as the
// regression heads.
template <typename S>
struct Mlp {
    Linear<S> fc1;
    Linear<S> fc2;

    void setup(Index dim_in, Index hidden, Index dim_out, const std::string& name, uint64_t seed) {
        fc1.setup(hidden, dim_in, name + ".fc1", seed);
        fc2.setup(dim_out, hidden, name + ".fc2", seed);
    }

    MatX<S> forward(const MatX<S>& x, MlpCache<S>& c) const {
        c.x_in = x;
        c.h_pre = fc1.forward(x);
        return fc2.forward(gelu(c.h_pre));
    }

    MatX<S> backward(const MlpCache<S>& c, const MatX<S>& dy) {
        MatX<S> dh_act = fc2.backward(gelu(c.h_pre), dy);
        MatX<S> dh_pre = gelu_backward(c.h_pre, dh_act);
        return fc1.backward(c.x_in, dh_pre);
    }

    void collect(ParamList<S>& out) {
        fc1.collect(out);
        fc2.collect(out);
    }
};

// Row-wise softmax with max shift.
template <typename S>
MatX<S> softmax_rows(const MatX<S>& logits) {
    MatX<S> out(logits.rows(), logits.cols());
    for (Index i = 0; i < logits.rows(); ++i) {
        S mx = logits.row(i).maxCoeff();
        out.row(i) = (logits.row(i).array() - mx).exp();
        out.row(i) /= out.row(i).sum();
    }
    return out;
}

// Row-wise log-softmax; keeps 0 * log(0) paths finite for one-hot targets.
template <typename S>
MatX<S> log_softmax_rows(const MatX<S>& logits) {
    MatX<S> out(logits.rows(), logits.cols());
    for (Index i = 0; i < logits.rows(); ++i) {
        S mx = logits.row(i).maxCoeff();
        auto shifted = logits.row(i).array() - mx;
        S lse = std::log(shifted.exp().sum());
        out.row(i) = shifted - lse;
    }
    return out;
}

}  // namespace mint::nn
