#pragma once

#include "mint/common.hpp"
#include "mint/nn.hpp"

#include <cmath>
#include <vector>

namespace mint {

// AdamW with decoupled weight decay; decay skips tensors flagged decay=false
// (biases, norm parameters).
template <typename S>
struct AdamW {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.04;
    int64_t t = 0;
    std::vector<MatX<S>> m;
    std::vector<MatX<S>> v;

    void init(const nn::ParamList<S>& params) {
        m.clear();
        v.clear();
        for (const auto* p : params) {
            m.push_back(MatX<S>::Zero(p->v.rows(), p->v.cols()));
            v.push_back(MatX<S>::Zero(p->v.rows(), p->v.cols()));
        }
        t = 0;
    }

    void step(const nn::ParamList<S>& params, double lr) {
        require(params.size() == m.size(), "optimizer state does not match parameter list");
        ++t;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (size_t i = 0; i < params.size(); ++i) {
            nn::Tensor<S>& p = *params[i];
            m[i] = m[i] * static_cast<S>(beta1) + p.g * static_cast<S>(1.0 - beta1);
            v[i] = v[i] * static_cast<S>(beta2) + p.g.cwiseProduct(p.g) * static_cast<S>(1.0 - beta2);
            MatX<S> mhat = m[i] / static_cast<S>(bc1);
            MatX<S> vhat = v[i] / static_cast<S>(bc2);
            MatX<S> update =
                mhat.array() / (vhat.array().sqrt() + static_cast<S>(eps));
            if (p.decay && weight_decay > 0.0) update += p.v * static_cast<S>(weight_decay);
            p.v -= update * static_cast<S>(lr);
        }
    }
};

// Linear warmup to base_lr, then cosine decay to min_frac * base_lr.
inline double cosine_lr(int64_t step, int64_t total, double base_lr, double warmup_frac,
                        double min_frac) {
    const auto warmup = static_cast<int64_t>(std::llround(warmup_frac * static_cast<double>(total)));
    if (warmup > 0 && step < warmup)
        return base_lr * static_cast<double>(step + 1) / static_cast<double>(warmup);
    const double min_lr = base_lr * min_frac;
    if (total <= warmup) return base_lr;
    double progress = static_cast<double>(step - warmup) / static_cast<double>(total - warmup);
    progress = std::min(1.0, std::max(0.0, progress));
    return min_lr + (base_lr - min_lr) * 0.5 * (1.0 + std::cos(M_PI * progress));
}

// DINO momentum schedule: base -> 1.0 on a cosine.
inline double ema_momentum(int64_t step, int64_t total, double base) {
    double progress = total > 0 ? static_cast<double>(step) / static_cast<double>(total) : 1.0;
    progress = std::min(1.0, std::max(0.0, progress));
    return 1.0 - (1.0 - base) * 0.5 * (1.0 + std::cos(M_PI * progress));
}

// teacher <- m*teacher + (1-m)*student, written as teacher + (1-m)*(s-t)
// and clamped so each coordinate stays inside [teacher, student] even under
// rounding; m=0 copies the student bitwise, m=1 is a no-op.
template <typename S>
void ema_update(const nn::ParamList<S>& teacher, const nn::ParamList<S>& student, double momentum) {
    require(teacher.size() == student.size(), "teacher/student parameter lists differ in length");
    require(momentum >= 0.0 && momentum <= 1.0, "EMA momentum must lie in [0,1]");
    for (size_t i = 0; i < teacher.size(); ++i) {
        MatX<S>& tv = teacher[i]->v;
        const MatX<S>& sv = student[i]->v;
        require(tv.rows() == sv.rows() && tv.cols() == sv.cols(), "EMA parameter shape mismatch");
        if (momentum == 0.0) {
            tv = sv;
            continue;
        }
        if (momentum == 1.0) continue;
        const S one_minus = static_cast<S>(1.0 - momentum);
        MatX<S> lo = tv.cwiseMin(sv);
        MatX<S> hi = tv.cwiseMax(sv);
        tv += (sv - tv) * one_minus;
        tv = tv.cwiseMax(lo).cwiseMin(hi);
    }
}

}  // namespace mint
