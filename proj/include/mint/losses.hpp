#pragma once

#include "mint/common.hpp"
#include "mint/nn.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace mint {

// Centering/sharpening state for the self-distillation objective.
template <typename S>
struct DinoState {
    VecX<S> center;  // (K), running EMA of teacher logits
    double tau_student = 0.1;
    double tau_teacher = 0.04;
    double center_momentum = 0.9;

    void validate() const {
        require(tau_student > 0.0 && tau_teacher > 0.0, "temperatures must be positive");
        require(center_momentum >= 0.0 && center_momentum < 1.0, "center momentum must lie in [0,1)");
        require(center.allFinite(), "center must be finite");
    }
};

struct LossWeights {
    double distill = 100.0;
    double st = 100.0;
    double pst = 100.0;

    void validate() const {
        require(distill >= 0.0 && st >= 0.0 && pst >= 0.0, "loss weights must be non-negative");
    }
};

template <typename S>
struct DinoLossResult {
    S value = 0;
    // Gradients w.r.t. student logits, one row block per crop. The teacher
    // side is gradient-blocked: no teacher gradient is ever produced.
    std::vector<VecX<S>> d_student_logits;
};

// Eq-style self-distillation: teacher distributions from the two global
// views, student distributions from every view, summed over pairs with
// distinct views and divided by the pair count.
template <typename S>
DinoLossResult<S> dino_loss(const std::vector<VecX<S>>& teacher_logits,
                            const std::vector<VecX<S>>& student_logits, const DinoState<S>& state,
                            bool with_grad = true) {
    require(teacher_logits.size() == 2, "dino_loss expects exactly 2 global teacher views");
    require(student_logits.size() >= 2, "dino_loss expects at least the 2 global student views");
    const Index k_count = state.center.size();
    for (const auto& t : teacher_logits)
        require(t.size() == k_count, "teacher logits dimension does not match prototype count");
    for (const auto& s : student_logits)
        require(s.size() == k_count, "student logits dimension does not match prototype count");

    const size_t n_crops = student_logits.size();
    const S inv_tau_s = static_cast<S>(1.0 / state.tau_student);

    std::vector<VecX<S>> teacher_probs(teacher_logits.size());
    for (size_t i = 0; i < teacher_logits.size(); ++i) {
        MatX<S> row = ((teacher_logits[i] - state.center) * static_cast<S>(1.0 / state.tau_teacher)).transpose();
        teacher_probs[i] = nn::softmax_rows(row).row(0).transpose();
    }
    std::vector<VecX<S>> student_logp(n_crops), student_p(n_crops);
    for (size_t j = 0; j < n_crops; ++j) {
        MatX<S> row = (student_logits[j] * inv_tau_s).transpose();
        student_logp[j] = nn::log_softmax_rows(row).row(0).transpose();
        student_p[j] = nn::softmax_rows(row).row(0).transpose();
    }

    const S n_pairs = static_cast<S>(teacher_logits.size() * (n_crops - 1));
    DinoLossResult<S> out;
    if (with_grad) out.d_student_logits.assign(n_crops, VecX<S>::Zero(k_count));
    S total = 0;
    for (size_t i = 0; i < teacher_logits.size(); ++i)
        for (size_t j = 0; j < n_crops; ++j) {
            if (j == i) continue;  // views are aligned by index across nets
            total -= teacher_probs[i].dot(student_logp[j]);
            if (with_grad)
                out.d_student_logits[j] += (student_p[j] - teacher_probs[i]) * (inv_tau_s / n_pairs);
        }
    out.value = total / n_pairs;
    return out;
}

// center <- m*center + (1-m) * mean of the batch teacher logits (rows).
template <typename S>
VecX<S> update_center(const VecX<S>& center, const MatX<S>& batch_teacher_logits, double momentum) {
    require(batch_teacher_logits.rows() >= 1, "update_center needs a non-empty batch");
    require(batch_teacher_logits.cols() == center.size(), "center/logits dimension mismatch");
    require(momentum >= 0.0 && momentum < 1.0, "center momentum must lie in [0,1)");
    VecX<S> mean = batch_teacher_logits.colwise().mean().transpose();
    return center * static_cast<S>(momentum) + mean * static_cast<S>(1.0 - momentum);
}

template <typename S>
struct VectorLossResult {
    S value = 0;
    std::vector<VecX<S>> d_student;  // per crop
};

// Mean over crops of the squared distance between student and frozen CLS
// outputs. Gradients flow to the student side only.
template <typename S>
VectorLossResult<S> distill_loss(const std::vector<VecX<S>>& student_cls,
                                 const std::vector<VecX<S>>& frozen_cls, bool with_grad = true) {
    require(!student_cls.empty(), "distill_loss needs at least one crop");
    require(student_cls.size() == frozen_cls.size(), "crop count mismatch between student and frozen");
    const S inv_n = static_cast<S>(1.0 / static_cast<double>(student_cls.size()));
    VectorLossResult<S> out;
    if (with_grad) out.d_student.resize(student_cls.size());
    for (size_t i = 0; i < student_cls.size(); ++i) {
        require(student_cls[i].size() == frozen_cls[i].size(), "feature dimension mismatch");
        VecX<S> diff = student_cls[i] - frozen_cls[i];
        out.value += diff.squaredNorm() * inv_n;
        if (with_grad) out.d_student[i] = diff * (2 * inv_n);
    }
    return out;
}

template <typename S>
struct MaskedMseResult {
    S value = 0;
    MatX<S> d_pred;
};

// Eq. 3 style spot regression: mean squared error over exactly the genes
// in gene_set; all other coordinates carry zero value and zero gradient.
template <typename S>
MaskedMseResult<S> st_loss(const VecX<S>& pred, const VecX<S>& target, const std::vector<Index>& gene_set,
                           bool with_grad = true) {
    require(!gene_set.empty(), "st_loss gene set must be non-empty");
    require(pred.size() == target.size(), "pred/target length mismatch");
    MaskedMseResult<S> out;
    if (with_grad) out.d_pred = MatX<S>::Zero(pred.size(), 1);
    const S inv_n = static_cast<S>(1.0 / static_cast<double>(gene_set.size()));
    for (Index g : gene_set) {
        require(g >= 0 && g < pred.size(), "gene index out of range");
        S diff = pred[g] - target[g];
        out.value += diff * diff * inv_n;
        if (with_grad) out.d_pred(g, 0) = 2 * diff * inv_n;
    }
    return out;
}

// Eq. 4 style patch regression: double mean over positive patches and
// panel genes. An all-negative grid contributes exactly zero loss and
// zero gradient.
template <typename S>
MaskedMseResult<S> pst_loss(const MatX<S>& pred, const MatX<S>& target_counts,
                            const std::vector<uint8_t>& positive, const std::vector<uint8_t>& panel,
                            bool with_grad = true) {
    require(pred.rows() == target_counts.rows() && pred.cols() == target_counts.cols(),
            "pred/target grid shape mismatch");
    require(static_cast<Index>(positive.size()) == pred.rows(), "positive mask length mismatch");
    require(static_cast<Index>(panel.size()) == pred.cols(), "panel mask length mismatch");
    std::vector<Index> pos_rows, panel_cols;
    for (Index p = 0; p < pred.rows(); ++p)
        if (positive[static_cast<size_t>(p)]) pos_rows.push_back(p);
    for (Index g = 0; g < pred.cols(); ++g)
        if (panel[static_cast<size_t>(g)]) panel_cols.push_back(g);
    require(!panel_cols.empty(), "panel mask must select at least one gene");

    MaskedMseResult<S> out;
    if (with_grad) out.d_pred = MatX<S>::Zero(pred.rows(), pred.cols());
    if (pos_rows.empty()) return out;  // positive-only supervision

    const S inv = static_cast<S>(1.0 / (static_cast<double>(pos_rows.size()) *
                                        static_cast<double>(panel_cols.size())));
    for (Index p : pos_rows)
        for (Index g : panel_cols) {
            S diff = pred(p, g) - target_counts(p, g);
            out.value += diff * diff * inv;
            if (with_grad) out.d_pred(p, g) = 2 * diff * inv;
        }
    return out;
}

// Weighted combination; the DINO term carries implicit weight 1. Reports
// the offending component on non-finite input.
inline double total_loss(double l_dino, double l_distill, double l_st, double l_pst,
                         const LossWeights& w) {
    auto check = [](double v, const char* name) {
        if (!std::isfinite(v)) throw RuntimeFailure(std::string("non-finite loss component: ") + name);
    };
    check(l_dino, "dino");
    check(l_distill, "distill");
    check(l_st, "st");
    check(l_pst, "pst");
    return l_dino + w.distill * l_distill + w.st * l_st + w.pst * l_pst;
}

}  // namespace mint
