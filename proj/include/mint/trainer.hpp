#pragma once

#include "mint/augment.hpp"
#include "mint/backbone.hpp"
#include "mint/dataset.hpp"
#include "mint/heads.hpp"
#include "mint/io.hpp"
#include "mint/losses.hpp"
#include "mint/optim.hpp"

#include <map>
#include <string>
#include <vector>

namespace mint {

// mint      : Eq.3 reads the ST token (the full method)
// st_on_cls : Eq.3 reads CLS; the ST token is attention-masked out, which
//             reproduces the "L_ST on [CLS]" ablation while keeping the
//             parameter layout identical
// st_on_cls_no_distill : same with the anchor loss disabled
// pretrain  : DINO-only stage that produces the frozen-anchor base weights
enum class TrainMode { Mint, StOnCls, StOnClsNoDistill, Pretrain };

std::string train_mode_name(TrainMode m);
TrainMode train_mode_from_name(const std::string& s);

struct TrainConfig {
    int64_t iterations = 1200;
    double lr = 1e-3;
    double warmup_frac = 0.1;
    double min_lr_frac = 0.01;
    int batch_size = 8;
    LossWeights weights;
    Index hvg_k = 16;
    double p_hvg = 0.5;
    double ema_base = 0.996;
    int xenium_oversample = 5;
    CropConfig crops;
    AugmentConfig augment;
    TrainMode mode = TrainMode::Mint;
    uint64_t seed = 0;
    BackboneConfig backbone;  // has_st_token refers to the *base*; keep false
    DinoHeadConfig dino_head;
    double tau_student = 0.1;
    double tau_teacher = 0.04;
    double tau_teacher_start = 0.04;
    int64_t tau_teacher_warmup_steps = 0;  // 0 disables the warmup
    double center_momentum = 0.9;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double weight_decay = 0.04;
    int64_t checkpoint_every = 500;
    bool serial = true;  // reserved; this build always runs the serial path

    void validate() const {
        require(iterations >= 1, "iterations must be >= 1");
        require(batch_size >= 1, "batch_size must be >= 1");
        require(p_hvg >= 0.0 && p_hvg <= 1.0, "p_hvg must lie in [0,1]");
        require(xenium_oversample >= 1, "xenium_oversample must be >= 1");
        require(!backbone.has_st_token, "base backbone config must not carry the ST token");
        require(crops.global_size % backbone.patch_size == 0 &&
                    crops.local_size % backbone.patch_size == 0,
                "crop sizes must be divisible by patch_size");
        weights.validate();
        backbone.validate();
        crops.validate();
    }

    double tau_teacher_at(int64_t step) const {
        if (tau_teacher_warmup_steps <= 0) return tau_teacher;
        double f = std::min(1.0, static_cast<double>(step) / static_cast<double>(tau_teacher_warmup_steps));
        return tau_teacher_start + (tau_teacher - tau_teacher_start) * f;
    }
};

// Strict JSON round-trip (unknown keys are hard errors); config.cpp.
std::string train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const std::string& text);

struct SlideInfo {
    std::vector<Index> measured;  // measured gene indices
    std::vector<Index> hvg;       // top-k of the measured genes
};

// Whole dataset resident in memory; desk scale keeps this tens of MB.
struct LoadedDataset {
    int tile_size = 0;
    VocabFile vocab;
    std::vector<SpotSample> spots;
    std::vector<XeniumSample> xeniums;
    std::map<std::string, SlideInfo> slide_info;  // per spot slide
};

LoadedDataset load_dataset(const DatasetManifest& manifest, Index hvg_k);

// Uniform draws from the multiset where each xenium entry appears
// `oversample` times and each spot entry once. Returns (is_spot, index).
std::vector<std::pair<bool, size_t>> build_batch(size_t n_spot, size_t n_xenium, int oversample,
                                                 int batch_size, Rng& rng);

template <typename S>
struct StudentModel {
    Backbone<S> backbone;
    DinoHead<S> dino_head;
    RegressionHead<S> st_head;
    RegressionHead<S> pst_head;

    nn::ParamList<S> params() {
        nn::ParamList<S> out;
        backbone.collect(out);
        dino_head.collect(out);
        st_head.collect(out);
        pst_head.collect(out);
        return out;
    }

    void zero_grad() {
        for (auto* p : params()) p->zero_grad();
    }
};

template <typename S>
struct TeacherModel {
    Backbone<S> backbone;
    DinoHead<S> dino_head;

    nn::ParamList<S> params() {
        nn::ParamList<S> out;
        backbone.collect(out);
        dino_head.collect(out);
        return out;
    }
};

template <typename S>
struct TrainState {
    TrainConfig cfg;
    StudentModel<S> student;
    TeacherModel<S> teacher;
    Backbone<S> frozen;
    DinoState<S> dino_state;
    AdamW<S> optim;
    int64_t step = 0;

    // EMA param pairing: teacher tracks backbone + DINO head.
    nn::ParamList<S> teacher_params() { return teacher.params(); }
    nn::ParamList<S> student_ema_source() {
        nn::ParamList<S> out;
        student.backbone.collect(out);
        student.dino_head.collect(out);
        return out;
    }
};

// Student and teacher start from the base weights (student gains the ST
// token except in pretrain mode); the frozen anchor keeps the base bitwise.
template <typename S>
TrainState<S> init_train(const Backbone<S>& base_params, const TrainConfig& cfg) {
    cfg.validate();
    require(!base_params.cfg.has_st_token, "init_train expects base params without an ST token");

    TrainState<S> st;
    st.cfg = cfg;
    st.frozen = base_params;
    if (cfg.mode == TrainMode::Pretrain)
        st.student.backbone = base_params;
    else
        st.student.backbone = extend_with_st_token(base_params, cfg.seed);

    const Index dim = cfg.backbone.embed_dim;
    st.student.dino_head.setup(dim, cfg.dino_head, "dino_head", cfg.seed);
    st.student.st_head.setup(dim, 0, "st_head", cfg.seed);   // resized by bind_vocab
    st.student.pst_head.setup(dim, 0, "pst_head", cfg.seed); // resized by bind_vocab

    st.teacher.backbone = st.student.backbone;
    st.teacher.dino_head = st.student.dino_head;

    st.dino_state.center = VecX<S>::Zero(cfg.dino_head.n_prototypes);
    st.dino_state.tau_student = cfg.tau_student;
    st.dino_state.tau_teacher = cfg.tau_teacher;
    st.dino_state.center_momentum = cfg.center_momentum;

    st.optim.beta1 = cfg.adam_beta1;
    st.optim.beta2 = cfg.adam_beta2;
    st.optim.eps = cfg.adam_eps;
    st.optim.weight_decay = cfg.weight_decay;
    return st;
}

// The regression heads map to the dataset's vocabularies; bind after the
// dataset is known, before the optimizer is initialized.
template <typename S>
void bind_vocab(TrainState<S>& st, Index g_spot, Index g_xenium) {
    const Index dim = st.cfg.backbone.embed_dim;
    st.student.st_head.setup(dim, g_spot, "st_head", st.cfg.seed);
    st.student.pst_head.setup(dim, g_xenium, "pst_head", st.cfg.seed);
    st.optim.init(st.student.params());
}

template <typename S>
struct PreparedSample {
    bool is_spot = true;
    CropSet crops;
    VecX<S> expression;
    std::vector<Index> gene_set;
    std::vector<MatX<S>> xen_counts;                // per global crop
    std::vector<std::vector<uint8_t>> xen_positive;  // per global crop
    std::vector<uint8_t> panel;
};

struct LossRecord {
    double l_dino = 0.0;
    double l_distill = 0.0;
    double l_st = 0.0;
    double l_pst = 0.0;
    double total = 0.0;
    double lr = 0.0;
    double ema_m = 0.0;
    int64_t step = 0;
};

// Per-component gradient scales. Training uses {1, w.distill, w.st, w.pst};
// the gradient checker isolates one component at a time.
struct LossScales {
    double dino = 1.0;
    double distill = 0.0;
    double st = 0.0;
    double pst = 0.0;
};

template <typename S>
PreparedSample<S> prepare_spot(const SpotSample& sample, const SlideInfo& info, const TrainConfig& cfg,
                               Rng& aug_rng, Rng& hvg_rng) {
    PreparedSample<S> out;
    out.is_spot = true;
    out.crops = make_crops(sample.tile, cfg.crops, cfg.augment, aug_rng);
    out.expression = sample.expression.template cast<S>();
    out.gene_set = select_genes_stochastic(info.measured, info.hvg, cfg.p_hvg, hvg_rng);
    return out;
}

template <typename S>
PreparedSample<S> prepare_xenium(const XeniumSample& sample, Index g_xen, const TrainConfig& cfg,
                                 Rng& aug_rng) {
    PreparedSample<S> out;
    out.is_spot = false;
    out.crops = make_crops(sample.tile, cfg.crops, cfg.augment, aug_rng);
    out.panel = sample.panel;
    for (int c = 0; c < out.crops.n_global; ++c) {
        auto pts = apply_geometry_to_points(sample.transcripts, out.crops.geoms[static_cast<size_t>(c)]);
        PatchTargetGrid grid =
            bin_transcripts_to_patches(pts, cfg.crops.global_size, cfg.backbone.patch_size, g_xen);
        out.xen_counts.push_back(grid.counts.template cast<S>());
        out.xen_positive.push_back(grid.positive);
    }
    return out;
}

template <typename S>
struct BatchResult {
    LossRecord rec;
    MatX<S> teacher_logits;  // (2B, K) rows for the center update
};

// Forward (and optionally backward) over a prepared batch. The DINO and
// anchor terms average over all samples; Eq.3 averages over spot samples
// and Eq.4 over xenium samples, each on the two global crops.
template <typename S>
BatchResult<S> compute_batch(StudentModel<S>& student, TeacherModel<S>& teacher, Backbone<S>& frozen,
                             const DinoState<S>& dino_state, const std::vector<PreparedSample<S>>& batch,
                             const TrainConfig& cfg, const LossScales& scales, bool with_grad) {
    require(!batch.empty(), "empty batch");
    const bool mask_st = cfg.mode == TrainMode::StOnCls || cfg.mode == TrainMode::StOnClsNoDistill;
    const bool st_from_cls = mask_st;
    const bool pretrain = cfg.mode == TrainMode::Pretrain;
    const size_t b_total = batch.size();
    size_t b_spot = 0, b_xen = 0;
    for (const auto& s : batch) (s.is_spot ? b_spot : b_xen)++;

    const double inv_b = 1.0 / static_cast<double>(b_total);
    const double inv_spot = b_spot ? 1.0 / static_cast<double>(b_spot) : 0.0;
    const double inv_xen = b_xen ? 1.0 / static_cast<double>(b_xen) : 0.0;
    const int n_global = cfg.crops.n_global;

    BatchResult<S> out;
    out.teacher_logits.resize(static_cast<Index>(2 * b_total), cfg.dino_head.n_prototypes);

    // cfg.tau_teacher is already the scheduled value (train_step applies
    // the optional warmup before calling in).
    DinoState<S> state_now = dino_state;
    state_now.tau_teacher = cfg.tau_teacher;

    for (size_t si = 0; si < b_total; ++si) {
        const PreparedSample<S>& ps = batch[si];
        const size_t n_crops = ps.crops.crops.size();

        // Student forwards every crop; caches only when gradients are needed.
        std::vector<BackboneCache<S>> caches(with_grad ? n_crops : 0);
        std::vector<ForwardOutput<S>> s_out(n_crops);
        for (size_t c = 0; c < n_crops; ++c)
            s_out[c] = student.backbone.forward(ps.crops.crops[c], mask_st,
                                                with_grad ? &caches[c] : nullptr);

        // Teacher sees global views only; frozen anchors every view.
        std::vector<VecX<S>> teacher_cls(static_cast<size_t>(n_global));
        for (int c = 0; c < n_global; ++c)
            teacher_cls[static_cast<size_t>(c)] =
                teacher.backbone.forward(ps.crops.crops[static_cast<size_t>(c)], false, nullptr).z_cls;

        MatX<S> student_cls_mat(static_cast<Index>(n_crops), cfg.backbone.embed_dim);
        for (size_t c = 0; c < n_crops; ++c) student_cls_mat.row(static_cast<Index>(c)) = s_out[c].z_cls.transpose();

        DinoHeadCache<S> s_head_cache;
        MatX<S> s_logits = student.dino_head.forward(student_cls_mat, s_head_cache);

        MatX<S> t_cls_mat(n_global, cfg.backbone.embed_dim);
        for (int c = 0; c < n_global; ++c) t_cls_mat.row(c) = teacher_cls[static_cast<size_t>(c)].transpose();
        DinoHeadCache<S> t_head_cache;
        MatX<S> t_logits = teacher.dino_head.forward(t_cls_mat, t_head_cache);
        out.teacher_logits.middleRows(static_cast<Index>(2 * si), 2) = t_logits;

        std::vector<VecX<S>> t_logit_vecs{t_logits.row(0).transpose(), t_logits.row(1).transpose()};
        std::vector<VecX<S>> s_logit_vecs(n_crops);
        for (size_t c = 0; c < n_crops; ++c) s_logit_vecs[c] = s_logits.row(static_cast<Index>(c)).transpose();

        auto dino = dino_loss(t_logit_vecs, s_logit_vecs, state_now, with_grad);
        out.rec.l_dino += static_cast<double>(dino.value) * inv_b;

        // Gradient at the student CLS rows, assembled across objectives.
        MatX<S> d_cls = MatX<S>::Zero(static_cast<Index>(n_crops), cfg.backbone.embed_dim);
        if (with_grad && scales.dino != 0.0) {
            MatX<S> d_logits(static_cast<Index>(n_crops), s_logits.cols());
            for (size_t c = 0; c < n_crops; ++c)
                d_logits.row(static_cast<Index>(c)) =
                    dino.d_student_logits[c].transpose() * static_cast<S>(scales.dino * inv_b);
            d_cls += student.dino_head.backward(s_head_cache, d_logits);
        }

        if (!pretrain) {
            std::vector<VecX<S>> frozen_cls(n_crops), student_cls(n_crops);
            for (size_t c = 0; c < n_crops; ++c) {
                frozen_cls[c] = frozen.forward(ps.crops.crops[c], false, nullptr).z_cls;
                student_cls[c] = s_out[c].z_cls;
            }
            auto dist = distill_loss(student_cls, frozen_cls, with_grad);
            out.rec.l_distill += static_cast<double>(dist.value) * inv_b;
            if (with_grad && scales.distill != 0.0)
                for (size_t c = 0; c < n_crops; ++c)
                    d_cls.row(static_cast<Index>(c)) +=
                        dist.d_student[c].transpose() * static_cast<S>(scales.distill * inv_b);
        }

        // Spot regression on the global views.
        MatX<S> d_st_input;  // (n_global, D), routed to z_st or z_cls
        if (!pretrain && ps.is_spot) {
            MatX<S> st_in(n_global, cfg.backbone.embed_dim);
            for (int c = 0; c < n_global; ++c)
                st_in.row(c) = (st_from_cls ? s_out[static_cast<size_t>(c)].z_cls
                                            : s_out[static_cast<size_t>(c)].z_st)
                                   .transpose();
            nn::MlpCache<S> st_cache;
            MatX<S> pred = student.st_head.forward(st_in, st_cache);
            MatX<S> d_pred = MatX<S>::Zero(pred.rows(), pred.cols());
            const bool grad_here = with_grad && scales.st != 0.0;
            double sample_loss = 0.0;
            for (int c = 0; c < n_global; ++c) {
                auto res = st_loss<S>(pred.row(c).transpose(), ps.expression, ps.gene_set, grad_here);
                sample_loss += static_cast<double>(res.value) / n_global;
                if (grad_here)
                    d_pred.row(c) = res.d_pred.col(0).transpose() *
                                    static_cast<S>(scales.st * inv_spot / n_global);
            }
            out.rec.l_st += sample_loss * inv_spot;
            if (grad_here) d_st_input = student.st_head.backward(st_cache, d_pred);
        }

        // Patch-level regression on the global views.
        std::vector<MatX<S>> d_pat(static_cast<size_t>(n_global));
        if (!pretrain && !ps.is_spot) {
            const bool grad_here = with_grad && scales.pst != 0.0;
            double sample_loss = 0.0;
            for (int c = 0; c < n_global; ++c) {
                nn::MlpCache<S> pst_cache;
                MatX<S> pred = student.pst_head.forward(s_out[static_cast<size_t>(c)].z_pat, pst_cache);
                auto res = pst_loss<S>(pred, ps.xen_counts[static_cast<size_t>(c)],
                                       ps.xen_positive[static_cast<size_t>(c)], ps.panel, grad_here);
                sample_loss += static_cast<double>(res.value) / n_global;
                if (grad_here) {
                    MatX<S> d_pred = res.d_pred * static_cast<S>(scales.pst * inv_xen / n_global);
                    d_pat[static_cast<size_t>(c)] = student.pst_head.backward(pst_cache, d_pred);
                }
            }
            out.rec.l_pst += sample_loss * inv_xen;
        }

        if (!with_grad) continue;

        for (size_t c = 0; c < n_crops; ++c) {
            const Index t_count = caches[c].t_count;
            MatX<S> d_tokens = MatX<S>::Zero(t_count, cfg.backbone.embed_dim);
            d_tokens.row(0) = d_cls.row(static_cast<Index>(c));
            if (d_st_input.size() > 0 && static_cast<int>(c) < n_global) {
                if (st_from_cls)
                    d_tokens.row(0) += d_st_input.row(static_cast<Index>(c));
                else
                    d_tokens.row(1) += d_st_input.row(static_cast<Index>(c));
            }
            if (static_cast<int>(c) < n_global && !d_pat.empty() && d_pat[c].size() > 0)
                d_tokens.bottomRows(d_pat[c].rows()) += d_pat[c];
            student.backbone.backward(caches[c], d_tokens);
        }
    }

    out.rec.total = total_loss(out.rec.l_dino, out.rec.l_distill, out.rec.l_st, out.rec.l_pst, cfg.weights);
    return out;
}

template <typename S>
std::vector<PreparedSample<S>> prepare_batch(const LoadedDataset& data, const TrainConfig& cfg,
                                             int64_t step) {
    Rng batch_rng = Rng::stream(cfg.seed, "batch", static_cast<uint64_t>(step));
    const bool use_xenium = cfg.mode == TrainMode::Mint || cfg.mode == TrainMode::StOnCls ||
                            cfg.mode == TrainMode::StOnClsNoDistill;
    auto picks = build_batch(data.spots.size(), use_xenium ? data.xeniums.size() : 0,
                             cfg.xenium_oversample, cfg.batch_size, batch_rng);
    std::vector<PreparedSample<S>> out;
    out.reserve(picks.size());
    for (size_t slot = 0; slot < picks.size(); ++slot) {
        Rng aug_rng = Rng::stream(cfg.seed, "aug", static_cast<uint64_t>(step), slot);
        Rng hvg_rng = Rng::stream(cfg.seed, "hvg", static_cast<uint64_t>(step), slot);
        if (picks[slot].first) {
            const SpotSample& s = data.spots[picks[slot].second];
            out.push_back(prepare_spot<S>(s, data.slide_info.at(s.slide_id), cfg, aug_rng, hvg_rng));
        } else {
            const XeniumSample& s = data.xeniums[picks[slot].second];
            out.push_back(prepare_xenium<S>(s, data.vocab.xenium_genes.size(), cfg, aug_rng));
        }
    }
    return out;
}

template <typename S>
LossScales train_scales(const TrainConfig& cfg) {
    LossScales s;
    s.dino = 1.0;
    if (cfg.mode == TrainMode::Pretrain) return s;
    s.distill = cfg.mode == TrainMode::StOnClsNoDistill ? 0.0 : cfg.weights.distill;
    s.st = cfg.weights.st;
    s.pst = cfg.weights.pst;
    return s;
}

// One optimization step: forward/backward, AdamW on the student, EMA to
// the teacher, center update. The frozen anchor is never written.
template <typename S>
LossRecord train_step(TrainState<S>& state, const LoadedDataset& data) {
    TrainConfig cfg = state.cfg;
    if (cfg.mode == TrainMode::StOnClsNoDistill) cfg.weights.distill = 0.0;
    cfg.tau_teacher = state.cfg.tau_teacher_at(state.step);

    auto batch = prepare_batch<S>(data, cfg, state.step);
    state.student.zero_grad();
    auto result = compute_batch(state.student, state.teacher, state.frozen, state.dino_state, batch, cfg,
                                train_scales<S>(cfg), true);

    const double lr = cosine_lr(state.step, cfg.iterations, cfg.lr, cfg.warmup_frac, cfg.min_lr_frac);
    auto params = state.student.params();
    state.optim.step(params, lr);

    const double m = ema_momentum(state.step, cfg.iterations, cfg.ema_base);
    auto t_params = state.teacher_params();
    auto s_params = state.student_ema_source();
    ema_update<S>(t_params, s_params, m);

    state.dino_state.center =
        update_center(state.dino_state.center, result.teacher_logits, cfg.center_momentum);

    ++state.step;
    result.rec.lr = lr;
    result.rec.ema_m = m;
    result.rec.step = state.step;
    return result.rec;
}

// ---- checkpointing ------------------------------------------------------

template <typename S>
void put_params(ArrayArchive& a, const std::string& prefix, nn::ParamList<S>& params) {
    for (auto* p : params) {
        if constexpr (std::is_same_v<S, double>)
            a.put_f64(prefix + "/" + p->name, p->v);
        else
            a.put_f32(prefix + "/" + p->name, p->v.template cast<float>());
    }
}

template <typename S>
void get_params(const ArrayArchive& a, const std::string& prefix, nn::ParamList<S>& params) {
    for (auto* p : params) {
        if constexpr (std::is_same_v<S, double>)
            p->v = a.get_f64(prefix + "/" + p->name);
        else
            p->v = a.get_f32(prefix + "/" + p->name).template cast<S>();
        p->g = MatX<S>::Zero(p->v.rows(), p->v.cols());
    }
}

template <typename S>
void save_checkpoint(TrainState<S>& state, const std::string& path) {
    ArrayArchive a;
    std::string cfg_json = train_config_to_json(state.cfg);
    a.put_text("meta/config", cfg_json);
    a.put_text("meta/config_hash", to_hex(fnv1a64(cfg_json)));
    a.put_i64("meta/step", {state.step});
    a.put_i64("meta/adam_t", {state.optim.t});
    a.put_i64("meta/g_spot", {state.student.st_head.dim_out});
    a.put_i64("meta/g_xenium", {state.student.pst_head.dim_out});
    a.put_vec_f64("dino/center", state.dino_state.center.template cast<double>());

    auto sp = state.student.params();
    put_params(a, "student", sp);
    auto tp = state.teacher.params();
    put_params(a, "teacher", tp);
    nn::ParamList<S> fp;
    state.frozen.collect(fp);
    put_params(a, "frozen", fp);

    for (size_t i = 0; i < sp.size(); ++i) {
        if constexpr (std::is_same_v<S, double>) {
            a.put_f64("optim/m/" + sp[i]->name, state.optim.m[i]);
            a.put_f64("optim/v/" + sp[i]->name, state.optim.v[i]);
        } else {
            a.put_f32("optim/m/" + sp[i]->name, state.optim.m[i].template cast<float>());
            a.put_f32("optim/v/" + sp[i]->name, state.optim.v[i].template cast<float>());
        }
    }
    a.save(path);
}

template <typename S>
TrainState<S> load_checkpoint(const std::string& path) {
    ArrayArchive a = ArrayArchive::load(path);
    TrainConfig cfg = train_config_from_json(a.get_text("meta/config"));

    Backbone<S> base;
    base.setup(cfg.backbone, cfg.seed);
    TrainState<S> state = init_train(base, cfg);
    bind_vocab(state, static_cast<Index>(a.get_i64("meta/g_spot").at(0)),
               static_cast<Index>(a.get_i64("meta/g_xenium").at(0)));

    state.step = a.get_i64("meta/step").at(0);
    state.optim.t = a.get_i64("meta/adam_t").at(0);
    state.dino_state.center = a.get_vec_f64("dino/center").template cast<S>();

    auto sp = state.student.params();
    get_params(a, "student", sp);
    auto tp = state.teacher.params();
    get_params(a, "teacher", tp);
    nn::ParamList<S> fp;
    state.frozen.collect(fp);
    get_params(a, "frozen", fp);

    for (size_t i = 0; i < sp.size(); ++i) {
        if constexpr (std::is_same_v<S, double>) {
            state.optim.m[i] = a.get_f64("optim/m/" + sp[i]->name);
            state.optim.v[i] = a.get_f64("optim/v/" + sp[i]->name);
        } else {
            state.optim.m[i] = a.get_f32("optim/m/" + sp[i]->name).template cast<S>();
            state.optim.v[i] = a.get_f32("optim/v/" + sp[i]->name).template cast<S>();
        }
    }
    return state;
}

}  // namespace mint
