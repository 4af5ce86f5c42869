#include "mint/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace mint {

namespace {

TrainConfig tiny_config(uint64_t seed) {
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.iterations = 10;
    cfg.batch_size = 2;
    cfg.backbone.image_size = 16;
    cfg.backbone.patch_size = 8;
    cfg.backbone.embed_dim = 8;
    cfg.backbone.depth = 1;
    cfg.backbone.n_heads = 2;
    cfg.backbone.mlp_ratio = 2.0;
    cfg.dino_head.n_prototypes = 16;
    cfg.dino_head.hidden = 16;
    cfg.dino_head.bottleneck = 8;
    cfg.crops.n_global = 2;
    cfg.crops.global_size = 16;
    cfg.crops.n_local = 2;
    cfg.crops.local_size = 8;
    cfg.weights = {100.0, 100.0, 100.0};
    cfg.mode = TrainMode::Mint;
    return cfg;
}

Image random_tile(int size, Rng& rng) {
    Image img(size, size, 3);
    for (float& v : img.data) v = static_cast<float>(rng.uniform());
    return img;
}

// Fixed crops, gene sets and binned targets; every FD evaluation reuses
// them so the loss is a pure function of the parameters.
std::vector<PreparedSample<double>> fixed_batch(const TrainConfig& cfg, uint64_t seed) {
    std::vector<PreparedSample<double>> batch;

    Rng aug0 = Rng::stream(seed, "gc-aug", 0);
    PreparedSample<double> spot;
    spot.is_spot = true;
    spot.crops = make_crops(random_tile(cfg.backbone.image_size, aug0), cfg.crops, cfg.augment, aug0);
    Rng expr_rng = Rng::stream(seed, "gc-expr");
    spot.expression = VecX<double>::Zero(4);
    for (Index g = 0; g < 4; ++g) spot.expression[g] = expr_rng.uniform(0.0, 2.0);
    spot.gene_set = {0, 2};  // genes 1 and 3 must see exactly zero gradient
    batch.push_back(std::move(spot));

    Rng aug1 = Rng::stream(seed, "gc-aug", 1);
    XeniumSample xen;
    xen.id = "gc_xen";
    xen.slide_id = "gc";
    xen.tile = random_tile(cfg.backbone.image_size, aug1);
    xen.panel = {1, 1, 0, 1};
    Rng tr_rng = Rng::stream(seed, "gc-transcripts");
    const uint32_t panel_genes[3] = {0, 1, 3};
    for (int i = 0; i < 40; ++i)
        xen.transcripts.push_back({tr_rng.uniform(0.0, cfg.backbone.image_size),
                                   tr_rng.uniform(0.0, cfg.backbone.image_size),
                                   panel_genes[tr_rng.uniform_index(3)]});
    batch.push_back(prepare_xenium<double>(xen, 4, cfg, aug1));
    return batch;
}

struct Setup {
    TrainConfig cfg;
    TrainState<double> state;
    std::vector<PreparedSample<double>> batch;
};

Setup make_setup(uint64_t seed) {
    Setup s{tiny_config(seed), {}, {}};
    Backbone<double> base;
    base.setup(s.cfg.backbone, seed);
    s.state = init_train(base, s.cfg);
    bind_vocab(s.state, 4, 4);
    // A nonzero center exercises the sharpening/centering path.
    Rng center_rng = Rng::stream(seed, "gc-center");
    for (Index k = 0; k < s.state.dino_state.center.size(); ++k)
        s.state.dino_state.center[k] = center_rng.uniform(-0.1, 0.1);
    s.batch = fixed_batch(s.cfg, seed);
    return s;
}

LossRecord eval_losses(Setup& s) {
    return compute_batch(s.state.student, s.state.teacher, s.state.frozen, s.state.dino_state, s.batch,
                         s.cfg, LossScales{}, false)
        .rec;
}

std::vector<Mat> analytic_grads(Setup& s, const LossScales& scales) {
    s.state.student.zero_grad();
    compute_batch(s.state.student, s.state.teacher, s.state.frozen, s.state.dino_state, s.batch, s.cfg,
                  scales, true);
    std::vector<Mat> out;
    for (auto* p : s.state.student.params()) out.push_back(p->g);
    return out;
}

double pick(const LossRecord& r, int which) {
    switch (which) {
        case 0: return r.l_dino;
        case 1: return r.l_distill;
        case 2: return r.l_st;
        case 3: return r.l_pst;
        default: return r.total;
    }
}

}  // namespace

GradcheckReport run_gradcheck(uint64_t seed) {
    Setup s = make_setup(seed);
    const double h = 1e-5;

    const LossScales unit[4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    LossScales combined{1.0, s.cfg.weights.distill, s.cfg.weights.st, s.cfg.weights.pst};

    std::vector<std::vector<Mat>> grads;
    for (const auto& sc : unit) grads.push_back(analytic_grads(s, sc));
    grads.push_back(analytic_grads(s, combined));

    auto params = s.state.student.params();
    GradcheckReport report;
    const char* names[5] = {"dino", "distill", "st", "pst", "total"};
    std::vector<double> max_err(5, 0.0);

    for (size_t pi = 0; pi < params.size(); ++pi) {
        MatX<double>& v = params[pi]->v;
        for (Index j = 0; j < v.cols(); ++j)
            for (Index i = 0; i < v.rows(); ++i) {
                const double orig = v(i, j);
                v(i, j) = orig + h;
                LossRecord plus = eval_losses(s);
                v(i, j) = orig - h;
                LossRecord minus = eval_losses(s);
                v(i, j) = orig;
                for (int w = 0; w < 5; ++w) {
                    double numeric = (pick(plus, w) - pick(minus, w)) / (2.0 * h);
                    double analytic = grads[static_cast<size_t>(w)][pi](i, j);
                    double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-3});
                    max_err[static_cast<size_t>(w)] =
                        std::max(max_err[static_cast<size_t>(w)], std::abs(numeric - analytic) / denom);
                }
            }
    }
    for (int w = 0; w < 5; ++w) report.rows.push_back({names[w], max_err[static_cast<size_t>(w)]});

    // Eq.5 linearity: the combined gradient must equal the weighted sum of
    // the per-loss gradients.
    double num = 0.0, den = 0.0;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        Mat expect = grads[0][pi] + s.cfg.weights.distill * grads[1][pi] + s.cfg.weights.st * grads[2][pi] +
                     s.cfg.weights.pst * grads[3][pi];
        num += (grads[4][pi] - expect).squaredNorm();
        den += expect.squaredNorm();
    }
    report.linearity_err = std::sqrt(num / std::max(den, 1e-30));
    return report;
}

}  // namespace mint
