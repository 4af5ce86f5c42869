// Acceptance suite: runs every acceptance criterion at its stated
// tolerance and prints one pass/fail line per criterion. Exits nonzero if
// any criterion fails. The mint CLI path may be passed as argv[1]
// (required for the reproducibility criterion).

#include "mint/config.hpp"
#include "mint/evalpipe.hpp"
#include "mint/gradcheck.hpp"
#include "mint/synthgen.hpp"
#include "mint/trainer.hpp"
#include "oracles.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace mint;

namespace {

std::string g_cli_path;

struct CriterionResult {
    int id;
    std::string name;
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

void progress(const std::string& msg) { std::cerr << "[acceptance] " << msg << std::endl; }

// ---- criterion 1: gradient fidelity --------------------------------------

CriterionResult criterion_gradcheck() {
    CriterionResult r{1, "gradient fidelity (finite differences, <1e-4, <60s)"};
    auto t0 = std::chrono::steady_clock::now();
    GradcheckReport report = run_gradcheck(0);
    double elapsed = seconds_since(t0);
    bool all_ok = true;
    std::ostringstream detail;
    for (const auto& row : report.rows) {
        detail << row.loss << "=" << row.max_rel_err << " ";
        if (!(row.max_rel_err < 1e-4)) all_ok = false;
    }
    detail << "linearity=" << report.linearity_err << " time=" << fmt(elapsed) << "s";
    r.pass = all_ok && report.linearity_err < 1e-8 && elapsed < 60.0;
    r.detail = detail.str();
    return r;
}

// ---- criterion 2: masking exactness ---------------------------------------

CriterionResult criterion_masking() {
    CriterionResult r{2, "masking exactness (zero change, zero gradient)"};
    Rng rng(2);
    bool ok = true;

    for (int rep = 0; rep < 10; ++rep) {
        VecX<double> pred(8), target(8);
        for (Index g = 0; g < 8; ++g) {
            pred[g] = rng.uniform(-2.0, 2.0);
            target[g] = rng.uniform(0.0, 2.0);
        }
        std::vector<Index> gene_set{0, 3, 5};
        auto base = st_loss(pred, target, gene_set);
        for (Index g : {Index(1), Index(2), Index(4), Index(6), Index(7)}) {
            VecX<double> p2 = pred;
            p2[g] += rng.uniform(-10.0, 10.0);
            // bitwise-equal loss and exactly zero gradient
            if (st_loss(p2, target, gene_set, false).value != base.value) ok = false;
            if (base.d_pred(g, 0) != 0.0) ok = false;
        }

        MatX<double> gp(4, 6), gt(4, 6);
        for (Index i = 0; i < gp.size(); ++i) {
            gp(i / 6, i % 6) = rng.uniform(-1.0, 1.0);
            gt(i / 6, i % 6) = rng.uniform(0.0, 2.0);
        }
        std::vector<uint8_t> pos{1, 0, 1, 0}, panel{1, 1, 0, 1, 0, 1};
        auto pbase = pst_loss(gp, gt, pos, panel);
        MatX<double> gp2 = gp;
        gp2(1, 0) += 5.0;  // negative patch
        gp2(0, 2) += 5.0;  // gene outside the panel
        gp2(3, 4) += 5.0;  // both
        if (pst_loss(gp2, gt, pos, panel, false).value != pbase.value) ok = false;
        if (pbase.d_pred(1, 0) != 0.0 || pbase.d_pred(0, 2) != 0.0 || pbase.d_pred(3, 4) != 0.0) ok = false;

        // all-negative grid: zero loss and identically zero gradient
        auto empty = pst_loss(gp, gt, {0, 0, 0, 0}, panel);
        if (empty.value != 0.0 || empty.d_pred.cwiseAbs().maxCoeff() != 0.0) ok = false;
    }
    r.pass = ok;
    r.detail = ok ? "all perturbations outside the masks changed nothing" : "mask leakage detected";
    return r;
}

// ---- criterion 3: topology invariants over a 200-step run ------------------

LoadedDataset memory_dataset(const synth::SynthConfig& sc, Index n_spots, Index n_xen, Index hvg_k) {
    auto spot_slide = synth::generate_slide(sc, n_spots, Modality::Spot, 0);
    auto xen_slide = n_xen > 0 ? synth::generate_slide(sc, n_xen, Modality::Xenium, 1) : synth::GeneratedSlide{};

    LoadedDataset data;
    data.tile_size = sc.tile_size;
    for (Index g = 0; g < sc.genes; ++g) data.vocab.genes.names.push_back("g" + std::to_string(g));
    for (Index j = 0; j < sc.xenium_genes; ++j)
        data.vocab.xenium_genes.names.push_back("x" + std::to_string(j));
    data.vocab.xenium_to_spot = sc.xenium_to_spot;
    data.spots = std::move(spot_slide.spots);
    data.xeniums = std::move(xen_slide.xeniums);

    std::map<std::string, std::vector<const SpotSample*>> by_slide;
    for (const auto& s : data.spots) by_slide[s.slide_id].push_back(&s);
    for (auto& [slide, samples] : by_slide) {
        SlideInfo info;
        for (Index g = 0; g < sc.genes; ++g) info.measured.push_back(g);
        Mat expr(static_cast<Index>(samples.size()), sc.genes);
        for (size_t i = 0; i < samples.size(); ++i)
            expr.row(static_cast<Index>(i)) = samples[i]->expression.transpose();
        info.hvg = compute_hvg(expr, std::vector<uint8_t>(static_cast<size_t>(sc.genes), 1),
                               std::min<Index>(hvg_k, sc.genes));
        data.slide_info[slide] = info;
    }
    return data;
}

CriterionResult criterion_topology() {
    CriterionResult r{3, "topology invariants over a 200-step run"};
    TrainConfig cfg;
    cfg.seed = 11;
    cfg.iterations = 200;
    cfg.batch_size = 2;
    cfg.lr = 1e-3;
    cfg.backbone.image_size = 32;
    cfg.backbone.patch_size = 16;
    cfg.backbone.embed_dim = 16;
    cfg.backbone.depth = 1;
    cfg.backbone.n_heads = 2;
    cfg.backbone.mlp_ratio = 2.0;
    cfg.dino_head.n_prototypes = 32;
    cfg.dino_head.hidden = 32;
    cfg.dino_head.bottleneck = 16;
    cfg.crops.global_size = 32;
    cfg.crops.n_local = 2;
    cfg.crops.local_size = 16;
    cfg.hvg_k = 8;

    synth::SynthConfig sc = synth::default_config(11);
    sc.tile_size = 32;
    sc.transcript_rate = 120.0;
    LoadedDataset data = memory_dataset(sc, 16, 4, cfg.hvg_k);

    Backbone<float> base;
    base.setup(cfg.backbone, cfg.seed);
    TrainState<float> st = init_train(base, cfg);
    bind_vocab(st, sc.genes, sc.xenium_genes);

    // (d) at step 0 with the ST token masked, the student equals the anchor
    Rng crop_rng = Rng::stream(5, "c3");
    CropSet crops = make_crops(data.spots[0].tile, cfg.crops, cfg.augment, crop_rng);
    std::vector<VecX<float>> scls, fcls;
    for (const auto& c : crops.crops) {
        scls.push_back(st.student.backbone.forward(c, true, nullptr).z_cls);
        fcls.push_back(st.frozen.forward(c, false, nullptr).z_cls);
    }
    double init_distill = distill_loss<float>(scls, fcls, false).value;
    bool init_ok = init_distill < 1e-6;

    nn::ParamList<float> fp;
    st.frozen.collect(fp);
    std::vector<MatX<float>> frozen_before;
    for (auto* p : fp) frozen_before.push_back(p->v);

    bool interval_ok = true;
    for (int step = 0; step < 200; ++step) {
        std::vector<MatX<float>> teacher_prev;
        for (auto* p : st.teacher_params()) teacher_prev.push_back(p->v);
        train_step(st, data);
        auto tnow = st.teacher_params();
        auto snow = st.student_ema_source();
        for (size_t p = 0; p < tnow.size() && interval_ok; ++p) {
            const auto& prev = teacher_prev[p];
            const auto& tv = tnow[p]->v;
            const auto& sv = snow[p]->v;
            for (Index i = 0; i < tv.size() && interval_ok; ++i) {
                float lo = std::min(prev(i), sv(i));
                float hi = std::max(prev(i), sv(i));
                if (tv(i) < lo || tv(i) > hi) interval_ok = false;
            }
        }
    }

    bool frozen_ok = true;
    nn::ParamList<float> fp2;
    st.frozen.collect(fp2);
    for (size_t i = 0; i < fp2.size(); ++i)
        if (frozen_before[i] != fp2[i]->v) frozen_ok = false;

    // (c) m = 0 copies the student into the teacher bitwise
    auto tl = st.teacher_params();
    auto sl = st.student_ema_source();
    ema_update<float>(tl, sl, 0.0);
    bool copy_ok = true;
    for (size_t i = 0; i < tl.size(); ++i)
        if (tl[i]->v != sl[i]->v) copy_ok = false;

    r.pass = init_ok && interval_ok && frozen_ok && copy_ok;
    std::ostringstream d;
    d << "init_distill=" << init_distill << " frozen_bitwise=" << frozen_ok
      << " teacher_interval=" << interval_ok << " m0_copy=" << copy_ok;
    r.detail = d.str();
    return r;
}

// ---- criterion 4: stochastic HVG and oversampling rates --------------------

CriterionResult criterion_stochastic() {
    CriterionResult r{4, "stochastic HVG branch rate and xenium oversampling"};
    std::vector<Index> measured{0, 1, 2, 3, 4, 5, 6, 7};
    std::vector<Index> hvg{1, 4};

    Rng rng = Rng::stream(4, "hvg-rate");
    int hvg_taken = 0;
    for (int i = 0; i < 10000; ++i)
        if (select_genes_stochastic(measured, hvg, 0.5, rng) == hvg) ++hvg_taken;
    bool rate_ok = std::abs(hvg_taken - 5000) <= 150;

    bool exact_ok = true;
    for (int i = 0; i < 1000; ++i) {
        if (select_genes_stochastic(measured, hvg, 0.0, rng) != measured) exact_ok = false;
        if (select_genes_stochastic(measured, hvg, 1.0, rng) != hvg) exact_ok = false;
    }

    Rng batch_rng = Rng::stream(4, "batch-rate");
    int64_t xen = 0, total = 0;
    while (total < 100000) {
        for (auto& [is_spot, idx] : build_batch(10, 2, 5, 50, batch_rng)) {
            if (!is_spot) ++xen;
            ++total;
        }
    }
    double frac = static_cast<double>(xen) / static_cast<double>(total);
    bool frac_ok = frac >= 0.49 && frac <= 0.51;

    r.pass = rate_ok && exact_ok && frac_ok;
    r.detail = "hvg_branch=" + std::to_string(hvg_taken) + "/10000, xenium_frac=" + fmt(frac);
    return r;
}

// ---- criterion 5: oracle equivalence ---------------------------------------

CriterionResult criterion_oracles() {
    CriterionResult r{5, "oracle equivalence (st/pst loss, binning, PCA, ridge)"};
    Rng rng(5);
    double worst = 0.0;
    auto track = [&](double rel) { worst = std::max(worst, rel); };

    for (int rep = 0; rep < 20; ++rep) {
        // st_loss
        VecX<double> pred(24), target(24);
        for (Index g = 0; g < 24; ++g) {
            pred[g] = rng.uniform(-2.0, 2.0);
            target[g] = rng.uniform(-2.0, 2.0);
        }
        std::vector<Index> set;
        for (Index g = 0; g < 24; ++g)
            if (rng.bernoulli(0.5)) set.push_back(g);
        if (set.empty()) set.push_back(3);
        double got = st_loss(pred, target, set, false).value;
        double want = oracle::st_loss_bruteforce(pred, target, set);
        track(std::abs(got - want) / std::max(1e-12, std::abs(want)));

        // pst_loss
        MatX<double> gp(9, 5), gt(9, 5);
        for (Index i = 0; i < gp.size(); ++i) {
            gp(i / 5, i % 5) = rng.uniform(-1.0, 1.0);
            gt(i / 5, i % 5) = rng.uniform(0.0, 2.0);
        }
        std::vector<uint8_t> pos(9), panel(5);
        for (auto& p : pos) p = rng.bernoulli(0.6) ? 1 : 0;
        for (auto& p : panel) p = rng.bernoulli(0.7) ? 1 : 0;
        panel[2] = 1;
        double pgot = pst_loss(gp, gt, pos, panel, false).value;
        double pwant = oracle::pst_loss_bruteforce(gp, gt, pos, panel);
        track(std::abs(pgot - pwant) / std::max(1e-12, std::max(std::abs(pwant), 1e-9)));

        // binning
        std::vector<Transcript> ts;
        for (int i = 0; i < 120; ++i)
            ts.push_back({rng.uniform(0.0, 48.0), rng.uniform(0.0, 48.0),
                          static_cast<uint32_t>(rng.uniform_index(5))});
        PatchTargetGrid grid = bin_transcripts_to_patches(ts, 48, 16, 5);
        Mat raw = oracle::bin_bruteforce(ts, 48, 16, 5, nullptr);
        track((grid.counts - raw.array().log1p().matrix()).cwiseAbs().maxCoeff());

        // PCA explained variance vs covariance eigenvalues
        Mat x(18, 6);
        for (Index i = 0; i < x.size(); ++i) x(i / 6, i % 6) = rng.uniform(-2.0, 2.0);
        auto [scores, model] = eval::pca_fit_transform(x, 3);
        Vec eig = oracle::covariance_eigenvalues(x);
        for (Index c = 0; c < 3; ++c) {
            double explained = model.singular_values[c] * model.singular_values[c] / 17.0;
            track(std::abs(explained - eig[c]) / std::max(1e-12, eig[c]));
        }

        // ridge vs normal equations
        Mat xtr(25, 4), ytr(25, 2), xte(6, 4);
        for (Index i = 0; i < xtr.size(); ++i) xtr(i / 4, i % 4) = rng.uniform(-1.0, 1.0);
        for (Index i = 0; i < ytr.size(); ++i) ytr(i / 2, i % 2) = rng.uniform(-1.0, 1.0);
        for (Index i = 0; i < xte.size(); ++i) xte(i / 4, i % 4) = rng.uniform(-1.0, 1.0);
        double alpha = rng.uniform(0.05, 5.0);
        Mat rgot = eval::ridge_fit_predict(xtr, ytr, xte, alpha);
        Mat rwant = oracle::ridge_normal_equations(xtr, ytr, xte, alpha);
        track((rgot - rwant).cwiseAbs().maxCoeff() / std::max(1e-12, rwant.cwiseAbs().maxCoeff()));
    }
    r.pass = worst < 1e-8;
    r.detail = "worst relative error " + std::to_string(worst);
    return r;
}

// ---- criteria 6 & 7: end-to-end synthetic runs ------------------------------

struct SeedOutcome {
    double frozen_cls_pearson = 0.0;
    double mint_cls = 0.0, mint_st = 0.0, mint_sum = 0.0, mint_concat = 0.0;
    double frozen_probe = 0.0, mint_cls_probe = 0.0;
    double nodistill_probe = 0.0, distill_probe = 0.0;
};

struct E2EFixture {
    std::vector<SeedOutcome> seeds;
    double c6_seconds = 0.0;
};

TrainConfig e2e_config(TrainMode mode, uint64_t seed, int64_t iterations) {
    TrainConfig cfg;
    cfg.mode = mode;
    cfg.seed = seed;
    cfg.iterations = iterations;
    cfg.lr = 1e-3;
    cfg.batch_size = 6;
    cfg.backbone.image_size = 64;
    cfg.backbone.patch_size = 16;
    cfg.backbone.embed_dim = 64;
    cfg.backbone.depth = 4;
    cfg.backbone.n_heads = 4;
    cfg.dino_head.n_prototypes = 1024;
    cfg.dino_head.hidden = 256;
    cfg.dino_head.bottleneck = 64;
    cfg.crops.global_size = 64;
    cfg.crops.n_local = 4;
    cfg.crops.local_size = 32;
    cfg.hvg_k = 16;
    cfg.checkpoint_every = 0;
    return cfg;
}

constexpr int64_t kPretrainSteps = 300;
constexpr int64_t kRunSteps = 900;

Mat features_matrix(const std::vector<eval::FeatureRecord>& recs, eval::Variant v) {
    Mat out(static_cast<Index>(recs.size()), eval::representation_variant(recs.front(), v).size());
    for (size_t i = 0; i < recs.size(); ++i)
        out.row(static_cast<Index>(i)) = eval::representation_variant(recs[i], v).transpose();
    return out;
}

const E2EFixture& e2e_fixture() {
    static E2EFixture fixture = [] {
        E2EFixture fx;
        progress("generating the synthetic corpus (1000 spots + 100 xenium + 400 eval)");
        synth::SynthConfig sc = synth::default_config(1);
        LoadedDataset train_data = memory_dataset(sc, 1000, 100, 16);

        synth::SynthConfig eval_sc = sc;
        auto eval_slide_a = synth::generate_slide(eval_sc, 200, Modality::Spot, 2000);
        auto eval_slide_b = synth::generate_slide(eval_sc, 200, Modality::Spot, 2001);
        std::vector<SpotSample> eval_spots = std::move(eval_slide_a.spots);
        for (auto& s : eval_slide_b.spots) eval_spots.push_back(std::move(s));
        std::vector<const SpotSample*> eval_ptrs;
        for (const auto& s : eval_spots) eval_ptrs.push_back(&s);

        Mat eval_expression(static_cast<Index>(eval_spots.size()), sc.genes);
        std::vector<int> eval_labels(eval_spots.size());
        {
            std::vector<const SpotSample*> ordered = eval_ptrs;
            std::sort(ordered.begin(), ordered.end(),
                      [](const SpotSample* a, const SpotSample* b) { return a->id < b->id; });
            for (size_t i = 0; i < ordered.size(); ++i) {
                eval_expression.row(static_cast<Index>(i)) = ordered[i]->expression.transpose();
                eval_labels[i] = ordered[i]->truth_dominant_type;
            }
        }

        eval::BenchmarkProtocol bench;
        bench.n_pca = 64;
        bench.n_eval_hvg = 20;
        eval::ProbeProtocol probe;

        auto t_c6 = std::chrono::steady_clock::now();
        double ablation_seconds = 0.0;

        for (uint64_t seed = 0; seed < 3; ++seed) {
            SeedOutcome outcome;

            progress("seed " + std::to_string(seed) + ": DINO-only pretrain (" +
                     std::to_string(kPretrainSteps) + " steps)");
            TrainConfig pre_cfg = e2e_config(TrainMode::Pretrain, 100 + seed, kPretrainSteps);
            Backbone<float> base;
            base.setup(pre_cfg.backbone, pre_cfg.seed);
            TrainState<float> pre = init_train(base, pre_cfg);
            bind_vocab(pre, sc.genes, sc.xenium_genes);
            for (int64_t i = 0; i < pre_cfg.iterations; ++i) train_step(pre, train_data);
            Backbone<float> anchor = pre.student.backbone;

            auto run_mode = [&](TrainMode mode) {
                TrainConfig cfg = e2e_config(mode, seed, kRunSteps);
                TrainState<float> st = init_train(anchor, cfg);
                bind_vocab(st, sc.genes, sc.xenium_genes);
                for (int64_t i = 0; i < cfg.iterations; ++i) train_step(st, train_data);
                return st;
            };

            progress("seed " + std::to_string(seed) + ": MINT run (" + std::to_string(kRunSteps) +
                     " steps)");
            TrainState<float> mint_state = run_mode(TrainMode::Mint);

            auto mint_recs = eval::extract_features(mint_state.student.backbone, eval_ptrs, false);
            auto frozen_recs = eval::extract_features(mint_state.frozen, eval_ptrs, false);

            Mat f_cls = features_matrix(mint_recs, eval::Variant::Cls);
            Mat f_st = features_matrix(mint_recs, eval::Variant::St);
            Mat f_sum = features_matrix(mint_recs, eval::Variant::Sum);
            Mat f_cat = features_matrix(mint_recs, eval::Variant::Concat);
            Mat f_frozen = features_matrix(frozen_recs, eval::Variant::Cls);

            outcome.mint_cls = eval::benchmark_expression(f_cls, eval_expression, bench).mean_pearson;
            outcome.mint_st = eval::benchmark_expression(f_st, eval_expression, bench).mean_pearson;
            outcome.mint_sum = eval::benchmark_expression(f_sum, eval_expression, bench).mean_pearson;
            outcome.mint_concat = eval::benchmark_expression(f_cat, eval_expression, bench).mean_pearson;
            outcome.frozen_cls_pearson =
                eval::benchmark_expression(f_frozen, eval_expression, bench).mean_pearson;
            outcome.mint_cls_probe = eval::morphology_probe(f_cls, eval_labels, probe);
            outcome.frozen_probe = eval::morphology_probe(f_frozen, eval_labels, probe);

            progress("seed " + std::to_string(seed) + ": pearson frozen=" +
                     fmt(outcome.frozen_cls_pearson) + " cls=" + fmt(outcome.mint_cls) + " st=" +
                     fmt(outcome.mint_st) + " sum=" + fmt(outcome.mint_sum) + " concat=" +
                     fmt(outcome.mint_concat));

            auto t_ab = std::chrono::steady_clock::now();
            progress("seed " + std::to_string(seed) + ": L_ST-on-CLS ablations");
            TrainState<float> ab_distill = run_mode(TrainMode::StOnCls);
            TrainState<float> ab_nodistill = run_mode(TrainMode::StOnClsNoDistill);
            auto distill_recs = eval::extract_features(ab_distill.student.backbone, eval_ptrs, true);
            auto nodistill_recs = eval::extract_features(ab_nodistill.student.backbone, eval_ptrs, true);
            outcome.distill_probe = eval::morphology_probe(
                features_matrix(distill_recs, eval::Variant::Cls), eval_labels, probe);
            outcome.nodistill_probe = eval::morphology_probe(
                features_matrix(nodistill_recs, eval::Variant::Cls), eval_labels, probe);
            ablation_seconds += seconds_since(t_ab);

            progress("seed " + std::to_string(seed) + ": probe frozen=" + fmt(outcome.frozen_probe) +
                     " mint_cls=" + fmt(outcome.mint_cls_probe) + " no_distill=" +
                     fmt(outcome.nodistill_probe) + " distill=" + fmt(outcome.distill_probe));

            fx.seeds.push_back(outcome);
        }
        fx.c6_seconds = seconds_since(t_c6) - ablation_seconds;
        return fx;
    }();
    return fixture;
}

CriterionResult criterion_synthetic_signal() {
    CriterionResult r{6, "end-to-end synthetic signal (ST specialization)"};
    const E2EFixture& fx = e2e_fixture();
    int passing = 0;
    std::ostringstream d;
    for (size_t i = 0; i < fx.seeds.size(); ++i) {
        const SeedOutcome& o = fx.seeds[i];
        bool a = o.mint_st >= o.frozen_cls_pearson + 0.05;
        bool b = o.mint_concat >= std::max(o.mint_cls, o.mint_st) - 0.005;
        bool c = o.mint_sum > o.mint_cls;
        if (a && b && c) ++passing;
        d << "seed" << i << "(a=" << a << ",b=" << b << ",c=" << c << ") ";
    }
    bool time_ok = fx.c6_seconds < 30.0 * 60.0;
    d << "time=" << fmt(fx.c6_seconds) << "s";
    r.pass = passing >= 2 && time_ok;
    r.detail = d.str() + " passing_seeds=" + std::to_string(passing) + "/3";
    return r;
}

CriterionResult criterion_forgetting() {
    CriterionResult r{7, "forgetting ablation (drop, recovery, preservation)"};
    const E2EFixture& fx = e2e_fixture();
    int passing = 0;
    std::ostringstream d;
    for (size_t i = 0; i < fx.seeds.size(); ++i) {
        const SeedOutcome& o = fx.seeds[i];
        double drop = o.frozen_probe - o.nodistill_probe;
        bool forgot = drop >= 0.02;
        bool recovered = o.distill_probe >= o.nodistill_probe + 0.5 * drop;
        bool preserved = o.frozen_probe - o.mint_cls_probe <= 0.01;
        if (forgot && recovered && preserved) ++passing;
        d << "seed" << i << "(drop=" << fmt(drop) << ",rec=" << recovered << ",pres=" << preserved
          << ") ";
    }
    r.pass = passing >= 2;
    r.detail = d.str() + "passing_seeds=" + std::to_string(passing) + "/3";
    return r;
}

// ---- criterion 8: byte-identical artifacts ---------------------------------

int shell(const std::string& cmd) { return std::system((cmd + " >/dev/null 2>&1").c_str()); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

CriterionResult criterion_reproducibility() {
    CriterionResult r{8, "reproducibility: byte-identical checkpoints and reports"};
    if (g_cli_path.empty()) {
        r.pass = false;
        r.detail = "mint CLI path not supplied (argv[1])";
        return r;
    }
    fs::path dir = fs::temp_directory_path() / "mint_acceptance_repro";
    fs::remove_all(dir);
    fs::create_directories(dir);

    std::ofstream(dir / "synth.json") << R"({"schema_version":1,"seed":9,"tile_size":32,
      "transcript_rate":120.0,
      "dataset":{"n_train_spots":24,"n_train_xenium":6,"n_eval_spots":24,
                 "n_spot_slides":2,"n_xenium_slides":1,"n_eval_slides":1}})";
    std::ofstream(dir / "train.json") << R"({"schema_version":1,"iterations":8,"lr":0.0005,
      "batch_size":2,"hvg":{"k":8,"p_hvg":0.5},
      "crops":{"n_global":2,"global_size":32,"n_local":2,"local_size":16},
      "backbone":{"image_size":32,"patch_size":16,"embed_dim":16,"depth":1,"n_heads":2,"mlp_ratio":2.0},
      "dino":{"prototypes":32,"hidden":32,"bottleneck":16},
      "checkpoint_every":0,"mode":"mint","seed":4})";

    bool ok = shell(g_cli_path + " gen-data --config " + (dir / "synth.json").string() + " --out " +
                    (dir / "data").string()) == 0;
    for (const char* run : {"a", "b"}) {
        ok = ok && shell(g_cli_path + " train --config " + (dir / "train.json").string() + " --data " +
                         (dir / "data/train_manifest.json").string() + " --serial --quiet --out " +
                         (dir / run).string()) == 0;
        ok = ok && shell(g_cli_path + " features --ckpt " + (dir / run / "ckpt_final.bin").string() +
                         " --data " + (dir / "data/eval_manifest.json").string() + " --out " +
                         (dir / (std::string("f_") + run + ".bin")).string()) == 0;
        ok = ok && shell(g_cli_path + " eval --features " +
                         (dir / (std::string("f_") + run + ".bin")).string() + " --data " +
                         (dir / "data/eval_manifest.json").string() + " --n-pca 8 --n-eval-hvg 5 --out " +
                         (dir / (std::string("r_") + run + ".json")).string()) == 0;
    }
    bool ckpt_same = ok && slurp(dir / "a/ckpt_final.bin") == slurp(dir / "b/ckpt_final.bin");
    bool report_same = ok && !slurp(dir / "r_a.json").empty() &&
                       slurp(dir / "r_a.json") == slurp(dir / "r_b.json");
    fs::remove_all(dir);
    r.pass = ok && ckpt_same && report_same;
    r.detail = std::string("pipeline_ok=") + (ok ? "1" : "0") + " ckpt_identical=" +
               (ckpt_same ? "1" : "0") + " report_identical=" + (report_same ? "1" : "0");
    return r;
}

// ---- criterion 9: ordering verdicts on the published numbers ---------------

CriterionResult criterion_reference_ordering() {
    CriterionResult r{9, "ordering_report on the reference representation table"};
    eval::OrderingInputs in;
    in.expr_cls = 0.413;
    in.expr_st = 0.428;
    in.expr_sum = 0.431;
    in.expr_concat = 0.440;
    in.probe_cls = 0.828;
    in.probe_st = 0.823;
    in.probe_sum = 0.837;
    in.probe_concat = 0.842;
    in.expr_frozen = 0.415;
    in.probe_frozen = 0.830;
    eval::OrderingVerdicts v = eval::ordering_report(in);
    r.pass = v.all_true();
    std::ostringstream d;
    d << "specialization=" << v.specialization << " sum_beats_cls=" << v.sum_beats_cls
      << " concat_best=" << v.concat_best << " cls_preserved=" << v.cls_preserved;
    r.detail = d.str();
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc >= 2) g_cli_path = argv[1];

    std::vector<CriterionResult> results;
    auto add = [&](CriterionResult (*fn)()) {
        try {
            results.push_back(fn());
        } catch (const std::exception& e) {
            CriterionResult r;
            r.id = static_cast<int>(results.size()) + 1;
            r.name = "criterion raised an exception";
            r.pass = false;
            r.detail = e.what();
            results.push_back(r);
        }
    };

    add(&criterion_gradcheck);
    add(&criterion_masking);
    add(&criterion_topology);
    add(&criterion_stochastic);
    add(&criterion_oracles);
    add(&criterion_synthetic_signal);
    add(&criterion_forgetting);
    add(&criterion_reproducibility);
    add(&criterion_reference_ordering);

    std::sort(results.begin(), results.end(),
              [](const CriterionResult& a, const CriterionResult& b) { return a.id < b.id; });
    bool all = true;
    for (const auto& r : results) {
        std::cout << "[criterion " << r.id << "] " << (r.pass ? "PASS" : "FAIL") << " — " << r.name
                  << " (" << r.detail << ")" << std::endl;
        all = all && r.pass;
    }
    return all ? 0 : 1;
}
