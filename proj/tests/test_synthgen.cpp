#include <doctest.h>

#include "mint/evalpipe.hpp"
#include "mint/synthgen.hpp"
#include "oracles.hpp"

#include <cmath>
#include <map>

using namespace mint;
using synth::SynthConfig;

namespace {

// Orthogonal signatures: disjoint marker blocks, zero background.
SynthConfig orthogonal_config(uint64_t seed) {
    SynthConfig cfg = synth::default_config(seed);
    cfg.signature_matrix = Mat::Zero(cfg.n_celltypes, cfg.genes);
    for (int t = 0; t < cfg.n_celltypes; ++t)
        for (Index g = 0; g < 12; ++g) cfg.signature_matrix(t, static_cast<Index>(t) * 12 + g) = 6.0;
    for (int t = 0; t < cfg.n_celltypes; ++t)
        for (Index j = 0; j < cfg.xenium_genes; ++j)
            cfg.xenium_signature(t, j) = cfg.signature_matrix(t, cfg.xenium_to_spot[static_cast<size_t>(j)]);
    return cfg;
}

}  // namespace

TEST_CASE("generation is deterministic given the seed") {
    SynthConfig cfg = synth::default_config(3);
    auto a = synth::generate_slide(cfg, 3, Modality::Spot, 0);
    auto b = synth::generate_slide(cfg, 3, Modality::Spot, 0);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(a.spots[i].tile.data == b.spots[i].tile.data);
        CHECK(a.spots[i].expression == b.spots[i].expression);
    }
    auto xa = synth::generate_slide(cfg, 2, Modality::Xenium, 5);
    auto xb = synth::generate_slide(cfg, 2, Modality::Xenium, 5);
    for (size_t i = 0; i < 2; ++i) {
        CHECK(xa.xeniums[i].tile.data == xb.xeniums[i].tile.data);
        REQUIRE(xa.xeniums[i].transcripts.size() == xb.xeniums[i].transcripts.size());
        for (size_t t = 0; t < xa.xeniums[i].transcripts.size(); ++t) {
            CHECK(xa.xeniums[i].transcripts[t].x == xb.xeniums[i].transcripts[t].x);
            CHECK(xa.xeniums[i].transcripts[t].gene == xb.xeniums[i].transcripts[t].gene);
        }
    }
}

TEST_CASE("single cell type degenerates to one region") {
    SynthConfig cfg = synth::default_config(4);
    cfg.n_celltypes = 1;
    cfg.signature_matrix = cfg.signature_matrix.topRows(1).eval();
    cfg.xenium_signature = cfg.xenium_signature.topRows(1).eval();
    cfg.textures.resize(1);
    auto slide = synth::generate_slide(cfg, 2, Modality::Xenium, 0);
    for (const auto& truth : slide.truths) {
        CHECK(truth.mixture_weights.size() == 1);
        CHECK(truth.mixture_weights[0] == doctest::Approx(1.0));
        CHECK(truth.dominant_type == 0);
    }
    for (const auto& x : slide.xeniums)
        for (const auto& t : x.transcripts) CHECK(t.gene < 16);
}

TEST_CASE("tile truth satisfies its invariants") {
    SynthConfig cfg = synth::default_config(7);
    auto slide = synth::generate_slide(cfg, 20, Modality::Spot, 1);
    for (const auto& truth : slide.truths) truth.validate(cfg.n_celltypes, cfg.tile_size);
}

TEST_CASE("oracle_expression pinned cases and brute-force weighted sum") {
    SynthConfig cfg = synth::default_config(1);
    synth::SynthTileTruth truth;
    truth.region_map.assign(static_cast<size_t>(cfg.tile_size) * cfg.tile_size, 0);

    truth.mixture_weights = Vec::Zero(4);
    truth.mixture_weights[2] = 1.0;
    truth.dominant_type = 2;
    Vec single = synth::oracle_expression(truth, cfg);
    CHECK((single - cfg.signature_matrix.row(2).transpose()).norm() == doctest::Approx(0.0));

    truth.mixture_weights = Vec::Zero(4);
    truth.mixture_weights[0] = 0.5;
    truth.mixture_weights[1] = 0.5;
    truth.dominant_type = 0;
    Vec half = synth::oracle_expression(truth, cfg);
    Vec expect = 0.5 * (cfg.signature_matrix.row(0) + cfg.signature_matrix.row(1)).transpose();
    CHECK((half - expect).norm() < 1e-12);

    Rng rng(2);
    Vec w(4);
    for (int t = 0; t < 4; ++t) w[t] = rng.uniform(0.1, 1.0);
    w /= w.sum();
    truth.mixture_weights = w;
    Index dom;
    w.maxCoeff(&dom);
    truth.dominant_type = static_cast<int>(dom);
    Vec got = synth::oracle_expression(truth, cfg);
    Vec brute = Vec::Zero(cfg.genes);
    for (int t = 0; t < 4; ++t) brute += w[t] * cfg.signature_matrix.row(t).transpose();
    CHECK((got - brute).norm() < 1e-12);
}

TEST_CASE("orthogonal signatures let nearest-signature identify the dominant type") {
    SynthConfig cfg = orthogonal_config(11);
    auto slide = synth::generate_slide(cfg, 500, Modality::Spot, 0);
    int correct = 0;
    for (size_t i = 0; i < slide.spots.size(); ++i) {
        const Vec& e = slide.spots[i].expression;
        int best = -1;
        double best_score = -1.0;
        for (int t = 0; t < cfg.n_celltypes; ++t) {
            double score = 0.0;
            for (Index g = 0; g < cfg.genes; ++g)
                if (cfg.signature_matrix(t, g) > 0.0) score += e[g];
            if (score > best_score) {
                best_score = score;
                best = t;
            }
        }
        if (best == slide.truths[i].dominant_type) ++correct;
    }
    CHECK(static_cast<double>(correct) / 500.0 >= 0.99);
}

TEST_CASE("transcript gene frequencies per region match the xenium signature") {
    SynthConfig cfg = synth::default_config(13);
    cfg.transcript_rate = 1500.0;
    auto slide = synth::generate_slide(cfg, 40, Modality::Xenium, 0);

    std::map<int, Vec> observed;
    std::map<int, double> totals;
    for (int t = 0; t < cfg.n_celltypes; ++t) {
        observed[t] = Vec::Zero(cfg.xenium_genes);
        totals[t] = 0.0;
    }
    for (size_t i = 0; i < slide.xeniums.size(); ++i) {
        const auto& x = slide.xeniums[i];
        const auto& region = slide.truths[i].region_map;
        for (const auto& tr : x.transcripts) {
            int type = region[static_cast<size_t>(std::floor(tr.y)) * cfg.tile_size +
                              static_cast<size_t>(std::floor(tr.x))];
            observed[type][static_cast<Index>(tr.gene)] += 1.0;
            totals[type] += 1.0;
        }
    }
    // chi-square goodness of fit at alpha = 0.01 per cell type
    for (int t = 0; t < cfg.n_celltypes; ++t) {
        REQUIRE(totals[t] >= 10000.0);
        Vec expect_frac = cfg.xenium_signature.row(t).transpose() / cfg.xenium_signature.row(t).sum();
        double chi2 = 0.0;
        int dof = -1;
        for (Index g = 0; g < cfg.xenium_genes; ++g) {
            double expected = expect_frac[g] * totals[t];
            if (expected <= 0.0) continue;
            ++dof;
            double diff = observed[t][g] - expected;
            chi2 += diff * diff / expected;
        }
        CHECK(chi2 < oracle::chi2_critical(static_cast<double>(dof), 2.326));
    }
}

TEST_CASE("dominant types stay near balance across a slide") {
    SynthConfig cfg = synth::default_config(19);
    auto slide = synth::generate_slide(cfg, 400, Modality::Spot, 0);
    Vec counts = Vec::Zero(cfg.n_celltypes);
    for (const auto& truth : slide.truths) counts[truth.dominant_type] += 1.0;
    for (int t = 0; t < cfg.n_celltypes; ++t) {
        double frac = counts[t] / 400.0;
        CHECK(frac >= 0.25 * 0.8);
        CHECK(frac <= 0.25 * 1.2);
    }
}

TEST_CASE("raw pixels carry enough signal for ridge to recover expression") {
    SynthConfig cfg = synth::default_config(23);
    auto slide = synth::generate_slide(cfg, 300, Modality::Spot, 0);

    Mat pixels(300, static_cast<Index>(cfg.tile_size) * cfg.tile_size * 3);
    Mat expr(300, cfg.genes);
    for (Index i = 0; i < 300; ++i) {
        for (Index p = 0; p < pixels.cols(); ++p)
            pixels(i, p) = static_cast<double>(slide.spots[static_cast<size_t>(i)].tile.data[static_cast<size_t>(p)]);
        expr.row(i) = slide.spots[static_cast<size_t>(i)].expression.transpose();
    }
    eval::BenchmarkProtocol protocol;
    protocol.n_pca = 64;
    protocol.n_eval_hvg = 20;
    auto res = eval::benchmark_expression(pixels, expr, protocol);
    CHECK(res.mean_pearson >= 0.5);
}
