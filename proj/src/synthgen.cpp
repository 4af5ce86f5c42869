#include "mint/synthgen.hpp"

#include "mint/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

namespace fs = std::filesystem;

namespace mint::synth {

void SynthConfig::validate() const {
    require(n_celltypes >= 1, "n_celltypes must be >= 1");
    require(tile_size >= 8, "tile_size too small");
    require(genes >= 1 && xenium_genes >= 1, "gene counts must be positive");
    require(signature_matrix.rows() == n_celltypes && signature_matrix.cols() == genes,
            "signature_matrix shape mismatch");
    require(xenium_signature.rows() == n_celltypes && xenium_signature.cols() == xenium_genes,
            "xenium_signature shape mismatch");
    require((signature_matrix.array() >= 0.0).all(), "signature rows must be non-negative");
    require((xenium_signature.array() >= 0.0).all(), "xenium signature rows must be non-negative");
    require(static_cast<Index>(xenium_to_spot.size()) == xenium_genes, "xenium_to_spot length mismatch");
    require(static_cast<int>(textures.size()) == n_celltypes, "one texture per cell type required");
    require(n_voronoi_sites >= 1, "n_voronoi_sites must be >= 1");
    require(noise_std >= 0.0 && transcript_rate >= 0.0 && spot_total_counts > 0.0, "invalid rates");
}

void SynthTileTruth::validate(int n_celltypes, int tile_size) const {
    require(static_cast<int>(region_map.size()) == tile_size * tile_size, "region_map size mismatch");
    require(mixture_weights.size() == n_celltypes, "mixture_weights length mismatch");
    require(std::abs(mixture_weights.sum() - 1.0) < 1e-9, "mixture_weights must sum to 1");
    Index argmax = 0;
    mixture_weights.maxCoeff(&argmax);
    require(dominant_type == static_cast<int>(argmax), "dominant_type must be argmax of mixture_weights");
}

SynthConfig default_config(uint64_t seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.n_celltypes = 4;
    cfg.latent_dim = 12;
    cfg.genes = 64;
    cfg.xenium_genes = 16;

    // Marker-block signatures: type t expresses genes [t*12, t*12+12) at a
    // high rate over a low shared background. Type 3 reuses type 2's row
    // (expression twins); its own marker block stays silent. The background
    // rate is kept well below the markers so that log1p-space variance is
    // mixture-driven rather than Poisson-noise-driven.
    cfg.signature_matrix = Mat::Constant(cfg.n_celltypes, cfg.genes, 0.1);
    for (int t = 0; t < cfg.n_celltypes; ++t)
        for (Index g = 0; g < cfg.latent_dim; ++g)
            cfg.signature_matrix(t, static_cast<Index>(t) * cfg.latent_dim + g) = 6.0;
    cfg.signature_matrix.row(3) = cfg.signature_matrix.row(2);

    // Xenium panel: four markers from each type's block.
    cfg.xenium_to_spot.clear();
    for (int t = 0; t < cfg.n_celltypes; ++t)
        for (uint32_t g = 0; g < 4; ++g)
            cfg.xenium_to_spot.push_back(static_cast<uint32_t>(t) * static_cast<uint32_t>(cfg.latent_dim) + g);
    cfg.xenium_signature = Mat(cfg.n_celltypes, cfg.xenium_genes);
    for (int t = 0; t < cfg.n_celltypes; ++t)
        for (Index j = 0; j < cfg.xenium_genes; ++j)
            cfg.xenium_signature(t, j) = cfg.signature_matrix(t, cfg.xenium_to_spot[static_cast<size_t>(j)]);

    // Texture design, two deliberate structures:
    //  - Types 2 and 3 are expression twins (one signature row, two
    //    appearances), so expression supervision has no incentive to keep
    //    them apart and the dominant-type probe can detect forgetting of
    //    their distinction.
    //  - The four base colors are coplanar with c1 - c0 = 0.5 * (c3 - c2).
    //    Every class pair stays color-separable (classification saturates
    //    for any reasonable features), but the mean tile color confounds
    //    w1 with the twin balance w3 - w2, so the expression-relevant
    //    fractions w0, w1 are NOT readable from first-order color
    //    statistics; recovering them takes stripe-level texture reading,
    //    which only expression-supervised training develops.
    // Orientations are 0/90 degrees, which horizontal flips preserve.
    cfg.textures = {
        {{0.52, 0.70, 0.50}, 0.0, 8.0},
        {{0.71, 0.635, 0.49}, 90.0, 8.0},
        {{0.42, 0.58, 0.88}, 0.0, 5.0},
        {{0.80, 0.45, 0.86}, 90.0, 5.0},
    };
    return cfg;
}

namespace {

struct Site {
    double x, y;
    int type;
};

std::vector<Site> sample_sites(const SynthConfig& cfg, Rng& rng) {
    // Round-robin type assignment keeps dominant types near-balanced
    // across a slide; a shuffle decorrelates type from position.
    std::vector<int> types(static_cast<size_t>(cfg.n_voronoi_sites));
    for (size_t i = 0; i < types.size(); ++i) types[i] = static_cast<int>(i) % cfg.n_celltypes;
    for (size_t i = types.size(); i > 1; --i) {
        size_t j = rng.uniform_index(i);
        std::swap(types[i - 1], types[j]);
    }
    std::vector<Site> sites(types.size());
    for (size_t i = 0; i < sites.size(); ++i)
        sites[i] = {rng.uniform(0.0, cfg.tile_size), rng.uniform(0.0, cfg.tile_size), types[i]};
    return sites;
}

}  // namespace

GeneratedTile generate_tile(const SynthConfig& cfg, uint64_t slide_index, uint64_t tile_index) {
    Rng rng = Rng::stream(cfg.seed, "tile", slide_index, tile_index);
    const int n = cfg.tile_size;

    std::vector<Site> sites = sample_sites(cfg, rng);

    GeneratedTile out;
    out.tile = Image(n, n, 3);
    out.truth.region_map.assign(static_cast<size_t>(n) * n, 0);
    Vec area = Vec::Zero(cfg.n_celltypes);

    std::vector<double> phase(static_cast<size_t>(cfg.n_celltypes));
    for (auto& p : phase) p = rng.uniform(0.0, 2.0 * M_PI);

    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            int best = 0;
            double best_d = 1e300;
            for (size_t s = 0; s < sites.size(); ++s) {
                double dx = x + 0.5 - sites[s].x;
                double dy = y + 0.5 - sites[s].y;
                double d = dx * dx + dy * dy;
                if (d < best_d) {
                    best_d = d;
                    best = sites[s].type;
                }
            }
            out.truth.region_map[static_cast<size_t>(y) * n + x] = best;
            area[best] += 1.0;

            const TypeTexture& tex = cfg.textures[static_cast<size_t>(best)];
            double th = tex.stripe_angle_deg * M_PI / 180.0;
            double stripe = cfg.stripe_amp *
                            std::sin(2.0 * M_PI * (x * std::cos(th) + y * std::sin(th)) / tex.stripe_period +
                                     phase[static_cast<size_t>(best)]);
            for (int k = 0; k < 3; ++k) {
                double v = tex.color[k] + stripe + cfg.noise_std * rng.normal();
                out.tile.at(y, x, k) = static_cast<float>(std::clamp(v, 0.0, 1.0));
            }
        }
    }

    out.truth.mixture_weights = area / area.sum();
    Index dom = 0;
    out.truth.mixture_weights.maxCoeff(&dom);
    out.truth.dominant_type = static_cast<int>(dom);
    return out;
}

GeneratedSlide generate_slide(const SynthConfig& cfg, Index n_spots, Modality modality,
                              uint64_t slide_index) {
    cfg.validate();
    GeneratedSlide out;
    const std::string slide_id =
        (modality == Modality::Spot ? "spot_slide_" : "xen_slide_") + std::to_string(slide_index);

    for (Index i = 0; i < n_spots; ++i) {
        GeneratedTile gt = generate_tile(cfg, slide_index, static_cast<uint64_t>(i));
        Rng rng = Rng::stream(cfg.seed, "omics", slide_index, static_cast<uint64_t>(i));

        char idbuf[64];
        std::snprintf(idbuf, sizeof(idbuf), "%s_t%05lld", slide_id.c_str(), static_cast<long long>(i));

        if (modality == Modality::Spot) {
            Vec rate = oracle_expression(gt.truth, cfg);
            double scale = cfg.spot_total_counts / rate.sum();
            std::vector<uint64_t> counts(static_cast<size_t>(cfg.genes));
            for (Index g = 0; g < cfg.genes; ++g) counts[static_cast<size_t>(g)] = rng.poisson(rate[g] * scale);
            SpotSample s;
            s.id = idbuf;
            s.slide_id = slide_id;
            s.tile = std::move(gt.tile);
            s.expression = normalize_expression(counts, cfg.target_sum);
            s.measured.assign(static_cast<size_t>(cfg.genes), 1);
            s.truth_mixture = gt.truth.mixture_weights;
            s.truth_dominant_type = gt.truth.dominant_type;
            out.spots.push_back(std::move(s));
        } else {
            XeniumSample s;
            s.id = idbuf;
            s.slide_id = slide_id;
            uint64_t n_tr = rng.poisson(cfg.transcript_rate);
            s.transcripts.reserve(n_tr);
            for (uint64_t t = 0; t < n_tr; ++t) {
                double x = rng.uniform(0.0, cfg.tile_size);
                double y = rng.uniform(0.0, cfg.tile_size);
                int type = gt.truth.region_map[static_cast<size_t>(std::floor(y)) * cfg.tile_size +
                                               static_cast<size_t>(std::floor(x))];
                // Gene by inverse CDF over the region's panel frequencies.
                double total = cfg.xenium_signature.row(type).sum();
                double u = rng.uniform() * total;
                double acc = 0.0;
                uint32_t gene = static_cast<uint32_t>(cfg.xenium_genes - 1);
                for (Index j = 0; j < cfg.xenium_genes; ++j) {
                    acc += cfg.xenium_signature(type, j);
                    if (u < acc) {
                        gene = static_cast<uint32_t>(j);
                        break;
                    }
                }
                s.transcripts.push_back({x, y, gene});
            }
            s.tile = std::move(gt.tile);
            s.panel.assign(static_cast<size_t>(cfg.xenium_genes), 1);
            s.truth_mixture = gt.truth.mixture_weights;
            s.truth_dominant_type = gt.truth.dominant_type;
            out.xeniums.push_back(std::move(s));
        }
        out.truths.push_back(std::move(gt.truth));
    }
    return out;
}

Vec oracle_expression(const SynthTileTruth& truth, const SynthConfig& cfg) {
    return cfg.signature_matrix.transpose() * truth.mixture_weights;
}

std::pair<std::string, std::string> write_dataset(const SynthConfig& cfg, const DatasetSpec& spec,
                                                  const std::string& out_dir) {
    cfg.validate();
    fs::create_directories(fs::path(out_dir) / "samples");

    VocabFile vocab;
    vocab.genes.names.reserve(static_cast<size_t>(cfg.genes));
    for (Index g = 0; g < cfg.genes; ++g) vocab.genes.names.push_back("gene_" + std::to_string(g));
    for (Index j = 0; j < cfg.xenium_genes; ++j)
        vocab.xenium_genes.names.push_back(vocab.genes.names[cfg.xenium_to_spot[static_cast<size_t>(j)]]);
    vocab.xenium_to_spot = cfg.xenium_to_spot;
    save_vocab(vocab, (fs::path(out_dir) / "vocab.json").string());

    auto add_slide = [&](DatasetManifest& man, const GeneratedSlide& slide) {
        for (const auto& s : slide.spots) {
            std::string rel = "samples/" + s.id + ".bin";
            save_spot_sample(s, (fs::path(out_dir) / rel).string());
            man.entries.push_back({rel, Modality::Spot, s.slide_id});
        }
        for (const auto& s : slide.xeniums) {
            std::string rel = "samples/" + s.id + ".bin";
            save_xenium_sample(s, (fs::path(out_dir) / rel).string());
            man.entries.push_back({rel, Modality::Xenium, s.slide_id});
        }
    };

    DatasetManifest train;
    train.tile_size = cfg.tile_size;
    train.vocab_path = "vocab.json";
    train.split = "train";
    Index per_slide = spec.n_train_spots / spec.n_spot_slides;
    for (int s = 0; s < spec.n_spot_slides; ++s) {
        Index n = (s == spec.n_spot_slides - 1) ? spec.n_train_spots - per_slide * (spec.n_spot_slides - 1)
                                                : per_slide;
        add_slide(train, generate_slide(cfg, n, Modality::Spot, static_cast<uint64_t>(s)));
    }
    Index xen_per_slide = spec.n_train_xenium / spec.n_xenium_slides;
    for (int s = 0; s < spec.n_xenium_slides; ++s) {
        Index n = (s == spec.n_xenium_slides - 1)
                      ? spec.n_train_xenium - xen_per_slide * (spec.n_xenium_slides - 1)
                      : xen_per_slide;
        add_slide(train, generate_slide(cfg, n, Modality::Xenium, 1000 + static_cast<uint64_t>(s)));
    }
    std::string train_path = (fs::path(out_dir) / "train_manifest.json").string();
    save_manifest(train, train_path);

    DatasetManifest eval;
    eval.tile_size = cfg.tile_size;
    eval.vocab_path = "vocab.json";
    eval.split = "eval";
    Index eval_per_slide = spec.n_eval_spots / spec.n_eval_slides;
    for (int s = 0; s < spec.n_eval_slides; ++s) {
        Index n = (s == spec.n_eval_slides - 1) ? spec.n_eval_spots - eval_per_slide * (spec.n_eval_slides - 1)
                                                : eval_per_slide;
        add_slide(eval, generate_slide(cfg, n, Modality::Spot, 2000 + static_cast<uint64_t>(s)));
    }
    std::string eval_path = (fs::path(out_dir) / "eval_manifest.json").string();
    save_manifest(eval, eval_path);

    return {train_path, eval_path};
}

}  // namespace mint::synth
