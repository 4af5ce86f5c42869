#pragma once

#include "mint/common.hpp"
#include "mint/dataset.hpp"

#include <string>
#include <vector>

namespace mint::synth {

// Per-type texture: base color plus oriented stripes. Orientation and
// period carry morphology that survives flips and crops, so cell type
// stays visually decodable even when colors drift under jitter.
struct TypeTexture {
    double color[3] = {0.5, 0.5, 0.5};
    double stripe_angle_deg = 0.0;
    double stripe_period = 8.0;
};

struct SynthConfig {
    int n_celltypes = 4;
    int latent_dim = 12;  // marker genes per type when auto-building signatures
    int tile_size = 64;
    Index genes = 64;
    Index xenium_genes = 16;
    Mat signature_matrix;          // n_celltypes x G, per-type mean expression rates
    Mat xenium_signature;          // n_celltypes x G_xen
    std::vector<uint32_t> xenium_to_spot;  // panel position -> spot vocabulary index
    std::vector<TypeTexture> textures;
    double transcript_rate = 400.0;    // mean transcripts per xenium tile
    double spot_total_counts = 20000;  // mean library size per spot
    double target_sum = 10000.0;
    double noise_std = 0.05;
    double stripe_amp = 0.16;
    int n_voronoi_sites = 8;  // multiple of n_celltypes keeps dominants balanced
    uint64_t seed = 1;

    void validate() const;
};

// Area-fraction ground truth for one generated tile.
struct SynthTileTruth {
    std::vector<int> region_map;  // tile_size * tile_size type labels, row-major
    int dominant_type = 0;
    Vec mixture_weights;  // simplex over cell types

    void validate(int n_celltypes, int tile_size) const;
};

// Default toy world: four cell types; types 2 and 3 share an expression
// signature but differ in texture, so spot expression cannot separate
// them while morphology can. The probe over dominant_type then measures
// whether fine-tuning preserved morphological information.
SynthConfig default_config(uint64_t seed = 1);

struct GeneratedTile {
    Image tile;
    SynthTileTruth truth;
};

GeneratedTile generate_tile(const SynthConfig& cfg, uint64_t slide_index, uint64_t tile_index);

struct GeneratedSlide {
    std::vector<SpotSample> spots;
    std::vector<XeniumSample> xeniums;
    std::vector<SynthTileTruth> truths;
};

// Tiles are independently seeded by (cfg.seed, slide_index, tile index),
// so any parallel schedule reproduces the serial output bitwise.
GeneratedSlide generate_slide(const SynthConfig& cfg, Index n_spots, Modality modality,
                              uint64_t slide_index);

// Noiseless mixture sum_t w_t * signature[t]; the Bayes-optimal target.
Vec oracle_expression(const SynthTileTruth& truth, const SynthConfig& cfg);

// Dataset-level parameters consumed by `cli gen-data`.
struct DatasetSpec {
    Index n_train_spots = 1000;
    Index n_train_xenium = 100;
    Index n_eval_spots = 400;
    int n_spot_slides = 4;
    int n_xenium_slides = 1;
    int n_eval_slides = 2;
};

// Writes vocab + samples + train/eval manifests under out_dir. Returns the
// two manifest paths (train, eval).
std::pair<std::string, std::string> write_dataset(const SynthConfig& cfg, const DatasetSpec& spec,
                                                  const std::string& out_dir);

}  // namespace mint::synth
