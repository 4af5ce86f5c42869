#pragma once

#include "mint/common.hpp"
#include "mint/image.hpp"
#include "mint/rng.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mint {

// Shared gene namespace. Every slide measures a subset of it; ordering is
// fixed for the lifetime of a run.
struct GeneVocabulary {
    std::vector<std::string> names;

    Index size() const { return static_cast<Index>(names.size()); }
    void validate() const;
};

struct Transcript {
    double x = 0.0;
    double y = 0.0;
    uint32_t gene = 0;  // index into the Xenium vocabulary
};

// One histology tile paired with a spot-level expression vector
// (log1p space, zero outside measured_mask).
struct SpotSample {
    std::string id;
    std::string slide_id;
    Image tile;
    Vec expression;                 // length G
    std::vector<uint8_t> measured;  // length G, 0/1
    // Generator-only ground truth, absent on real data.
    std::optional<Vec> truth_mixture;
    int truth_dominant_type = -1;

    void validate(Index vocab_size, int tile_size) const;
};

// One tile paired with sub-cellular transcript points over a panel subset.
struct XeniumSample {
    std::string id;
    std::string slide_id;
    Image tile;
    std::vector<Transcript> transcripts;
    std::vector<uint8_t> panel;  // length G_xen, 0/1
    std::optional<Vec> truth_mixture;
    int truth_dominant_type = -1;

    void validate(Index xen_vocab_size, int tile_size) const;
};

// Per-patch regression targets: log1p counts plus the positive-patch mask.
// Cells are row-major over the patch grid, matching ViT patch token order.
struct PatchTargetGrid {
    int grid = 0;          // P, grid is P x P
    Mat counts;            // (P*P) x G_xen, log1p of aggregated counts
    std::vector<uint8_t> positive;  // length P*P

    Index n_positive() const;
};

enum class Modality { Spot, Xenium };

struct ManifestEntry {
    std::string sample_path;  // relative to the manifest's directory
    Modality modality = Modality::Spot;
    std::string slide_id;
};

struct DatasetManifest {
    int version = 1;
    int tile_size = 0;
    std::string vocab_path;
    std::string split;  // "train" or "eval"
    std::vector<ManifestEntry> entries;
    std::string base_dir;  // directory of the manifest file, not serialized
};

// Vocabulary file: spot gene names, xenium gene names and the index map
// from xenium panel position to spot vocabulary position.
struct VocabFile {
    GeneVocabulary genes;
    GeneVocabulary xenium_genes;
    std::vector<uint32_t> xenium_to_spot;
};

DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& m, const std::string& path);

VocabFile load_vocab(const std::string& path);
void save_vocab(const VocabFile& v, const std::string& path);

void save_spot_sample(const SpotSample& s, const std::string& path);
SpotSample load_spot_sample(const std::string& path);
void save_xenium_sample(const XeniumSample& s, const std::string& path);
XeniumSample load_xenium_sample(const std::string& path);

// Library-size scale to target_sum, then log1p. All-zero input stays zero.
Vec normalize_expression(const std::vector<uint64_t>& raw_counts, double target_sum);

// Indices of the k highest-variance measured genes, descending variance,
// ties broken by lower gene index. Sample variance over rows.
std::vector<Index> compute_hvg(const Mat& expression, const std::vector<uint8_t>& measured, Index k);

// The stochastic HVG rule: the hvg list with probability p_hvg, otherwise
// the full measured set. One uniform draw from rng either way.
std::vector<Index> select_genes_stochastic(const std::vector<Index>& measured,
                                           const std::vector<Index>& hvg, double p_hvg, Rng& rng);

// Crop -> uniform resize -> optional horizontal flip, applied to point
// coordinates. Composition order matches the image pipeline in augment.
struct GeometryRecord {
    double crop_x0 = 0.0;
    double crop_y0 = 0.0;
    double crop_w = 0.0;
    double crop_h = 0.0;
    int out_w = 0;
    int out_h = 0;
    bool flipped = false;

    static GeometryRecord identity(int size);
};

// Maps points into the output frame; points outside the crop (or pushed
// out of frame by the flip convention x' = (W-1) - x) are dropped.
std::vector<Transcript> apply_geometry_to_points(const std::vector<Transcript>& points,
                                                 const GeometryRecord& g);

// Half-open binning: cell (i,j) covers [j*ps,(j+1)*ps) x [i*ps,(i+1)*ps).
PatchTargetGrid bin_transcripts_to_patches(const std::vector<Transcript>& transcripts, int tile_size,
                                           int patch_size, Index vocab_size);

std::string modality_name(Modality m);
Modality modality_from_name(const std::string& s);

}  // namespace mint
