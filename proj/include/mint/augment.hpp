#pragma once

#include "mint/dataset.hpp"
#include "mint/image.hpp"
#include "mint/rng.hpp"

#include <vector>

namespace mint {

struct CropConfig {
    int n_global = 2;
    int global_size = 64;
    int n_local = 8;
    int local_size = 32;

    void validate() const {
        require(n_global == 2, "the objective set expects exactly 2 global crops");
        require(n_local >= 0 && global_size > 0 && local_size > 0, "invalid crop configuration");
    }
};

// Multi-crop recipe. Grayscale/solarize/hue are intentionally absent: the
// synthetic tiles carry class identity partly in hue, and erasing it would
// train invariance to the very signal the morphology probe measures.
struct AugmentConfig {
    double global_scale_min = 0.4;
    double global_scale_max = 1.0;
    double local_scale_min = 0.05;
    double local_scale_max = 0.4;
    double ratio_min = 0.75;
    double ratio_max = 4.0 / 3.0;
    double flip_prob = 0.5;
    double jitter_prob = 0.8;
    double brightness = 0.15;
    double contrast = 0.15;
    double saturation = 0.1;
    double blur_prob = 0.5;
    double blur_sigma_min = 0.1;
    double blur_sigma_max = 0.8;
    bool disabled = false;  // debug: identity resize, no photometrics
};

struct CropSet {
    std::vector<Image> crops;            // globals first, then locals
    std::vector<GeometryRecord> geoms;   // aligned with crops
    int n_global = 0;
};

// Global crops get scale/flip/jitter/blur; local crops scale/flip/jitter.
// Every geometric transform is recorded so patch-level targets can be
// re-binned in the crop frame via apply_geometry_to_points.
CropSet make_crops(const Image& tile, const CropConfig& cc, const AugmentConfig& ac, Rng& rng);

}  // namespace mint
