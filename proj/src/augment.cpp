#include "mint/augment.hpp"

#include <algorithm>
#include <cmath>

namespace mint {

namespace {

struct CropRect {
    int x0, y0, w, h;
};

CropRect random_resized_rect(const Image& tile, double smin, double smax, double rmin, double rmax,
                             Rng& rng) {
    const double area = static_cast<double>(tile.w) * tile.h;
    for (int attempt = 0; attempt < 10; ++attempt) {
        double target = area * rng.uniform(smin, smax);
        double ratio = std::exp(rng.uniform(std::log(rmin), std::log(rmax)));
        int w = static_cast<int>(std::lround(std::sqrt(target * ratio)));
        int h = static_cast<int>(std::lround(std::sqrt(target / ratio)));
        if (w < 1 || h < 1 || w > tile.w || h > tile.h) continue;
        int x0 = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(tile.w - w + 1)));
        int y0 = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(tile.h - h + 1)));
        return {x0, y0, w, h};
    }
    // Center fallback at the mean scale.
    double target = area * 0.5 * (smin + smax);
    int side = std::clamp(static_cast<int>(std::lround(std::sqrt(target))), 1, std::min(tile.w, tile.h));
    return {(tile.w - side) / 2, (tile.h - side) / 2, side, side};
}

Image make_one_crop(const Image& tile, const AugmentConfig& ac, int out_size, bool is_global,
                    Rng& rng, GeometryRecord& geom) {
    if (ac.disabled) {
        geom = GeometryRecord::identity(tile.w);
        geom.out_w = geom.out_h = out_size;
        return resize_bilinear(tile, out_size, out_size);
    }
    double smin = is_global ? ac.global_scale_min : ac.local_scale_min;
    double smax = is_global ? ac.global_scale_max : ac.local_scale_max;
    CropRect r = random_resized_rect(tile, smin, smax, ac.ratio_min, ac.ratio_max, rng);
    Image out = resize_bilinear(crop(tile, r.x0, r.y0, r.w, r.h), out_size, out_size);

    geom.crop_x0 = r.x0;
    geom.crop_y0 = r.y0;
    geom.crop_w = r.w;
    geom.crop_h = r.h;
    geom.out_w = geom.out_h = out_size;
    geom.flipped = rng.bernoulli(ac.flip_prob);
    if (geom.flipped) out = hflip(out);

    if (rng.bernoulli(ac.jitter_prob)) {
        adjust_brightness(out, rng.uniform(1.0 - ac.brightness, 1.0 + ac.brightness));
        adjust_contrast(out, rng.uniform(1.0 - ac.contrast, 1.0 + ac.contrast));
        adjust_saturation(out, rng.uniform(1.0 - ac.saturation, 1.0 + ac.saturation));
        clamp01(out);
    }
    if (is_global && rng.bernoulli(ac.blur_prob))
        out = gaussian_blur(out, rng.uniform(ac.blur_sigma_min, ac.blur_sigma_max));
    return out;
}

}  // namespace

CropSet make_crops(const Image& tile, const CropConfig& cc, const AugmentConfig& ac, Rng& rng) {
    cc.validate();
    CropSet out;
    out.n_global = cc.n_global;
    out.crops.reserve(static_cast<size_t>(cc.n_global + cc.n_local));
    out.geoms.resize(static_cast<size_t>(cc.n_global + cc.n_local));
    for (int i = 0; i < cc.n_global; ++i)
        out.crops.push_back(make_one_crop(tile, ac, cc.global_size, true, rng, out.geoms[static_cast<size_t>(i)]));
    for (int i = 0; i < cc.n_local; ++i)
        out.crops.push_back(make_one_crop(tile, ac, cc.local_size, false, rng,
                                          out.geoms[static_cast<size_t>(cc.n_global + i)]));
    return out;
}

}  // namespace mint
