#pragma once

#include "mint/common.hpp"

#include <vector>

namespace mint {

// H x W x C float image, values nominally in [0,1], (y, x, channel) layout.
struct Image {
    int h = 0;
    int w = 0;
    int c = 0;
    std::vector<float> data;

    Image() = default;
    Image(int h_, int w_, int c_) : h(h_), w(w_), c(c_), data(static_cast<size_t>(h_) * w_ * c_, 0.0f) {}

    float& at(int y, int x, int ch) { return data[(static_cast<size_t>(y) * w + x) * c + ch]; }
    float at(int y, int x, int ch) const { return data[(static_cast<size_t>(y) * w + x) * c + ch]; }

    bool finite() const;
};

// Crop the pixel rectangle [x0, x0+cw) x [y0, y0+ch_) .
Image crop(const Image& img, int x0, int y0, int cw, int ch_);

// Bilinear resize with pixel-center sampling (src = (dst+0.5)/scale - 0.5).
Image resize_bilinear(const Image& img, int out_h, int out_w);

Image hflip(const Image& img);

// Separable Gaussian blur, reflect padding, radius ceil(3*sigma) capped at 4.
Image gaussian_blur(const Image& img, double sigma);

// In-place photometric jitter. Factors of 1 are identity.
void adjust_brightness(Image& img, double factor);
void adjust_contrast(Image& img, double factor);
void adjust_saturation(Image& img, double factor);
void clamp01(Image& img);

}  // namespace mint
