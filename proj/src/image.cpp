#include "mint/image.hpp"

#include <algorithm>
#include <cmath>

namespace mint {

bool Image::finite() const {
    for (float v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

Image crop(const Image& img, int x0, int y0, int cw, int ch_) {
    require(x0 >= 0 && y0 >= 0 && cw > 0 && ch_ > 0 && x0 + cw <= img.w && y0 + ch_ <= img.h,
            "crop rectangle out of bounds");
    Image out(ch_, cw, img.c);
    for (int y = 0; y < ch_; ++y)
        for (int x = 0; x < cw; ++x)
            for (int k = 0; k < img.c; ++k) out.at(y, x, k) = img.at(y0 + y, x0 + x, k);
    return out;
}

Image resize_bilinear(const Image& img, int out_h, int out_w) {
    require(out_h > 0 && out_w > 0, "resize target must be positive");
    if (out_h == img.h && out_w == img.w) return img;
    Image out(out_h, out_w, img.c);
    const double sy = static_cast<double>(img.h) / out_h;
    const double sx = static_cast<double>(img.w) / out_w;
    for (int y = 0; y < out_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        double wy = fy - y0;
        int y0c = std::clamp(y0, 0, img.h - 1);
        int y1c = std::clamp(y0 + 1, 0, img.h - 1);
        for (int x = 0; x < out_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            double wx = fx - x0;
            int x0c = std::clamp(x0, 0, img.w - 1);
            int x1c = std::clamp(x0 + 1, 0, img.w - 1);
            for (int k = 0; k < img.c; ++k) {
                double top = (1.0 - wx) * img.at(y0c, x0c, k) + wx * img.at(y0c, x1c, k);
                double bot = (1.0 - wx) * img.at(y1c, x0c, k) + wx * img.at(y1c, x1c, k);
                out.at(y, x, k) = static_cast<float>((1.0 - wy) * top + wy * bot);
            }
        }
    }
    return out;
}

Image hflip(const Image& img) {
    Image out(img.h, img.w, img.c);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
            for (int k = 0; k < img.c; ++k) out.at(y, x, k) = img.at(y, img.w - 1 - x, k);
    return out;
}

Image gaussian_blur(const Image& img, double sigma) {
    if (sigma <= 0.0) return img;
    int radius = std::min(4, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(static_cast<size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        kernel[static_cast<size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : kernel) v /= sum;

    auto reflect = [](int i, int n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
        return std::clamp(i, 0, n - 1);
    };

    Image tmp(img.h, img.w, img.c);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
            for (int k = 0; k < img.c; ++k) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    acc += kernel[static_cast<size_t>(i + radius)] * img.at(y, reflect(x + i, img.w), k);
                tmp.at(y, x, k) = static_cast<float>(acc);
            }
    Image out(img.h, img.w, img.c);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
            for (int k = 0; k < img.c; ++k) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    acc += kernel[static_cast<size_t>(i + radius)] * tmp.at(reflect(y + i, img.h), x, k);
                out.at(y, x, k) = static_cast<float>(acc);
            }
    return out;
}

void adjust_brightness(Image& img, double factor) {
    for (float& v : img.data) v = static_cast<float>(v * factor);
}

void adjust_contrast(Image& img, double factor) {
    double mean = 0.0;
    for (float v : img.data) mean += v;
    mean /= static_cast<double>(img.data.size());
    for (float& v : img.data) v = static_cast<float>(mean + factor * (v - mean));
}

void adjust_saturation(Image& img, double factor) {
    if (img.c != 3) return;
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x) {
            double gray = 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) + 0.114 * img.at(y, x, 2);
            for (int k = 0; k < 3; ++k)
                img.at(y, x, k) = static_cast<float>(gray + factor * (img.at(y, x, k) - gray));
        }
}

void clamp01(Image& img) {
    for (float& v : img.data) v = std::clamp(v, 0.0f, 1.0f);
}

}  // namespace mint
