#include "mint/backbone.hpp"

#include <algorithm>
#include <cmath>

namespace mint {

namespace {

// Catmull-Rom kernel weights for fractional offset t in [0,1), taps at
// offsets {-1, 0, 1, 2}. Weights sum to 1; t = 0 gives {0, 1, 0, 0}.
void cubic_weights(double t, double w[4]) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    w[0] = -0.5 * t3 + t2 - 0.5 * t;
    w[1] = 1.5 * t3 - 2.5 * t2 + 1.0;
    w[2] = -1.5 * t3 + 2.0 * t2 + 0.5 * t;
    w[3] = 0.5 * t3 - 0.5 * t2;
}

}  // namespace

Mat bicubic_grid_matrix(int n, int m) {
    require(n >= 1 && m >= 1, "grid sizes must be >= 1");
    if (n == m) return Mat::Identity(static_cast<Index>(m) * m, static_cast<Index>(n) * n);

    Mat w = Mat::Zero(static_cast<Index>(m) * m, static_cast<Index>(n) * n);
    const double scale = static_cast<double>(n) / m;
    std::vector<int> idx(static_cast<size_t>(m) * 4);
    std::vector<double> wt(static_cast<size_t>(m) * 4);
    for (int o = 0; o < m; ++o) {
        double src = (o + 0.5) * scale - 0.5;
        double base = std::floor(src);
        double t = src - base;
        double kw[4];
        cubic_weights(t, kw);
        for (int k = 0; k < 4; ++k) {
            idx[static_cast<size_t>(o) * 4 + static_cast<size_t>(k)] =
                std::clamp(static_cast<int>(base) - 1 + k, 0, n - 1);
            wt[static_cast<size_t>(o) * 4 + static_cast<size_t>(k)] = kw[k];
        }
    }
    for (int oy = 0; oy < m; ++oy)
        for (int ox = 0; ox < m; ++ox)
            for (int ky = 0; ky < 4; ++ky)
                for (int kx = 0; kx < 4; ++kx) {
                    Index row = static_cast<Index>(oy) * m + ox;
                    Index col = static_cast<Index>(idx[static_cast<size_t>(oy) * 4 + static_cast<size_t>(ky)]) * n +
                                idx[static_cast<size_t>(ox) * 4 + static_cast<size_t>(kx)];
                    w(row, col) += wt[static_cast<size_t>(oy) * 4 + static_cast<size_t>(ky)] *
                                   wt[static_cast<size_t>(ox) * 4 + static_cast<size_t>(kx)];
                }
    return w;
}

Mat interpolate_pos_embed(const Mat& pos_table, int target_grid) {
    const Index n_grid_rows = pos_table.rows() - 1;
    const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_grid_rows))));
    require(static_cast<Index>(n) * n == n_grid_rows, "positional table grid is not square");
    Mat out(1 + static_cast<Index>(target_grid) * target_grid, pos_table.cols());
    out.row(0) = pos_table.row(0);
    out.bottomRows(out.rows() - 1) = bicubic_grid_matrix(n, target_grid) * pos_table.bottomRows(n_grid_rows);
    return out;
}

}  // namespace mint
