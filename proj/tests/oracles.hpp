#pragma once

// Independent brute-force / closed-form references used by the test
// suites. These deliberately avoid the library's own code paths.

#include "mint/common.hpp"
#include "mint/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

using mint::Index;
using mint::Mat;
using mint::Vec;

// Per-gene sample variance then an exhaustive sort.
inline std::vector<Index> hvg_bruteforce(const Mat& expr, const std::vector<uint8_t>& measured,
                                         Index k) {
    std::vector<std::pair<double, Index>> vi;
    for (Index g = 0; g < expr.cols(); ++g) {
        if (!measured[static_cast<size_t>(g)]) continue;
        double mean = 0.0;
        for (Index s = 0; s < expr.rows(); ++s) mean += expr(s, g);
        mean /= static_cast<double>(expr.rows());
        double var = 0.0;
        for (Index s = 0; s < expr.rows(); ++s) var += (expr(s, g) - mean) * (expr(s, g) - mean);
        var /= static_cast<double>(expr.rows() - 1);
        vi.emplace_back(var, g);
    }
    std::sort(vi.begin(), vi.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<Index> out;
    for (Index i = 0; i < k; ++i) out.push_back(vi[static_cast<size_t>(i)].second);
    return out;
}

// Double loop over transcripts and cells.
inline Mat bin_bruteforce(const std::vector<mint::Transcript>& ts, int tile, int patch, Index genes,
                          std::vector<uint8_t>* positive) {
    const int grid = tile / patch;
    Mat raw = Mat::Zero(static_cast<Index>(grid) * grid, genes);
    for (Index cell = 0; cell < raw.rows(); ++cell) {
        int cy = static_cast<int>(cell) / grid;
        int cx = static_cast<int>(cell) % grid;
        for (const auto& t : ts) {
            if (t.x < 0 || t.x >= tile || t.y < 0 || t.y >= tile) continue;
            if (t.x >= cx * patch && t.x < (cx + 1) * patch && t.y >= cy * patch &&
                t.y < (cy + 1) * patch)
                raw(cell, static_cast<Index>(t.gene)) += 1.0;
        }
    }
    if (positive) {
        positive->resize(static_cast<size_t>(raw.rows()));
        for (Index c = 0; c < raw.rows(); ++c)
            (*positive)[static_cast<size_t>(c)] = raw.row(c).sum() >= 1.0 ? 1 : 0;
    }
    return raw;
}

// Scalar-loop masked MSE (Eq.3 form).
inline double st_loss_bruteforce(const Vec& pred, const Vec& target, const std::vector<Index>& set) {
    double acc = 0.0;
    for (Index g : set) {
        double d = pred[g] - target[g];
        acc += d * d;
    }
    return acc / static_cast<double>(set.size());
}

// Scalar triple-loop masked patch MSE (Eq.4 form).
inline double pst_loss_bruteforce(const Mat& pred, const Mat& target, const std::vector<uint8_t>& pos,
                                  const std::vector<uint8_t>& panel) {
    double acc = 0.0;
    int n_pos = 0, n_genes = 0;
    for (Index g = 0; g < pred.cols(); ++g) n_genes += panel[static_cast<size_t>(g)] ? 1 : 0;
    for (Index p = 0; p < pred.rows(); ++p) {
        if (!pos[static_cast<size_t>(p)]) continue;
        ++n_pos;
        for (Index g = 0; g < pred.cols(); ++g) {
            if (!panel[static_cast<size_t>(g)]) continue;
            double d = pred(p, g) - target(p, g);
            acc += d * d;
        }
    }
    if (n_pos == 0) return 0.0;
    return acc / (static_cast<double>(n_pos) * n_genes);
}

// Catmull-Rom weight directly from the piecewise kernel definition.
inline double catmull_rom(double x) {
    constexpr double a = -0.5;
    x = std::abs(x);
    if (x < 1.0) return (a + 2.0) * x * x * x - (a + 3.0) * x * x + 1.0;
    if (x < 2.0) return a * x * x * x - 5.0 * a * x * x + 8.0 * a * x - 4.0 * a;
    return 0.0;
}

// Direct separable bicubic evaluation at the resampled coordinates.
inline double bicubic_at(const Mat& grid_vals, int n, double sy, double sx) {
    double acc = 0.0;
    int by = static_cast<int>(std::floor(sy));
    int bx = static_cast<int>(std::floor(sx));
    for (int ky = -1; ky <= 2; ++ky)
        for (int kx = -1; kx <= 2; ++kx) {
            int iy = std::clamp(by + ky, 0, n - 1);
            int ix = std::clamp(bx + kx, 0, n - 1);
            acc += catmull_rom(sy - (by + ky)) * catmull_rom(sx - (bx + kx)) *
                   grid_vals(static_cast<Index>(iy) * n + ix, 0);
        }
    return acc;
}

// Eigendecomposition of the explicit sample covariance.
inline Vec covariance_eigenvalues(const Mat& x) {
    Mat centered = x.rowwise() - x.colwise().mean();
    Mat cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Mat> es(cov);
    return es.eigenvalues().reverse();
}

// Normal-equation multi-output ridge with explicit inverse.
inline Mat ridge_normal_equations(const Mat& x_train, const Mat& y_train, const Mat& x_test,
                                  double alpha) {
    Eigen::RowVectorXd xm = x_train.colwise().mean();
    Eigen::RowVectorXd ym = y_train.colwise().mean();
    Mat xc = x_train.rowwise() - xm;
    Mat yc = y_train.rowwise() - ym;
    Mat a = xc.transpose() * xc + alpha * Mat::Identity(x_train.cols(), x_train.cols());
    Mat w = a.inverse() * (xc.transpose() * yc);
    return ((x_test.rowwise() - xm) * w).rowwise() + ym;
}

// Upper critical value of chi-square via the Wilson-Hilferty cube
// approximation; adequate for dof >= 10 at the alpha used in tests.
inline double chi2_critical(double dof, double z_alpha) {
    double t = 1.0 - 2.0 / (9.0 * dof) + z_alpha * std::sqrt(2.0 / (9.0 * dof));
    return dof * t * t * t;
}

}  // namespace oracle
