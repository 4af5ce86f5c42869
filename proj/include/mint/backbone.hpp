#pragma once

#include "mint/common.hpp"
#include "mint/image.hpp"
#include "mint/nn.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace mint {

struct BackboneConfig {
    int image_size = 64;
    int patch_size = 16;
    int embed_dim = 64;
    int depth = 4;
    int n_heads = 4;
    double mlp_ratio = 4.0;
    bool has_st_token = false;
    bool st_pos_embed = false;  // the ST token is aspatial by default

    int grid() const { return image_size / patch_size; }
    int n_patches() const { return grid() * grid(); }

    void validate() const {
        require(image_size > 0 && patch_size > 0 && image_size % patch_size == 0,
                "image_size must be divisible by patch_size");
        require(embed_dim % n_heads == 0, "embed_dim must be divisible by n_heads");
        require(depth >= 1 && n_heads >= 1, "depth and n_heads must be >= 1");
    }
};

// Dense bicubic (Catmull-Rom) resampling matrix from an n x n grid to an
// m x m grid, pixel-center mapping, clamped borders. Row r of the result
// holds the source weights of output cell r; rows sum to 1. n == m yields
// the exact identity.
Mat bicubic_grid_matrix(int n, int m);

// Standalone positional-table interpolation: row 0 (CLS) passes through,
// the n*n grid rows are resampled to m*m.
Mat interpolate_pos_embed(const Mat& pos_table, int target_grid);

namespace nn {

template <typename S>
struct AttentionCache {
    MatX<S> x_ln;               // input after pre-norm, (T, D)
    MatX<S> qkv;                // (T, 3D)
    std::vector<MatX<S>> attn;  // per head, (T, T)
    MatX<S> concat_out;         // (T, D) pre-projection
    bool mask_st = false;
    Index st_row = -1;
};

template <typename S>
struct Attention {
    Linear<S> qkv;
    Linear<S> proj;
    int n_heads = 1;

    void setup(Index dim, int heads, const std::string& name, uint64_t seed) {
        n_heads = heads;
        qkv.setup(3 * dim, dim, name + ".qkv", seed);
        proj.setup(dim, dim, name + ".proj", seed);
    }

    MatX<S> forward(const MatX<S>& x, bool mask_st, Index st_row, AttentionCache<S>& c) const {
        const Index t_count = x.rows(), dim = x.cols();
        const Index dh = dim / n_heads;
        const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));
        c.x_ln = x;
        c.qkv = qkv.forward(x);
        c.mask_st = mask_st;
        c.st_row = st_row;
        c.attn.assign(static_cast<size_t>(n_heads), MatX<S>());
        c.concat_out.resize(t_count, dim);
        const S neg_inf = -std::numeric_limits<S>::infinity();
        for (int h = 0; h < n_heads; ++h) {
            auto q = c.qkv.block(0, h * dh, t_count, dh);
            auto k = c.qkv.block(0, dim + h * dh, t_count, dh);
            auto v = c.qkv.block(0, 2 * dim + h * dh, t_count, dh);
            MatX<S> scores = (q * k.transpose()) * scale;
            if (mask_st && st_row >= 0) {
                // No token other than ST itself may attend to ST; exp(-inf)
                // contributes an exact zero, so the remaining weights match
                // the unextended model bit-for-bit up to summation order.
                for (Index r = 0; r < t_count; ++r)
                    if (r != st_row) scores(r, st_row) = neg_inf;
            }
            c.attn[static_cast<size_t>(h)] = softmax_rows(scores);
            c.concat_out.block(0, h * dh, t_count, dh).noalias() = c.attn[static_cast<size_t>(h)] * v;
        }
        return proj.forward(c.concat_out);
    }

    MatX<S> backward(const AttentionCache<S>& c, const MatX<S>& dy) {
        const Index t_count = c.x_ln.rows(), dim = c.x_ln.cols();
        const Index dh = dim / n_heads;
        const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));
        MatX<S> d_concat = proj.backward(c.concat_out, dy);
        MatX<S> d_qkv = MatX<S>::Zero(t_count, 3 * dim);
        for (int h = 0; h < n_heads; ++h) {
            auto q = c.qkv.block(0, h * dh, t_count, dh);
            auto k = c.qkv.block(0, dim + h * dh, t_count, dh);
            auto v = c.qkv.block(0, 2 * dim + h * dh, t_count, dh);
            const MatX<S>& a = c.attn[static_cast<size_t>(h)];
            auto d_out = d_concat.block(0, h * dh, t_count, dh);

            MatX<S> d_a = d_out * v.transpose();
            d_qkv.block(0, 2 * dim + h * dh, t_count, dh).noalias() = a.transpose() * d_out;
            // Softmax backward; masked cells have a == 0 and drop out.
            MatX<S> d_scores(t_count, t_count);
            for (Index r = 0; r < t_count; ++r) {
                S dot = a.row(r).dot(d_a.row(r));
                d_scores.row(r) = a.row(r).cwiseProduct((d_a.row(r).array() - dot).matrix());
            }
            d_scores *= scale;
            d_qkv.block(0, h * dh, t_count, dh).noalias() = d_scores * k;
            d_qkv.block(0, dim + h * dh, t_count, dh).noalias() = d_scores.transpose() * q;
        }
        return qkv.backward(c.x_ln, d_qkv);
    }

    void collect(ParamList<S>& out) {
        qkv.collect(out);
        proj.collect(out);
    }
};

template <typename S>
struct BlockCache {
    LayerNormCache<S> ln1;
    AttentionCache<S> attn;
    MatX<S> x_in;
    MatX<S> x_mid;
    LayerNormCache<S> ln2;
    MlpCache<S> mlp;
};

// Pre-norm transformer block.
template <typename S>
struct Block {
    LayerNorm<S> ln1;
    Attention<S> attn;
    LayerNorm<S> ln2;
    Mlp<S> mlp;

    void setup(Index dim, int heads, double mlp_ratio, const std::string& name, uint64_t seed) {
        ln1.setup(dim, name + ".ln1");
        attn.setup(dim, heads, name + ".attn", seed);
        ln2.setup(dim, name + ".ln2");
        mlp.setup(dim, static_cast<Index>(std::lround(mlp_ratio * static_cast<double>(dim))), dim,
                  name + ".mlp", seed);
    }

    MatX<S> forward(const MatX<S>& x, bool mask_st, Index st_row, BlockCache<S>& c) const {
        c.x_in = x;
        MatX<S> h = attn.forward(ln1.forward(x, c.ln1), mask_st, st_row, c.attn);
        c.x_mid = x + h;
        MatX<S> m = mlp.forward(ln2.forward(c.x_mid, c.ln2), c.mlp);
        return c.x_mid + m;
    }

    MatX<S> backward(const BlockCache<S>& c, const MatX<S>& dy) {
        MatX<S> d_mid = dy + ln2.backward(c.ln2, mlp.backward(c.mlp, dy));
        return d_mid + ln1.backward(c.ln1, attn.backward(c.attn, d_mid));
    }

    void collect(ParamList<S>& out) {
        ln1.collect(out);
        attn.collect(out);
        ln2.collect(out);
        mlp.collect(out);
    }
};

}  // namespace nn

template <typename S>
struct ForwardOutput {
    VecX<S> z_cls;
    VecX<S> z_st;  // empty when the model has no ST token or it is masked
    MatX<S> z_pat;
    bool has_st = false;
};

template <typename S>
struct BackboneCache {
    MatX<S> patches;  // (N', K) normalized pixels
    MatX<S> interp;   // (m*m, n*n) grid resampling weights
    std::vector<nn::BlockCache<S>> blocks;
    MatX<S> x_final_in;
    nn::LayerNormCache<S> final_ln;
    bool mask_st = false;
    Index t_count = 0;
    Index n_prefix = 0;  // 1 (CLS) or 2 (CLS+ST)
};

// ViT with the optional learnable ST token in slot 1 of the sequence
// [CLS, ST, patch...]. The token takes part in full self-attention; it has
// no positional entry.
template <typename S>
struct Backbone {
    BackboneConfig cfg;
    nn::Linear<S> patch_embed;
    nn::Tensor<S> cls_token;  // (D, 1)
    nn::Tensor<S> st_token;   // (D, 1), used iff cfg.has_st_token
    nn::Tensor<S> pos_embed;  // (1 + N, D)
    std::vector<nn::Block<S>> blocks;
    nn::LayerNorm<S> final_norm;

    void setup(const BackboneConfig& c, uint64_t seed, const std::string& prefix = "backbone") {
        c.validate();
        cfg = c;
        const Index dim = cfg.embed_dim;
        patch_embed.setup(dim, static_cast<Index>(cfg.patch_size) * cfg.patch_size * 3, prefix + ".patch_embed",
                          seed);
        cls_token.setup(dim, 1, prefix + ".cls_token");
        nn::init_trunc_normal(cls_token, seed, 0.02);
        st_token.setup(dim, 1, prefix + ".st_token");
        if (cfg.has_st_token) nn::init_trunc_normal(st_token, seed, 0.02);
        pos_embed.setup(1 + cfg.n_patches(), dim, prefix + ".pos_embed");
        nn::init_trunc_normal(pos_embed, seed, 0.02);
        blocks.resize(static_cast<size_t>(cfg.depth));
        for (int i = 0; i < cfg.depth; ++i)
            blocks[static_cast<size_t>(i)].setup(dim, cfg.n_heads, cfg.mlp_ratio,
                                                 prefix + ".blocks." + std::to_string(i), seed);
        final_norm.setup(dim, prefix + ".final_norm");
    }

    Index param_count() const {
        Index n = 0;
        auto self = const_cast<Backbone<S>*>(this);
        nn::ParamList<S> ps;
        self->collect(ps);
        for (auto* p : ps) n += p->v.size();
        return n;
    }

    void collect(nn::ParamList<S>& out) {
        patch_embed.collect(out);
        out.push_back(&cls_token);
        if (cfg.has_st_token) out.push_back(&st_token);
        out.push_back(&pos_embed);
        for (auto& b : blocks) b.collect(out);
        final_norm.collect(out);
    }

    // Flattens patch pixels in (y, x, channel) order, shifted to [-1, 1].
    MatX<S> patchify(const Image& img) const {
        const int ps = cfg.patch_size;
        const int g = img.w / ps;
        MatX<S> out(static_cast<Index>(g) * g, static_cast<Index>(ps) * ps * 3);
        for (int py = 0; py < g; ++py)
            for (int px = 0; px < g; ++px) {
                Index row = static_cast<Index>(py) * g + px;
                Index col = 0;
                for (int y = 0; y < ps; ++y)
                    for (int x = 0; x < ps; ++x)
                        for (int k = 0; k < 3; ++k)
                            out(row, col++) =
                                static_cast<S>((img.at(py * ps + y, px * ps + x, k) - 0.5f) * 2.0f);
            }
        return out;
    }

    ForwardOutput<S> forward(const Image& crop, bool debug_mask_st, BackboneCache<S>* cache) const {
        require(crop.c == 3, "backbone expects 3-channel input");
        require(crop.w == crop.h, "crops must be square");
        require(crop.w % cfg.patch_size == 0, "crop size must be divisible by patch_size");
        require(crop.finite(), "non-finite input image");
        if (debug_mask_st) require(cfg.has_st_token, "debug_mask_st requires an ST token");

        const Index dim = cfg.embed_dim;
        const int m = crop.w / cfg.patch_size;
        const int n = cfg.grid();
        const Index n_tok = static_cast<Index>(m) * m;
        const Index n_prefix = cfg.has_st_token ? 2 : 1;
        const Index t_count = n_prefix + n_tok;
        const Index st_row = cfg.has_st_token ? 1 : -1;

        BackboneCache<S> local;
        BackboneCache<S>& c = cache ? *cache : local;
        c.mask_st = debug_mask_st;
        c.t_count = t_count;
        c.n_prefix = n_prefix;

        c.patches = patchify(crop);
        MatX<S> emb = patch_embed.forward(c.patches);

        c.interp = bicubic_grid_matrix(n, m).template cast<S>();
        MatX<S> pos_grid = c.interp * pos_embed.v.bottomRows(static_cast<Index>(n) * n);

        MatX<S> x(t_count, dim);
        x.row(0) = cls_token.v.col(0).transpose() + pos_embed.v.row(0);
        if (cfg.has_st_token) {
            x.row(1) = st_token.v.col(0).transpose();
            if (cfg.st_pos_embed) x.row(1) += pos_embed.v.row(0);
        }
        x.bottomRows(n_tok) = emb + pos_grid;

        c.blocks.resize(blocks.size());
        for (size_t i = 0; i < blocks.size(); ++i)
            x = blocks[i].forward(x, debug_mask_st, st_row, c.blocks[i]);
        c.x_final_in = x;
        MatX<S> y = final_norm.forward(x, c.final_ln);

        ForwardOutput<S> out;
        out.z_cls = y.row(0).transpose();
        out.has_st = cfg.has_st_token && !debug_mask_st;
        if (out.has_st) out.z_st = y.row(1).transpose();
        out.z_pat = y.bottomRows(n_tok);
        require(out.z_cls.allFinite() && out.z_pat.allFinite(), "non-finite backbone output");
        return out;
    }

    // d_tokens is the gradient at the post-norm token matrix (T, D).
    void backward(const BackboneCache<S>& c, const MatX<S>& d_tokens) {
        const Index st_row = cfg.has_st_token ? 1 : -1;
        MatX<S> dx = final_norm.backward(c.final_ln, d_tokens);
        for (size_t i = blocks.size(); i-- > 0;) dx = blocks[i].backward(c.blocks[i], dx);

        cls_token.g.col(0) += dx.row(0).transpose();
        pos_embed.g.row(0) += dx.row(0);
        if (cfg.has_st_token) {
            st_token.g.col(0) += dx.row(st_row).transpose();
            if (cfg.st_pos_embed) pos_embed.g.row(0) += dx.row(st_row);
        }
        const Index n_tok = c.t_count - c.n_prefix;
        MatX<S> d_patch_tokens = dx.bottomRows(n_tok);
        pos_embed.g.bottomRows(pos_embed.v.rows() - 1).noalias() += c.interp.transpose() * d_patch_tokens;
        patch_embed.backward(c.patches, d_patch_tokens);
    }
};

// Returns a copy with a freshly initialized ST token (truncated normal,
// std 0.02) and no extra positional entry; every other weight is shared
// bitwise. Errors if params already carry the token.
template <typename S>
Backbone<S> extend_with_st_token(const Backbone<S>& base, uint64_t seed) {
    require(!base.cfg.has_st_token, "parameters already contain an ST token");
    Backbone<S> out = base;
    out.cfg.has_st_token = true;
    nn::init_trunc_normal(out.st_token, seed, 0.02);
    return out;
}

}  // namespace mint
