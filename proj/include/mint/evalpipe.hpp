#pragma once

#include "mint/backbone.hpp"
#include "mint/dataset.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mint::eval {

struct FeatureRecord {
    std::string sample_id;
    Vec z_cls;
    Vec z_st;  // empty when the encoder has no usable ST token
    bool has_st = false;
};

enum class Variant { Cls, St, Sum, Concat };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& s);

Vec representation_variant(const FeatureRecord& rec, Variant v);

// One record per tile, ordered by sample_id. mask_st drops the ST token
// from attention and outputs (used for the CLS-on-ST ablation encoders).
template <typename S>
std::vector<FeatureRecord> extract_features(const Backbone<S>& encoder,
                                            const std::vector<const SpotSample*>& samples, bool mask_st) {
    std::vector<const SpotSample*> ordered = samples;
    std::sort(ordered.begin(), ordered.end(),
              [](const SpotSample* a, const SpotSample* b) { return a->id < b->id; });
    std::vector<FeatureRecord> out;
    out.reserve(ordered.size());
    for (const SpotSample* s : ordered) {
        Image view = s->tile;
        if (view.w != encoder.cfg.image_size)
            view = resize_bilinear(view, encoder.cfg.image_size, encoder.cfg.image_size);
        auto fwd = encoder.forward(view, mask_st && encoder.cfg.has_st_token, nullptr);
        FeatureRecord rec;
        rec.sample_id = s->id;
        rec.z_cls = fwd.z_cls.template cast<double>();
        rec.has_st = fwd.has_st;
        if (fwd.has_st) rec.z_st = fwd.z_st.template cast<double>();
        out.push_back(std::move(rec));
    }
    return out;
}

struct PcaModel {
    Vec mean;        // (F)
    Mat components;  // (F, n_components), columns ordered by singular value
    Vec singular_values;
};

// Mean-centered projection onto the top right-singular directions. Sign
// convention: the largest-magnitude loading of each component is positive.
// All-identical rows yield zero scores.
std::pair<Mat, PcaModel> pca_fit_transform(const Mat& x, Index n_components);
Mat pca_transform(const PcaModel& model, const Mat& x);

// Multi-output ridge on centered data, intercept added back.
Mat ridge_fit_predict(const Mat& x_train, const Mat& y_train, const Mat& x_test, double alpha);

// Sample Pearson correlation; constant input yields 0 with the degenerate
// flag set.
double pearson(const Vec& x, const Vec& y, bool* degenerate = nullptr);

struct BenchmarkProtocol {
    Index n_pca = 256;  // effective value is min(n_pca, S_train - 1, F)
    double alpha = 1.0;
    Index n_eval_hvg = 20;
    uint64_t split_seed = 7;
    double test_frac = 0.5;
};

struct VariantResult {
    std::vector<double> per_gene_pearson;
    std::vector<uint8_t> degenerate;  // flagged genes scored 0
    double mean_pearson = 0.0;
};

// PCA on train features, ridge to the top holdout-train HVGs, per-gene
// Pearson on the test split.
VariantResult benchmark_expression(const Mat& features, const Mat& expression,
                                   const BenchmarkProtocol& protocol);

struct ProbeProtocol {
    uint64_t split_seed = 7;
    double test_frac = 0.5;
    double l2 = 1e-3;
    int iterations = 400;
    double lr = 0.1;
};

// Multinomial logistic probe on frozen features; balanced accuracy.
double morphology_probe(const Mat& features, const std::vector<int>& labels, const ProbeProtocol& protocol);

// Inputs for the qualitative Table-style verdicts. expr_* are expression
// benchmark means, probe_* morphology probe accuracies.
struct OrderingInputs {
    double expr_cls = 0.0, expr_st = 0.0, expr_sum = 0.0, expr_concat = 0.0;
    double probe_cls = 0.0, probe_st = 0.0, probe_sum = 0.0, probe_concat = 0.0;
    std::optional<double> expr_frozen;
    std::optional<double> probe_frozen;
};

struct OrderingVerdicts {
    bool specialization = false;   // ST beats CLS on expression, CLS beats ST on probe
    bool sum_beats_cls = false;    // same dimensionality, strictly better expression
    bool concat_best = false;      // concat within tie margin of the best on both axes
    bool cls_preserved = false;    // MINT CLS probe within margin of the frozen baseline
    double concat_margin = 0.005;
    double preserve_margin = 0.01;
    bool all_true() const { return specialization && sum_beats_cls && concat_best && cls_preserved; }
};

OrderingVerdicts ordering_report(const OrderingInputs& in, double concat_margin = 0.005,
                                 double preserve_margin = 0.01);

}  // namespace mint::eval
