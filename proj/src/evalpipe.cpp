#include "mint/evalpipe.hpp"

#include "mint/rng.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace mint::eval {

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::Cls: return "cls";
        case Variant::St: return "st";
        case Variant::Sum: return "sum";
        case Variant::Concat: return "concat";
    }
    throw RuntimeFailure("unknown variant");
}

Variant variant_from_name(const std::string& s) {
    if (s == "cls") return Variant::Cls;
    if (s == "st") return Variant::St;
    if (s == "sum") return Variant::Sum;
    if (s == "concat") return Variant::Concat;
    throw ValidationError("unknown representation variant: " + s);
}

Vec representation_variant(const FeatureRecord& rec, Variant v) {
    if (v == Variant::Cls) return rec.z_cls;
    require(rec.has_st, "variant '" + variant_name(v) + "' needs an ST token feature");
    switch (v) {
        case Variant::St: return rec.z_st;
        case Variant::Sum: return rec.z_cls + rec.z_st;
        case Variant::Concat: {
            Vec out(rec.z_cls.size() + rec.z_st.size());
            out << rec.z_cls, rec.z_st;
            return out;
        }
        default: return rec.z_cls;
    }
}

std::pair<Mat, PcaModel> pca_fit_transform(const Mat& x, Index n_components) {
    require(n_components >= 1, "n_components must be >= 1");
    require(n_components <= std::min(x.rows(), x.cols()),
            "n_components exceeds min(samples, features)");
    PcaModel model;
    model.mean = x.colwise().mean().transpose();
    Mat centered = x.rowwise() - model.mean.transpose();

    if (centered.cwiseAbs().maxCoeff() < 1e-12) {
        model.components = Mat::Zero(x.cols(), n_components);
        model.singular_values = Vec::Zero(n_components);
        return {Mat::Zero(x.rows(), n_components), model};
    }

    Eigen::BDCSVD<Mat> svd(centered, Eigen::ComputeThinV);
    model.components = svd.matrixV().leftCols(n_components);
    model.singular_values = svd.singularValues().head(n_components);
    // Deterministic sign: the largest-magnitude loading points positive.
    for (Index c = 0; c < n_components; ++c) {
        Index arg = 0;
        model.components.col(c).cwiseAbs().maxCoeff(&arg);
        if (model.components(arg, c) < 0.0) model.components.col(c) = -model.components.col(c);
    }
    return {centered * model.components, model};
}

Mat pca_transform(const PcaModel& model, const Mat& x) {
    return (x.rowwise() - model.mean.transpose()) * model.components;
}

Mat ridge_fit_predict(const Mat& x_train, const Mat& y_train, const Mat& x_test, double alpha) {
    require(alpha >= 0.0, "alpha must be non-negative");
    require(x_train.rows() == y_train.rows(), "X/Y row mismatch");
    require(x_test.cols() == x_train.cols(), "train/test feature dimension mismatch");

    Vec x_mean = x_train.colwise().mean().transpose();
    Vec y_mean = y_train.colwise().mean().transpose();
    Mat xc = x_train.rowwise() - x_mean.transpose();
    Mat yc = y_train.rowwise() - y_mean.transpose();

    Mat gram = xc.transpose() * xc;
    gram.diagonal().array() += alpha;
    Mat w;
    if (alpha == 0.0) {
        Eigen::ColPivHouseholderQR<Mat> qr(gram);
        if (qr.rank() < gram.rows())
            throw ValidationError("ridge with alpha=0 on a rank-deficient design is singular");
        w = qr.solve(xc.transpose() * yc);
    } else {
        w = Eigen::LLT<Mat>(gram).solve(xc.transpose() * yc);
    }
    return ((x_test.rowwise() - x_mean.transpose()) * w).rowwise() + y_mean.transpose();
}

double pearson(const Vec& x, const Vec& y, bool* degenerate) {
    require(x.size() == y.size(), "pearson length mismatch");
    require(x.size() >= 2, "pearson needs at least 2 points");
    if (degenerate) *degenerate = false;
    const double n = static_cast<double>(x.size());
    double mx = x.mean(), my = y.mean();
    Vec xc = x.array() - mx;
    Vec yc = y.array() - my;
    double sx = xc.squaredNorm() / (n - 1.0);
    double sy = yc.squaredNorm() / (n - 1.0);
    if (sx <= 0.0 || sy <= 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    return xc.dot(yc) / ((n - 1.0) * std::sqrt(sx) * std::sqrt(sy));
}

namespace {

std::pair<std::vector<Index>, std::vector<Index>> split_indices(Index n, double test_frac,
                                                                uint64_t seed) {
    std::vector<Index> idx(static_cast<size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng = Rng::stream(seed, "eval-split");
    for (size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
    Index n_test = std::max<Index>(1, static_cast<Index>(std::llround(test_frac * static_cast<double>(n))));
    require(n_test < n, "degenerate split: no training samples");
    std::vector<Index> test(idx.begin(), idx.begin() + n_test);
    std::vector<Index> train(idx.begin() + n_test, idx.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {train, test};
}

Mat take_rows(const Mat& x, const std::vector<Index>& rows) {
    Mat out(static_cast<Index>(rows.size()), x.cols());
    for (size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = x.row(rows[i]);
    return out;
}

}  // namespace

VariantResult benchmark_expression(const Mat& features, const Mat& expression,
                                   const BenchmarkProtocol& protocol) {
    require(features.rows() == expression.rows(), "feature/expression row mismatch");
    require(features.rows() >= 4, "too few samples for a split");
    require(protocol.n_eval_hvg >= 1 && protocol.n_eval_hvg <= expression.cols(),
            "n_eval_hvg outside the vocabulary");

    auto [train, test] = split_indices(features.rows(), protocol.test_frac, protocol.split_seed);
    Mat x_train = take_rows(features, train);
    Mat x_test = take_rows(features, test);
    Mat y_all_train = take_rows(expression, train);
    Mat y_all_test = take_rows(expression, test);

    // Evaluation genes: HVGs of the train split only.
    std::vector<uint8_t> measured(static_cast<size_t>(expression.cols()), 1);
    std::vector<Index> hvg = compute_hvg(y_all_train, measured, protocol.n_eval_hvg);

    Mat y_train(y_all_train.rows(), protocol.n_eval_hvg);
    Mat y_test(y_all_test.rows(), protocol.n_eval_hvg);
    for (Index g = 0; g < protocol.n_eval_hvg; ++g) {
        y_train.col(g) = y_all_train.col(hvg[static_cast<size_t>(g)]);
        y_test.col(g) = y_all_test.col(hvg[static_cast<size_t>(g)]);
    }

    Index n_pca = std::min({protocol.n_pca, static_cast<Index>(train.size()) - 1, features.cols()});
    auto [scores_train, pca] = pca_fit_transform(x_train, n_pca);
    Mat scores_test = pca_transform(pca, x_test);
    Mat pred = ridge_fit_predict(scores_train, y_train, scores_test, protocol.alpha);

    VariantResult out;
    out.per_gene_pearson.resize(static_cast<size_t>(protocol.n_eval_hvg));
    out.degenerate.resize(static_cast<size_t>(protocol.n_eval_hvg));
    double sum = 0.0;
    for (Index g = 0; g < protocol.n_eval_hvg; ++g) {
        bool degen = false;
        double r = pearson(pred.col(g), y_test.col(g), &degen);
        out.per_gene_pearson[static_cast<size_t>(g)] = r;
        out.degenerate[static_cast<size_t>(g)] = degen ? 1 : 0;
        sum += r;
    }
    out.mean_pearson = sum / static_cast<double>(protocol.n_eval_hvg);
    return out;
}

double morphology_probe(const Mat& features, const std::vector<int>& labels,
                        const ProbeProtocol& protocol) {
    require(features.rows() == static_cast<Index>(labels.size()), "feature/label count mismatch");
    int n_classes = 0;
    for (int l : labels) {
        require(l >= 0, "labels must be non-negative");
        n_classes = std::max(n_classes, l + 1);
    }
    require(n_classes >= 2, "probe needs at least 2 classes");

    auto [train, test] = split_indices(features.rows(), protocol.test_frac, protocol.split_seed);
    {
        std::set<int> train_classes, test_classes;
        for (Index i : train) train_classes.insert(labels[static_cast<size_t>(i)]);
        for (Index i : test) test_classes.insert(labels[static_cast<size_t>(i)]);
        require(train_classes.size() >= 2 && test_classes.size() >= 2,
                "single-class split; probe undefined");
    }

    Mat x_train = take_rows(features, train);
    Mat x_test = take_rows(features, test);

    // Standardize on train statistics.
    Vec mean = x_train.colwise().mean().transpose();
    Vec stdev = ((x_train.rowwise() - mean.transpose()).array().square().colwise().sum() /
                 std::max<double>(1.0, static_cast<double>(x_train.rows() - 1)))
                    .sqrt()
                    .transpose();
    for (Index f = 0; f < stdev.size(); ++f)
        if (stdev[f] < 1e-12) stdev[f] = 1.0;
    Mat xs_train = (x_train.rowwise() - mean.transpose()).array().rowwise() / stdev.transpose().array();
    Mat xs_test = (x_test.rowwise() - mean.transpose()).array().rowwise() / stdev.transpose().array();

    // Full-batch softmax regression from zero init; convex, so the result
    // is deterministic without any RNG.
    const Index f_dim = xs_train.cols();
    Mat w = Mat::Zero(n_classes, f_dim);
    Vec b = Vec::Zero(n_classes);
    Mat mw = Mat::Zero(n_classes, f_dim), vw = Mat::Zero(n_classes, f_dim);
    Vec mb = Vec::Zero(n_classes), vb = Vec::Zero(n_classes);
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    const double inv_n = 1.0 / static_cast<double>(xs_train.rows());

    for (int it = 1; it <= protocol.iterations; ++it) {
        Mat logits = (xs_train * w.transpose()).rowwise() + b.transpose();
        Mat probs(logits.rows(), logits.cols());
        for (Index i = 0; i < logits.rows(); ++i) {
            double mx = logits.row(i).maxCoeff();
            probs.row(i) = (logits.row(i).array() - mx).exp();
            probs.row(i) /= probs.row(i).sum();
        }
        for (Index i = 0; i < logits.rows(); ++i)
            probs(i, labels[static_cast<size_t>(train[static_cast<size_t>(i)])]) -= 1.0;
        Mat gw = probs.transpose() * xs_train * inv_n + protocol.l2 * w;
        Vec gb = probs.colwise().sum().transpose() * inv_n;

        mw = beta1 * mw + (1 - beta1) * gw;
        vw = beta2 * vw + (1 - beta2) * gw.cwiseProduct(gw);
        mb = beta1 * mb + (1 - beta1) * gb;
        vb = beta2 * vb + (1 - beta2) * gb.cwiseProduct(gb);
        double c1 = 1.0 - std::pow(beta1, it), c2 = 1.0 - std::pow(beta2, it);
        w -= protocol.lr * ((mw / c1).array() / ((vw / c2).array().sqrt() + eps)).matrix();
        b -= protocol.lr * ((mb / c1).array() / ((vb / c2).array().sqrt() + eps)).matrix();
    }

    // Balanced accuracy: mean per-class recall over classes present in test.
    Vec correct = Vec::Zero(n_classes), count = Vec::Zero(n_classes);
    Mat logits = (xs_test * w.transpose()).rowwise() + b.transpose();
    for (Index i = 0; i < logits.rows(); ++i) {
        Index pred = 0;
        logits.row(i).maxCoeff(&pred);
        int truth = labels[static_cast<size_t>(test[static_cast<size_t>(i)])];
        count[truth] += 1.0;
        if (static_cast<int>(pred) == truth) correct[truth] += 1.0;
    }
    double acc = 0.0;
    int present = 0;
    for (int c = 0; c < n_classes; ++c)
        if (count[c] > 0) {
            acc += correct[c] / count[c];
            ++present;
        }
    return acc / static_cast<double>(present);
}

OrderingVerdicts ordering_report(const OrderingInputs& in, double concat_margin,
                                 double preserve_margin) {
    OrderingVerdicts v;
    v.concat_margin = concat_margin;
    v.preserve_margin = preserve_margin;
    v.specialization = in.expr_st > in.expr_cls && in.probe_cls > in.probe_st;
    v.sum_beats_cls = in.expr_sum > in.expr_cls;
    double expr_best = std::max({in.expr_cls, in.expr_st, in.expr_sum});
    double probe_best = std::max({in.probe_cls, in.probe_st, in.probe_sum});
    v.concat_best = in.expr_concat >= expr_best - concat_margin &&
                    in.probe_concat >= probe_best - concat_margin;
    if (in.probe_frozen)
        v.cls_preserved = std::abs(in.probe_cls - *in.probe_frozen) <= preserve_margin;
    else
        v.cls_preserved = true;  // no baseline supplied, nothing to violate
    return v;
}

}  // namespace mint::eval
