#include "mint/dataset.hpp"

#include "mint/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_set>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace mint {

void GeneVocabulary::validate() const {
    std::unordered_set<std::string> seen;
    for (const auto& n : names) {
        require(!n.empty(), "vocabulary contains an empty gene name");
        require(seen.insert(n).second, "duplicate gene name in vocabulary: " + n);
    }
}

void SpotSample::validate(Index vocab_size, int tile_size) const {
    require(expression.size() == vocab_size, id + ": expression length does not match vocabulary");
    require(static_cast<Index>(measured.size()) == vocab_size, id + ": measured mask length mismatch");
    require(tile.h == tile_size && tile.w == tile_size, id + ": tile dimensions do not match tile_size");
    for (Index g = 0; g < expression.size(); ++g) {
        require(expression[g] >= 0.0, id + ": negative expression value");
        if (!measured[static_cast<size_t>(g)])
            require(expression[g] == 0.0, id + ": expression nonzero outside measured mask");
    }
}

void XeniumSample::validate(Index xen_vocab_size, int tile_size) const {
    require(static_cast<Index>(panel.size()) == xen_vocab_size, id + ": panel mask length mismatch");
    require(tile.h == tile_size && tile.w == tile_size, id + ": tile dimensions do not match tile_size");
    for (const Transcript& t : transcripts) {
        require(t.x >= 0.0 && t.x < tile.w && t.y >= 0.0 && t.y < tile.h,
                id + ": transcript coordinates out of tile bounds");
        require(t.gene < panel.size() && panel[t.gene], id + ": transcript gene outside panel");
    }
}

Index PatchTargetGrid::n_positive() const {
    return static_cast<Index>(std::count(positive.begin(), positive.end(), uint8_t{1}));
}

std::string modality_name(Modality m) { return m == Modality::Spot ? "spot" : "xenium"; }

Modality modality_from_name(const std::string& s) {
    if (s == "spot") return Modality::Spot;
    if (s == "xenium") return Modality::Xenium;
    throw ValidationError("unknown modality: " + s);
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("manifest not found: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("manifest parse error in " + path + ": " + e.what());
    }

    DatasetManifest m;
    m.base_dir = fs::path(path).parent_path().string();
    try {
        m.version = j.at("version").get<int>();
        m.tile_size = j.at("tile_size").get<int>();
        m.vocab_path = j.at("vocab").get<std::string>();
        m.split = j.at("split").get<std::string>();
        size_t idx = 0;
        for (const auto& je : j.at("entries")) {
            ManifestEntry e;
            e.sample_path = je.at("path").get<std::string>();
            e.modality = modality_from_name(je.at("modality").get<std::string>());
            e.slide_id = je.at("slide_id").get<std::string>();
            fs::path full = fs::path(m.base_dir) / e.sample_path;
            if (!fs::exists(full))
                throw ValidationError("manifest entry " + std::to_string(idx) +
                                      " references a missing file: " + full.string());
            m.entries.push_back(std::move(e));
            ++idx;
        }
    } catch (const json::exception& e) {
        throw ValidationError("malformed manifest " + path + ": " + e.what());
    }
    require(m.split == "train" || m.split == "eval", "manifest split must be train or eval");
    require(m.tile_size > 0, "manifest tile_size must be positive");
    fs::path vocab_full = fs::path(m.base_dir) / m.vocab_path;
    if (!fs::exists(vocab_full)) throw ValidationError("manifest vocabulary file missing: " + vocab_full.string());

    // Payload/modality/vocabulary consistency, reported with entry index.
    VocabFile vocab = load_vocab(vocab_full.string());
    for (size_t i = 0; i < m.entries.size(); ++i) {
        const auto& e = m.entries[i];
        ArrayArchive a = ArrayArchive::load((fs::path(m.base_dir) / e.sample_path).string());
        bool is_xenium = a.has("transcripts_x");
        bool want_xenium = e.modality == Modality::Xenium;
        if (is_xenium != want_xenium)
            throw ValidationError("manifest entry " + std::to_string(i) + " (" + e.sample_path +
                                  "): payload modality does not match declared " + modality_name(e.modality));
        if (is_xenium) {
            if (static_cast<Index>(a.entry("panel").count()) != vocab.xenium_genes.size())
                throw ValidationError("manifest entry " + std::to_string(i) + " (" + e.sample_path +
                                      "): panel length does not match the xenium vocabulary");
        } else {
            if (a.get_i64("expr_length").at(0) != vocab.genes.size())
                throw ValidationError("manifest entry " + std::to_string(i) + " (" + e.sample_path +
                                      "): expression length does not match the vocabulary");
        }
    }
    return m;
}

void save_manifest(const DatasetManifest& m, const std::string& path) {
    json j;
    j["version"] = m.version;
    j["tile_size"] = m.tile_size;
    j["vocab"] = m.vocab_path;
    j["split"] = m.split;
    j["entries"] = json::array();
    for (const auto& e : m.entries) {
        j["entries"].push_back({{"path", e.sample_path},
                                {"modality", modality_name(e.modality)},
                                {"slide_id", e.slide_id}});
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw RuntimeFailure("cannot write manifest: " + path);
    out << j.dump(2) << "\n";
}

VocabFile load_vocab(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("vocabulary file not found: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("vocabulary parse error: " + std::string(e.what()));
    }
    VocabFile v;
    v.genes.names = j.at("genes").get<std::vector<std::string>>();
    v.xenium_genes.names = j.at("xenium_genes").get<std::vector<std::string>>();
    v.xenium_to_spot = j.at("xenium_to_spot").get<std::vector<uint32_t>>();
    v.genes.validate();
    v.xenium_genes.validate();
    require(v.xenium_to_spot.size() == v.xenium_genes.names.size(),
            "xenium_to_spot length does not match xenium vocabulary");
    for (uint32_t g : v.xenium_to_spot)
        require(g < v.genes.names.size(), "xenium_to_spot index outside spot vocabulary");
    return v;
}

void save_vocab(const VocabFile& v, const std::string& path) {
    json j;
    j["genes"] = v.genes.names;
    j["xenium_genes"] = v.xenium_genes.names;
    j["xenium_to_spot"] = v.xenium_to_spot;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw RuntimeFailure("cannot write vocabulary: " + path);
    out << j.dump(2) << "\n";
}

namespace {

void put_tile(ArrayArchive& a, const Image& tile) {
    a.put_f32_raw("tile", tile.data,
                  {static_cast<uint64_t>(tile.h), static_cast<uint64_t>(tile.w), static_cast<uint64_t>(tile.c)});
}

Image get_tile(const ArrayArchive& a) {
    std::vector<uint64_t> shape;
    std::vector<float> data = a.get_f32_raw("tile", &shape);
    require(shape.size() == 3, "tile must be a 3-d array");
    Image img(static_cast<int>(shape[0]), static_cast<int>(shape[1]), static_cast<int>(shape[2]));
    img.data = std::move(data);
    return img;
}

void put_truth(ArrayArchive& a, const std::optional<Vec>& mixture, int dominant) {
    if (mixture) {
        a.put_vec_f64("truth_mixture", *mixture);
        a.put_i64("truth_dominant", {dominant});
    }
}

void get_truth(const ArrayArchive& a, std::optional<Vec>& mixture, int& dominant) {
    if (a.has("truth_mixture")) {
        mixture = a.get_vec_f64("truth_mixture");
        dominant = static_cast<int>(a.get_i64("truth_dominant").at(0));
    }
}

}  // namespace

void save_spot_sample(const SpotSample& s, const std::string& path) {
    ArrayArchive a;
    a.put_text("id", s.id);
    a.put_text("slide_id", s.slide_id);
    put_tile(a, s.tile);
    // Sparse (index, value) pairs over the vocabulary.
    std::vector<uint32_t> idx;
    Vec vals(s.expression.size());
    Index nz = 0;
    for (Index g = 0; g < s.expression.size(); ++g)
        if (s.expression[g] != 0.0) {
            idx.push_back(static_cast<uint32_t>(g));
            vals[nz++] = s.expression[g];
        }
    a.put_u32("expr_index", idx);
    a.put_vec_f64("expr_value", vals.head(nz));
    a.put_i64("expr_length", {s.expression.size()});
    a.put_u8("measured", s.measured);
    put_truth(a, s.truth_mixture, s.truth_dominant_type);
    a.save(path);
}

SpotSample load_spot_sample(const std::string& path) {
    ArrayArchive a = ArrayArchive::load(path);
    require(!a.has("transcripts_x"), path + ": expected a spot payload, found xenium arrays");
    SpotSample s;
    s.id = a.get_text("id");
    s.slide_id = a.get_text("slide_id");
    s.tile = get_tile(a);
    Index g_total = static_cast<Index>(a.get_i64("expr_length").at(0));
    s.expression = Vec::Zero(g_total);
    std::vector<uint32_t> idx = a.get_u32("expr_index");
    Vec vals = a.get_vec_f64("expr_value");
    require(static_cast<Index>(idx.size()) == vals.size(), path + ": sparse expression index/value mismatch");
    for (size_t i = 0; i < idx.size(); ++i) {
        require(idx[i] < g_total, path + ": sparse expression index out of range");
        s.expression[idx[i]] = vals[static_cast<Index>(i)];
    }
    s.measured = a.get_u8("measured");
    get_truth(a, s.truth_mixture, s.truth_dominant_type);
    return s;
}

void save_xenium_sample(const XeniumSample& s, const std::string& path) {
    ArrayArchive a;
    a.put_text("id", s.id);
    a.put_text("slide_id", s.slide_id);
    put_tile(a, s.tile);
    Vec xs(static_cast<Index>(s.transcripts.size()));
    Vec ys(static_cast<Index>(s.transcripts.size()));
    std::vector<uint32_t> genes(s.transcripts.size());
    for (size_t i = 0; i < s.transcripts.size(); ++i) {
        xs[static_cast<Index>(i)] = s.transcripts[i].x;
        ys[static_cast<Index>(i)] = s.transcripts[i].y;
        genes[i] = s.transcripts[i].gene;
    }
    a.put_vec_f64("transcripts_x", xs);
    a.put_vec_f64("transcripts_y", ys);
    a.put_u32("transcripts_gene", genes);
    a.put_u8("panel", s.panel);
    put_truth(a, s.truth_mixture, s.truth_dominant_type);
    a.save(path);
}

XeniumSample load_xenium_sample(const std::string& path) {
    ArrayArchive a = ArrayArchive::load(path);
    require(a.has("transcripts_x"), path + ": expected a xenium payload");
    XeniumSample s;
    s.id = a.get_text("id");
    s.slide_id = a.get_text("slide_id");
    s.tile = get_tile(a);
    Vec xs = a.get_vec_f64("transcripts_x");
    Vec ys = a.get_vec_f64("transcripts_y");
    std::vector<uint32_t> genes = a.get_u32("transcripts_gene");
    require(xs.size() == ys.size() && static_cast<size_t>(xs.size()) == genes.size(),
            path + ": transcript arrays have inconsistent lengths");
    s.transcripts.resize(genes.size());
    for (size_t i = 0; i < genes.size(); ++i)
        s.transcripts[i] = {xs[static_cast<Index>(i)], ys[static_cast<Index>(i)], genes[i]};
    s.panel = a.get_u8("panel");
    get_truth(a, s.truth_mixture, s.truth_dominant_type);
    return s;
}

Vec normalize_expression(const std::vector<uint64_t>& raw_counts, double target_sum) {
    require(target_sum > 0.0, "target_sum must be positive");
    Index g_total = static_cast<Index>(raw_counts.size());
    double total = 0.0;
    for (uint64_t c : raw_counts) total += static_cast<double>(c);
    Vec out = Vec::Zero(g_total);
    if (total == 0.0) return out;
    for (Index g = 0; g < g_total; ++g)
        out[g] = std::log1p(target_sum * static_cast<double>(raw_counts[static_cast<size_t>(g)]) / total);
    return out;
}

std::vector<Index> compute_hvg(const Mat& expression, const std::vector<uint8_t>& measured, Index k) {
    const Index s_count = expression.rows();
    const Index g_total = expression.cols();
    require(s_count >= 2, "compute_hvg needs at least 2 samples");
    require(static_cast<Index>(measured.size()) == g_total, "measured mask length mismatch");
    std::vector<Index> candidates;
    for (Index g = 0; g < g_total; ++g)
        if (measured[static_cast<size_t>(g)]) candidates.push_back(g);
    require(k <= static_cast<Index>(candidates.size()), "k exceeds the measured gene count");

    std::vector<std::pair<double, Index>> var_idx;
    var_idx.reserve(candidates.size());
    for (Index g : candidates) {
        double mean = expression.col(g).mean();
        double var = (expression.col(g).array() - mean).square().sum() / static_cast<double>(s_count - 1);
        var_idx.emplace_back(var, g);
    }
    std::stable_sort(var_idx.begin(), var_idx.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<Index> out;
    out.reserve(static_cast<size_t>(k));
    for (Index i = 0; i < k; ++i) out.push_back(var_idx[static_cast<size_t>(i)].second);
    return out;
}

std::vector<Index> select_genes_stochastic(const std::vector<Index>& measured,
                                           const std::vector<Index>& hvg, double p_hvg, Rng& rng) {
    require(p_hvg >= 0.0 && p_hvg <= 1.0, "p_hvg must lie in [0,1]");
    std::set<Index> measured_set(measured.begin(), measured.end());
    for (Index g : hvg)
        require(measured_set.count(g) != 0, "hvg list is not a subset of the measured set");
    return rng.bernoulli(p_hvg) ? hvg : measured;
}

GeometryRecord GeometryRecord::identity(int size) {
    GeometryRecord g;
    g.crop_x0 = 0.0;
    g.crop_y0 = 0.0;
    g.crop_w = size;
    g.crop_h = size;
    g.out_w = size;
    g.out_h = size;
    g.flipped = false;
    return g;
}

std::vector<Transcript> apply_geometry_to_points(const std::vector<Transcript>& points,
                                                 const GeometryRecord& g) {
    require(g.crop_w > 0.0 && g.crop_h > 0.0 && g.out_w > 0 && g.out_h > 0,
            "degenerate geometry: zero-size crop or output");
    const double sx = static_cast<double>(g.out_w) / g.crop_w;
    const double sy = static_cast<double>(g.out_h) / g.crop_h;
    std::vector<Transcript> out;
    out.reserve(points.size());
    for (const Transcript& p : points) {
        if (p.x < g.crop_x0 || p.x >= g.crop_x0 + g.crop_w) continue;
        if (p.y < g.crop_y0 || p.y >= g.crop_y0 + g.crop_h) continue;
        double x = (p.x - g.crop_x0) * sx;
        double y = (p.y - g.crop_y0) * sy;
        if (g.flipped) x = static_cast<double>(g.out_w - 1) - x;
        // The flip convention can push points in the last source pixel to
        // x slightly below 0; those leave the frame and are dropped.
        if (x < 0.0 || x >= g.out_w || y < 0.0 || y >= g.out_h) continue;
        out.push_back({x, y, p.gene});
    }
    return out;
}

PatchTargetGrid bin_transcripts_to_patches(const std::vector<Transcript>& transcripts, int tile_size,
                                           int patch_size, Index vocab_size) {
    require(patch_size > 0 && tile_size > 0, "sizes must be positive");
    require(tile_size % patch_size == 0, "tile_size must be divisible by patch_size");
    const int grid = tile_size / patch_size;
    const Index cells = static_cast<Index>(grid) * grid;

    Mat raw = Mat::Zero(cells, vocab_size);
    for (const Transcript& t : transcripts) {
        if (t.x < 0.0 || t.x >= tile_size || t.y < 0.0 || t.y >= tile_size) continue;
        int cx = static_cast<int>(std::floor(t.x / patch_size));
        int cy = static_cast<int>(std::floor(t.y / patch_size));
        require(t.gene < static_cast<uint64_t>(vocab_size), "transcript gene index outside vocabulary");
        raw(static_cast<Index>(cy) * grid + cx, static_cast<Index>(t.gene)) += 1.0;
    }

    PatchTargetGrid out;
    out.grid = grid;
    out.counts = raw.array().log1p();
    out.positive.resize(static_cast<size_t>(cells));
    for (Index p = 0; p < cells; ++p) out.positive[static_cast<size_t>(p)] = raw.row(p).sum() >= 1.0 ? 1 : 0;
    return out;
}

}  // namespace mint
