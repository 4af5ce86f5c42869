#include <doctest.h>

#include "mint/dataset.hpp"
#include "mint/io.hpp"
#include "oracles.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace mint;
namespace fs = std::filesystem;

namespace {

Image flat_tile(int size, float value = 0.5f) {
    Image img(size, size, 3);
    for (float& v : img.data) v = value;
    return img;
}

SpotSample make_spot(const std::string& id, const std::string& slide, int tile_size, Index genes) {
    SpotSample s;
    s.id = id;
    s.slide_id = slide;
    s.tile = flat_tile(tile_size);
    s.expression = Vec::Zero(genes);
    s.expression[0] = 1.25;
    s.measured.assign(static_cast<size_t>(genes), 1);
    return s;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) {
        path = fs::temp_directory_path() / name;
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("normalize_expression pinned examples") {
    // counts [1,1], target 2 -> [log 2, log 2]
    Vec r = normalize_expression({1, 1}, 2.0);
    CHECK(r[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(r[1] == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // all-zero input stays zero
    Vec z = normalize_expression({0, 0}, 10.0);
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 0.0);

    // counts [3,1], target 4 -> [log 4, log 2] (hand arithmetic)
    Vec h = normalize_expression({3, 1}, 4.0);
    CHECK(h[0] == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    CHECK(h[1] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("normalize_expression is invariant to uniform count scaling") {
    Rng rng(5);
    std::vector<uint64_t> counts(16);
    for (auto& c : counts) c = rng.uniform_index(50);
    counts[3] = 7;  // guarantee a nonzero entry
    std::vector<uint64_t> doubled(counts);
    for (auto& c : doubled) c *= 2;
    Vec a = normalize_expression(counts, 10000.0);
    Vec b = normalize_expression(doubled, 10000.0);
    for (Index g = 0; g < a.size(); ++g) CHECK(a[g] == doctest::Approx(b[g]).epsilon(1e-12));
}

TEST_CASE("compute_hvg picks the varying gene and breaks ties by index") {
    Mat m(3, 2);
    m << 0, 10, 0, 12, 0, 8;
    std::vector<uint8_t> measured{1, 1};
    auto idx = compute_hvg(m, measured, 1);
    CHECK(idx == std::vector<Index>{1});

    Mat tie(2, 2);
    tie << 0, 0, 1, 1;  // equal variance
    CHECK(compute_hvg(tie, measured, 1) == std::vector<Index>{0});

    CHECK_THROWS_AS(compute_hvg(m, measured, 3), ValidationError);
    Mat single(1, 2);
    single << 1, 2;
    CHECK_THROWS_AS(compute_hvg(single, measured, 1), ValidationError);
}

TEST_CASE("compute_hvg matches the brute-force variance oracle") {
    Rng rng(17);
    for (int rep = 0; rep < 5; ++rep) {
        Mat m(5, 8);
        for (Index i = 0; i < m.size(); ++i) m(i / 8, i % 8) = rng.uniform(0.0, 3.0);
        std::vector<uint8_t> measured(8, 1);
        measured[2] = 0;
        CHECK(compute_hvg(m, measured, 3) == oracle::hvg_bruteforce(m, measured, 3));
    }
}

TEST_CASE("compute_hvg is invariant to row permutation") {
    Rng rng(23);
    Mat m(6, 5);
    for (Index i = 0; i < m.size(); ++i) m(i / 5, i % 5) = rng.uniform(0.0, 2.0);
    std::vector<uint8_t> measured(5, 1);
    Mat p = m;
    p.row(0).swap(p.row(4));
    p.row(1).swap(p.row(3));
    CHECK(compute_hvg(m, measured, 4) == compute_hvg(p, measured, 4));
}

TEST_CASE("select_genes_stochastic degenerate probabilities and subset check") {
    std::vector<Index> measured{0, 1, 2, 3};
    std::vector<Index> hvg{1, 3};
    Rng rng(9);
    for (int i = 0; i < 50; ++i) {
        CHECK(select_genes_stochastic(measured, hvg, 0.0, rng) == measured);
        CHECK(select_genes_stochastic(measured, hvg, 1.0, rng) == hvg);
    }
    std::vector<Index> bad{1, 7};
    CHECK_THROWS_AS(select_genes_stochastic(measured, bad, 0.5, rng), ValidationError);
}

TEST_CASE("select_genes_stochastic is reproducible bit-for-bit") {
    std::vector<Index> measured{0, 1, 2};
    std::vector<Index> hvg{2};
    Rng a = Rng::stream(1, "sel"), b = Rng::stream(1, "sel");
    for (int i = 0; i < 200; ++i)
        CHECK(select_genes_stochastic(measured, hvg, 0.37, a) ==
              select_genes_stochastic(measured, hvg, 0.37, b));
}

TEST_CASE("apply_geometry_to_points pinned conventions") {
    std::vector<Transcript> pts{{40.0, 1.0, 0}, {10.0, 1.0, 1}};

    GeometryRecord ident = GeometryRecord::identity(64);
    auto same = apply_geometry_to_points(pts, ident);
    REQUIRE(same.size() == 2);
    CHECK(same[0].x == 40.0);
    CHECK(same[1].x == 10.0);

    // crop x in [32,64): x=40 -> 8, x=10 dropped
    GeometryRecord g;
    g.crop_x0 = 32;
    g.crop_y0 = 0;
    g.crop_w = 32;
    g.crop_h = 64;
    g.out_w = 32;
    g.out_h = 64;
    auto cropped = apply_geometry_to_points(pts, g);
    REQUIRE(cropped.size() == 1);
    CHECK(cropped[0].x == doctest::Approx(8.0));
    CHECK(cropped[0].gene == 0);

    // flip on a 64-wide frame: x' = 63 - x
    GeometryRecord f = GeometryRecord::identity(64);
    f.flipped = true;
    auto flipped = apply_geometry_to_points(pts, f);
    REQUIRE(flipped.size() == 2);
    CHECK(flipped[0].x == doctest::Approx(63.0 - 40.0));
    CHECK(flipped[1].x == doctest::Approx(63.0 - 10.0));

    GeometryRecord degenerate;
    degenerate.crop_w = 0;
    CHECK_THROWS_AS(apply_geometry_to_points(pts, degenerate), ValidationError);
}

TEST_CASE("bin_transcripts_to_patches pinned cases") {
    // one transcript at (5,5), tile 64, patch 16 -> cell (0,0), 15 negatives
    PatchTargetGrid g = bin_transcripts_to_patches({{5.0, 5.0, 0}}, 64, 16, 4);
    CHECK(g.grid == 4);
    CHECK(g.counts(0, 0) == doctest::Approx(std::log(2.0)));
    CHECK(g.n_positive() == 1);
    CHECK(g.positive[0] == 1);

    // x = 16 exactly falls in column 1 (half-open cells)
    PatchTargetGrid edge = bin_transcripts_to_patches({{16.0, 0.0, 0}}, 64, 16, 4);
    CHECK(edge.positive[1] == 1);
    CHECK(edge.positive[0] == 0);

    CHECK_THROWS_AS(bin_transcripts_to_patches({}, 60, 16, 4), ValidationError);
}

TEST_CASE("bin_transcripts_to_patches matches brute force and conserves mass") {
    Rng rng(31);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<Transcript> ts;
        int n = 200;
        for (int i = 0; i < n; ++i)
            ts.push_back({rng.uniform(-4.0, 68.0), rng.uniform(-4.0, 68.0),
                          static_cast<uint32_t>(rng.uniform_index(6))});
        PatchTargetGrid g = bin_transcripts_to_patches(ts, 64, 16, 6);
        std::vector<uint8_t> pos_oracle;
        Mat raw = oracle::bin_bruteforce(ts, 64, 16, 6, &pos_oracle);

        double rel = (g.counts - raw.array().log1p().matrix()).norm() / std::max(1.0, raw.norm());
        CHECK(rel < 1e-12);
        CHECK(g.positive == pos_oracle);

        // mass conservation over in-bounds transcripts
        double in_bounds = 0.0;
        for (const auto& t : ts)
            if (t.x >= 0 && t.x < 64 && t.y >= 0 && t.y < 64) in_bounds += 1.0;
        CHECK(raw.sum() == doctest::Approx(in_bounds));
        // positive mask is exactly the support of per-patch sums
        for (Index p = 0; p < raw.rows(); ++p)
            CHECK(static_cast<bool>(g.positive[static_cast<size_t>(p)]) == (raw.row(p).sum() >= 1.0));
    }
}

TEST_CASE("manifest round-trip and validation errors") {
    TempDir dir("mint_manifest_test");
    VocabFile vocab;
    vocab.genes.names = {"g0", "g1", "g2", "g3"};
    vocab.xenium_genes.names = {"g0", "g1"};
    vocab.xenium_to_spot = {0, 1};
    save_vocab(vocab, (dir.path / "vocab.json").string());

    fs::create_directories(dir.path / "samples");
    for (int i = 0; i < 2; ++i)
        save_spot_sample(make_spot("s" + std::to_string(i), "slide_a", 16, 4),
                         (dir.path / ("samples/s" + std::to_string(i) + ".bin")).string());
    XeniumSample x;
    x.id = "x0";
    x.slide_id = "slide_x";
    x.tile = flat_tile(16);
    x.panel = {1, 1};
    x.transcripts = {{1.0, 2.0, 0}};
    save_xenium_sample(x, (dir.path / "samples/x0.bin").string());

    DatasetManifest m;
    m.tile_size = 16;
    m.vocab_path = "vocab.json";
    m.split = "train";
    m.entries = {{"samples/s0.bin", Modality::Spot, "slide_a"},
                 {"samples/s1.bin", Modality::Spot, "slide_a"},
                 {"samples/x0.bin", Modality::Xenium, "slide_x"}};
    std::string mp = (dir.path / "manifest.json").string();
    save_manifest(m, mp);

    DatasetManifest loaded = load_manifest(mp);
    CHECK(loaded.tile_size == m.tile_size);
    CHECK(loaded.split == m.split);
    REQUIRE(loaded.entries.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(loaded.entries[i].sample_path == m.entries[i].sample_path);
        CHECK(loaded.entries[i].modality == m.entries[i].modality);
        CHECK(loaded.entries[i].slide_id == m.entries[i].slide_id);
    }

    SUBCASE("missing sample file is reported with its path") {
        m.entries.push_back({"samples/absent.bin", Modality::Spot, "slide_a"});
        save_manifest(m, mp);
        CHECK_THROWS_WITH_AS(load_manifest(mp),
                             doctest::Contains("absent.bin"), ValidationError);
    }

    SUBCASE("modality/payload mismatch is a validation error") {
        m.entries[0].modality = Modality::Xenium;
        save_manifest(m, mp);
        CHECK_THROWS_WITH_AS(load_manifest(mp), doctest::Contains("entry 0"), ValidationError);
    }

    SUBCASE("missing manifest file") {
        CHECK_THROWS_AS(load_manifest((dir.path / "nope.json").string()), ValidationError);
    }

    SUBCASE("vocabulary mismatch is reported with the entry index") {
        save_spot_sample(make_spot("s_bad", "slide_a", 16, 7),  // 7 genes vs vocab's 4
                         (dir.path / "samples/s_bad.bin").string());
        m.entries.push_back({"samples/s_bad.bin", Modality::Spot, "slide_a"});
        save_manifest(m, mp);
        CHECK_THROWS_WITH_AS(load_manifest(mp), doctest::Contains("entry 3"), ValidationError);
    }
}

TEST_CASE("sample payload round-trip preserves fields exactly") {
    TempDir dir("mint_sample_test");
    SpotSample s = make_spot("spot_rt", "slide_rt", 16, 8);
    s.expression[5] = 2.5;
    s.measured[6] = 0;
    s.truth_mixture = Vec::Zero(3);
    (*s.truth_mixture)[1] = 1.0;
    s.truth_dominant_type = 1;
    std::string p = (dir.path / "s.bin").string();
    save_spot_sample(s, p);
    SpotSample t = load_spot_sample(p);
    CHECK(t.id == s.id);
    CHECK(t.slide_id == s.slide_id);
    CHECK(t.expression == s.expression);
    CHECK(t.measured == s.measured);
    CHECK(t.tile.data == s.tile.data);
    CHECK(t.truth_dominant_type == 1);

    XeniumSample x;
    x.id = "xen_rt";
    x.slide_id = "slide_rt";
    x.tile = flat_tile(16);
    x.panel = {1, 0, 1};
    x.transcripts = {{0.5, 1.5, 0}, {3.25, 2.0, 2}};
    std::string px = (dir.path / "x.bin").string();
    save_xenium_sample(x, px);
    XeniumSample y = load_xenium_sample(px);
    CHECK(y.panel == x.panel);
    REQUIRE(y.transcripts.size() == 2);
    CHECK(y.transcripts[1].x == x.transcripts[1].x);
    CHECK(y.transcripts[1].gene == 2);
}

TEST_CASE("spot sample invariants are enforced") {
    SpotSample s = make_spot("bad", "slide", 16, 4);
    s.expression[2] = 1.0;
    s.measured[2] = 0;  // nonzero expression outside the measured mask
    CHECK_THROWS_AS(s.validate(4, 16), ValidationError);

    XeniumSample x;
    x.id = "bad_x";
    x.tile = flat_tile(16);
    x.panel = {1, 1};
    x.transcripts = {{20.0, 0.0, 0}};  // out of tile bounds
    CHECK_THROWS_AS(x.validate(2, 16), ValidationError);
}
