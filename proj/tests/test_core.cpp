#include <doctest.h>

#include "mint/common.hpp"
#include "mint/image.hpp"
#include "mint/io.hpp"
#include "mint/rng.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace mint;

TEST_CASE("rng streams are reproducible and independent of call order") {
    Rng a = Rng::stream(42, "x", 1, 2);
    Rng b = Rng::stream(42, "x", 1, 2);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng c = Rng::stream(42, "x", 1, 3);
    CHECK(Rng::stream(42, "x", 1, 2).next_u64() != c.next_u64());
}

TEST_CASE("rng uniform lies in [0,1) and normal has sane moments") {
    Rng r(7);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        double z = r.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.02);
    CHECK(std::abs(sq / n - 1.0) < 0.03);
}

TEST_CASE("rng poisson matches its mean and variance") {
    Rng r(11);
    for (double lambda : {0.5, 4.0, 40.0}) {
        double sum = 0.0, sq = 0.0;
        const int n = 20000;
        for (int i = 0; i < n; ++i) {
            double k = static_cast<double>(r.poisson(lambda));
            sum += k;
            sq += k * k;
        }
        double mean = sum / n;
        double var = sq / n - mean * mean;
        CHECK(mean == doctest::Approx(lambda).epsilon(0.05));
        CHECK(var == doctest::Approx(lambda).epsilon(0.10));
    }
}

TEST_CASE("array archive round-trips every dtype") {
    ArrayArchive a;
    Mat m(2, 3);
    m << 1.5, -2.0, 3.25, 0.0, 1e-12, 7.0;
    a.put_f64("m", m);
    a.put_u32("idx", {1u, 5u, 9u});
    a.put_u8("mask", {0, 1, 1});
    a.put_i64("step", {42});
    a.put_text("note", "hello");
    Vec v(3);
    v << 0.1, 0.2, 0.3;
    a.put_vec_f64("v", v);

    std::string path = (std::filesystem::temp_directory_path() / "mint_io_test.bin").string();
    a.save(path);
    ArrayArchive b = ArrayArchive::load(path);
    CHECK(b.get_f64("m") == m);
    CHECK(b.get_u32("idx") == std::vector<uint32_t>{1u, 5u, 9u});
    CHECK(b.get_u8("mask") == std::vector<uint8_t>{0, 1, 1});
    CHECK(b.get_i64("step").at(0) == 42);
    CHECK(b.get_text("note") == "hello");
    CHECK(b.get_vec_f64("v") == v);
    CHECK_THROWS_AS(b.entry("missing"), ValidationError);
    std::remove(path.c_str());
}

TEST_CASE("archive serialization is byte-stable across insertion orders") {
    auto tmp = std::filesystem::temp_directory_path();
    ArrayArchive a, b;
    a.put_text("alpha", "1");
    a.put_text("beta", "2");
    b.put_text("beta", "2");
    b.put_text("alpha", "1");
    std::string pa = (tmp / "order_a.bin").string(), pb = (tmp / "order_b.bin").string();
    a.save(pa);
    b.save(pb);
    auto read = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    };
    CHECK(read(pa) == read(pb));
    std::remove(pa.c_str());
    std::remove(pb.c_str());
}

TEST_CASE("image crop, flip and resize behave on exact cases") {
    Image img(4, 4, 3);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            for (int c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<float>(y * 4 + x);

    Image c = crop(img, 1, 2, 2, 2);
    CHECK(c.w == 2);
    CHECK(c.at(0, 0, 0) == img.at(2, 1, 0));

    Image f = hflip(img);
    CHECK(f.at(0, 0, 0) == img.at(0, 3, 0));
    CHECK(f.at(2, 1, 1) == img.at(2, 2, 1));

    Image same = resize_bilinear(img, 4, 4);
    CHECK(same.data == img.data);

    Image constant(6, 6, 3);
    for (float& v : constant.data) v = 0.625f;
    Image shrunk = resize_bilinear(constant, 3, 3);
    for (float v : shrunk.data) CHECK(v == doctest::Approx(0.625f));
}

TEST_CASE("gaussian blur preserves constant images") {
    Image constant(8, 8, 3);
    for (float& v : constant.data) v = 0.4f;
    Image out = gaussian_blur(constant, 0.7);
    for (float v : out.data) CHECK(v == doctest::Approx(0.4f).epsilon(1e-6));
}

TEST_CASE("photometric ops are identity at factor 1") {
    Rng r(3);
    Image img(5, 5, 3);
    for (float& v : img.data) v = static_cast<float>(r.uniform());
    Image copy = img;
    adjust_brightness(copy, 1.0);
    adjust_contrast(copy, 1.0);
    adjust_saturation(copy, 1.0);
    for (size_t i = 0; i < img.data.size(); ++i)
        CHECK(copy.data[i] == doctest::Approx(img.data[i]).epsilon(1e-6));
}
