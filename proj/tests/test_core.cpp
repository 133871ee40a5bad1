#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "thintact/dct.hpp"
#include "thintact/io.hpp"
#include "thintact/kernels.hpp"
#include "thintact/metrics.hpp"

using namespace thintact;
using namespace thintact::testing;
namespace fs = std::filesystem;

namespace {
fs::path temp_dir() {
    fs::path p = fs::temp_directory_path() / "thintact_test_core";
    fs::create_directories(p);
    return p;
}
}  // namespace

TEST_CASE("Mat basics and norms") {
    Mat m(2, 3, 1.5);
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    CHECK(m.sum() == doctest::Approx(9.0));
    m(1, 2) = -4.0;
    CHECK(m.max_abs() == doctest::Approx(4.0));
    CHECK(m.frob_norm() == doctest::Approx(std::sqrt(1.5 * 1.5 * 5 + 16.0)));
    CHECK(m.all_finite());
    m(0, 0) = std::nan("");
    CHECK_FALSE(m.all_finite());

    Mat i3 = Mat::identity(3);
    CHECK(i3(0, 0) == 1.0);
    CHECK(i3(0, 1) == 0.0);
}

TEST_CASE("matmul agrees with the serial reference and a naive oracle") {
    for (auto [r, k, c] : {std::array{7, 5, 9}, std::array{64, 32, 48}, std::array{130, 97, 201}}) {
        Mat a = random_mat(r, k, 11, -1, 1), b = random_mat(k, c, 12, -1, 1);
        Mat fast = matmul(a, b);
        Mat slow = matmul_serial(a, b);
        CHECK(rel_err(fast, slow) < 1e-13);
        // Independent oracle: accumulate in a different (k-outer) loop order.
        Mat oracle(r, c, 0.0);
        for (int kk = 0; kk < k; ++kk)
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < c; ++j) oracle(i, j) += a(i, kk) * b(kk, j);
        CHECK(rel_err(fast, oracle) < 1e-13);
    }
}

TEST_CASE("matmul rejects inner-dimension mismatch") {
    CHECK_THROWS_AS(matmul(Mat(2, 3), Mat(4, 2)), InvalidInput);
}

TEST_CASE("transpose and hadamard") {
    Mat a = random_mat(13, 37, 5);
    Mat t = transpose(a);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) CHECK(t(j, i) == a(i, j));
    Mat h = hadamard(a, a);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) CHECK(h(i, j) == a(i, j) * a(i, j));
}

TEST_CASE("dct2/idct2 roundtrip on 64x64") {
    Mat y = random_mat(64, 64, 21);
    CHECK((idct2(dct2(y)) - y).max_abs() <= 1e-9);
    CHECK((dct2(idct2(y)) - y).max_abs() <= 1e-9);
}

TEST_CASE("dct2 of a constant image is DC-only with orthonormal scaling") {
    const double c = 0.37;
    Mat y(16, 24, c);
    Mat d = dct2(y);
    CHECK(d(0, 0) == doctest::Approx(c * std::sqrt(16.0 * 24.0)).epsilon(1e-12));
    d(0, 0) = 0.0;
    CHECK(d.max_abs() <= 1e-12);
}

TEST_CASE("dct2 Parseval on random 32x32") {
    Mat y = random_mat(32, 32, 22);
    CHECK(std::fabs(dct2(y).frob_norm() - y.frob_norm()) <= 1e-9 * y.frob_norm());
}

TEST_CASE("dct2 matches the serial direct-sum reference") {
    for (auto [r, c] : {std::pair{8, 8}, {17, 9}, {32, 48}}) {
        Mat y = random_mat(r, c, 23, -1, 1);
        CHECK((dct2(y) - dct2_serial(y)).max_abs() <= 1e-9);
        CHECK((idct2(y) - idct2_serial(y)).max_abs() <= 1e-9);
    }
}

TEST_CASE("dct2 rejects empty input") {
    CHECK_THROWS_AS(dct2(Mat()), InvalidInput);
}

TEST_CASE("psnr analytic and oracle values") {
    Mat a(8, 8, 0.0), b(8, 8, 10.0);
    CHECK(psnr(a, a, 255.0) == doctest::Approx(kPsnrCap));
    CHECK(psnr(a, b, 255.0) == doctest::Approx(20.0 * std::log10(255.0 / 10.0)).epsilon(1e-9));

    Mat x = random_mat(16, 16, 31), y = random_mat(16, 16, 32);
    double mse = 0.0;
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) mse += (x(i, j) - y(i, j)) * (x(i, j) - y(i, j));
    mse /= 256.0;
    CHECK(psnr(x, y, 1.0) == doctest::Approx(10.0 * std::log10(1.0 / mse)).epsilon(1e-9));
}

TEST_CASE("psnr decreases as noise grows") {
    Mat x = random_mat(16, 16, 33);
    double prev = kPsnrCap + 1;
    for (double amp : {0.01, 0.05, 0.2}) {
        Mat y = x;
        auto rng = rng_stream(7, "test.noise");
        std::normal_distribution<double> gauss(0.0, amp);
        for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] += gauss(rng);
        double p = psnr(x, y);
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("psnr rejects shape mismatch") {
    CHECK_THROWS_AS(psnr(Mat(3, 3), Mat(3, 4)), InvalidInput);
}

TEST_CASE("ssim identity, symmetry, range, reference match") {
    Mat x = random_mat(24, 24, 41);
    CHECK(ssim(x, x) == doctest::Approx(1.0).epsilon(1e-12));
    Mat y = random_mat(24, 24, 42);
    CHECK(ssim(x, y) == doctest::Approx(ssim(y, x)).epsilon(1e-12));
    CHECK(ssim(x, y) >= -1.0);
    CHECK(ssim(x, y) <= 1.0);
    CHECK(ssim(x, y) == doctest::Approx(ssim_reference(x, y)).epsilon(1e-9));

    Mat checker(16, 16);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) checker(i, j) = (i + j) % 2;
    Mat inverted = Mat::ones(16, 16) - checker;
    CHECK(ssim(checker, inverted) < 0.5);
    CHECK(ssim(checker, inverted) ==
          doctest::Approx(ssim_reference(checker, inverted)).epsilon(1e-9));
}

TEST_CASE("ssim rejects images smaller than the window") {
    CHECK_THROWS_AS(ssim(Mat(10, 12), Mat(10, 12)), InvalidInput);
}

TEST_CASE("grad_l1 hand values and oracle") {
    CHECK(grad_l1(Mat(5, 7, 3.3)) == std::pair{0.0, 0.0});

    Mat m(2, 2);
    m(0, 0) = 0;
    m(0, 1) = 1;
    m(1, 0) = 0;
    m(1, 1) = 1;
    auto [gu, gv] = grad_l1(m);
    CHECK(gu == doctest::Approx(2.0));
    CHECK(gv == doctest::Approx(0.0));

    Mat x = random_mat(16, 16, 51);
    double ou = 0, ov = 0;
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j + 1 < 16; ++j) ou += std::fabs(x(i, j + 1) - x(i, j));
    for (int i = 0; i + 1 < 16; ++i)
        for (int j = 0; j < 16; ++j) ov += std::fabs(x(i + 1, j) - x(i, j));
    auto [ru, rv] = grad_l1(x);
    CHECK(ru == ou);
    CHECK(rv == ov);
}

TEST_CASE("LTM1 roundtrip is bit-exact for float-representable data") {
    fs::path p = temp_dir() / "roundtrip.ltm";
    Mat m(3, 4);
    auto rng = rng_stream(61, "test.ltm");
    std::uniform_real_distribution<float> uni(-8.0f, 8.0f);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = static_cast<double>(uni(rng));
    save_mat(p, m);
    Mat back = load_mat(p);
    REQUIRE(back.same_shape(m));
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(back.data()[i] == m.data()[i]);
}

TEST_CASE("LTM1 1x1 roundtrip") {
    fs::path p = temp_dir() / "one.ltm";
    Mat m(1, 1, 0.5);
    save_mat(p, m);
    Mat back = load_mat(p);
    CHECK(back.rows() == 1);
    CHECK(back.cols() == 1);
    CHECK(back(0, 0) == 0.5);
}

TEST_CASE("LTM1 corrupted magic names the expected magic") {
    fs::path p = temp_dir() / "bad.ltm";
    std::ofstream(p, std::ios::binary) << std::string("NOTLTM1\0junkjunkjunk", 20);
    try {
        load_mat(p);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("LTMAT1") != std::string::npos);
    }
}

TEST_CASE("LTM1 truncated payload is a format error") {
    fs::path good = temp_dir() / "good.ltm";
    save_mat(good, Mat(4, 4, 1.0));
    auto size = fs::file_size(good);
    fs::resize_file(good, size - 7);
    CHECK_THROWS_AS(load_mat(good), FormatError);
}

TEST_CASE("PGM and PPM roundtrip within 16-bit quantization") {
    fs::path pg = temp_dir() / "img.pgm";
    Mat m = random_mat(9, 13, 71);
    save_pgm(pg, m);
    Mat back = load_pgm(pg);
    REQUIRE(back.same_shape(m));
    CHECK((back - m).max_abs() <= 0.5 / 65535.0 + 1e-12);

    fs::path pp = temp_dir() / "img.ppm";
    ImageRGB img{random_mat(6, 5, 72), random_mat(6, 5, 73), random_mat(6, 5, 74)};
    save_ppm(pp, img);
    ImageRGB rback = load_ppm(pp);
    for (int c = 0; c < 3; ++c)
        CHECK((rback.plane(c) - img.plane(c)).max_abs() <= 0.5 / 65535.0 + 1e-12);
}

TEST_CASE("sha256 matches a known vector") {
    fs::path p = temp_dir() / "abc.txt";
    std::ofstream(p, std::ios::binary) << "abc";
    CHECK(sha256_file(p) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("rng streams are deterministic and tag-separated") {
    auto a1 = rng_stream(9, "alpha")();
    auto a2 = rng_stream(9, "alpha")();
    auto b = rng_stream(9, "beta")();
    CHECK(a1 == a2);
    CHECK(a1 != b);
    CHECK(rng_stream(9, "alpha", 1)() != rng_stream(9, "alpha", 2)());
}
