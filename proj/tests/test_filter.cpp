#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "helpers.hpp"
#include "thintact/dct.hpp"
#include "thintact/filter.hpp"
#include "thintact/kernels.hpp"
#include "thintact/mask.hpp"

using namespace thintact;
using namespace thintact::testing;
namespace fs = std::filesystem;

namespace {

std::vector<Mat> random_scenes(int count, int rows, int cols, std::uint64_t seed) {
    std::vector<Mat> s;
    for (int i = 0; i < count; ++i) s.push_back(random_mat(rows, cols, seed + i));
    return s;
}

// Mean of ||F(Y) - Yo||_F^2 over the dataset, evaluated from scratch.
double loss_oracle(const JointFilterParams& p, const std::vector<Mat>& ys,
                   const std::vector<Mat>& yos) {
    double acc = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        double r = (apply_joint_filter(p, ys[i]) - yos[i]).frob_norm();
        acc += r * r;
    }
    return acc / ys.size();
}

}  // namespace

TEST_CASE("identity gains make the filter the identity") {
    JointFilterParams p{Mat::ones(12, 9), Mat::ones(12, 9)};
    Mat y = random_mat(12, 9, 1);
    CHECK((apply_joint_filter(p, y) - y).max_abs() <= 1e-12);
}

TEST_CASE("zero frequency gains annihilate everything") {
    JointFilterParams p{Mat(12, 9, 0.0), random_mat(12, 9, 2)};
    CHECK(apply_joint_filter(p, random_mat(12, 9, 3)).max_abs() <= 1e-12);
}

TEST_CASE("the filter is linear") {
    JointFilterParams p{random_mat(16, 16, 4), random_mat(16, 16, 5)};
    Mat y1 = random_mat(16, 16, 6), y2 = random_mat(16, 16, 7);
    Mat lhs = apply_joint_filter(p, 2.0 * y1 + -3.0 * y2);
    Mat rhs = 2.0 * apply_joint_filter(p, y1) + -3.0 * apply_joint_filter(p, y2);
    CHECK((lhs - rhs).max_abs() <= 1e-9);
}

TEST_CASE("decomposition partition: Yo_hat + Yc_hat = Y exactly") {
    JointFilterParams p{random_mat(16, 16, 8), random_mat(16, 16, 9)};
    Mat y = random_mat(16, 16, 10);
    Mat yo = apply_joint_filter(p, y);
    Mat yc = y - yo;
    // Partition up to one rounding of the subtraction per element.
    CHECK((yo + yc - y).max_abs() <= 1e-15 * y.max_abs());
}

TEST_CASE("filter rejects dimension mismatch") {
    JointFilterParams p{Mat::ones(8, 8), Mat::ones(8, 8)};
    CHECK_THROWS_AS(apply_joint_filter(p, Mat(8, 9)), InvalidInput);
}

TEST_CASE("training gradients match central finite differences on an 8x8 toy") {
    Geometry g = desk_geometry_small(8, 8);
    g.meas_rows = g.meas_cols = 8;
    SystemMatrices sm;
    sm.po = random_mat(8, 8, 11, 0, 0.3);
    sm.qo = random_mat(8, 8, 12, 0, 0.3);
    sm.pc = random_mat(8, 8, 13, -0.3, 0.3);
    sm.qc = random_mat(8, 8, 14, -0.3, 0.3);
    auto scenes = random_scenes(3, 8, 8, 15);

    std::vector<Mat> ys, yos;
    for (const Mat& x : scenes) {
        Mat yo = matmul(matmul(sm.po, x), transpose(sm.qo));
        ys.push_back(yo + matmul(matmul(sm.pc, x), transpose(sm.qc)));
        yos.push_back(yo);
    }
    JointFilterParams p{random_mat(8, 8, 16, 0.2, 0.8), random_mat(8, 8, 17, 0.5, 1.5)};

    // Analytic gradient of the mean loss, same formulas used by train_filter.
    Mat grad_f(8, 8, 0.0), grad_s(8, 8, 0.0);
    for (std::size_t i = 0; i < ys.size(); ++i) {
        Mat d = dct2(ys[i]);
        Mat filtered = idct2(hadamard(p.phi_f, d));
        Mat err = (hadamard(p.phi_s, filtered) - yos[i]) * (2.0 / ys.size());
        grad_s += hadamard(err, filtered);
        grad_f += hadamard(dct2(hadamard(p.phi_s, err)), d);
    }

    const double h = 1e-6;
    for (int i = 0; i < 8; i += 3)
        for (int j = 0; j < 8; j += 3) {
            JointFilterParams q = p;
            q.phi_f(i, j) += h;
            double up = loss_oracle(q, ys, yos);
            q.phi_f(i, j) -= 2 * h;
            double dn = loss_oracle(q, ys, yos);
            double fd = (up - dn) / (2 * h);
            CHECK(grad_f(i, j) == doctest::Approx(fd).epsilon(1e-4));

            q = p;
            q.phi_s(i, j) += h;
            up = loss_oracle(q, ys, yos);
            q.phi_s(i, j) -= 2 * h;
            dn = loss_oracle(q, ys, yos);
            fd = (up - dn) / (2 * h);
            CHECK(grad_s(i, j) == doctest::Approx(fd).epsilon(1e-4));
        }
}

TEST_CASE("degenerate coding-free system trains to a near-identity filter") {
    Geometry g = desk_geometry_small(16, 32);
    SystemMatrices sm = generate_system_matrices(random_vector(96, 20), g);
    sm.pc = Mat(sm.pc.rows(), sm.pc.cols(), 0.0);
    sm.qc = Mat(sm.qc.rows(), sm.qc.cols(), 0.0);
    FilterTrainConfig cfg;
    cfg.epochs = 300;
    FilterTrainReport report;
    JointFilterParams p = train_filter(sm, random_scenes(6, 16, 16, 21), cfg, &report);
    CHECK(report.final_loss <= report.initial_loss);

    Mat x = random_mat(16, 16, 22);
    Mat y = forward(sm, x);
    CHECK((apply_joint_filter(p, y) - y).frob_norm() / y.frob_norm() <= 1e-3);
}

TEST_CASE("desk-scale training: monotone loss and held-out decomposition error <= 0.15") {
    Geometry g = desk_geometry();
    SystemMatrices sm = generate_system_matrices(mls_vector(7, 1), g);
    auto train = random_scenes(20, 64, 64, 30);
    auto heldout = random_scenes(5, 64, 64, 60);

    FilterTrainConfig cfg;
    FilterTrainReport report;
    JointFilterParams p = train_filter(sm, train, cfg, &report);
    CHECK(report.final_loss <= report.initial_loss);
    for (std::size_t e = 1; e < report.loss_per_epoch.size(); ++e)
        CHECK(report.loss_per_epoch[e] <= report.loss_per_epoch[e - 1] * (1.0 + 1e-12));

    double worst = 0.0;
    for (const Mat& x : heldout) {
        Mat y = forward(sm, x);
        Mat yc_exact = forward(sm, x, 0.0, 0, true);
        Mat yc_hat = y - apply_joint_filter(p, y);
        worst = std::max(worst, (yc_hat - yc_exact).frob_norm() / yc_exact.frob_norm());
    }
    CHECK(worst <= 0.15);
}

TEST_CASE("non-finite loss raises a training error naming the epoch") {
    Geometry g = desk_geometry_small(8, 16);
    SystemMatrices sm = generate_system_matrices(random_vector(96, 40), g);
    // Scenes large enough that the squared loss overflows to infinity.
    auto scenes = random_scenes(3, 8, 8, 41);
    for (Mat& s : scenes) s *= 1e200;
    FilterTrainConfig cfg;
    cfg.epochs = 5;
    try {
        train_filter(sm, scenes, cfg);
        FAIL("expected TrainingError");
    } catch (const TrainingError& e) {
        CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    }
}

TEST_CASE("train_filter validates its inputs") {
    Geometry g = desk_geometry_small(8, 16);
    SystemMatrices sm = generate_system_matrices(random_vector(96, 42), g);
    FilterTrainConfig cfg;
    CHECK_THROWS_AS(train_filter(sm, random_scenes(1, 8, 8, 43), cfg), InvalidInput);
    cfg.learning_rate = -1.0;
    CHECK_THROWS_AS(train_filter(sm, random_scenes(3, 8, 8, 44), cfg), InvalidInput);
}

TEST_CASE("filter parameters persist and reload") {
    fs::path dir = fs::temp_directory_path() / "thintact_test_filter";
    fs::create_directories(dir);
    JointFilterParams p{random_mat(8, 10, 50), random_mat(8, 10, 51)};
    save_filter_params(dir, p, FilterTrainConfig{}, 0.123);
    JointFilterParams back = load_filter_params(dir);
    CHECK(rel_err(back.phi_f, p.phi_f) < 1e-6);
    CHECK(rel_err(back.phi_s, p.phi_s) < 1e-6);
}
