#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "thintact/calib.hpp"
#include "thintact/kernels.hpp"
#include "thintact/mask.hpp"
#include "thintact/metrics.hpp"
#include "thintact/recon.hpp"

using namespace thintact;
using namespace thintact::testing;

namespace {

// Stack of rank-2 images Y_i = p_o,i q_o' + p_c,i q_c' from known factors.
std::vector<Mat> rank2_images(const Mat& po, const Mat& pc, const std::vector<double>& q_o,
                              const std::vector<double>& q_c) {
    std::vector<Mat> out;
    for (int i = 0; i < po.cols(); ++i) {
        Mat y(po.rows(), static_cast<int>(q_o.size()), 0.0);
        for (int a = 0; a < y.rows(); ++a)
            for (int b = 0; b < y.cols(); ++b)
                y(a, b) = po(a, i) * q_o[b] + pc(a, i) * q_c[b];
        out.push_back(std::move(y));
    }
    return out;
}

}  // namespace

TEST_CASE("slit scenes are one-hot rows/columns and tile the full scene") {
    Mat h = make_slit_scene(SlitAxis::Horizontal, 2, 5, 4);
    Mat v = make_slit_scene(SlitAxis::Vertical, 3, 5, 4);
    for (int j = 0; j < 4; ++j) CHECK(h(2, j) == 1.0);
    for (int i = 0; i < 5; ++i) CHECK(v(i, 3) == 1.0);
    CHECK(h.frob_norm() == doctest::Approx(2.0));
    CHECK(v.frob_norm() == doctest::Approx(std::sqrt(5.0)));

    Mat sum(5, 4, 0.0);
    for (int i = 0; i < 5; ++i) sum += make_slit_scene(SlitAxis::Horizontal, i, 5, 4);
    CHECK((sum - Mat::ones(5, 4)).max_abs() == 0.0);

    CHECK_THROWS_AS(make_slit_scene(SlitAxis::Horizontal, 5, 5, 4), InvalidInput);
    CHECK_THROWS_AS(make_slit_scene(SlitAxis::Vertical, -1, 5, 4), InvalidInput);
}

TEST_CASE("decompose_given_qo_qc recovers orthogonal rank-2 factors exactly") {
    const int r = 12, s = 10, n = 6;
    std::vector<double> q_o(s), q_c(s);
    // Orthogonal pair: constant vs alternating signs.
    for (int b = 0; b < s; ++b) {
        q_o[b] = 2.0;
        q_c[b] = (b % 2 == 0) ? 1.0 : -1.0;
    }
    Mat po_true = random_mat(r, n, 1), pc_true = random_mat(r, n, 2, -1, 1);
    auto [po, pc] = decompose_given_qo_qc(rank2_images(po_true, pc_true, q_o, q_c), q_o, q_c);
    CHECK(rel_err(po, po_true) <= 1e-9);
    CHECK(rel_err(pc, pc_true) <= 1e-9);
}

TEST_CASE("deflation: q_o == q_c leaves nothing for the coding factor") {
    const int r = 8, s = 6, n = 4;
    std::vector<double> q(s, 1.5);
    Mat po_true = random_mat(r, n, 3);
    auto [po, pc] = decompose_given_qo_qc(rank2_images(po_true, Mat(r, n, 0.0), q, q), q, q);
    CHECK(rel_err(po, po_true) <= 1e-12);
    CHECK(pc.max_abs() <= 1e-12 * po.max_abs());
}

TEST_CASE("deflation residual is orthogonal to q_o") {
    const int r = 10, s = 8;
    std::vector<double> q_o(s), q_c(s);
    for (int b = 0; b < s; ++b) {
        q_o[b] = 1.0 + 0.1 * b;
        q_c[b] = std::sin(0.7 * b);
    }
    std::vector<Mat> images{random_mat(r, s, 4), random_mat(r, s, 5, -2, 2)};
    auto [po, pc] = decompose_given_qo_qc(images, q_o, q_c);
    double qo_sq = 0.0;
    for (double v : q_o) qo_sq += v * v;
    for (std::size_t i = 0; i < images.size(); ++i)
        for (int a = 0; a < r; ++a) {
            double res_dot = 0.0;
            for (int b = 0; b < s; ++b)
                res_dot += (images[i](a, b) - po(a, static_cast<int>(i)) * q_o[b]) * q_o[b];
            CHECK(std::fabs(res_dot) <= 1e-9 * std::sqrt(qo_sq));
        }
}

TEST_CASE("decompose_given_qo_qc validates inputs") {
    CHECK_THROWS_AS(decompose_given_qo_qc({}, {1.0}, {1.0}), InvalidInput);
    CHECK_THROWS_AS(decompose_given_qo_qc({Mat(2, 2)}, {0.0, 0.0}, {1.0, 1.0}), InvalidInput);
}

TEST_CASE("synthesize_calib_set shapes and slit correspondence") {
    Geometry g = desk_geometry_small(16, 32);
    SystemMatrices sm = generate_system_matrices(random_vector(96, 6), g);
    CalibSet cs = synthesize_calib_set(sm);
    REQUIRE(cs.horizontal.size() == 16);
    REQUIRE(cs.vertical.size() == 16);
    CHECK(cs.horizontal[3].rows() == 32);
    Mat want = forward(sm, make_slit_scene(SlitAxis::Horizontal, 3, 16, 16));
    CHECK((cs.horizontal[3] - want).max_abs() == 0.0);
}

TEST_CASE("noiseless slit calibration matches ground-truth reconstruction quality") {
    Geometry g = desk_geometry_small(48, 96);
    MaskVector phi = mls_vector(7, 1);
    phi.entries.resize(96);
    SystemMatrices sm = generate_system_matrices(phi, g);
    CalibResult res = calibrate(synthesize_calib_set(sm));
    CHECK(res.converged);

    // The factorization carries scale and rank-2 mixing ambiguities, so the
    // calibrated model is judged only through the maps it induces: the total
    // forward operator, and end-to-end reconstruction with its own filter.
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
        Mat x = random_mat(48, 48, 10 + k);
        worst = std::max(worst, rel_err(forward(res.sm, x), forward(sm, x)));
    }
    CHECK(worst <= 1e-3);

    std::vector<Mat> train;
    for (int k = 0; k < 12; ++k) train.push_back(random_mat(48, 48, 100 + k));
    FilterTrainConfig fcfg;
    fcfg.epochs = 200;
    JointFilterParams f_gt = train_filter(sm, train, fcfg);
    JointFilterParams f_cal = train_filter(res.sm, train, fcfg);
    ReconOperator op_gt = build_recon_operator(sm.pc, sm.qc, default_tau(sm.pc, sm.qc));
    ReconOperator op_cal =
        build_recon_operator(res.sm.pc, res.sm.qc, default_tau(res.sm.pc, res.sm.qc));
    for (int k = 0; k < 5; ++k) {
        Mat x = random_mat(48, 48, 20 + k);
        Mat y = forward(sm, x);  // the physical system produces the measurement
        double p_gt = psnr(reconstruct_frame(op_gt, f_gt, y), x);
        double p_cal = psnr(reconstruct_frame(op_cal, f_cal, y), x);
        CHECK(p_cal >= p_gt - 3.0);
    }
}

TEST_CASE("calibration of a coding-free stack reproduces the forward map") {
    Geometry g = desk_geometry_small(16, 32);
    SystemMatrices sm = generate_system_matrices(random_vector(96, 30), g);
    sm.pc = Mat(sm.pc.rows(), sm.pc.cols(), 0.0);
    sm.qc = Mat(sm.qc.rows(), sm.qc.cols(), 0.0);
    // A tiny perturbation keeps the coding deflation well-posed.
    sm.pc(0, 0) = 1e-8;
    sm.qc(0, 0) = 1e-8;
    CalibResult res = calibrate(synthesize_calib_set(sm));
    Mat x = random_mat(16, 16, 31);
    CHECK(rel_err(forward(res.sm, x), forward(sm, x)) <= 1e-3);
}

TEST_CASE("calibrated factor pairs are Frobenius balanced") {
    Geometry g = desk_geometry_small(16, 32);
    SystemMatrices sm = generate_system_matrices(random_vector(96, 32), g);
    CalibResult res = calibrate(synthesize_calib_set(sm));
    CHECK(std::fabs(res.sm.po.frob_norm() - res.sm.qo.frob_norm()) <=
          1e-9 * res.sm.po.frob_norm());
    CHECK(std::fabs(res.sm.pc.frob_norm() - res.sm.qc.frob_norm()) <=
          1e-9 * res.sm.pc.frob_norm());
}

TEST_CASE("calibration is deterministic") {
    Geometry g = desk_geometry_small(16, 32);
    SystemMatrices sm = generate_system_matrices(random_vector(96, 33), g);
    CalibSet cs = synthesize_calib_set(sm, 0.001, 7);
    CalibResult a = calibrate(cs), b = calibrate(cs);
    CHECK((a.sm.pc - b.sm.pc).max_abs() == 0.0);
    CHECK((a.sm.qo - b.sm.qo).max_abs() == 0.0);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("too few iterations on noisy data reports non-convergence") {
    Geometry g = desk_geometry_small(16, 32);
    SystemMatrices sm = generate_system_matrices(random_vector(96, 34), g);
    CalibOptions opts;
    opts.max_iterations = 1;
    opts.tolerance = 1e-12;
    CalibResult res = calibrate(synthesize_calib_set(sm, 0.01, 9), opts);
    CHECK(!res.converged);
    CHECK(res.iterations == 1);
    CHECK(res.last_change > 1e-12);
}

TEST_CASE("calibrate rejects empty stacks") {
    CalibSet cs;
    cs.horizontal.push_back(Mat(4, 4));
    CHECK_THROWS_AS(calibrate(cs), InvalidInput);
}
