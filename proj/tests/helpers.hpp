#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "thintact/mat.hpp"
#include "thintact/rng.hpp"
#include "thintact/sysmat.hpp"

namespace thintact::testing {

inline Mat random_mat(int rows, int cols, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    auto rng = rng_stream(seed, "test.random_mat");
    std::uniform_real_distribution<double> uni(lo, hi);
    Mat m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = uni(rng);
    return m;
}

inline double rel_err(const Mat& got, const Mat& want) {
    return (got - want).frob_norm() / std::max(want.frob_norm(), 1e-300);
}

/// Desk-scale close-up geometry: 64x64 scene, 128x128 measurement, K=96 masks.
inline Geometry desk_geometry() {
    Geometry g;
    g.delta_sensor_um = 10.0;
    g.delta_scene_um = 20.0;
    g.delta_mask_um = 20.0;
    g.z_mm = 4.8;
    g.d_mm = 1.0;
    g.meas_rows = 128;
    g.meas_cols = 128;
    g.scene_rows = 64;
    g.scene_cols = 64;
    return g;
}

/// Smaller variant for GA and calibration fixtures.
inline Geometry desk_geometry_small(int scene = 32, int meas = 64) {
    Geometry g = desk_geometry();
    g.meas_rows = g.meas_cols = meas;
    g.scene_rows = g.scene_cols = scene;
    return g;
}

/// O(RSNM) quadruple-loop evaluation of Y = Po X Qo^T + Pc X Qc^T.
inline Mat forward_oracle(const SystemMatrices& sm, const Mat& x, bool coding_only = false) {
    const int r = sm.po.rows(), s = sm.qo.rows(), n = sm.po.cols(), m = sm.qo.cols();
    Mat y(r, s, 0.0);
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < s; ++b) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) {
                    double open = coding_only ? 0.0 : sm.po(a, i) * sm.qo(b, j);
                    acc += (open + sm.pc(a, i) * sm.qc(b, j)) * x(i, j);
                }
            y(a, b) = acc;
        }
    return y;
}

/// Scalar reference SSIM: 11x11 Gaussian sigma=1.5, valid region, no fast paths.
inline double ssim_reference(const Mat& a, const Mat& b, double peak = 1.0) {
    const int w = 11, half = w / 2;
    double kernel[w][w], ksum = 0.0;
    for (int i = 0; i < w; ++i)
        for (int j = 0; j < w; ++j) {
            double dy = i - half, dx = j - half;
            kernel[i][j] = std::exp(-(dx * dx + dy * dy) / (2.0 * 1.5 * 1.5));
            ksum += kernel[i][j];
        }
    for (int i = 0; i < w; ++i)
        for (int j = 0; j < w; ++j) kernel[i][j] /= ksum;
    const double c1 = 0.01 * peak * 0.01 * peak, c2 = 0.03 * peak * 0.03 * peak;
    double total = 0.0;
    int count = 0;
    for (int i = half; i < a.rows() - half; ++i)
        for (int j = half; j < a.cols() - half; ++j) {
            double ma = 0, mb = 0, va = 0, vb = 0, cov = 0;
            for (int di = -half; di <= half; ++di)
                for (int dj = -half; dj <= half; ++dj) {
                    double k = kernel[di + half][dj + half];
                    ma += k * a(i + di, j + dj);
                    mb += k * b(i + di, j + dj);
                }
            for (int di = -half; di <= half; ++di)
                for (int dj = -half; dj <= half; ++dj) {
                    double k = kernel[di + half][dj + half];
                    double da = a(i + di, j + dj) - ma, db = b(i + di, j + dj) - mb;
                    va += k * da * da;
                    vb += k * db * db;
                    cov += k * da * db;
                }
            total += ((2 * ma * mb + c1) * (2 * cov + c2)) /
                     ((ma * ma + mb * mb + c1) * (va + vb + c2));
            ++count;
        }
    return total / count;
}

}  // namespace thintact::testing
