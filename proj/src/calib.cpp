#include "thintact/calib.hpp"

#include <lapacke.h>

#include <cmath>
#include <string>

#include "thintact/kernels.hpp"

namespace thintact {

void CalibSet::validate() const {
    if (horizontal.empty() || vertical.empty())
        throw InvalidInput("CalibSet: both slit stacks must be non-empty");
    const Mat& first = horizontal.front();
    for (const Mat& y : horizontal) require_same_shape(first, y, "CalibSet(horizontal)");
    for (const Mat& y : vertical) require_same_shape(first, y, "CalibSet(vertical)");
}

Mat make_slit_scene(SlitAxis axis, int index, int scene_rows, int scene_cols) {
    int limit = (axis == SlitAxis::Horizontal) ? scene_rows : scene_cols;
    if (index < 0 || index >= limit)
        throw InvalidInput("make_slit_scene: index " + std::to_string(index) +
                           " out of range [0, " + std::to_string(limit) + ")");
    Mat x(scene_rows, scene_cols, 0.0);
    if (axis == SlitAxis::Horizontal)
        for (int j = 0; j < scene_cols; ++j) x(index, j) = 1.0;
    else
        for (int i = 0; i < scene_rows; ++i) x(i, index) = 1.0;
    return x;
}

namespace {

std::vector<double> mat_vec(const Mat& m, const std::vector<double>& v) {
    std::vector<double> out(m.rows(), 0.0);
    for (int i = 0; i < m.rows(); ++i) {
        const double* row = m.row(i);
        double acc = 0.0;
        for (int j = 0; j < m.cols(); ++j) acc += row[j] * v[j];
        out[i] = acc;
    }
    return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

std::vector<double> row_sums(const Mat& m) {
    std::vector<double> out(m.rows(), 0.0);
    for (int i = 0; i < m.rows(); ++i) {
        const double* row = m.row(i);
        for (int j = 0; j < m.cols(); ++j) out[i] += row[j];
    }
    return out;
}

// First right singular vector, sign fixed so the largest-magnitude entry is positive.
std::vector<double> leading_right_singular_vector(const Mat& m) {
    Mat work = m;
    const int r = m.rows(), c = m.cols(), k = std::min(r, c);
    std::vector<double> s(k);
    Mat u(r, k), vt(k, c);
    int info = LAPACKE_dgesdd(LAPACK_ROW_MAJOR, 'S', r, c, work.data(), c, s.data(), u.data(), k,
                              vt.data(), c);
    if (info != 0)
        throw CalibrationError("calibrate: SVD of center slit image failed, info=" +
                               std::to_string(info));
    if (s[0] <= 0.0)
        throw CalibrationError("calibrate: degenerate (zero) center slit image");
    std::vector<double> v(c);
    for (int j = 0; j < c; ++j) v[j] = vt(0, j);
    int arg = 0;
    for (int j = 1; j < c; ++j)
        if (std::fabs(v[j]) > std::fabs(v[arg])) arg = j;
    if (v[arg] < 0)
        for (double& x : v) x = -x;
    return v;
}

double rel_change(const Mat& a, const Mat& b) {
    return (a - b).frob_norm() / std::max(b.frob_norm(), 1e-300);
}

}  // namespace

std::pair<Mat, Mat> decompose_given_qo_qc(const std::vector<Mat>& images,
                                          const std::vector<double>& q_o,
                                          const std::vector<double>& q_c) {
    if (images.empty()) throw InvalidInput("decompose_given_qo_qc: empty image list");
    const double qo_sq = dot(q_o, q_o), qc_sq = dot(q_c, q_c);
    if (qo_sq <= 0.0 || qc_sq <= 0.0)
        throw InvalidInput("decompose_given_qo_qc: zero-norm q vector");
    const int r = images.front().rows();
    const int n = static_cast<int>(images.size());
    Mat po(r, n), pc(r, n);
    #pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        Mat y = images[i];
        std::vector<double> p_o = mat_vec(y, q_o);
        for (double& v : p_o) v /= qo_sq;
        for (int a = 0; a < y.rows(); ++a) {
            double* row = y.row(a);
            for (int b = 0; b < y.cols(); ++b) row[b] -= p_o[a] * q_o[b];
        }
        std::vector<double> p_c = mat_vec(y, q_c);
        for (int a = 0; a < r; ++a) {
            po(a, i) = p_o[a];
            pc(a, i) = p_c[a] / qc_sq;
        }
    }
    return {std::move(po), std::move(pc)};
}

CalibResult calibrate(const CalibSet& cs, const CalibOptions& opts) {
    cs.validate();
    const int n = static_cast<int>(cs.horizontal.size());
    const int m = static_cast<int>(cs.vertical.size());
    const int s_cols = cs.horizontal.front().cols();

    std::vector<Mat> vertical_t;
    vertical_t.reserve(m);
    for (const Mat& y : cs.vertical) vertical_t.push_back(transpose(y));

    // Initial estimates: q_o = 1, then q_c from the deflated center image.
    std::vector<double> ones(s_cols, 1.0);
    const int center = n / 2;
    Mat yc_center = cs.horizontal[center];
    std::vector<double> p_center = mat_vec(yc_center, ones);
    for (double& v : p_center) v /= static_cast<double>(s_cols);
    for (int a = 0; a < yc_center.rows(); ++a) {
        double* row = yc_center.row(a);
        for (int b = 0; b < s_cols; ++b) row[b] -= p_center[a];
    }
    std::vector<double> q_c = leading_right_singular_vector(yc_center);

    auto [po, pc] = decompose_given_qo_qc(cs.horizontal, ones, q_c);
    auto [qo, qc] = decompose_given_qo_qc(vertical_t, row_sums(po), row_sums(pc));

    CalibResult res;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        Mat po_prev = po, qo_prev = qo, pc_prev = pc, qc_prev = qc;
        std::tie(po, pc) = decompose_given_qo_qc(cs.horizontal, row_sums(qo), row_sums(qc));
        std::tie(qo, qc) = decompose_given_qo_qc(vertical_t, row_sums(po), row_sums(pc));
        // Frobenius rebalancing keeps the alternation from drifting in scale.
        double s_open = std::sqrt(qo.frob_norm() / std::max(po.frob_norm(), 1e-300));
        po *= s_open;
        qo *= 1.0 / s_open;
        double s_code = std::sqrt(qc.frob_norm() / std::max(pc.frob_norm(), 1e-300));
        pc *= s_code;
        qc *= 1.0 / s_code;
        res.iterations = it;
        res.last_change = std::max({rel_change(po, po_prev), rel_change(qo, qo_prev),
                                    rel_change(pc, pc_prev), rel_change(qc, qc_prev)});
        if (res.last_change < opts.tolerance) {
            res.converged = true;
            break;
        }
    }
    res.sm = SystemMatrices{std::move(po), std::move(qo), std::move(pc), std::move(qc)};
    return res;
}

CalibSet synthesize_calib_set(const SystemMatrices& sm, double noise_sigma, std::uint64_t seed) {
    const int n = sm.po.cols(), m = sm.qo.cols();
    CalibSet cs;
    cs.horizontal.reserve(n);
    cs.vertical.reserve(m);
    for (int i = 0; i < n; ++i)
        cs.horizontal.push_back(forward(sm, make_slit_scene(SlitAxis::Horizontal, i, n, m),
                                        noise_sigma, seed ^ (0x100000ull + i)));
    for (int i = 0; i < m; ++i)
        cs.vertical.push_back(forward(sm, make_slit_scene(SlitAxis::Vertical, i, n, m),
                                      noise_sigma, seed ^ (0x200000ull + i)));
    return cs;
}

}  // namespace thintact
