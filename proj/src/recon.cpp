#include "thintact/recon.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "thintact/kernels.hpp"
#include "thintact/rng.hpp"

namespace thintact {

namespace {

struct Svd {
    Mat u;             // m x k
    std::vector<double> s;  // k, non-increasing
    Mat vt;            // k x n
};

Svd economy_svd(const Mat& a, const char* name) {
    if (!a.all_finite()) throw NumericError(std::string("SVD of ") + name + ": non-finite input");
    const int m = a.rows(), n = a.cols(), k = std::min(m, n);
    Mat work = a;
    Svd out{Mat(m, k), std::vector<double>(k), Mat(k, n)};
    int info = LAPACKE_dgesdd(LAPACK_ROW_MAJOR, 'S', m, n, work.data(), n, out.s.data(),
                              out.u.data(), k, out.vt.data(), n);
    if (info != 0)
        throw NumericError(std::string("SVD of ") + name + " failed, dgesdd info=" +
                           std::to_string(info));
    return out;
}

}  // namespace

double default_tau(const Mat& pc, const Mat& qc) {
    auto sp = economy_svd(pc, "Pc");
    auto sq = economy_svd(qc, "Qc");
    return 1e-3 * sp.s.front() * sq.s.front();
}

ReconOperator build_recon_operator(const Mat& pc, const Mat& qc, double tau) {
    if (tau <= 0) throw InvalidInput("build_recon_operator: tau must be > 0");
    Svd sp = economy_svd(pc, "Pc");
    Svd sq = economy_svd(qc, "Qc");
    const int kp = static_cast<int>(sp.s.size());
    const int kq = static_cast<int>(sq.s.size());

    ReconOperator op;
    op.tau = tau;
    op.sigma_p_max = sp.s.front();
    op.sigma_q_max = sq.s.front();
    op.vp = transpose(sp.vt);  // N x kp

    op.sp_up_t = transpose(sp.u);  // kp x R
    for (int i = 0; i < kp; ++i) {
        double* row = op.sp_up_t.row(i);
        for (int j = 0; j < op.sp_up_t.cols(); ++j) row[j] *= sp.s[i];
    }

    op.uq_sq = sq.u;  // S x kq
    for (int i = 0; i < op.uq_sq.rows(); ++i) {
        double* row = op.uq_sq.row(i);
        for (int j = 0; j < kq; ++j) row[j] *= sq.s[j];
    }

    op.vq_t = sq.vt;  // kq x M

    op.denom = Mat(kp, kq);
    for (int i = 0; i < kp; ++i)
        for (int j = 0; j < kq; ++j)
            op.denom(i, j) = sp.s[i] * sp.s[i] * sq.s[j] * sq.s[j] + tau;
    return op;
}

Mat solve_closed_form(const ReconOperator& op, const Mat& yc) {
    if (yc.rows() != op.meas_rows() || yc.cols() != op.meas_cols())
        throw InvalidInput("solve_closed_form: measurement is " + std::to_string(yc.rows()) + "x" +
                           std::to_string(yc.cols()) + ", expected " +
                           std::to_string(op.meas_rows()) + "x" + std::to_string(op.meas_cols()));
    Mat t = matmul(matmul(op.sp_up_t, yc), op.uq_sq);  // kp x kq
    const double* d = op.denom.data();
    double* td = t.data();
    for (std::size_t i = 0; i < t.size(); ++i) td[i] /= d[i];
    return matmul(matmul(op.vp, t), op.vq_t);
}

Mat reconstruct_frame(const ReconOperator& op, const JointFilterParams& p, const Mat& y) {
    Mat yc = y - apply_joint_filter(p, y);
    return solve_closed_form(op, yc);
}

ImageRGB reconstruct_frame(const ReconOperator& op, const JointFilterParams& p,
                           const ImageRGB& y) {
    y.validate();
    ImageRGB out;
    for (int c = 0; c < 3; ++c) out.plane(c) = reconstruct_frame(op, p, y.plane(c));
    return out;
}

void NesterovConfig::validate() const {
    if (iterations < 1) throw InvalidInput("NesterovConfig: iterations must be >= 1");
    if (step < 0) throw InvalidInput("NesterovConfig: step must be >= 0");
    if (tau < 0) throw InvalidInput("NesterovConfig: tau must be >= 0");
}

Mat solve_nesterov(const SystemMatrices& sm, const Mat& y, const NesterovConfig& cfg,
                   std::vector<double>* objective_trace) {
    cfg.validate();
    const int n = sm.po.cols(), m = sm.qo.cols();
    if (y.rows() != sm.po.rows() || y.cols() != sm.qo.rows())
        throw InvalidInput("solve_nesterov: measurement dimension mismatch");

    Mat po_t = transpose(sm.po), qo_t = transpose(sm.qo);
    Mat pc_t = transpose(sm.pc), qc_t = transpose(sm.qc);

    auto apply = [&](const Mat& x) {
        return matmul(matmul(sm.po, x), qo_t) + matmul(matmul(sm.pc, x), qc_t);
    };
    auto apply_adjoint = [&](const Mat& r) {
        return matmul(matmul(po_t, r), sm.qo) + matmul(matmul(pc_t, r), sm.qc);
    };

    double step = cfg.step;
    if (step == 0.0) {
        // L = 2 (lambda_max(A^T A) + tau), lambda_max from 20 power-iteration steps.
        auto rng = rng_stream(0, "recon.nesterov.power");
        std::normal_distribution<double> gauss(0.0, 1.0);
        Mat v(n, m);
        for (std::size_t i = 0; i < v.size(); ++i) v.data()[i] = gauss(rng);
        double lambda = 0.0;
        for (int it = 0; it < 20; ++it) {
            Mat w = apply_adjoint(apply(v));
            lambda = w.frob_norm() / std::max(v.frob_norm(), 1e-300);
            double inv = 1.0 / std::max(w.frob_norm(), 1e-300);
            v = w * inv;
        }
        step = 1.0 / (2.0 * (lambda + cfg.tau));
    }

    Mat x(n, m, 0.0);
    Mat x_prev = x;
    for (int k = 1; k <= cfg.iterations; ++k) {
        double momentum = (k - 1.0) / (k + 2.0);
        Mat z = x;
        if (k > 1) {
            for (std::size_t i = 0; i < z.size(); ++i)
                z.data()[i] += momentum * (x.data()[i] - x_prev.data()[i]);
        }
        Mat residual = apply(z) - y;
        Mat grad = apply_adjoint(residual);
        for (std::size_t i = 0; i < grad.size(); ++i)
            grad.data()[i] = 2.0 * (grad.data()[i] + cfg.tau * z.data()[i]);
        x_prev = std::move(x);
        x = std::move(z);
        for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] -= step * grad.data()[i];
        if (!x.all_finite())
            throw NumericError("solve_nesterov: non-finite iterate at iteration " +
                               std::to_string(k));
        if (objective_trace) {
            Mat r = apply(x) - y;
            double obj = r.frob_norm() * r.frob_norm() +
                         cfg.tau * x.frob_norm() * x.frob_norm();
            objective_trace->push_back(obj);
        }
    }
    return x;
}

}  // namespace thintact
