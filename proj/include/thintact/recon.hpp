#pragma once

#include <vector>

#include "thintact/filter.hpp"
#include "thintact/mat.hpp"
#include "thintact/sysmat.hpp"

namespace thintact {

/// Precomputed SVD factors of (Pc, Qc); per frame the solve is two dense
/// multiplies, one elementwise divide, two dense multiplies.
struct ReconOperator {
    Mat vp;        // N x kp
    Mat sp_up_t;   // kp x R   (Sigma_p U_p^T)
    Mat uq_sq;     // S x kq   (U_q Sigma_q)
    Mat vq_t;      // kq x M
    Mat denom;     // kp x kq  (sigma_p sigma_q^T + tau)
    double tau = 0;
    double sigma_p_max = 0;  // largest singular value of Pc
    double sigma_q_max = 0;

    int scene_rows() const { return vp.rows(); }
    int scene_cols() const { return vq_t.cols(); }
    int meas_rows() const { return sp_up_t.cols(); }
    int meas_cols() const { return uq_sq.rows(); }
};

/// Default regularization: 1e-3 * sigma_max(Pc) * sigma_max(Qc).
double default_tau(const Mat& pc, const Mat& qc);

ReconOperator build_recon_operator(const Mat& pc, const Mat& qc, double tau);

/// Unique minimizer of ||Pc X Qc^T - Yc||_F^2 + tau ||X||_F^2.
Mat solve_closed_form(const ReconOperator& op, const Mat& yc);

/// Full non-iterative pipeline: Yc_hat = Y - F(Y), then the closed-form solve.
Mat reconstruct_frame(const ReconOperator& op, const JointFilterParams& p, const Mat& y);
ImageRGB reconstruct_frame(const ReconOperator& op, const JointFilterParams& p,
                           const ImageRGB& y);

struct NesterovConfig {
    int iterations = 800;
    double step = 0.0;  // 0 -> 1/L with L from 20 power-iteration steps
    double tau = 0.0;

    void validate() const;
};

/// Accelerated gradient descent on ||Po X Qo^T + Pc X Qc^T - Y||_F^2 + tau ||X||_F^2,
/// started from X = 0, run for exactly cfg.iterations iterations.
Mat solve_nesterov(const SystemMatrices& sm, const Mat& y, const NesterovConfig& cfg,
                   std::vector<double>* objective_trace = nullptr);

}  // namespace thintact
