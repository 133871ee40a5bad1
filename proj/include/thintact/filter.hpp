#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "thintact/mat.hpp"
#include "thintact/sysmat.hpp"

namespace thintact {

/// F(Y) = phi_s .* IDCT[phi_f .* DCT(Y)], the open-component estimator.
struct JointFilterParams {
    Mat phi_f;  // frequency-domain gains, R x S
    Mat phi_s;  // spatial-domain gains, R x S
};

struct FilterTrainConfig {
    double learning_rate = 0.5;  // fraction of the per-coordinate diagonal-Newton step
    int epochs = 400;
    int batch = 0;  // 0 -> full batch (the only supported mode)
    std::uint64_t seed = 0;

    void validate() const;
};

struct FilterTrainReport {
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::vector<double> loss_per_epoch;
};

Mat apply_joint_filter(const JointFilterParams& p, const Mat& y);

/// Initialization used by train_filter: phi_f = separable raised-cosine low-pass
/// (passband = lowest `passband_frac` of each axis), phi_s = ones.
JointFilterParams init_filter_params(int rows, int cols, double passband_frac = 0.10);

/// Synthesizes Y = Po X Qo^T + Pc X Qc^T with target Yo = Po X Qo^T for every
/// scene and minimizes mean ||F(Y) - Yo||_F^2 by full-batch gradient descent.
JointFilterParams train_filter(const SystemMatrices& sm, const std::vector<Mat>& scenes,
                               const FilterTrainConfig& cfg, FilterTrainReport* report = nullptr);

void save_filter_params(const std::filesystem::path& dir, const JointFilterParams& p,
                        const FilterTrainConfig& cfg, double final_loss);
JointFilterParams load_filter_params(const std::filesystem::path& dir);

}  // namespace thintact
