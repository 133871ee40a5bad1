#pragma once

#include <utility>

#include "thintact/mat.hpp"

namespace thintact {

struct MetricReport {
    double psnr = 0.0;
    double ssim = 0.0;
    double grad_uniformity = 0.0;
};

/// 10*log10(peak^2 / MSE), capped at 100 dB when MSE = 0.
double psnr(const Mat& a, const Mat& b, double peak = 1.0);

inline constexpr double kPsnrCap = 100.0;

/// Mean local SSIM, 11x11 Gaussian window sigma=1.5, C1=(0.01*peak)^2, C2=(0.03*peak)^2.
double ssim(const Mat& a, const Mat& b, double peak = 1.0);

/// L1 norms of forward differences: (along rows, along columns).
std::pair<double, double> grad_l1(const Mat& m);

MetricReport evaluate(const Mat& recon, const Mat& truth, double peak = 1.0);

}  // namespace thintact
