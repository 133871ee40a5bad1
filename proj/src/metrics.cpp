#include "thintact/metrics.hpp"

#include <cmath>
#include <vector>

namespace thintact {

double psnr(const Mat& a, const Mat& b, double peak) {
    require_same_shape(a, b, "psnr");
    if (peak <= 0.0) throw InvalidInput("psnr: peak must be > 0");
    double mse = 0.0;
    const double* pa = a.data();
    const double* pb = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = pa[i] - pb[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.size());
    if (mse == 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

namespace {

constexpr int kWin = 11;

std::vector<double> gaussian_window() {
    std::vector<double> w(kWin * kWin);
    const double sigma = 1.5;
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i)
        for (int j = 0; j < kWin; ++j) {
            double di = i - kWin / 2, dj = j - kWin / 2;
            double v = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
            w[i * kWin + j] = v;
            sum += v;
        }
    for (double& v : w) v /= sum;
    return w;
}

}  // namespace

double ssim(const Mat& a, const Mat& b, double peak) {
    require_same_shape(a, b, "ssim");
    if (a.rows() < kWin || a.cols() < kWin)
        throw InvalidInput("ssim: images must be at least 11x11");
    static const std::vector<double> w = gaussian_window();
    const double c1 = (0.01 * peak) * (0.01 * peak);
    const double c2 = (0.03 * peak) * (0.03 * peak);
    const int rv = a.rows() - kWin + 1;
    const int cv = a.cols() - kWin + 1;
    double total = 0.0;
    #pragma omp parallel for schedule(static) reduction(+ : total)
    for (int i = 0; i < rv; ++i) {
        for (int j = 0; j < cv; ++j) {
            double mu_a = 0, mu_b = 0, aa = 0, bb = 0, ab = 0;
            for (int u = 0; u < kWin; ++u) {
                const double* ra = a.row(i + u) + j;
                const double* rb = b.row(i + u) + j;
                const double* rw = &w[u * kWin];
                for (int v = 0; v < kWin; ++v) {
                    double wa = rw[v] * ra[v];
                    double wb = rw[v] * rb[v];
                    mu_a += wa;
                    mu_b += wb;
                    aa += wa * ra[v];
                    bb += wb * rb[v];
                    ab += wa * rb[v];
                }
            }
            double var_a = aa - mu_a * mu_a;
            double var_b = bb - mu_b * mu_b;
            double cov = ab - mu_a * mu_b;
            double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
            double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
            total += num / den;
        }
    }
    return total / (static_cast<double>(rv) * cv);
}

std::pair<double, double> grad_l1(const Mat& m) {
    if (m.rows() < 2 || m.cols() < 2) throw InvalidInput("grad_l1: matrix must be at least 2x2");
    double along_rows = 0.0, along_cols = 0.0;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j + 1 < m.cols(); ++j) along_rows += std::fabs(m(i, j + 1) - m(i, j));
    for (int i = 0; i + 1 < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) along_cols += std::fabs(m(i + 1, j) - m(i, j));
    return {along_rows, along_cols};
}

MetricReport evaluate(const Mat& recon, const Mat& truth, double peak) {
    MetricReport rep;
    rep.psnr = psnr(recon, truth, peak);
    rep.ssim = ssim(recon, truth, peak);
    auto [gu, gv] = grad_l1(recon);
    double denom = std::max(gu + gv, 1e-9);
    rep.grad_uniformity = 2.0 * recon.rows() * recon.cols() / denom;
    return rep;
}

}  // namespace thintact
