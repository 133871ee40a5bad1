#include "thintact/kernels.hpp"

#include <algorithm>
#include <cstring>
#include <vector>

namespace thintact {

namespace {

constexpr int kMr = 6;    // micro-kernel rows
constexpr int kNr = 16;   // micro-kernel cols (two AVX-512 lanes)
constexpr int kMc = 96;   // row panel
constexpr int kKc = 256;  // depth panel
constexpr int kNc = 1024; // col panel

void pack_a(int mc, int kc, const double* a, int lda, double* ap) {
    for (int i = 0; i < mc; i += kMr) {
        int mr = std::min(kMr, mc - i);
        for (int p = 0; p < kc; ++p)
            for (int ii = 0; ii < kMr; ++ii)
                *ap++ = (ii < mr) ? a[static_cast<std::size_t>(i + ii) * lda + p] : 0.0;
    }
}

void pack_b(int kc, int nc, const double* b, int ldb, double* bp) {
    for (int j = 0; j < nc; j += kNr) {
        int nr = std::min(kNr, nc - j);
        for (int p = 0; p < kc; ++p) {
            const double* src = b + static_cast<std::size_t>(p) * ldb + j;
            for (int jj = 0; jj < nr; ++jj) *bp++ = src[jj];
            for (int jj = nr; jj < kNr; ++jj) *bp++ = 0.0;
        }
    }
}

void micro_kernel(int kc, const double* ap, const double* bp, double* c, int ldc, int mr, int nr) {
    double acc[kMr][kNr];
    if (mr == kMr && nr == kNr) {
        for (int i = 0; i < kMr; ++i)
            for (int j = 0; j < kNr; ++j) acc[i][j] = c[static_cast<std::size_t>(i) * ldc + j];
        for (int p = 0; p < kc; ++p) {
            const double* a = ap + p * kMr;
            const double* b = bp + p * kNr;
            for (int i = 0; i < kMr; ++i) {
                double ai = a[i];
                #pragma omp simd
                for (int j = 0; j < kNr; ++j) acc[i][j] += ai * b[j];
            }
        }
        for (int i = 0; i < kMr; ++i)
            for (int j = 0; j < kNr; ++j) c[static_cast<std::size_t>(i) * ldc + j] = acc[i][j];
    } else {
        for (auto& row : acc) std::fill(row, row + kNr, 0.0);
        for (int p = 0; p < kc; ++p) {
            const double* a = ap + p * kMr;
            const double* b = bp + p * kNr;
            for (int i = 0; i < kMr; ++i) {
                double ai = a[i];
                for (int j = 0; j < kNr; ++j) acc[i][j] += ai * b[j];
            }
        }
        for (int i = 0; i < mr; ++i)
            for (int j = 0; j < nr; ++j) c[static_cast<std::size_t>(i) * ldc + j] += acc[i][j];
    }
}

}  // namespace

Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows())
        throw InvalidInput("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                           std::to_string(b.rows()) + ")");
    const int m = a.rows(), n = b.cols(), k = a.cols();
    Mat c(m, n, 0.0);
    std::vector<double> bp(static_cast<std::size_t>((kNc + kNr - 1) / kNr) * kNr * kKc);
    for (int jc = 0; jc < n; jc += kNc) {
        int nc = std::min(kNc, n - jc);
        for (int pc = 0; pc < k; pc += kKc) {
            int kc = std::min(kKc, k - pc);
            pack_b(kc, nc, b.data() + static_cast<std::size_t>(pc) * n + jc, n, bp.data());
            #pragma omp parallel for schedule(static)
            for (int ic = 0; ic < m; ic += kMc) {
                int mc = std::min(kMc, m - ic);
                std::vector<double> ap(static_cast<std::size_t>((kMc + kMr - 1) / kMr) * kMr * kKc);
                pack_a(mc, kc, a.data() + static_cast<std::size_t>(ic) * k + pc, k, ap.data());
                for (int j = 0; j < nc; j += kNr) {
                    int nr = std::min(kNr, nc - j);
                    const double* bpanel = bp.data() + static_cast<std::size_t>(j / kNr) * kc * kNr;
                    for (int i = 0; i < mc; i += kMr) {
                        int mr = std::min(kMr, mc - i);
                        micro_kernel(kc, ap.data() + static_cast<std::size_t>(i / kMr) * kc * kMr,
                                     bpanel, c.data() + static_cast<std::size_t>(ic + i) * n + jc + j,
                                     n, mr, nr);
                    }
                }
            }
        }
    }
    return c;
}

Mat matmul_serial(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows())
        throw InvalidInput("matmul_serial: inner dimensions differ");
    const int m = a.rows(), n = b.cols(), k = a.cols();
    Mat c(m, n, 0.0);
    for (int i = 0; i < m; ++i)
        for (int p = 0; p < k; ++p) {
            double aip = a(i, p);
            for (int j = 0; j < n; ++j) c(i, j) += aip * b(p, j);
        }
    return c;
}

Mat transpose(const Mat& m) {
    Mat t(m.cols(), m.rows());
    constexpr int blk = 32;
    for (int ib = 0; ib < m.rows(); ib += blk)
        for (int jb = 0; jb < m.cols(); jb += blk) {
            int ie = std::min(ib + blk, m.rows());
            int je = std::min(jb + blk, m.cols());
            for (int i = ib; i < ie; ++i)
                for (int j = jb; j < je; ++j) t(j, i) = m(i, j);
        }
    return t;
}

Mat hadamard(const Mat& a, const Mat& b) {
    require_same_shape(a, b, "hadamard");
    Mat c(a.rows(), a.cols());
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
    for (std::size_t i = 0; i < a.size(); ++i) pc[i] = pa[i] * pb[i];
    return c;
}

}  // namespace thintact
