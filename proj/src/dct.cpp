#include "thintact/dct.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

namespace thintact {

namespace {

// FFTW plan creation is not thread-safe; execution is. Plans are cached per
// (rows, cols, direction) and reused via the new-array execute interface.
class PlanCache {
public:
    fftw_plan get(int rows, int cols, bool forward) {
        std::lock_guard<std::mutex> lock(mu_);
        auto key = std::make_tuple(rows, cols, forward);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<double> buf(static_cast<std::size_t>(rows) * cols);
        fftw_r2r_kind kind = forward ? FFTW_REDFT10 : FFTW_REDFT01;
        fftw_plan p = fftw_plan_r2r_2d(rows, cols, buf.data(), buf.data(), kind, kind,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, p);
        return p;
    }

private:
    std::mutex mu_;
    std::map<std::tuple<int, int, bool>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

void check_input(const Mat& m, const char* where) {
    if (m.empty()) throw InvalidInput(std::string(where) + ": empty matrix");
    if (!m.all_finite()) throw InvalidInput(std::string(where) + ": non-finite input");
}

// Orthonormalization factors relative to FFTW's unnormalized REDFT transforms.
// Forward (REDFT10): scale output by sqrt(1/2n), DC additionally by 1/sqrt(2).
// Inverse (REDFT01): scale input by sqrt(1/2n), DC additionally by sqrt(2).
double ortho_factor(int k, int n, bool forward) {
    double f = std::sqrt(1.0 / (2.0 * n));
    if (k == 0) f = forward ? f / std::numbers::sqrt2 : f * std::numbers::sqrt2;
    return f;
}

}  // namespace

Mat dct2(const Mat& m) {
    check_input(m, "dct2");
    const int r = m.rows(), c = m.cols();
    Mat out = m;
    fftw_plan p = cache().get(r, c, true);
    fftw_execute_r2r(p, out.data(), out.data());
    for (int i = 0; i < r; ++i) {
        double fi = ortho_factor(i, r, true);
        for (int j = 0; j < c; ++j) out(i, j) *= fi * ortho_factor(j, c, true);
    }
    return out;
}

Mat idct2(const Mat& m) {
    check_input(m, "idct2");
    const int r = m.rows(), c = m.cols();
    Mat out = m;
    for (int i = 0; i < r; ++i) {
        double fi = ortho_factor(i, r, false);
        for (int j = 0; j < c; ++j) out(i, j) *= fi * ortho_factor(j, c, false);
    }
    fftw_plan p = cache().get(r, c, false);
    fftw_execute_r2r(p, out.data(), out.data());
    return out;
}

namespace {

// 1D orthonormal DCT-II applied to each row of m.
Mat dct_rows_serial(const Mat& m, bool forward) {
    const int r = m.rows(), n = m.cols();
    Mat out(r, n);
    const double pi = std::numbers::pi;
    for (int i = 0; i < r; ++i) {
        for (int k = 0; k < n; ++k) {
            double acc = 0.0;
            if (forward) {
                for (int j = 0; j < n; ++j)
                    acc += m(i, j) * std::cos(pi * (j + 0.5) * k / n);
                double c = (k == 0) ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
                out(i, k) = c * acc;
            } else {
                for (int j = 0; j < n; ++j) {
                    double c = (j == 0) ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
                    acc += c * m(i, j) * std::cos(pi * (k + 0.5) * j / n);
                }
                out(i, k) = acc;
            }
        }
    }
    return out;
}

Mat transpose_local(const Mat& m) {
    Mat t(m.cols(), m.rows());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

}  // namespace

Mat dct2_serial(const Mat& m) {
    check_input(m, "dct2_serial");
    Mat a = dct_rows_serial(m, true);
    a = transpose_local(a);
    a = dct_rows_serial(a, true);
    return transpose_local(a);
}

Mat idct2_serial(const Mat& m) {
    check_input(m, "idct2_serial");
    Mat a = dct_rows_serial(m, false);
    a = transpose_local(a);
    a = dct_rows_serial(a, false);
    return transpose_local(a);
}

}  // namespace thintact
