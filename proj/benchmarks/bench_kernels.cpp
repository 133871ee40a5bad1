// Compares the OpenMP-parallel kernels against their serial reference
// implementations: dense matmul and the orthonormal 2-D DCT.
#include <chrono>
#include <cstdio>
#include <random>

#include "thintact/dct.hpp"
#include "thintact/kernels.hpp"
#include "thintact/mat.hpp"
#include "thintact/rng.hpp"

using namespace thintact;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

Mat random_mat(int r, int c, std::uint64_t seed) {
    auto rng = rng_stream(seed, "bench.kernels");
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Mat m(r, c);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = uni(rng);
    return m;
}

template <typename F>
double time_best_ms(F&& f, int reps) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        double t0 = now_ms();
        f();
        best = std::min(best, now_ms() - t0);
    }
    return best;
}

}  // namespace

int main() {
    std::printf("%-28s %12s %12s %10s %12s\n", "kernel", "parallel ms", "serial ms", "speedup",
                "max |diff|");

    for (int n : {128, 256, 512}) {
        Mat a = random_mat(n, n, 1), b = random_mat(n, n, 2);
        Mat cp = matmul(a, b);
        Mat cs = matmul_serial(a, b);
        double diff = (cp - cs).max_abs();
        double tp = time_best_ms([&] { matmul(a, b); }, 3);
        double ts = time_best_ms([&] { matmul_serial(a, b); }, 3);
        std::printf("%-28s %12.3f %12.3f %9.2fx %12.3e\n",
                    ("matmul " + std::to_string(n) + "^3").c_str(), tp, ts, ts / tp, diff);
    }

    for (int n : {64, 128, 256}) {
        Mat y = random_mat(n, n, 3);
        Mat dp = dct2(y);
        Mat ds = dct2_serial(y);
        double diff = (dp - ds).max_abs();
        double tp = time_best_ms([&] { dct2(y); }, 3);
        double ts = time_best_ms([&] { dct2_serial(y); }, 3);
        std::printf("%-28s %12.3f %12.3f %9.2fx %12.3e\n",
                    ("dct2 " + std::to_string(n) + "x" + std::to_string(n)).c_str(), tp, ts,
                    ts / tp, diff);
    }
    return 0;
}
