#pragma once

#include "thintact/mat.hpp"

namespace thintact {

/// Orthonormal type-II 2D DCT (FFTW-backed). idct2 is its exact inverse.
Mat dct2(const Mat& m);
Mat idct2(const Mat& m);

/// Direct cosine-sum evaluation, O(n^3) per axis. Reference for tests/benchmarks.
Mat dct2_serial(const Mat& m);
Mat idct2_serial(const Mat& m);

}  // namespace thintact
