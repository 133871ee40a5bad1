#pragma once

#include "thintact/mat.hpp"

namespace thintact {

/// C = A * B. Blocked, packed, OpenMP over row panels.
Mat matmul(const Mat& a, const Mat& b);

/// Naive triple loop, kept as the reference implementation for tests and benchmarks.
Mat matmul_serial(const Mat& a, const Mat& b);

Mat transpose(const Mat& m);

/// a .* b elementwise.
Mat hadamard(const Mat& a, const Mat& b);

}  // namespace thintact
