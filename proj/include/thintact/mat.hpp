#pragma once

#include <cstddef>
#include <vector>

#include "thintact/errors.hpp"

namespace thintact {

/// Dense real matrix, row-major.
class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols, double fill = 0.0);

    static Mat zeros(int rows, int cols) { return Mat(rows, cols, 0.0); }
    static Mat ones(int rows, int cols) { return Mat(rows, cols, 1.0); }
    static Mat identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double* row(int i) { return data_.data() + static_cast<std::size_t>(i) * cols_; }
    const double* row(int i) const { return data_.data() + static_cast<std::size_t>(i) * cols_; }

    Mat& operator+=(const Mat& o);
    Mat& operator-=(const Mat& o);
    Mat& operator*=(double s);

    friend Mat operator+(Mat a, const Mat& b) { return a += b; }
    friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
    friend Mat operator*(Mat a, double s) { return a *= s; }
    friend Mat operator*(double s, Mat a) { return a *= s; }

    bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    bool all_finite() const;

    double frob_norm() const;
    double max_abs() const;
    double sum() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

/// RGB image as three planes with values in [0, 1].
struct ImageRGB {
    Mat r, g, b;

    int height() const { return r.rows(); }
    int width() const { return r.cols(); }

    const Mat& plane(int c) const { return c == 0 ? r : (c == 1 ? g : b); }
    Mat& plane(int c) { return c == 0 ? r : (c == 1 ? g : b); }

    void validate() const;  // throws InvalidInput on shape mismatch
};

void require_same_shape(const Mat& a, const Mat& b, const char* where);

}  // namespace thintact
