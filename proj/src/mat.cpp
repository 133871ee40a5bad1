#include "thintact/mat.hpp"

#include <cmath>
#include <string>

namespace thintact {

Mat::Mat(int rows, int cols, double fill) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1)
        throw InvalidInput("Mat: dimensions must be >= 1, got " + std::to_string(rows) + "x" +
                           std::to_string(cols));
    data_.assign(static_cast<std::size_t>(rows) * cols, fill);
}

Mat Mat::identity(int n) {
    Mat m(n, n, 0.0);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat& Mat::operator+=(const Mat& o) {
    require_same_shape(*this, o, "Mat::operator+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
}

Mat& Mat::operator-=(const Mat& o) {
    require_same_shape(*this, o, "Mat::operator-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
}

Mat& Mat::operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
}

bool Mat::all_finite() const {
    for (double x : data_)
        if (!std::isfinite(x)) return false;
    return true;
}

double Mat::frob_norm() const {
    double acc = 0.0;
    for (double x : data_) acc += x * x;
    return std::sqrt(acc);
}

double Mat::max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::fabs(x));
    return m;
}

double Mat::sum() const {
    double acc = 0.0;
    for (double x : data_) acc += x;
    return acc;
}

void ImageRGB::validate() const {
    if (!r.same_shape(g) || !r.same_shape(b))
        throw InvalidInput("ImageRGB: channel planes must share dimensions");
}

void require_same_shape(const Mat& a, const Mat& b, const char* where) {
    if (!a.same_shape(b))
        throw InvalidInput(std::string(where) + ": dimension mismatch " + std::to_string(a.rows()) +
                           "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                           std::to_string(b.cols()));
}

}  // namespace thintact
