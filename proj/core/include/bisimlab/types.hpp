#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bisimlab {

using Vec = std::vector<double>;

/// Malformed caller input: bad dimensions, invalid probabilities, out-of-range knobs.
class ArgumentError : public std::invalid_argument {
  public: using std::invalid_argument::invalid_argument;
};

/// A computation produced or encountered a non-finite / out-of-domain value.
class NumericalError : public std::runtime_error {
  public: using std::runtime_error::runtime_error;
};

/// File could not be read, written, or parsed.
class IoError : public std::runtime_error {
  public: using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of doubles. Deliberately minimal: the problem sizes
/// here are tiny and the call sites want plain indexed access, nothing more.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

    const double* row(std::size_t i) const { return data_.data() + i * cols_; }
    double* row(std::size_t i) { return data_.data() + i * cols_; }

    const Vec& data() const { return data_; }
    Vec& data() { return data_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    /// Largest absolute entry-wise difference; matrices must share a shape.
    double max_abs_diff(const Matrix& other) const {
        if (rows_ != other.rows_ || cols_ != other.cols_)
            throw ArgumentError("Matrix::max_abs_diff: shape mismatch");
        double worst = 0.0;
        for (std::size_t k = 0; k < data_.size(); ++k)
            worst = std::max(worst, std::fabs(data_[k] - other.data_[k]));
        return worst;
    }

  private:
    std::size_t rows_ = 0, cols_ = 0;
    Vec data_;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw ArgumentError(what);
}

}  // namespace bisimlab
