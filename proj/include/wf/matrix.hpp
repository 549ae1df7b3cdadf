#ifndef WF_MATRIX_HPP
#define WF_MATRIX_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "wf/errors.hpp"

namespace wf {

/// Row-major dense matrix of 64-bit reals. All matrices in this project are
/// small enough that a flat vector plus explicit loops beats any cleverness.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data; // length rows*cols, row-major

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0);
    DenseMatrix(std::size_t r, std::size_t c, std::vector<double> values);

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row_ptr(std::size_t i) { return data.data() + i * cols; }
    const double* row_ptr(std::size_t i) const { return data.data() + i * cols; }

    std::size_t size() const { return rows * cols; }
    bool same_shape(const DenseMatrix& other) const {
        return rows == other.rows && cols == other.cols;
    }
    std::string shape_string() const;
};

enum class ElementwiseOp { add, sub, mul };

/// result[i][j] = sum_k a[i][k] * b[k][j]. Throws ShapeError on inner-dim
/// mismatch and NumericError if the product contains non-finite values.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix transpose(const DenseMatrix& a);

/// Per-element add/sub/mul of two same-shaped matrices.
DenseMatrix elementwise(ElementwiseOp op, const DenseMatrix& a, const DenseMatrix& b);

/// Per-element combination with a scalar; ElementwiseOp::mul doubles as scale.
DenseMatrix elementwise(ElementwiseOp op, const DenseMatrix& a, double scalar);

DenseMatrix scale(const DenseMatrix& a, double factor);

/// Index of the row maximum; ties resolve to the lowest index.
std::size_t argmax_row(const DenseMatrix& a, std::size_t row);

/// Throws NumericError naming `context` if any element is NaN/Inf.
void ensure_finite(const DenseMatrix& m, const char* context);
void ensure_finite(const std::vector<double>& v, const char* context);

} // namespace wf

#endif // WF_MATRIX_HPP
