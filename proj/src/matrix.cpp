#include "wf/matrix.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace wf {

DenseMatrix::DenseMatrix(std::size_t r, std::size_t c, double fill)
    : rows(r), cols(c), data(r * c, fill) {
    if (r == 0 || c == 0) {
        throw ArgumentError("DenseMatrix dimensions must be positive, got " +
                            std::to_string(r) + "x" + std::to_string(c));
    }
}

DenseMatrix::DenseMatrix(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
    if (r == 0 || c == 0) {
        throw ArgumentError("DenseMatrix dimensions must be positive, got " +
                            std::to_string(r) + "x" + std::to_string(c));
    }
    if (data.size() != r * c) {
        throw ShapeError("DenseMatrix data length " + std::to_string(data.size()) +
                         " does not match " + std::to_string(r) + "x" + std::to_string(c));
    }
}

std::string DenseMatrix::shape_string() const {
    std::ostringstream os;
    os << rows << "x" << cols;
    return os.str();
}

void ensure_finite(const DenseMatrix& m, const char* context) {
    for (double v : m.data) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string(context) + " produced a non-finite value");
        }
    }
}

void ensure_finite(const std::vector<double>& v, const char* context) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw NumericError(std::string(context) + " produced a non-finite value");
        }
    }
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows) {
        throw ShapeError("matmul: inner dimensions disagree, " + a.shape_string() +
                         " vs " + b.shape_string());
    }
    DenseMatrix out(a.rows, b.cols, 0.0);
    // i-k-j order: the inner loop runs over contiguous rows of b and out.
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row_ptr(i);
        double* orow = out.row_ptr(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.row_ptr(k);
            for (std::size_t j = 0; j < b.cols; ++j) {
                orow[j] += aik * brow[j];
            }
        }
    }
    ensure_finite(out, "matmul");
    return out;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix out(a.cols, a.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < a.cols; ++j) {
            out.at(j, i) = a.at(i, j);
        }
    }
    return out;
}

namespace {

double apply_op(ElementwiseOp op, double x, double y) {
    switch (op) {
    case ElementwiseOp::add: return x + y;
    case ElementwiseOp::sub: return x - y;
    case ElementwiseOp::mul: return x * y;
    }
    throw ArgumentError("elementwise: unknown op tag");
}

} // namespace

DenseMatrix elementwise(ElementwiseOp op, const DenseMatrix& a, const DenseMatrix& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("elementwise: shapes disagree, " + a.shape_string() + " vs " +
                         b.shape_string());
    }
    DenseMatrix out(a.rows, a.cols, 0.0);
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        out.data[i] = apply_op(op, a.data[i], b.data[i]);
    }
    ensure_finite(out, "elementwise");
    return out;
}

DenseMatrix elementwise(ElementwiseOp op, const DenseMatrix& a, double scalar) {
    DenseMatrix out(a.rows, a.cols, 0.0);
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        out.data[i] = apply_op(op, a.data[i], scalar);
    }
    ensure_finite(out, "elementwise");
    return out;
}

DenseMatrix scale(const DenseMatrix& a, double factor) {
    return elementwise(ElementwiseOp::mul, a, factor);
}

std::size_t argmax_row(const DenseMatrix& a, std::size_t row) {
    if (row >= a.rows) {
        throw IndexError("argmax_row: row " + std::to_string(row) + " out of range for " +
                         a.shape_string());
    }
    const double* r = a.row_ptr(row);
    std::size_t best = 0;
    for (std::size_t j = 1; j < a.cols; ++j) {
        if (r[j] > r[best]) best = j; // strict: ties keep the lowest index
    }
    return best;
}

} // namespace wf
