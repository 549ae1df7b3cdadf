#include <doctest.h>

#include <cmath>
#include <limits>

#include "wf/matrix.hpp"
#include "wf/rng.hpp"

using namespace wf;

namespace {

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, Prng& rng) {
    DenseMatrix m(rows, cols, 0.0);
    for (double& v : m.data) v = rng.uniform(-2.0, 2.0);
    return m;
}

// Independent reference: accumulate over the k index innermost, one output
// element at a time, without any of the library's loop restructuring.
DenseMatrix matmul_reference(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix out(a.rows, b.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < b.cols; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) {
                s += a.at(i, k) * b.at(k, j);
            }
            out.at(i, j) = s;
        }
    }
    return out;
}

} // namespace

TEST_CASE("matmul identity case") {
    DenseMatrix eye(2, 2, {1, 0, 0, 1});
    DenseMatrix b(2, 2, {3, 4, 5, 6});
    DenseMatrix out = matmul(eye, b);
    CHECK(out.data == b.data);
}

TEST_CASE("matmul 1x2 by 2x1 hand product") {
    DenseMatrix a(1, 2, {1, 2});
    DenseMatrix b(2, 1, {3, 4});
    DenseMatrix out = matmul(a, b);
    REQUIRE(out.rows == 1);
    REQUIRE(out.cols == 1);
    CHECK(out.at(0, 0) == doctest::Approx(11.0));
}

TEST_CASE("matmul matches the triple-loop reference on random shapes") {
    Prng rng(2024);
    DenseMatrix a = random_matrix(5, 7, rng);
    DenseMatrix b = random_matrix(7, 3, rng);
    DenseMatrix expected = matmul_reference(a, b);
    DenseMatrix got = matmul(a, b);
    REQUIRE(got.rows == expected.rows);
    REQUIRE(got.cols == expected.cols);
    for (std::size_t i = 0; i < got.data.size(); ++i) {
        CHECK(got.data[i] == doctest::Approx(expected.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("matmul rejects mismatched inner dims") {
    DenseMatrix a(2, 3, 1.0);
    DenseMatrix b(2, 3, 1.0);
    CHECK_THROWS_AS(matmul(a, b), ShapeError);
}

TEST_CASE("matmul associativity within 1e-9 relative tolerance") {
    Prng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        DenseMatrix a = random_matrix(4, 6, rng);
        DenseMatrix b = random_matrix(6, 5, rng);
        DenseMatrix c = random_matrix(5, 3, rng);
        DenseMatrix left = matmul(matmul(a, b), c);
        DenseMatrix right = matmul(a, matmul(b, c));
        for (std::size_t i = 0; i < left.data.size(); ++i) {
            const double denom = std::max(1e-12, std::fabs(left.data[i]));
            CHECK(std::fabs(left.data[i] - right.data[i]) / denom < 1e-9);
        }
    }
}

TEST_CASE("non-finite results raise instead of propagating") {
    DenseMatrix a(1, 1, {std::numeric_limits<double>::max()});
    DenseMatrix b(1, 1, {std::numeric_limits<double>::max()});
    CHECK_THROWS_AS(matmul(a, b), NumericError);

    DenseMatrix nan_m(1, 1, {std::nan("")});
    DenseMatrix one(1, 1, {1.0});
    CHECK_THROWS_AS(elementwise(ElementwiseOp::add, nan_m, one), NumericError);
}

TEST_CASE("elementwise add/sub/mul/scale") {
    DenseMatrix a(1, 2, {1, 2});
    DenseMatrix b(1, 2, {3, 4});
    CHECK(elementwise(ElementwiseOp::add, a, b).data == std::vector<double>{4, 6});
    Prng rng(3);
    DenseMatrix x = random_matrix(3, 4, rng);
    SUBCASE("mul by zero scalar annihilates") {
        DenseMatrix z = elementwise(ElementwiseOp::mul, x, 0.0);
        for (double v : z.data) CHECK(v == 0.0);
    }
    SUBCASE("sub of self is the zero matrix") {
        DenseMatrix z = elementwise(ElementwiseOp::sub, x, x);
        for (double v : z.data) CHECK(v == 0.0);
    }
    SUBCASE("scale is scalar mul") {
        DenseMatrix s1 = scale(x, 2.5);
        DenseMatrix s2 = elementwise(ElementwiseOp::mul, x, 2.5);
        CHECK(s1.data == s2.data);
    }
    SUBCASE("shape mismatch throws") {
        DenseMatrix wide(3, 5, 0.0);
        CHECK_THROWS_AS(elementwise(ElementwiseOp::add, x, wide), ShapeError);
    }
}

TEST_CASE("argmax_row picks the lowest index on ties") {
    DenseMatrix m(3, 3, {0.1, 0.7, 0.2, 0.5, 0.5, 0.0, 1.0, 1.0, 1.0});
    CHECK(argmax_row(m, 0) == 1);
    CHECK(argmax_row(m, 1) == 0);
    CHECK(argmax_row(m, 2) == 0);
    CHECK_THROWS_AS(argmax_row(m, 3), IndexError);

    DenseMatrix equal(1, 10, 0.25);
    CHECK(argmax_row(equal, 0) == 0);
}

TEST_CASE("transpose round-trips") {
    Prng rng(55);
    DenseMatrix a = random_matrix(4, 7, rng);
    DenseMatrix back = transpose(transpose(a));
    CHECK(back.data == a.data);
}
