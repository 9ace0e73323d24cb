#include <doctest.h>

#include <cmath>

#include "cfl/fixedpoint.hpp"

using namespace cfl;

namespace {
const FixedSpec q84{8, 4};
const FixedSpec q4824{48, 24};

FxScalar raw(std::int64_t r, FixedSpec spec = q84) { return FxScalar{r, spec}; }
} // namespace

TEST_SUITE("fixedpoint") {

TEST_CASE("encode rounds to nearest, ties away from zero") {
    CHECK(fx_encode(1.5, q84).raw == 24);
    CHECK(fx_encode(-8.0, q84).raw == -128);
    CHECK(fx_encode(0.0, q84).raw == 0);
    // Half-ulp inputs land on the farther integer.
    CHECK(fx_encode(0.03125, q84).raw == 1);   // 0.5 ulp up
    CHECK(fx_encode(-0.03125, q84).raw == -1); // 0.5 ulp down
    CHECK(fx_encode(std::pow(2.0, -24), q4824).raw == 1);
}

TEST_CASE("encode rejects out-of-range values") {
    CHECK_THROWS_AS(fx_encode(8.0, q84), OverflowError);
    CHECK_THROWS_AS(fx_encode(-8.04, q84), OverflowError); // rounds past raw_min
    CHECK_THROWS_AS(fx_encode(1e30, q4824), OverflowError);
    CHECK_NOTHROW(fx_encode(7.9375, q84)); // raw_max exactly
}

TEST_CASE("decode inverts encode on representable values") {
    CHECK(fx_decode(raw(24)) == 1.5);
    CHECK(fx_decode(raw(0)) == 0.0);
    CHECK(fx_decode(raw(-1)) == -0.0625);
    for (double x : {-7.5, -0.125, 0.0625, 3.25})
        CHECK(fx_decode(fx_encode(x, q84)) == x);
}

TEST_CASE("add and sub wrap modulo 2^k") {
    CHECK(fx_add(raw(24), raw(4)).raw == 28);
    CHECK(fx_add(raw(127), raw(1)).raw == -128);
    CHECK(fx_add(raw(55), raw(0)).raw == 55);
    CHECK(fx_sub(raw(55), raw(55)).raw == 0);
    CHECK(fx_sub(raw(-128), raw(1)).raw == 127);
    CHECK(fx_sub(raw(-37), raw(0)).raw == -37);
}

TEST_CASE("mul floors toward minus infinity") {
    CHECK(fx_mul(raw(8), raw(8)).raw == 4);    // 0.5 * 0.5 = 0.25
    CHECK(fx_mul(raw(3), raw(3)).raw == 0);    // floor(9/16)
    CHECK(fx_mul(raw(-3), raw(3)).raw == -1);  // floor(-9/16)
    CHECK(fx_mul(raw(-8), raw(8)).raw == -4);  // exact negative product
}

TEST_CASE("mixed specs and shapes are rejected") {
    CHECK_THROWS_AS(fx_add(raw(1, q84), raw(1, q4824)), SpecMismatchError);
    FxMatrix a(2, 3, q4824), b(3, 2, q4824);
    CHECK_THROWS_AS(fx_mat_add(a, b), DimensionError);
    CHECK_THROWS_AS(fx_matmul(a, a), DimensionError);
}

TEST_CASE("uniform draws stay in range and reproduce by seed") {
    Stream r1(42), r2(42);
    for (int i = 0; i < 1000; ++i) {
        FxScalar a = fx_uniform(r1, q84);
        FxScalar b = fx_uniform(r2, q84);
        CHECK(a.raw == b.raw);
        CHECK(a.raw >= q84.raw_min());
        CHECK(a.raw <= q84.raw_max());
    }
}

TEST_CASE("matmul by an identity-valued matrix is exact") {
    Stream rng(7);
    FxMatrix eye(3, 3, q4824);
    for (int i = 0; i < 3; ++i) eye.at(i, i) = std::int64_t(1) << 24;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 2);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) m(i, j) = rng.normal();
    FxMatrix b = encode_matrix(m, q4824);
    CHECK(fx_matmul(eye, b) == b);
}

TEST_CASE("1x1 matmul equals scalar mul") {
    FxMatrix a(1, 1, q84), b(1, 1, q84);
    a.at(0, 0) = -3;
    b.at(0, 0) = 3;
    CHECK(fx_matmul(a, b).at(0, 0) == fx_mul(raw(-3), raw(3)).raw);
}

TEST_CASE("matmul matches real arithmetic within the floor bound") {
    Stream rng(11);
    Eigen::MatrixXd a(3, 3), b(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            a(i, j) = rng.normal();
            b(i, j) = rng.normal();
        }
    Eigen::MatrixXd got = decode_matrix(fx_matmul(encode_matrix(a, q4824), encode_matrix(b, q4824)));
    // Each of the 3 products floors once, encode adds half an ulp per input.
    double bound = 3.0 * std::pow(2.0, -24) + 4.0 * std::pow(2.0, -25);
    CHECK(((decode_matrix(encode_matrix(a, q4824)) * decode_matrix(encode_matrix(b, q4824))) - got)
              .cwiseAbs()
              .maxCoeff() <= bound);
}

TEST_CASE("matmul result is independent of accumulation order") {
    // Modular addition commutes, so entry sums must not depend on t-order.
    Stream rng(13);
    PadScope guard;
    FxMatrix a = fx_uniform_matrix(rng, 4, 6, q4824);
    FxMatrix b = fx_uniform_matrix(rng, 6, 2, q4824);
    FxMatrix ab = fx_matmul(a, b);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j) {
            FxScalar acc{0, q4824};
            for (int t = 6; t-- > 0;)
                acc = fx_add(acc, fx_mul(FxScalar{a.at(i, t), q4824}, FxScalar{b.at(t, j), q4824}));
            CHECK(acc.raw == ab.at(i, j));
        }
}

TEST_CASE("wrap counter sees only unpadded wraps") {
    WrapCount::reset();
    fx_add(raw(127), raw(1));
    CHECK(WrapCount::value() == 1);
    {
        PadScope guard;
        fx_add(raw(127), raw(1));
    }
    CHECK(WrapCount::value() == 1);
    fx_add(raw(1), raw(1));
    CHECK(WrapCount::value() == 1);
}

TEST_CASE("matrix encode/decode round trip") {
    Eigen::MatrixXd m(2, 2);
    m << 1.5, -0.0625, 0.0, 7.9375;
    FxMatrix fx = encode_matrix(m, q84);
    CHECK((decode_matrix(fx).array() == m.array()).all());
    CHECK(fx.rows() == 2);
    CHECK(fx.cols() == 2);
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS((FixedSpec{64, 24}.validate()), ConfigError);
    CHECK_THROWS_AS((FixedSpec{8, 8}.validate()), ConfigError);
    CHECK_THROWS_AS((FixedSpec{8, 0}.validate()), ConfigError);
    CHECK_NOTHROW(q4824.validate());
}

} // TEST_SUITE
