#include <doctest.h>

#include <random>

#include "dirsim/numerics.hpp"

using namespace dirsim;

namespace {

CMat random_cmat(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    CMat a(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) a(i, j) = cxd(g(rng), g(rng));
    return a;
}

}  // namespace

TEST_CASE("rank_report on canonical matrices") {
    const RankReport id = rank_report(CMat::Identity(3, 3));
    CHECK(id.rank == 3);
    CHECK(id.cond_defined);
    CHECK(id.cond == doctest::Approx(1.0));

    const RankReport zero = rank_report(CMat::Zero(2, 4));
    CHECK(zero.rank == 0);
    CHECK_FALSE(zero.cond_defined);

    CMat ones(2, 2);
    ones.setOnes();
    CHECK(rank_report(ones).rank == 1);
}

TEST_CASE("ls_solve_right recovers X from Y = X * Theta exactly") {
    const CMat x = random_cmat(4, 3, 11);
    const CMat theta = random_cmat(3, 7, 12);
    const CMat y = x * theta;
    const CMat x_hat = ls_solve_right(y, theta);
    CHECK(rel_err(x_hat, x) <= 1e-12);
}

TEST_CASE("ls_solve_right matches the closed-form route") {
    const CMat x = random_cmat(5, 4, 21);
    const CMat theta = random_cmat(4, 9, 22);
    const CMat y = x * theta + 0.01 * random_cmat(5, 9, 23);  // inconsistent system
    const CMat svd_route = ls_solve_right(y, theta);
    const CMat normal_route = ls_solve_right_normal(y, theta);
    CHECK(rel_err(svd_route, normal_route) <= 1e-10);
}

TEST_CASE("ls_solve_right rejects rank-deficient and misshapen systems") {
    CMat theta(2, 4);
    theta.row(0) = random_cmat(1, 4, 31);
    theta.row(1) = 2.0 * theta.row(0);  // dependent rows
    CHECK_THROWS_AS(ls_solve_right(random_cmat(3, 4, 32), theta), RankDeficient);

    // fewer slots than unknowns
    CHECK_THROWS_AS(ls_solve_right(random_cmat(3, 2, 33), random_cmat(4, 2, 34)),
                    RankDeficient);
    // column-count mismatch between Y and Theta
    CHECK_THROWS_AS(ls_solve_right(random_cmat(3, 5, 35), random_cmat(3, 4, 36)),
                    DimensionMismatch);
}

TEST_CASE("ls_solve_left recovers x from a tall consistent system") {
    const CMat a = random_cmat(8, 3, 41);
    const CVec x = random_cmat(3, 1, 42).col(0);
    const CVec x_hat = ls_solve_left(a, a * x);
    CHECK((x_hat - x).norm() / x.norm() <= 1e-12);

    const CVec normal_route = ls_solve_left_normal(a, a * x);
    CHECK((x_hat - normal_route).norm() / x.norm() <= 1e-10);
}

TEST_CASE("ls_solve_left_multi equals column-by-column solves") {
    const CMat a = random_cmat(7, 4, 51);
    const CMat y = random_cmat(7, 5, 52);
    const CMat multi = ls_solve_left_multi(a, y);
    for (int j = 0; j < 5; ++j) {
        const CVec single = ls_solve_left(a, y.col(j));
        CHECK((multi.col(j) - single).norm() <= 1e-12 * (single.norm() + 1.0));
    }
}

TEST_CASE("kron_row block layout") {
    CRowVec v(2);
    v << cxd(1, 0), cxd(0, 2);
    CMat b(2, 2);
    b << cxd(1, 0), cxd(2, 0), cxd(3, 0), cxd(4, 0);
    const CMat k = kron_row(v, b);
    REQUIRE(k.rows() == 2);
    REQUIRE(k.cols() == 4);
    CHECK((k.leftCols(2) - b).norm() == doctest::Approx(0.0));
    CHECK((k.rightCols(2) - cxd(0, 2) * b).norm() == doctest::Approx(0.0));
}

TEST_CASE("kron_row assembles a solvable stacked system") {
    // y_i = X * (theta2_i kron I) * vec-stacked unknown, the same shape the
    // joint scaling solve uses.
    const CMat x = random_cmat(3, 2, 61);
    const CVec unknown = random_cmat(2 * 2, 1, 62).col(0);
    CMat a(3 * 3, 4);
    CVec y(3 * 3);
    for (int i = 0; i < 3; ++i) {
        const CRowVec v = random_cmat(1, 2, 63 + i).row(0);
        const CMat block = kron_row(v, x);
        a.middleRows(3 * i, 3) = block;
        y.segment(3 * i, 3) = block * unknown;
    }
    const CVec got = ls_solve_left(a, y);
    CHECK((got - unknown).norm() / unknown.norm() <= 1e-11);
}

TEST_CASE("rel_err and all_finite") {
    const CMat a = random_cmat(3, 3, 71);
    CHECK(rel_err(a, a) == doctest::Approx(0.0));
    CHECK(rel_err(2.0 * a, a) == doctest::Approx(1.0));
    CHECK(all_finite(a));
    CMat bad = a;
    bad(1, 1) = cxd(std::numeric_limits<double>::quiet_NaN(), 0.0);
    CHECK_FALSE(all_finite(bad));
}
