#include "dirsim/numerics.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace dirsim {

namespace {

using Svd = Eigen::BDCSVD<CMat>;

RankReport report_from(const Eigen::VectorXd& sv, double tol) {
    RankReport rep;
    if (sv.size() == 0) return rep;
    const double smax = sv(0);
    if (smax <= 0.0) return rep;  // zero matrix: rank 0, condition undefined
    const double cut = tol * smax;
    Eigen::Index r = 0;
    while (r < sv.size() && sv(r) > cut) ++r;
    rep.rank = r;
    if (r > 0) {
        rep.cond = smax / sv(r - 1);
        rep.cond_defined = true;
    }
    return rep;
}

// pinv(A) * Y restricted to the retained singular values.
CMat pinv_apply(const Svd& svd, const RankReport& rep, const CMat& y) {
    const Eigen::Index r = rep.rank;
    const CMat uh_y = svd.matrixU().leftCols(r).adjoint() * y;
    const CMat scaled =
        svd.singularValues().head(r).cwiseInverse().asDiagonal() * uh_y;
    return svd.matrixV().leftCols(r) * scaled;
}

}  // namespace

RankReport rank_report(const CMat& a, double tol) {
    if (a.size() == 0) return {};
    Svd svd(a);
    return report_from(svd.singularValues(), tol);
}

CMat ls_solve_right(const CMat& y, const CMat& theta, double tol, RankReport* diag) {
    if (y.cols() != theta.cols())
        throw DimensionMismatch("ls_solve_right: slot counts disagree");
    Svd svd(theta, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RankReport rep = report_from(svd.singularValues(), tol);
    if (diag) *diag = rep;
    if (rep.rank < theta.rows())
        throw RankDeficient("ls_solve_right: training matrix not full row rank");
    // X = Y * pinv(Theta);  pinv(Theta)^H = pinv(Theta^H), so reuse the factorization
    // via X^H = pinv(Theta^H) Y^H = U S^-1 V^H Y^H.
    const CMat vh_yh = svd.matrixV().adjoint() * y.adjoint();
    const CMat xh = svd.matrixU() *
                    (svd.singularValues().cwiseInverse().asDiagonal() * vh_yh);
    return xh.adjoint();
}

CVec ls_solve_left(const CMat& a, const CVec& y, double tol, RankReport* diag) {
    return ls_solve_left_multi(a, y, tol, diag).col(0);
}

CMat ls_solve_left_multi(const CMat& a, const CMat& y, double tol, RankReport* diag) {
    if (a.rows() != y.rows())
        throw DimensionMismatch("ls_solve_left: row counts disagree");
    if (2 * a.rows() >= 3 * a.cols() && a.rows() > a.cols()) {
        // Orthogonal pre-reduction for very tall systems: A = QR shares A's
        // singular values, and pinv(A) y = pinv(R) Q^H y, so the SVD only has
        // to handle the square factor.
        Eigen::HouseholderQR<CMat> qr(a);
        const Eigen::Index n = a.cols();
        const CMat r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
        const CMat qy = (qr.householderQ().adjoint() * y).topRows(n);
        return ls_solve_left_multi(r, qy, tol, diag);
    }
    Svd svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RankReport rep = report_from(svd.singularValues(), tol);
    if (diag) *diag = rep;
    if (rep.rank < a.cols())
        throw RankDeficient("ls_solve_left: matrix not full column rank");
    return pinv_apply(svd, rep, y);
}

CMat kron_row(const CRowVec& v, const CMat& b) {
    CMat out(b.rows(), v.size() * b.cols());
    for (Eigen::Index j = 0; j < v.size(); ++j)
        out.middleCols(j * b.cols(), b.cols()) = v(j) * b;
    return out;
}

CMat ls_solve_right_normal(const CMat& y, const CMat& theta) {
    if (y.cols() != theta.cols())
        throw DimensionMismatch("ls_solve_right_normal: slot counts disagree");
    const CMat gram = theta * theta.adjoint();
    const auto ldlt = gram.ldlt();
    // X^H = G^-1 Theta Y^H, then refine against the original LS residual: the
    // plain normal equations square the condition number and would not match
    // the pseudo-inverse route closely on ill-conditioned systems.
    CMat xh = ldlt.solve(theta * y.adjoint());
    for (int it = 0; it < 2; ++it) {
        const CMat resid = y.adjoint() - theta.adjoint() * xh;
        xh += ldlt.solve(theta * resid);
    }
    return xh.adjoint();
}

CVec ls_solve_left_normal(const CMat& a, const CVec& y) {
    if (a.rows() != y.rows())
        throw DimensionMismatch("ls_solve_left_normal: row counts disagree");
    const CMat gram = a.adjoint() * a;
    const auto ldlt = gram.ldlt();
    CVec x = ldlt.solve(a.adjoint() * y);
    for (int it = 0; it < 2; ++it) {
        const CVec resid = y - a * x;
        x += ldlt.solve(a.adjoint() * resid);
    }
    return x;
}

bool all_finite(const CMat& a) {
    return a.allFinite();
}

double rel_err(const CMat& est, const CMat& truth) {
    return (est - truth).norm() / truth.norm();
}

}  // namespace dirsim
