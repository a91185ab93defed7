#pragma once

#include <Eigen/Dense>
#include <complex>

#include "dirsim/errors.hpp"

namespace dirsim {

using cxd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using CRowVec = Eigen::RowVectorXcd;

// Relative singular-value cutoff for rank decisions.
inline constexpr double kSvRelTol = 1e-12;

struct RankReport {
    Eigen::Index rank = 0;
    double cond = 0.0;  // sigma_max / sigma_min over retained singular values
    bool cond_defined = false;
};

RankReport rank_report(const CMat& a, double tol = kSvRelTol);

/// Minimizer X of ||Y - X*Theta||_F for wide full-row-rank Theta (M x I, I >= M),
/// computed through an SVD pseudo-inverse. Throws RankDeficient / DimensionMismatch.
CMat ls_solve_right(const CMat& y, const CMat& theta, double tol = kSvRelTol,
                    RankReport* diag = nullptr);

/// Minimizer x of ||A*x - y|| for tall full-column-rank A (P x Q, P >= Q).
CVec ls_solve_left(const CMat& a, const CVec& y, double tol = kSvRelTol,
                   RankReport* diag = nullptr);

/// Column-wise variant: solves A*X = Y for every column of Y with one factorization.
CMat ls_solve_left_multi(const CMat& a, const CMat& y, double tol = kSvRelTol,
                         RankReport* diag = nullptr);

/// Row-vector Kronecker product: block j of the result (N x M2) equals v_j * B,
/// matching the stacking order of the joint-estimation unknown vector.
CMat kron_row(const CRowVec& v, const CMat& b);

// Closed-form normal-equation solves. Kept as an independent route for
// cross-checking the SVD path; not used by the estimation pipeline itself.
CMat ls_solve_right_normal(const CMat& y, const CMat& theta);
CVec ls_solve_left_normal(const CMat& a, const CVec& y);

bool all_finite(const CMat& a);

/// ||est - truth||_F / ||truth||_F
double rel_err(const CMat& est, const CMat& truth);

}  // namespace dirsim
