#pragma once

// Generic-viewpoint scoring of a solution. The rendering function
// f(L, beta) = L^T beta is linear in the light L, so the Laplace factor
// A_ij = f'_i . f'_j - (Y - f(L0, beta)) . f''_ij reduces to the Gram matrix
// beta beta^T. Generic solutions make beta rank 2 and det(A) vanish.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "tsfs/errors.hpp"
#include "tsfs/image_derivatives.hpp"
#include "tsfs/induction.hpp"
#include "tsfs/tensor.hpp"

namespace tsfs {

/// Relative singular-value threshold for the rank estimate.
inline constexpr double kRankTolerance = 1e-8;

/// Sum_{j=1}^n 2^j, plus one when the D^0 column is included.
inline Eigen::Index beta_columns(int order, bool include_zeroth) {
  return ((Eigen::Index{1} << (order + 1)) - 2) + (include_zeroth ? 1 : 0);
}

/// 3 x m concatenation of the full unfoldings of (r1, r2, r3) per order.
inline Eigen::MatrixXd stack_beta(const CanonicalSolution& sol, bool include_zeroth = false) {
  Eigen::MatrixXd beta(3, beta_columns(sol.order, include_zeroth));
  Eigen::Index col = 0;
  if (include_zeroth) beta.col(col++) = Vec3(1.0, 0.0, 0.0);
  for (const auto& rows : sol.rows) {
    const Eigen::MatrixXd u = unfold(rows.columns());
    beta.middleCols(col, u.cols()) = u;
    col += u.cols();
  }
  return beta;
}

/// Y: the unfolded image tensors laid out like stack_beta's columns.
inline Eigen::RowVectorXd observation_row(const ImageTensors& it, bool include_zeroth = false) {
  Eigen::RowVectorXd y(beta_columns(it.order, include_zeroth));
  Eigen::Index col = 0;
  if (include_zeroth) y(col++) = it.i0;
  for (const auto& t : it.tensors) {
    const Eigen::MatrixXd u = unfold(t);
    y.segment(col, u.cols()) = u.row(0);
    col += u.cols();
  }
  return y;
}

/// A_ij = f'_i . f'_j - r . f''_ij with f'_i = row i of beta, f''_ij = 0 and
/// r = Y - L0^T beta.
inline Mat3 genericity_matrix(const Eigen::MatrixXd& beta, const Eigen::RowVectorXd& y, const Vec3& light) {
  if (beta.rows() != 3) throw ValidationError("genericity_matrix: beta must have 3 rows");
  if (y.size() != beta.cols())
    throw ValidationError("genericity_matrix: Y has " + std::to_string(y.size()) + " columns, beta has " +
                          std::to_string(beta.cols()));
  const Eigen::RowVectorXd residual = y - light.transpose() * beta;
  Mat3 a = beta * beta.transpose();
  const Eigen::RowVectorXd second_derivative = Eigen::RowVectorXd::Zero(beta.cols());
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) a(i, k) -= residual.dot(second_derivative);
  return a;
}

struct GenericityOptions {
  double sigma = 0.01;
  bool include_zeroth = false;
};

struct GenericityReport {
  double det_a = 0.0;
  /// sigma_3^2 / sigma_1^2 of beta: scale-free det(A) / (sigma_1^4 sigma_2^2).
  double normalized_det = 0.0;
  /// -1/2 log det(A); +infinity when det(A) <= 0.
  double log_genericity = 0.0;
  int rank_estimate = 0;
  Vec3 singular_values = Vec3::Zero();
  double fidelity = 0.0;
  double posterior_score = 0.0;
  double sigma = 0.01;
  /// The f'' term of A vanished identically (linear rendering function).
  bool gram_simplification = true;
};

namespace detail {

inline GenericityReport score(const CanonicalSolution& sol, const Eigen::RowVectorXd& y,
                              const GenericityOptions& opt) {
  if (!(opt.sigma > 0.0)) throw ValidationError("sigma must be positive");
  const Eigen::MatrixXd beta = stack_beta(sol, opt.include_zeroth);
  const Mat3 a = genericity_matrix(beta, y, sol.light());

  GenericityReport rep;
  rep.sigma = opt.sigma;
  rep.det_a = a.determinant();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(beta);
  const auto& sv = svd.singularValues();
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(3, sv.size()); ++i) rep.singular_values(i) = sv(i);
  const double smax = rep.singular_values(0);
  for (int i = 0; i < 3; ++i)
    if (smax > 0.0 && rep.singular_values(i) >= kRankTolerance * smax) ++rep.rank_estimate;
  rep.normalized_det = smax > 0.0 ? std::pow(rep.singular_values(2) / smax, 2) : 0.0;
  rep.fidelity = (y - sol.light().transpose() * beta).norm();
  rep.log_genericity = rep.det_a > 0.0 ? -0.5 * std::log(rep.det_a) : std::numeric_limits<double>::infinity();
  rep.posterior_score = -rep.fidelity * rep.fidelity / (2.0 * opt.sigma * opt.sigma) + rep.log_genericity;
  return rep;
}

}  // namespace detail

/// Scores against the image the solution was built from.
inline GenericityReport genericity_score(const CanonicalSolution& sol, const ImageTensors& it,
                                         const GenericityOptions& opt = {}) {
  if (it.order != sol.order) throw ValidationError("genericity_score: image and solution orders differ");
  return detail::score(sol, observation_row(it, opt.include_zeroth), opt);
}

/// Scores against the solution's own rendering L0^T beta (fidelity is then 0).
inline GenericityReport genericity_score(const CanonicalSolution& sol, const GenericityOptions& opt = {}) {
  const Eigen::RowVectorXd y = sol.light().transpose() * stack_beta(sol, opt.include_zeroth);
  return detail::score(sol, y, opt);
}

}  // namespace tsfs
