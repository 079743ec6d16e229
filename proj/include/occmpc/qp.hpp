#pragma once

// Dense convex QP with box constraints:
//   minimize 0.5 x'Hx + f'x  subject to  lower <= x <= upper
// solved by a primal active-set method. H must be symmetric positive
// semidefinite; singular H is handled by stepping along zero-curvature
// descent directions until a bound blocks.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "occmpc/error.hpp"

namespace occmpc {

template <typename Scalar = double>
struct BoxQpOptions {
  Scalar tolerance = Scalar(1e-8);  // relative KKT tolerance
  int max_iterations = 200;
};

template <typename Scalar = double>
struct BoxQpResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
  Scalar objective = Scalar(0);
  Scalar kkt_residual = Scalar(0);  // scaled, see box_qp_kkt_residual
  int iterations = 0;
};

/// Infinity norm of x - clamp(x - grad), divided by the problem scale
/// max(1, |f|_inf, max|H_ij|).
template <typename Scalar>
Scalar box_qp_kkt_residual(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& H,
                           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f,
                           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& lower,
                           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& upper,
                           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x) {
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> g = H * x + f;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> projected =
      (x - g).cwiseMax(lower).cwiseMin(upper);
  Scalar scale = Scalar(1);
  if (f.size() > 0) scale = std::max({scale, f.cwiseAbs().maxCoeff(), H.cwiseAbs().maxCoeff()});
  return f.size() > 0 ? (x - projected).cwiseAbs().maxCoeff() / scale : Scalar(0);
}

template <typename Scalar>
BoxQpResult<Scalar> solve_box_qp(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& H,
                                 const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f,
                                 const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& lower,
                                 const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& upper,
                                 const BoxQpOptions<Scalar>& options = {}) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = f.size();
  if (H.rows() != n || H.cols() != n || lower.size() != n || upper.size() != n)
    throw DimensionMismatch("box QP dimensions disagree");
  if ((lower.array() > upper.array()).any()) throw InvalidArgument("box QP has lower > upper");

  enum class Bound { kFree, kLower, kUpper };
  Scalar scale = Scalar(1);
  if (n > 0) scale = std::max({scale, f.cwiseAbs().maxCoeff(), H.cwiseAbs().maxCoeff()});
  const Scalar tol = options.tolerance * scale;
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();

  Vector x = Vector::Zero(n).cwiseMax(lower).cwiseMin(upper);
  std::vector<Bound> state(static_cast<std::size_t>(n), Bound::kFree);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (x(i) == lower(i)) state[i] = Bound::kLower;
    else if (x(i) == upper(i)) state[i] = Bound::kUpper;
  }

  BoxQpResult<Scalar> result;
  bool converged = n == 0;
  int iter = 0;
  std::vector<Eigen::Index> free;
  for (; iter < options.max_iterations && !converged; ++iter) {
    const Vector g = H * x + f;
    free.clear();
    for (Eigen::Index i = 0; i < n; ++i)
      if (state[i] == Bound::kFree) free.push_back(i);

    Scalar free_grad = Scalar(0);
    for (auto i : free) free_grad = std::max(free_grad, std::abs(g(i)));
    Vector d = Vector::Zero(static_cast<Eigen::Index>(free.size()));
    bool zero_curvature = false;
    if (free_grad > Scalar(0.01) * tol) {
      const auto nf = static_cast<Eigen::Index>(free.size());
      Matrix hff(nf, nf);
      Vector gf(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        gf(a) = g(free[a]);
        for (Eigen::Index b = 0; b < nf; ++b) hff(a, b) = H(free[a], free[b]);
      }
      Eigen::SelfAdjointEigenSolver<Matrix> eig(hff);
      const Vector& lam = eig.eigenvalues();
      const Matrix& vec = eig.eigenvectors();
      const Scalar cutoff =
          std::max(lam.cwiseAbs().maxCoeff(), scale) * Scalar(nf) * eps * Scalar(16);
      const Vector coeff = vec.transpose() * gf;
      Vector null_part = Vector::Zero(nf);
      for (Eigen::Index a = 0; a < nf; ++a)
        if (lam(a) <= cutoff) null_part -= coeff(a) * vec.col(a);
      if (null_part.cwiseAbs().maxCoeff() > tol) {
        d = null_part;
        zero_curvature = true;
      } else {
        for (Eigen::Index a = 0; a < nf; ++a)
          if (lam(a) > cutoff) d -= (coeff(a) / lam(a)) * vec.col(a);
      }
    }

    const Scalar d_norm = d.size() ? d.cwiseAbs().maxCoeff() : Scalar(0);
    Scalar x_norm = Scalar(1);
    for (auto i : free) x_norm = std::max(x_norm, std::abs(x(i)));
    if (!zero_curvature && (free_grad <= Scalar(0.01) * tol || d_norm <= Scalar(64) * eps * x_norm)) {
      // Stationary on the free set: check bound multipliers.
      Scalar worst = tol;
      Eigen::Index release = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        Scalar violation = Scalar(0);
        if (state[i] == Bound::kLower && lower(i) < upper(i)) violation = -g(i);
        if (state[i] == Bound::kUpper && lower(i) < upper(i)) violation = g(i);
        if (violation > worst) {
          worst = violation;
          release = i;
        }
      }
      if (release < 0) {
        converged = true;
        break;
      }
      state[release] = Bound::kFree;
      continue;
    }

    // Ratio test along d.
    Scalar step = zero_curvature ? std::numeric_limits<Scalar>::infinity() : Scalar(1);
    for (std::size_t a = 0; a < free.size(); ++a) {
      const auto i = free[a];
      const auto da = d(static_cast<Eigen::Index>(a));
      if (da < Scalar(0)) step = std::min(step, (lower(i) - x(i)) / da);
      else if (da > Scalar(0)) step = std::min(step, (upper(i) - x(i)) / da);
    }
    step = std::max(step, Scalar(0));
    for (std::size_t a = 0; a < free.size(); ++a) x(free[a]) += step * d(static_cast<Eigen::Index>(a));
    // Pin every variable that reached (or crossed through rounding) a bound.
    for (std::size_t a = 0; a < free.size(); ++a) {
      const auto i = free[a];
      const auto da = d(static_cast<Eigen::Index>(a));
      const Scalar slack = Scalar(8) * eps * std::max(Scalar(1), std::abs(x(i)));
      if (da < Scalar(0) && x(i) <= lower(i) + slack) {
        x(i) = lower(i);
        state[i] = Bound::kLower;
      } else if (da > Scalar(0) && x(i) >= upper(i) - slack) {
        x(i) = upper(i);
        state[i] = Bound::kUpper;
      }
    }
  }

  x = x.cwiseMax(lower).cwiseMin(upper);
  result.x = x;
  result.iterations = iter;
  result.objective = Scalar(0.5) * x.dot(H * x) + f.dot(x);
  result.kkt_residual = box_qp_kkt_residual(H, f, lower, upper, x);
  if (!converged || !(result.kkt_residual <= options.tolerance))
    throw SolverFailure("box QP did not reach KKT tolerance within " +
                        std::to_string(options.max_iterations) + " iterations (residual " +
                        std::to_string(result.kkt_residual) + ")");
  return result;
}

}  // namespace occmpc
