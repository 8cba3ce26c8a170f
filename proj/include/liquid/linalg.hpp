#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "liquid/delegation.hpp"

namespace liquid {

struct SolveResult {
  Vector x;
  double residual = 0.0;  ///< ||A x - b||_inf after refinement
};

/// Dense LU with partial pivoting followed by one step of iterative
/// refinement.
inline SolveResult solve_refined(const Matrix& a, const Vector& b) {
  if (a.rows() == 0) return {Vector(0), 0.0};
  Eigen::PartialPivLU<Matrix> lu(a);
  Vector x = lu.solve(b);
  const Vector r = b - a * x;
  x += lu.solve(r);
  const Vector r2 = a * x - b;
  double residual = r2.lpNorm<Eigen::Infinity>();
  if (!std::isfinite(residual) || !x.allFinite()) residual = std::numeric_limits<double>::infinity();
  return {std::move(x), residual};
}

/// Residual budget for a right-hand side: absolute 1e-9, scaled up for large
/// sources so the check is unit-free.
inline double residual_budget(const Vector& b) {
  constexpr double kResidual = 1e-9;
  return kResidual * std::max(1.0, b.size() ? b.lpNorm<Eigen::Infinity>() : 0.0);
}

}  // namespace liquid
