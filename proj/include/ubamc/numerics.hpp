#ifndef UBAMC_NUMERICS_HPP
#define UBAMC_NUMERICS_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "ubamc/error.hpp"

namespace ubamc::numerics {

using DenseMatrix = Eigen::MatrixXd;
using DenseVector = Eigen::VectorXd;

struct LeastSquaresSolution {
  DenseVector x;
  double residual = 0.0;  // ||A x - b||_2
};

/// Minimum-norm minimiser of ||A x - b||_2. The residual is reported, not judged.
inline LeastSquaresSolution solve_least_squares(const DenseMatrix& a, const DenseVector& b) {
  if (a.rows() != b.size()) {
    throw std::invalid_argument("solve_least_squares: dimension mismatch");
  }
  LeastSquaresSolution out;
  if (a.cols() == 0) {
    out.x = DenseVector(0);
    out.residual = b.norm();
    return out;
  }
  Eigen::CompleteOrthogonalDecomposition<DenseMatrix> cod(a);
  out.x = cod.solve(b);
  out.residual = (a * out.x - b).norm();
  return out;
}

struct Orthogonalised {
  DenseVector vector;        // u with its components along the basis removed
  bool independent = false;  // false iff ||u_perp|| <= tau * ||u||
};

/// Modified Gram-Schmidt: subtracts the projection onto each basis vector in
/// turn, using the partially reduced vector for every projection.
inline Orthogonalised orthogonalise(const DenseVector& u, std::span<const DenseVector> basis,
                                    double independence_tol) {
  Orthogonalised out{u, false};
  for (const DenseVector& b : basis) {
    const double bb = b.squaredNorm();
    if (bb == 0.0) continue;
    out.vector -= (b.dot(out.vector) / bb) * b;
  }
  const double un = u.norm();
  out.independent = out.vector.norm() > independence_tol * un && un > 0.0;
  return out;
}

inline Orthogonalised orthogonalise(const DenseVector& u, const std::vector<DenseVector>& basis,
                                    double independence_tol) {
  return orthogonalise(u, std::span<const DenseVector>(basis.data(), basis.size()),
                       independence_tol);
}

struct RankDecision {
  std::size_t rank = 0;
  DenseMatrix nullspace;  // orthonormal columns spanning {x : ||Ax|| <= threshold}
  double threshold = 0.0;
  double smallest_singular_value = 0.0;
};

/// Default rank threshold for a square matrix: rel * (1 + ||A||_inf).
inline double rank_threshold(const DenseMatrix& a, double rel) {
  const double norm_inf = a.size() == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff();
  return rel * (1.0 + norm_inf);
}

/// Rank and nullspace from a singular value decomposition.
///
/// A singular value inside [threshold/10, threshold*10] makes the decision
/// unreliable and raises NumericalFailure instead of guessing.
inline RankDecision rank_and_nullspace(const DenseMatrix& a, double threshold) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("rank_and_nullspace: matrix must be square");
  }
  const auto n = a.cols();
  RankDecision out;
  out.threshold = threshold;
  if (n == 0) {
    out.nullspace = DenseMatrix(0, 0);
    return out;
  }
  Eigen::JacobiSVD<DenseMatrix> svd(a, Eigen::ComputeFullV);
  const DenseVector& sigma = svd.singularValues();  // descending
  out.smallest_singular_value = sigma(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (sigma(i) >= threshold / 10.0 && sigma(i) <= threshold * 10.0) {
      std::ostringstream msg;
      msg << "rank decision ambiguous: singular value " << sigma(i) << " within band around "
          << threshold;
      throw NumericalFailure(msg.str());
    }
    if (sigma(i) > threshold) ++out.rank;
  }
  const auto nullity = n - static_cast<Eigen::Index>(out.rank);
  out.nullspace = svd.matrixV().rightCols(nullity);
  return out;
}

inline double inf_norm(const DenseVector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace ubamc::numerics

#endif  // UBAMC_NUMERICS_HPP
