#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace relaystop {

/// Gauss-Legendre nodes and weights on [-1, 1].
template <typename Scalar>
struct GaussLegendre {
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  Array nodes;
  Array weights;

  /// Golub-Welsch: nodes are the eigenvalues of the symmetric Jacobi matrix
  /// of the Legendre recurrence, weights are 2 * (first eigenvector entry)^2.
  explicit GaussLegendre(int n) {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Matrix jacobi = Matrix::Zero(n, n);
    for (int k = 1; k < n; ++k) {
      const Scalar kk(k);
      const Scalar beta = kk / std::sqrt(Scalar(4) * kk * kk - Scalar(1));
      jacobi(k, k - 1) = beta;
      jacobi(k - 1, k) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
    nodes = eig.eigenvalues().array();
    weights = Scalar(2) * eig.eigenvectors().row(0).array().square().transpose();
  }

  int size() const { return static_cast<int>(nodes.size()); }

  /// Integral of f over [a, b].
  template <typename F>
  Scalar integrate(F&& f, Scalar a, Scalar b) const {
    const Scalar half = (b - a) / Scalar(2);
    const Scalar mid = (b + a) / Scalar(2);
    Scalar sum(0);
    for (Eigen::Index i = 0; i < nodes.size(); ++i)
      sum += weights[i] * f(mid + half * nodes[i]);
    return half * sum;
  }
};

/// Shared, lazily built rule for n nodes. References stay valid for the
/// lifetime of the program.
const GaussLegendre<double>& gauss_legendre(int n);

}  // namespace relaystop
