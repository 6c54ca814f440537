#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "polyconsensus/error.hpp"

namespace polyconsensus {

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column k pairs with values[k]
  int sweeps = 0;
};

/// Cyclic Jacobi rotations on a symmetric matrix. Iterates until the
/// off-diagonal Frobenius mass is at most rel_tol * ||A||_F. Only the upper
/// triangle of `A` is read, so tiny asymmetries are ignored.
inline SymmetricEigen jacobi_eigen(const Eigen::Ref<const Eigen::MatrixXd>& A,
                                   double rel_tol = 1e-12, int max_sweeps = 100) {
  POLYCONSENSUS_THROW_UNLESS(A.rows() == A.cols(), ErrorKind::kDimension,
                             "jacobi_eigen: matrix must be square");
  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXd a = A.triangularView<Eigen::Upper>();
  a.triangularView<Eigen::StrictlyLower>() = a.transpose().triangularView<Eigen::StrictlyLower>();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

  const double norm = a.norm();
  auto off_mass = [&]() {
    double s = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) s += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  SymmetricEigen out;
  int sweep = 0;
  while (norm > 0.0 && off_mass() > rel_tol * norm) {
    if (sweep == max_sweeps) {
      throw Error(ErrorKind::kNonConvergence,
                  "jacobi_eigen did not converge in " + std::to_string(max_sweeps) +
                      " sweeps");
    }
    ++sweep;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle that annihilates a(p, q) (Golub & Van Loan 8.5.2).
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return a(i, i) < a(j, j); });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  out.sweeps = sweep;
  return out;
}

inline double jacobi_min_eigenvalue(const Eigen::Ref<const Eigen::MatrixXd>& A) {
  if (A.rows() == 0) return 0.0;
  return jacobi_eigen(A).values.minCoeff();
}

inline double jacobi_max_eigenvalue(const Eigen::Ref<const Eigen::MatrixXd>& A) {
  if (A.rows() == 0) return 0.0;
  return jacobi_eigen(A).values.maxCoeff();
}

}  // namespace polyconsensus
