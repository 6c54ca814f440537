#pragma once

/// \file pattern.hpp
/// Interconnection pattern matrices (generalized graph Laplacians), the
/// single-zero-eigenvalue check, and the orthonormal eigendecomposition used to
/// decouple the formation into per-eigenvalue conditions.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "polyconsensus/error.hpp"
#include "polyconsensus/jacobi.hpp"

namespace polyconsensus {

struct PatternMatrix {
  Eigen::MatrixXd entries;

  int N() const { return static_cast<int>(entries.rows()); }
};

struct Edge {
  int i = 0;  // 1-based
  int j = 0;  // 1-based
  double weight = 1.0;
};

/// Ring Laplacian: 2c on the diagonal, -c to both neighbours (indices mod N).
inline PatternMatrix cycle_laplacian(int N, double c = 1.0) {
  POLYCONSENSUS_THROW_UNLESS(N >= 3, ErrorKind::kInvalidArgument,
                             "cycle_laplacian requires N >= 3");
  PatternMatrix P{Eigen::MatrixXd::Zero(N, N)};
  for (int i = 0; i < N; ++i) {
    P.entries(i, i) = 2.0 * c;
    P.entries(i, (i + 1) % N) = -c;
    P.entries(i, (i + N - 1) % N) = -c;
  }
  return P;
}

inline PatternMatrix from_edge_list(int N, const std::vector<Edge>& edges) {
  POLYCONSENSUS_THROW_UNLESS(N >= 1, ErrorKind::kInvalidArgument,
                             "from_edge_list requires N >= 1");
  PatternMatrix P{Eigen::MatrixXd::Zero(N, N)};
  for (const Edge& e : edges) {
    if (e.i < 1 || e.i > N || e.j < 1 || e.j > N) {
      throw Error(ErrorKind::kInvalidArgument,
                  "edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                      ") is out of range for N = " + std::to_string(N));
    }
    if (e.i == e.j) {
      throw Error(ErrorKind::kInvalidArgument,
                  "self-loop at node " + std::to_string(e.i) + " is not allowed");
    }
    const int a = e.i - 1;
    const int b = e.j - 1;
    P.entries(a, b) -= e.weight;
    P.entries(b, a) -= e.weight;
    P.entries(a, a) += e.weight;
    P.entries(b, b) += e.weight;
  }
  return P;
}

enum class Assumption1Violation { kNone, kAsymmetric, kRowSum, kZeroMultiplicity };

inline const char* to_string(Assumption1Violation v) {
  switch (v) {
    case Assumption1Violation::kNone: return "none";
    case Assumption1Violation::kAsymmetric: return "asymmetric";
    case Assumption1Violation::kRowSum: return "row-sum";
    case Assumption1Violation::kZeroMultiplicity: return "zero-multiplicity";
  }
  return "unknown";
}

struct Assumption1Report {
  Assumption1Violation violation = Assumption1Violation::kNone;
  std::string message;
  /// Number of eigenvalues within tol * ||P|| of zero (valid when the symmetry
  /// and row-sum checks passed).
  int zero_count = 0;

  bool ok() const { return violation == Assumption1Violation::kNone; }
};

/// Checks symmetry, P * 1 == 0 and that exactly one eigenvalue vanishes. Never
/// throws for numerical input; every failure is reported in the result.
inline Assumption1Report check_assumption1(const PatternMatrix& P, double tol = 1e-8) {
  Assumption1Report report;
  const Eigen::MatrixXd& M = P.entries;
  if (M.rows() != M.cols() || M.rows() == 0) {
    report.violation = Assumption1Violation::kAsymmetric;
    report.message = "pattern matrix must be square and non-empty";
    return report;
  }
  if (!M.allFinite()) {
    report.violation = Assumption1Violation::kAsymmetric;
    report.message = "pattern matrix has non-finite entries";
    return report;
  }
  const double scale = std::max(M.cwiseAbs().maxCoeff(), 1e-300);
  const int N = P.N();
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      if (std::abs(M(i, j) - M(j, i)) > tol * scale) {
        report.violation = Assumption1Violation::kAsymmetric;
        report.message = "pattern matrix is not symmetric at (" + std::to_string(i + 1) +
                         ", " + std::to_string(j + 1) + ")";
        return report;
      }
    }
  }
  for (int i = 0; i < N; ++i) {
    const double row_scale = std::max(M.row(i).cwiseAbs().maxCoeff(), 1e-300);
    if (std::abs(M.row(i).sum()) > tol * row_scale) {
      report.violation = Assumption1Violation::kRowSum;
      report.message = "row " + std::to_string(i + 1) + " of the pattern matrix sums to " +
                       std::to_string(M.row(i).sum()) + ", so P * 1 != 0";
      return report;
    }
  }
  const SymmetricEigen eig = jacobi_eigen(M);
  const double norm = eig.values.cwiseAbs().maxCoeff();
  for (int k = 0; k < N; ++k) {
    if (std::abs(eig.values[k]) <= tol * norm) ++report.zero_count;
  }
  if (report.zero_count != 1) {
    report.violation = Assumption1Violation::kZeroMultiplicity;
    report.message = "pattern matrix has " + std::to_string(report.zero_count) +
                     " zero eigenvalues; exactly one is required (is the graph connected?)";
  }
  return report;
}

struct SpectralData {
  /// lambdas[0] is the zero eigenvalue, the rest ascending.
  Eigen::VectorXd lambdas;
  /// Orthonormal eigenvectors, column k pairs with lambdas[k].
  Eigen::MatrixXd S;
  double lambda_min = 0.0;
  double lambda_max = 0.0;

  int N() const { return static_cast<int>(lambdas.size()); }

  /// Nonzero eigenvalues with duplicates (within rel_tol * max|lambda|) merged.
  std::vector<double> distinct_nonzero(double rel_tol = 1e-9) const {
    std::vector<double> out;
    const double scale = std::max(std::abs(lambda_min), std::abs(lambda_max));
    for (int k = 1; k < N(); ++k) {
      if (!out.empty() && std::abs(lambdas[k] - out.back()) <= rel_tol * scale) continue;
      out.push_back(lambdas[k]);
    }
    return out;
  }
};

inline SpectralData eigendecompose(const PatternMatrix& P) {
  const int N = P.N();
  POLYCONSENSUS_THROW_UNLESS(N >= 2, ErrorKind::kInvalidArgument,
                             "eigendecompose requires N >= 2");
  const SymmetricEigen eig = jacobi_eigen(P.entries, 1e-12, 200);

  // Put the eigenvalue of smallest magnitude first, keep the rest ascending.
  int zero_index = 0;
  for (int k = 1; k < N; ++k) {
    if (std::abs(eig.values[k]) < std::abs(eig.values[zero_index])) zero_index = k;
  }
  SpectralData out;
  out.lambdas.resize(N);
  out.S.resize(N, N);
  out.lambdas[0] = eig.values[zero_index];
  out.S.col(0) = eig.vectors.col(zero_index);
  for (int k = 0, dst = 1; k < N; ++k) {
    if (k == zero_index) continue;
    out.lambdas[dst] = eig.values[k];
    out.S.col(dst) = eig.vectors.col(k);
    ++dst;
  }
  if (out.S.col(0).sum() < 0.0) out.S.col(0) *= -1.0;
  out.lambda_min = out.lambdas.tail(N - 1).minCoeff();
  out.lambda_max = out.lambdas.tail(N - 1).maxCoeff();
  return out;
}

}  // namespace polyconsensus
