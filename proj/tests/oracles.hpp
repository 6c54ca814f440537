#pragma once

// Independent reference computations used by the tests. None of these call
// into the library's algorithms; they use closed forms, brute force, dense
// Kronecker products, or Eigen's own eigensolver.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

/// Binomial coefficient from Pascal's triangle.
inline std::uint64_t pascal(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::vector<std::vector<std::uint64_t>> t(n + 1);
  for (int i = 0; i <= n; ++i) {
    t[i].assign(i + 1, 1);
    for (int j = 1; j < i; ++j) t[i][j] = t[i - 1][j - 1] + t[i - 1][j];
  }
  return t[n][k];
}

inline std::uint64_t iota(int n, int d) {
  const std::uint64_t r = pascal(n + d, d);
  return (r * r + r) / 2 - pascal(n + 2 * d, 2 * d);
}

/// All exponents of degree <= d via an odometer over [0, d]^n, then sorted
/// graded with descending lexicographic order inside each degree.
inline std::vector<std::vector<int>> exponents(int n, int d) {
  std::vector<std::vector<int>> out;
  std::vector<int> e(n, 0);
  while (true) {
    int deg = 0;
    for (int v : e) deg += v;
    if (deg <= d) out.push_back(e);
    int i = 0;
    while (i < n && e[i] == d) e[i++] = 0;
    if (i == n) break;
    ++e[i];
  }
  std::sort(out.begin(), out.end(), [](const std::vector<int>& a, const std::vector<int>& b) {
    int da = 0, db = 0;
    for (int v : a) da += v;
    for (int v : b) db += v;
    if (da != db) return da < db;
    return a > b;
  });
  return out;
}

inline Eigen::VectorXd monomials(const std::vector<std::vector<int>>& exps, const Eigen::VectorXd& x) {
  Eigen::VectorXd out(exps.size());
  for (std::size_t j = 0; j < exps.size(); ++j) {
    double v = 1.0;
    for (int i = 0; i < x.size(); ++i) v *= std::pow(x[i], exps[j][i]);
    out[j] = v;
  }
  return out;
}

/// Eigenvalues of the unit-weight cycle Laplacian: 2 - 2 cos(2 pi k / N).
inline std::vector<double> cycle_eigenvalues(int N, double c = 1.0) {
  std::vector<double> out;
  for (int k = 0; k < N; ++k) out.push_back(c * (2.0 - 2.0 * std::cos(2.0 * kPi * k / N)));
  std::sort(out.begin(), out.end());
  return out;
}

inline Eigen::VectorXd sorted_eigenvalues(const Eigen::MatrixXd& M) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M, Eigen::EigenvaluesOnly).eigenvalues();
}

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd out(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

/// Dense sum_j P^j kron L_j.
inline Eigen::MatrixXd lyapunov_matrix(const std::vector<Eigen::MatrixXd>& L, const Eigen::MatrixXd& P) {
  const int n = static_cast<int>(L.front().rows());
  const int N = static_cast<int>(P.rows());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n * N, n * N);
  Eigen::MatrixXd Pj = Eigen::MatrixXd::Identity(N, N);
  for (const auto& Lj : L) {
    Pj = Pj * P;
    out += kron(Pj, Lj);
  }
  return out;
}

/// Polynomial field evaluated term by term.
struct RawTerm {
  int row;
  double coeff;
  std::vector<int> powers;
};

inline Eigen::VectorXd eval_terms(int n, const std::vector<RawTerm>& terms, const Eigen::VectorXd& x) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (const auto& t : terms) {
    double v = t.coeff;
    for (int i = 0; i < n; ++i) v *= std::pow(x[i], t.powers[i]);
    out[t.row - 1] += v;
  }
  return out;
}

/// Scalar value of the decrease integrand at lambda and state x:
///   sum_j lambda^j (2 x' L_j f_a(x) + eps x' L_j x) + lambda^{j+1} 2 x' L_j f_b(x).
inline double decrease_integrand(const std::vector<Eigen::MatrixXd>& L, double lambda, double eps,
                                 const Eigen::VectorXd& x, const Eigen::VectorXd& fa,
                                 const Eigen::VectorXd& fb) {
  double s = 0.0;
  double p = 1.0;
  for (const auto& Lj : L) {
    p *= lambda;
    s += p * (2.0 * x.dot(Lj * fa) + eps * x.dot(Lj * x)) + p * lambda * 2.0 * x.dot(Lj * fb);
  }
  return s;
}

inline Eigen::MatrixXd random_symmetric(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) M(i, j) = M(j, i) = u(rng);
  return M;
}

/// Random connected weighted graph Laplacian: a random spanning tree plus extra edges.
inline Eigen::MatrixXd random_connected_laplacian(int N, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(0.1, 3.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(N, N);
  auto add = [&](int a, int b, double weight) {
    L(a, b) -= weight;
    L(b, a) -= weight;
    L(a, a) += weight;
    L(b, b) += weight;
  };
  std::vector<int> order(N);
  for (int i = 0; i < N; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  for (int i = 1; i < N; ++i) {
    std::uniform_int_distribution<int> pick(0, i - 1);
    add(order[i], order[pick(rng)], w(rng));
  }
  for (int a = 0; a < N; ++a)
    for (int b = a + 1; b < N; ++b)
      if (L(a, b) == 0.0 && coin(rng) < 0.15) add(a, b, w(rng));
  return L;
}

}  // namespace oracle
