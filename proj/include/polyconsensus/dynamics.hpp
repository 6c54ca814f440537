#pragma once

/// \file dynamics.hpp
/// Polynomial vector fields over the canonical monomial basis, the formation
/// right-hand side, fixed-step RK4, and the formation Lyapunov function
/// V(x) = x' (sum_j P^j kron L_j) x.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyconsensus/error.hpp"
#include "polyconsensus/pattern.hpp"
#include "polyconsensus/polybasis.hpp"

namespace polyconsensus {

struct Term {
  int row = 1;               // 1-based output coordinate
  double coeff = 0.0;
  std::vector<int> powers;   // length n
};

struct PolynomialVectorField {
  int n = 0;
  int d = 0;
  Eigen::MatrixXd A;  // n x rho

  Eigen::VectorXd evaluate(const MonomialBasis& basis,
                           const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return A * eval_chi(basis, x);
  }
};

/// Largest total degree over the given term lists (at least 1).
inline int infer_degree(const std::vector<std::vector<Term>>& term_lists) {
  int d = 1;
  for (const auto& list : term_lists)
    for (const auto& t : list) {
      int deg = 0;
      for (int p : t.powers) deg += p;
      d = std::max(d, deg);
    }
  return d;
}

inline PolynomialVectorField field_from_terms(const MonomialBasis& basis,
                                              const std::vector<Term>& terms) {
  PolynomialVectorField f;
  f.n = basis.n();
  f.d = basis.d();
  f.A = Eigen::MatrixXd::Zero(f.n, basis.rho());
  for (const auto& t : terms) {
    if (t.row < 1 || t.row > f.n) {
      throw Error(ErrorKind::kInvalidArgument, "term row " + std::to_string(t.row) +
                                                   " is out of range 1.." + std::to_string(f.n));
    }
    POLYCONSENSUS_THROW_UNLESS(static_cast<int>(t.powers.size()) == f.n,
                               ErrorKind::kDimension,
                               "term powers must have length n = " + std::to_string(f.n));
    for (int p : t.powers)
      POLYCONSENSUS_THROW_UNLESS(p >= 0, ErrorKind::kInvalidArgument,
                                 "term powers must be non-negative");
    const int idx = basis.index_of(t.powers);
    POLYCONSENSUS_THROW_UNLESS(idx >= 0, ErrorKind::kInvalidArgument,
                               "term degree exceeds the basis degree d = " +
                                   std::to_string(f.d));
    f.A(t.row - 1, idx) += t.coeff;
  }
  return f;
}

struct FormationModel {
  MonomialBasis basis;
  PolynomialVectorField agent;     // A_a
  PolynomialVectorField coupling;  // A_b
  PatternMatrix pattern;

  int n() const { return basis.n(); }
  int N() const { return pattern.N(); }
};

/// Builds a model from term lists; d is the largest degree in either list.
inline FormationModel make_model(int n, const std::vector<Term>& agent_terms,
                                 const std::vector<Term>& coupling_terms, PatternMatrix pattern) {
  FormationModel m;
  m.basis = build_basis(n, infer_degree({agent_terms, coupling_terms}));
  m.agent = field_from_terms(m.basis, agent_terms);
  m.coupling = field_from_terms(m.basis, coupling_terms);
  m.pattern = std::move(pattern);
  return m;
}

/// x_i' = A_a chi(x_i) + sum_j P_ij A_b chi(x_j), agents stacked in x.
inline Eigen::VectorXd rhs(const FormationModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const int n = model.n();
  const int N = model.N();
  POLYCONSENSUS_THROW_UNLESS(x.size() == n * N, ErrorKind::kDimension,
                             "state must have length n * N");
  POLYCONSENSUS_THROW_UNLESS(x.allFinite(), ErrorKind::kInvalidArgument,
                             "state has non-finite entries");
  Eigen::MatrixXd agent_out(n, N), coupling_out(n, N);
  for (int i = 0; i < N; ++i) {
    const Eigen::VectorXd chi = eval_chi(model.basis, x.segment(i * n, n));
    agent_out.col(i) = model.agent.A * chi;
    coupling_out.col(i) = model.coupling.A * chi;
  }
  // Column i of coupling_out * P' is sum_j P_ij A_b chi(x_j).
  const Eigen::MatrixXd out = agent_out + coupling_out * model.pattern.entries.transpose();
  return Eigen::Map<const Eigen::VectorXd>(out.data(), n * N);
}

/// max over agent pairs of ||x_i - x_j||_2.
inline double disagreement(const Eigen::Ref<const Eigen::VectorXd>& x, int n, int N) {
  POLYCONSENSUS_THROW_UNLESS(x.size() == n * N, ErrorKind::kDimension,
                             "state must have length n * N");
  double worst = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      worst = std::max(worst, (x.segment(i * n, n) - x.segment(j * n, n)).norm());
  return worst;
}

/// (sum_j P^j kron L_j) x, without forming the nN x nN matrix.
inline Eigen::VectorXd lyapunov_apply(const std::vector<Eigen::MatrixXd>& L,
                                      const PatternMatrix& pattern,
                                      const Eigen::Ref<const Eigen::VectorXd>& x) {
  POLYCONSENSUS_THROW_UNLESS(!L.empty(), ErrorKind::kInvalidArgument,
                             "lyapunov function needs l >= 1");
  const int n = static_cast<int>(L.front().rows());
  const int N = pattern.N();
  POLYCONSENSUS_THROW_UNLESS(x.size() == n * N, ErrorKind::kDimension,
                             "state must have length n * N");
  // X is n x N with agent states as columns; (P^j kron L) x  <->  L X (P^j)'.
  const Eigen::Map<const Eigen::MatrixXd> X(x.data(), n, N);
  const Eigen::MatrixXd Pt = pattern.entries.transpose();
  Eigen::MatrixXd XP = X;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, N);
  for (const auto& Lj : L) {
    XP = XP * Pt;
    acc += Lj * XP;
  }
  return Eigen::Map<const Eigen::VectorXd>(acc.data(), n * N);
}

inline double lyapunov_value(const std::vector<Eigen::MatrixXd>& L, const PatternMatrix& pattern,
                             const Eigen::Ref<const Eigen::VectorXd>& x) {
  return x.dot(lyapunov_apply(L, pattern, x));
}

/// dV/dt along the formation: 2 x' (sum_j P^j kron L_j) f(x).
inline double lyapunov_derivative(const std::vector<Eigen::MatrixXd>& L,
                                  const FormationModel& model,
                                  const Eigen::Ref<const Eigen::VectorXd>& x) {
  return 2.0 * lyapunov_apply(L, model.pattern, x).dot(rhs(model, x));
}

struct SimulationTrace {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<double> V;  // empty without a certificate
  std::vector<double> disagreement;
  bool diverged = false;
};

inline SimulationTrace rk4_simulate(const FormationModel& model, const Eigen::VectorXd& x0,
                                    double dt, double t_final,
                                    const std::vector<Eigen::MatrixXd>* L = nullptr,
                                    double divergence_limit = 1e12) {
  POLYCONSENSUS_THROW_UNLESS(dt > 0.0 && t_final > 0.0, ErrorKind::kInvalidArgument,
                             "dt and t_final must be positive");
  POLYCONSENSUS_THROW_UNLESS(x0.size() == model.n() * model.N(), ErrorKind::kDimension,
                             "initial state must have length n * N");
  const long steps = std::lround(std::ceil(t_final / dt - 1e-9));
  SimulationTrace trace;
  trace.times.reserve(steps + 1);
  trace.states.reserve(steps + 1);
  auto record = [&](double t, const Eigen::VectorXd& x) {
    trace.times.push_back(t);
    trace.states.push_back(x);
    trace.disagreement.push_back(disagreement(x, model.n(), model.N()));
    if (L) trace.V.push_back(lyapunov_value(*L, model.pattern, x));
  };
  Eigen::VectorXd x = x0;
  record(0.0, x);
  for (long s = 1; s <= steps; ++s) {
    try {
      const Eigen::VectorXd k1 = rhs(model, x);
      const Eigen::VectorXd k2 = rhs(model, x + 0.5 * dt * k1);
      const Eigen::VectorXd k3 = rhs(model, x + 0.5 * dt * k2);
      const Eigen::VectorXd k4 = rhs(model, x + dt * k3);
      x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } catch (const Error&) {
      // An intermediate stage overflowed.
      trace.diverged = true;
      return trace;
    }
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > divergence_limit) {
      trace.diverged = true;
      return trace;
    }
    record(s * dt, x);
  }
  return trace;
}

}  // namespace polyconsensus
