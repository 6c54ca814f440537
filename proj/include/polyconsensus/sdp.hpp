#pragma once

/// \file sdp.hpp
/// Max-margin feasibility for the assembled LMIs, certificates, and the
/// independent certificate check.
///
/// solve() maximizes t subject to
///   F_b(y) >= t I  (require-positive blocks),  F_b(y) <= -t I  (require-negative),
///   equalities E y = e,  and |w_c| <= 1 on the reduced coordinates w.
/// A structural presolve first removes rows that semidefiniteness forces to be
/// zero; the margin is measured on what remains. The reduced problem is solved
/// with a primal-dual interior-point method (HKM direction, Mehrotra
/// predictor-corrector) in the standard dual form max b'x s.t. C - sum x_i A_i >= 0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyconsensus/affine.hpp"
#include "polyconsensus/error.hpp"
#include "polyconsensus/jacobi.hpp"
#include "polyconsensus/lmi.hpp"
#include "polyconsensus/pattern.hpp"
#include "polyconsensus/polybasis.hpp"

namespace polyconsensus {

struct Margins {
  double positive = 1e-6;
  double negative = 0.0;
};

struct FeasibilityProblem {
  DecisionLayout layout;
  std::vector<LmiBlock> blocks;
  LinearEqualities equalities;
  Margins margins;
  /// Infeasibility already proven during assembly.
  std::optional<std::string> known_infeasible;

  static FeasibilityProblem from(const AssembledLmis& lmis, Margins margins = {}) {
    FeasibilityProblem p;
    p.layout = lmis.layout;
    p.blocks = lmis.blocks;
    p.equalities = lmis.equalities;
    p.margins = margins;
    p.known_infeasible = lmis.structural_infeasibility;
    return p;
  }

};

struct SolveOptions {
  int max_iters = 100;
  double tol = 1e-9;
  /// Only used to perturb the starting point; the default start is deterministic.
  unsigned seed = 0;
  bool presolve = true;
};

enum class SolveStatus { kCertified, kInfeasible, kUnknown };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kCertified: return "certified";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnknown: return "unknown";
  }
  return "unknown";
}

struct SolveResult {
  SolveStatus status = SolveStatus::kUnknown;
  Eigen::VectorXd y;
  /// min over reduced blocks of the signed clearance; NaN if no point was produced.
  double margin = std::numeric_limits<double>::quiet_NaN();
  /// Upper bound on the achievable margin inside the box (primal objective).
  double upper_bound = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  int forced_rows = 0;
  std::string evidence;
};

namespace detail {

// Dual-form SDP: max b'x  s.t.  S = C - sum_i x_i A_i >= 0, blocks independent.
struct SdpBlock {
  Eigen::MatrixXd C;
  std::vector<std::pair<int, Eigen::MatrixXd>> A;  // only nonzero coefficient matrices
};

struct SdpData {
  int m = 0;
  Eigen::VectorXd b;
  std::vector<SdpBlock> blocks;
};

struct SdpSolution {
  Eigen::VectorXd x;
  double dual_objective = 0.0;
  double primal_objective = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  int iterations = 0;
  bool converged = false;
};

inline bool chol_inverse(const Eigen::MatrixXd& M, Eigen::MatrixXd* inv) {
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) return false;
  *inv = llt.solve(Eigen::MatrixXd::Identity(M.rows(), M.cols()));
  return true;
}

// Largest alpha <= 1 with M + alpha dM >= 0, M positive definite.
inline double max_step(const Eigen::MatrixXd& M, const Eigen::MatrixXd& dM) {
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) return 0.0;
  const Eigen::MatrixXd Linv = llt.matrixL().solve(Eigen::MatrixXd::Identity(M.rows(), M.cols()));
  Eigen::MatrixXd T = Linv * dM * Linv.transpose();
  T = 0.5 * (T + T.transpose());
  const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(T, Eigen::EigenvaluesOnly)
                          .eigenvalues()
                          .minCoeff();
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

inline SdpSolution solve_dual_sdp(const SdpData& data, int max_iters, double tol) {
  const int m = data.m;
  const std::size_t nb = data.blocks.size();
  int total = 0;
  double c_norm = 0.0;
  for (const auto& blk : data.blocks) {
    total += static_cast<int>(blk.C.rows());
    c_norm = std::max(c_norm, blk.C.norm());
  }
  const double b_norm = data.b.norm();

  std::vector<Eigen::MatrixXd> X(nb), S(nb);
  const double start = 10.0;
  for (std::size_t k = 0; k < nb; ++k) {
    const int s = static_cast<int>(data.blocks[k].C.rows());
    X[k] = start * Eigen::MatrixXd::Identity(s, s);
    S[k] = start * Eigen::MatrixXd::Identity(s, s);
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);

  auto A_adj = [&](std::size_t k, const Eigen::VectorXd& v) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(data.blocks[k].C.rows(), data.blocks[k].C.cols());
    for (const auto& [i, Ai] : data.blocks[k].A)
      if (v[i] != 0.0) out += v[i] * Ai;
    return out;
  };
  auto A_op = [&](const std::vector<Eigen::MatrixXd>& Y) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
    for (std::size_t k = 0; k < nb; ++k)
      for (const auto& [i, Ai] : data.blocks[k].A) out[i] += Ai.cwiseProduct(Y[k]).sum();
    return out;
  };

  SdpSolution sol;
  for (int it = 0; it < max_iters; ++it) {
    sol.iterations = it;
    std::vector<Eigen::MatrixXd> Rd(nb), Sinv(nb);
    double mu = 0.0, pobj = 0.0, rd_norm = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      Rd[k] = data.blocks[k].C - A_adj(k, x) - S[k];
      rd_norm = std::max(rd_norm, Rd[k].norm());
      mu += X[k].cwiseProduct(S[k]).sum();
      pobj += data.blocks[k].C.cwiseProduct(X[k]).sum();
    }
    mu /= std::max(total, 1);
    const Eigen::VectorXd rp = data.b - A_op(X);
    const double dobj = data.b.dot(x);
    sol.x = x;
    sol.dual_objective = dobj;
    sol.primal_objective = pobj;
    sol.primal_infeasibility = rp.norm() / (1.0 + b_norm);
    sol.dual_infeasibility = rd_norm / (1.0 + c_norm);
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    if (gap < tol && sol.primal_infeasibility < tol && sol.dual_infeasibility < tol) {
      sol.converged = true;
      return sol;
    }

    for (std::size_t k = 0; k < nb; ++k) {
      if (!chol_inverse(S[k], &Sinv[k])) return sol;
    }

    // Schur complement M_ij = <A_i, X A_j S^{-1}>.
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t k = 0; k < nb; ++k) {
      const auto& A = data.blocks[k].A;
      for (const auto& [j, Aj] : A) {
        const Eigen::MatrixXd T = X[k] * Aj * Sinv[k];
        for (const auto& [i, Ai] : A) {
          if (i < j) continue;
          M(i, j) += Ai.cwiseProduct(T).sum();
        }
      }
    }
    M = M.selfadjointView<Eigen::Lower>();
    const double diag_max = std::max(M.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    for (int i = 0; i < m; ++i) M(i, i) += 1e-14 * diag_max;
    Eigen::LDLT<Eigen::MatrixXd> schur(M);
    if (schur.info() != Eigen::Success) return sol;

    auto direction = [&](const std::vector<Eigen::MatrixXd>& G, std::vector<Eigen::MatrixXd>* dX,
                         Eigen::VectorXd* dx, std::vector<Eigen::MatrixXd>* dS) {
      std::vector<Eigen::MatrixXd> W(nb);
      for (std::size_t k = 0; k < nb; ++k) W[k] = G[k] * Sinv[k] - X[k] - X[k] * Rd[k] * Sinv[k];
      *dx = schur.solve(rp - A_op(W));
      dX->resize(nb);
      dS->resize(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        (*dS)[k] = Rd[k] - A_adj(k, *dx);
        Eigen::MatrixXd D = G[k] * Sinv[k] - X[k] - X[k] * (*dS)[k] * Sinv[k];
        (*dX)[k] = 0.5 * (D + D.transpose());
      }
    };
    auto steps = [&](const std::vector<Eigen::MatrixXd>& dX, const std::vector<Eigen::MatrixXd>& dS,
                     double gamma) {
      double ap = std::numeric_limits<double>::infinity();
      double ad = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < nb; ++k) {
        ap = std::min(ap, max_step(X[k], dX[k]));
        ad = std::min(ad, max_step(S[k], dS[k]));
      }
      return std::pair<double, double>{std::min(1.0, gamma * ap), std::min(1.0, gamma * ad)};
    };

    std::vector<Eigen::MatrixXd> G(nb);
    for (std::size_t k = 0; k < nb; ++k) G[k] = Eigen::MatrixXd::Zero(X[k].rows(), X[k].cols());
    std::vector<Eigen::MatrixXd> dXp, dSp;
    Eigen::VectorXd dxp;
    direction(G, &dXp, &dxp, &dSp);
    const auto [app, adp] = steps(dXp, dSp, 1.0);
    double mu_aff = 0.0;
    for (std::size_t k = 0; k < nb; ++k)
      mu_aff += (X[k] + app * dXp[k]).cwiseProduct(S[k] + adp * dSp[k]).sum();
    mu_aff /= std::max(total, 1);
    const double sigma = std::clamp(std::pow(mu_aff / std::max(mu, 1e-300), 3.0), 0.0, 1.0);

    for (std::size_t k = 0; k < nb; ++k) {
      const int s = static_cast<int>(X[k].rows());
      G[k] = sigma * mu * Eigen::MatrixXd::Identity(s, s) - dXp[k] * dSp[k];
    }
    std::vector<Eigen::MatrixXd> dX, dS;
    Eigen::VectorXd dx;
    direction(G, &dX, &dx, &dS);
    const auto [ap, ad] = steps(dX, dS, 0.95);
    if (ap < 1e-12 && ad < 1e-12) return sol;
    for (std::size_t k = 0; k < nb; ++k) {
      X[k] += ap * dX[k];
      X[k] = 0.5 * (X[k] + X[k].transpose());
      S[k] += ad * dS[k];
      S[k] = 0.5 * (S[k] + S[k].transpose());
    }
    x += ad * dx;
  }
  sol.iterations = max_iters;
  return sol;
}

}  // namespace detail

/// Problem after the structural presolve: blocks restricted to surviving rows
/// and written over reduced coordinates w, with y = subspace.lift(w).
struct PresolvedProblem {
  FeasibilityProblem reduced;
  AffineSubspace subspace;
  int forced_rows = 0;
  std::optional<std::string> infeasibility;
};

inline PresolvedProblem presolve(const FeasibilityProblem& problem, bool reduce = true) {
  POLYCONSENSUS_THROW_UNLESS(!problem.blocks.empty(), ErrorKind::kInvalidArgument,
                             "feasibility problem has no blocks");
  PresolvedProblem out;
  out.subspace = AffineSubspace::full(problem.layout.size);
  if (problem.known_infeasible) {
    out.infeasibility = problem.known_infeasible;
    return out;
  }
  if (problem.equalities.count() > 0 &&
      !out.subspace.restrict(problem.equalities.E, problem.equalities.e)) {
    out.infeasibility = "the linear equalities of the problem are inconsistent";
    return out;
  }
  std::vector<std::vector<int>> kept(problem.blocks.size());
  if (reduce) {
    std::vector<RowFamily> families;
    for (const auto& b : problem.blocks) families.push_back({b.label, {&b.F}, b.strict});
    const StructuralReduction red = reduce_structural_zeros(families, out.subspace);
    out.forced_rows = red.forced_rows;
    if (red.infeasibility) {
      out.infeasibility = red.infeasibility;
      return out;
    }
    out.subspace = red.subspace;
    kept = red.kept_rows;
  } else {
    for (std::size_t b = 0; b < problem.blocks.size(); ++b)
      for (int r = 0; r < problem.blocks[b].size(); ++r) kept[b].push_back(r);
  }

  const int k = out.subspace.dim();
  out.reduced.layout.size = k;
  out.reduced.margins = problem.margins;
  out.reduced.equalities = {Eigen::MatrixXd(0, k), Eigen::VectorXd(0)};
  for (std::size_t b = 0; b < problem.blocks.size(); ++b) {
    if (kept[b].empty()) continue;
    const LmiBlock& src = problem.blocks[b];
    const AffineSymMatrix R = src.F.restricted(kept[b]);
    LmiBlock blk;
    blk.label = src.label;
    blk.orientation = src.orientation;
    blk.strict = src.strict;
    blk.normalization = src.normalization;
    blk.lambda = src.lambda;
    blk.F = AffineSymMatrix(R.size);
    blk.F.constant = R.constant;
    for (const auto& [var, F] : R.terms) {
      blk.F.constant += out.subspace.offset[var] * F;
      for (int c = 0; c < k; ++c) {
        const double z = out.subspace.basis(var, c);
        if (z != 0.0) blk.F.add_term(c, z * F);
      }
    }
    out.reduced.blocks.push_back(std::move(blk));
  }
  return out;
}

/// min over blocks of the signed clearance (min eigenvalue for require-positive,
/// minus the max eigenvalue for require-negative).
inline double clearance(const std::vector<LmiBlock>& blocks,
                        const Eigen::Ref<const Eigen::VectorXd>& y) {
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& b : blocks) {
    if (b.size() == 0) continue;
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
                                   b.F.evaluate(y), Eigen::EigenvaluesOnly)
                                   .eigenvalues();
    margin = std::min(margin, b.orientation == Orientation::kPositive ? ev.minCoeff()
                                                                      : -ev.maxCoeff());
  }
  return margin;
}

/// Classifies a candidate point of the presolved problem. Infeasibility is only
/// ever claimed by the presolve, which carries a structural proof; a small
/// optimum of the boxed problem is reported as unknown.
inline SolveResult classify(const FeasibilityProblem& problem, const PresolvedProblem& pre,
                            const Eigen::VectorXd& w, double upper, bool converged) {
  SolveResult result;
  result.forced_rows = pre.forced_rows;
  const double margin = clearance(pre.reduced.blocks, w);
  result.y = pre.subspace.lift(w);
  result.margin = margin;
  result.upper_bound = upper;
  const double required = std::max(problem.margins.positive, problem.margins.negative);
  if (std::isfinite(margin) && margin >= required) {
    result.status = SolveStatus::kCertified;
    result.evidence = "margin " + std::to_string(margin) + " on the reduced blocks";
  } else {
    result.status = SolveStatus::kUnknown;
    result.evidence = std::string(converged ? "solver converged" : "solver did not converge") +
                      " with margin " + std::to_string(margin) + " below the required " +
                      std::to_string(required);
  }
  return result;
}

inline SolveResult solve(const FeasibilityProblem& problem, const SolveOptions& options = {}) {
  const PresolvedProblem pre = presolve(problem, options.presolve);
  if (pre.infeasibility) {
    SolveResult result;
    result.status = SolveStatus::kInfeasible;
    result.forced_rows = pre.forced_rows;
    result.evidence = *pre.infeasibility;
    return result;
  }

  const int k = pre.subspace.dim();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
  double upper = std::numeric_limits<double>::quiet_NaN();
  bool converged = true;
  int iterations = 0;
  if (!pre.reduced.blocks.empty()) {
    // Variables: w_0..w_{k-1}, t at index k.
    detail::SdpData data;
    data.m = k + 1;
    data.b = Eigen::VectorXd::Zero(k + 1);
    data.b[k] = 1.0;
    for (const auto& rb : pre.reduced.blocks) {
      const int s = rb.size();
      const double sign = rb.orientation == Orientation::kPositive ? 1.0 : -1.0;
      detail::SdpBlock blk;
      blk.C = sign * rb.F.constant;
      for (const auto& [c, F] : rb.F.terms) blk.A.emplace_back(c, -sign * F);
      blk.A.emplace_back(k, Eigen::MatrixXd::Identity(s, s));
      data.blocks.push_back(std::move(blk));
    }
    for (int c = 0; c < k; ++c) {
      for (double sgn : {1.0, -1.0}) {
        detail::SdpBlock box;
        box.C = Eigen::MatrixXd::Ones(1, 1);
        box.A.emplace_back(c, sgn * Eigen::MatrixXd::Ones(1, 1));
        data.blocks.push_back(std::move(box));
      }
    }
    const detail::SdpSolution sol = detail::solve_dual_sdp(data, options.max_iters, options.tol);
    iterations = sol.iterations;
    converged = sol.converged;
    w = sol.x.head(k);
    if (sol.primal_infeasibility < 1e-6) upper = sol.primal_objective;
  }
  SolveResult result = classify(problem, pre, w, upper, converged);
  result.iterations = iterations;
  return result;
}

struct KypMultipliers {
  std::vector<int> coordinates;
  Eigen::MatrixXd D;
  Eigen::MatrixXd G;
};

struct Certificate {
  Method method = Method::kTheorem1;
  int l = 0;
  double epsilon = 1.0;
  std::vector<Eigen::MatrixXd> L;
  Eigen::VectorXd tau;
  /// Interval form only: multipliers for the positivity and decrease lifts
  /// (absent entries were removed by the structural reduction).
  std::optional<KypMultipliers> kyp_positivity;
  std::optional<KypMultipliers> kyp_decrease;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double achieved_margin = 0.0;
  std::vector<double> normalization;
  std::vector<double> lambdas;
};

inline Certificate make_certificate(const AssembledLmis& lmis, const SolveResult& result,
                                    double epsilon) {
  POLYCONSENSUS_THROW_UNLESS(result.y.size() == lmis.layout.size, ErrorKind::kDimension,
                             "solution does not match the decision layout");
  Certificate cert;
  cert.method = lmis.method;
  cert.l = lmis.layout.l;
  cert.epsilon = epsilon;
  for (int j = 1; j <= cert.l; ++j) cert.L.push_back(lmis.layout.L(result.y, j));
  cert.tau = lmis.layout.tau(result.y);
  cert.lambda_min = lmis.lambda_min;
  cert.lambda_max = lmis.lambda_max;
  cert.achieved_margin = result.margin;
  cert.lambdas = lmis.lambdas;
  for (const auto& b : lmis.blocks) cert.normalization.push_back(b.normalization);
  for (std::size_t k = 0; k < lmis.layout.kyp.size(); ++k) {
    KypMultipliers km{lmis.layout.kyp[k].coordinates, lmis.layout.D(result.y, static_cast<int>(k)),
                      lmis.layout.G(result.y, static_cast<int>(k))};
    // The positivity lift has nu = n coordinates drawn from 0..n-1; tell the two
    // apart by block order, which assemble_theorem2 fixes as positivity first.
    const bool positivity = lmis.blocks.at(2 * k).label.find("positivity") != std::string::npos;
    (positivity ? cert.kyp_positivity : cert.kyp_decrease) = km;
  }
  return cert;
}

struct BlockCheck {
  std::string family;  // "positivity" or "decrease"
  double lambda = 0.0;
  double min_eig = 0.0;
  double max_eig = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct VerificationReport {
  std::vector<BlockCheck> checks;
  bool pass = false;
  /// Largest amount by which any check misses its threshold (<= 0 when passing).
  double worst_violation = 0.0;
  std::string worst_label;
  double worst_positivity = std::numeric_limits<double>::infinity();
  double worst_decrease = -std::numeric_limits<double>::infinity();
};

/// Rebuilds the per-eigenvalue conditions at every nonzero eigenvalue of the
/// pattern from the certificate's L_j and tau alone and checks them with the
/// Jacobi eigensolver.
///   positivity:  lambda_min(sum_j lambda^j L_j) > tol * ||.||_F
///   decrease:    lambda_max(Pi(...)Pi') <= tol * (sum of term norms)
inline VerificationReport verify_certificate(const Certificate& cert, const MonomialBasis& basis,
                                             const SlackBasis& slack, const Eigen::MatrixXd& A_a,
                                             const Eigen::MatrixXd& A_b,
                                             const SpectralData& spectral,
                                             double tol_verify = 1e-7) {
  const int n = basis.n();
  const int rho = basis.rho();
  POLYCONSENSUS_THROW_UNLESS(cert.l >= 1 && static_cast<int>(cert.L.size()) == cert.l,
                             ErrorKind::kDimension, "certificate must hold l matrices L_j");
  for (const auto& L : cert.L)
    POLYCONSENSUS_THROW_UNLESS(L.rows() == n && L.cols() == n, ErrorKind::kDimension,
                               "certificate L_j must be n x n");
  POLYCONSENSUS_THROW_UNLESS(cert.tau.size() == slack.iota, ErrorKind::kDimension,
                             "certificate has " + std::to_string(cert.tau.size()) +
                                 " slack multipliers, the model needs " +
                                 std::to_string(slack.iota));
  POLYCONSENSUS_THROW_UNLESS(A_a.rows() == n && A_a.cols() == rho && A_b.rows() == n &&
                                 A_b.cols() == rho,
                             ErrorKind::kDimension, "A_a and A_b must be n x rho");

  Eigen::MatrixXd slack_sum = Eigen::MatrixXd::Zero(rho, rho);
  for (int k = 0; k < slack.iota; ++k) slack_sum += cert.tau[k] * slack.as_double(k);
  // Pi keeps entries 1..rho-1 of chi; Gamma picks entries 1..n.
  auto project = [rho](const Eigen::MatrixXd& M) { return M.bottomRightCorner(rho - 1, rho - 1); };
  auto lift_gamma = [n, rho](const Eigen::MatrixXd& B) {  // Gamma' B for n x rho B
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rho, rho);
    out.middleRows(1, n) = B;
    return out;
  };

  VerificationReport report;
  report.pass = true;
  report.worst_violation = -std::numeric_limits<double>::infinity();
  for (int i = 1; i < spectral.N(); ++i) {
    const double lambda = spectral.lambdas[i];
    Eigen::MatrixXd pos = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd dec = slack_sum;
    double dec_scale = slack_sum.norm();
    double power = 1.0;
    for (int j = 1; j <= cert.l; ++j) {
      power *= lambda;
      const Eigen::MatrixXd& L = cert.L[j - 1];
      pos += power * L;
      Eigen::MatrixXd Ba = lift_gamma(L * A_a);
      Ba += Ba.transpose().eval();
      Eigen::MatrixXd Be = Eigen::MatrixXd::Zero(rho, rho);
      Be.block(1, 1, n, n) = cert.epsilon * L;
      Eigen::MatrixXd Bb = lift_gamma(L * A_b);
      Bb += Bb.transpose().eval();
      const Eigen::MatrixXd term = power * (Ba + Be) + power * lambda * Bb;
      dec += term;
      dec_scale += term.norm();
    }
    const Eigen::MatrixXd dec_p = project(dec);

    BlockCheck pc;
    pc.family = "positivity";
    pc.lambda = lambda;
    const SymmetricEigen pe = jacobi_eigen(pos);
    pc.min_eig = pe.values.minCoeff();
    pc.max_eig = pe.values.maxCoeff();
    pc.threshold = tol_verify * pos.norm();
    pc.pass = pc.min_eig > pc.threshold;
    const double pv = pc.threshold - pc.min_eig;

    BlockCheck dc;
    dc.family = "decrease";
    dc.lambda = lambda;
    const SymmetricEigen de = jacobi_eigen(dec_p);
    dc.min_eig = de.values.minCoeff();
    dc.max_eig = de.values.maxCoeff();
    dc.threshold = tol_verify * dec_scale;
    dc.pass = dc.max_eig <= dc.threshold;
    const double dv = dc.max_eig - dc.threshold;

    report.worst_positivity = std::min(report.worst_positivity, pc.min_eig);
    report.worst_decrease = std::max(report.worst_decrease, dc.max_eig);
    if (pv > report.worst_violation) {
      report.worst_violation = pv;
      report.worst_label = "positivity @ lambda=" + std::to_string(lambda);
    }
    if (dv > report.worst_violation) {
      report.worst_violation = dv;
      report.worst_label = "decrease @ lambda=" + std::to_string(lambda);
    }
    report.pass = report.pass && pc.pass && dc.pass;
    report.checks.push_back(pc);
    report.checks.push_back(dc);
  }
  return report;
}

}  // namespace polyconsensus
