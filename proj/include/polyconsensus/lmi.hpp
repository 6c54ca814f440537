#pragma once

/// \file lmi.hpp
/// Assembly of the consensus LMIs.
///
/// Per-eigenvalue form: for every distinct nonzero eigenvalue lambda of the
/// pattern matrix,
///   sum_j lambda^j L_j  > 0                                          (positivity)
///   Pi ( sum_k tau_k Q_k
///        + sum_j lambda^j     (G' L_j A_a + A_a' L_j G + eps G' L_j G)
///        + sum_j lambda^{j+1} (G' L_j A_b + A_b' L_j G) ) Pi'  <= 0  (decrease)
/// with the slack multipliers tau shared across eigenvalues.
///
/// Interval form: the same two matrix polynomials in theta are required to be
/// definite on [lambda_min, lambda_max]; each is written as phi(theta)' M phi(theta)
/// and lifted to a single parameter-free LMI with the generalized KYP lemma
/// (multipliers D > 0 and skew G on the LFT state).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyconsensus/affine.hpp"
#include "polyconsensus/error.hpp"
#include "polyconsensus/pattern.hpp"
#include "polyconsensus/polybasis.hpp"

namespace polyconsensus {

enum class Method { kTheorem1, kTheorem2 };

inline const char* to_string(Method m) {
  return m == Method::kTheorem1 ? "theorem1" : "theorem2";
}

inline int sym_count(int n) { return n * (n + 1) / 2; }
inline int skew_count(int n) { return n * (n - 1) / 2; }

/// Unit symmetric matrix for the idx-th upper-triangle entry (row-major).
inline Eigen::MatrixXd sym_unit(int n, int idx) {
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0, k = 0; a < n; ++a) {
    for (int b = a; b < n; ++b, ++k) {
      if (k == idx) {
        E(a, b) = 1.0;
        E(b, a) = 1.0;
        return E;
      }
    }
  }
  throw Error(ErrorKind::kInvalidArgument, "sym_unit index out of range");
}

/// Unit skew-symmetric matrix for the idx-th strictly-upper entry.
inline Eigen::MatrixXd skew_unit(int n, int idx) {
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0, k = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b, ++k) {
      if (k == idx) {
        K(a, b) = 1.0;
        K(b, a) = -1.0;
        return K;
      }
    }
  }
  throw Error(ErrorKind::kInvalidArgument, "skew_unit index out of range");
}

inline Eigen::MatrixXd unpack_sym(const Eigen::Ref<const Eigen::VectorXd>& y, int offset, int n) {
  Eigen::MatrixXd M(n, n);
  for (int a = 0, k = 0; a < n; ++a)
    for (int b = a; b < n; ++b, ++k) M(a, b) = M(b, a) = y[offset + k];
  return M;
}

inline Eigen::MatrixXd unpack_skew(const Eigen::Ref<const Eigen::VectorXd>& y, int offset, int n) {
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0, k = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b, ++k) {
      K(a, b) = y[offset + k];
      K(b, a) = -y[offset + k];
    }
  return K;
}

inline void pack_sym(const Eigen::MatrixXd& M, int offset, Eigen::VectorXd& y) {
  const int n = static_cast<int>(M.rows());
  for (int a = 0, k = 0; a < n; ++a)
    for (int b = a; b < n; ++b, ++k) y[offset + k] = 0.5 * (M(a, b) + M(b, a));
}

inline void pack_skew(const Eigen::MatrixXd& K, int offset, Eigen::VectorXd& y) {
  const int n = static_cast<int>(K.rows());
  for (int a = 0, k = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b, ++k) y[offset + k] = 0.5 * (K(a, b) - K(b, a));
}

struct KypLayout {
  int nu = 0;      // coordinates kept from the matrix polynomial
  int m = 0;       // highest power in phi
  int state = 0;   // m * nu, size of D and G
  int D_offset = 0;
  int G_offset = 0;
  /// Which of the original coordinates (0-based) survive structural reduction.
  std::vector<int> coordinates;
};

/// Maps every decision (L_j entries, tau_k, and for the interval form the KYP
/// multipliers) into one flat vector. Only independent scalars are stored.
struct DecisionLayout {
  int n = 0;
  int l = 0;
  int iota = 0;
  int tau_offset = 0;
  int size = 0;
  std::vector<KypLayout> kyp;  // empty for the per-eigenvalue form, else {k=1, k=2}

  static DecisionLayout make(int n, int l, int iota) {
    DecisionLayout layout;
    layout.n = n;
    layout.l = l;
    layout.iota = iota;
    layout.tau_offset = l * sym_count(n);
    layout.size = layout.tau_offset + iota;
    return layout;
  }

  /// Offset of L_j, j = 1..l.
  int L_offset(int j) const { return (j - 1) * sym_count(n); }

  KypLayout& add_kyp(int nu, int m, std::vector<int> coordinates) {
    KypLayout k;
    k.nu = nu;
    k.m = m;
    k.state = m * nu;
    k.coordinates = std::move(coordinates);
    k.D_offset = size;
    size += sym_count(k.state);
    k.G_offset = size;
    size += skew_count(k.state);
    kyp.push_back(k);
    return kyp.back();
  }

  Eigen::MatrixXd L(const Eigen::Ref<const Eigen::VectorXd>& y, int j) const {
    return unpack_sym(y, L_offset(j), n);
  }
  Eigen::VectorXd tau(const Eigen::Ref<const Eigen::VectorXd>& y) const {
    return y.segment(tau_offset, iota);
  }
  Eigen::MatrixXd D(const Eigen::Ref<const Eigen::VectorXd>& y, int k) const {
    return unpack_sym(y, kyp.at(k).D_offset, kyp.at(k).state);
  }
  Eigen::MatrixXd G(const Eigen::Ref<const Eigen::VectorXd>& y, int k) const {
    return unpack_skew(y, kyp.at(k).G_offset, kyp.at(k).state);
  }

  std::string name(int r) const {
    if (r < tau_offset) {
      const int j = r / sym_count(n) + 1;
      return "L" + std::to_string(j) + "[" + std::to_string(r % sym_count(n)) + "]";
    }
    if (r < tau_offset + iota) return "tau" + std::to_string(r - tau_offset + 1);
    for (std::size_t k = 0; k < kyp.size(); ++k) {
      if (r >= kyp[k].D_offset && r < kyp[k].G_offset)
        return "D" + std::to_string(k + 1) + "[" + std::to_string(r - kyp[k].D_offset) + "]";
      if (r >= kyp[k].G_offset && r < kyp[k].G_offset + skew_count(kyp[k].state))
        return "G" + std::to_string(k + 1) + "[" + std::to_string(r - kyp[k].G_offset) + "]";
    }
    return "y" + std::to_string(r);
  }
};

enum class Orientation { kPositive, kNegative };

struct LmiBlock {
  std::string label;
  Orientation orientation = Orientation::kPositive;
  /// Needs a positive margin (the "succ"/"prec" relations). Non-strict blocks
  /// only need the non-strict relation.
  bool strict = true;
  /// Stored pencil is the raw pencil divided by this factor.
  double normalization = 1.0;
  /// Eigenvalue the block was assembled at (NaN for interval-form blocks).
  double lambda = std::numeric_limits<double>::quiet_NaN();
  AffineSymMatrix F;

  int size() const { return F.size; }
};

/// Divides a block by the largest |entry| of its constant/coefficient family.
inline void normalize_block(LmiBlock& block) {
  const double s = block.F.max_abs();
  if (s > 0.0) {
    block.F = block.F.scaled(1.0 / s);
    block.normalization = s;
  }
}

inline std::vector<Eigen::MatrixXd> evaluate_blocks(const DecisionLayout& layout,
                                                    const std::vector<LmiBlock>& blocks,
                                                    const Eigen::Ref<const Eigen::VectorXd>& y) {
  POLYCONSENSUS_THROW_UNLESS(y.size() == layout.size, ErrorKind::kDimension,
                             "evaluate_blocks: decision vector has length " +
                                 std::to_string(y.size()) + ", layout expects " +
                                 std::to_string(layout.size));
  std::vector<Eigen::MatrixXd> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) out.push_back(b.F.evaluate(y));
  return out;
}

/// Linear equalities E y = e that every admissible decision vector satisfies.
struct LinearEqualities {
  Eigen::MatrixXd E;
  Eigen::VectorXd e;

  int count() const { return static_cast<int>(E.rows()); }
};

struct AssembledLmis {
  Method method = Method::kTheorem1;
  DecisionLayout layout;
  std::vector<LmiBlock> blocks;
  LinearEqualities equalities;
  /// Eigenvalues the blocks were built at (per-eigenvalue form) or the
  /// interval endpoints (interval form).
  std::vector<double> lambdas;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  /// Proof of infeasibility found during assembly, if any.
  std::optional<std::string> structural_infeasibility;
  std::vector<std::string> warnings;
};

struct ModelMatrices {
  const MonomialBasis& basis;
  const SlackBasis& slack;
  const Eigen::MatrixXd& A_a;
  const Eigen::MatrixXd& A_b;
};

namespace detail {

inline void check_model(const ModelMatrices& model, int l) {
  POLYCONSENSUS_THROW_UNLESS(l >= 1, ErrorKind::kInvalidArgument,
                             "the Lyapunov power count l must be at least 1");
  const int n = model.basis.n();
  const int rho = model.basis.rho();
  POLYCONSENSUS_THROW_UNLESS(model.A_a.rows() == n && model.A_a.cols() == rho,
                             ErrorKind::kDimension,
                             "A_a must be n x rho (" + std::to_string(n) + " x " +
                                 std::to_string(rho) + ")");
  POLYCONSENSUS_THROW_UNLESS(model.A_b.rows() == n && model.A_b.cols() == rho,
                             ErrorKind::kDimension,
                             "A_b must be n x rho (" + std::to_string(n) + " x " +
                                 std::to_string(rho) + ")");
  POLYCONSENSUS_THROW_UNLESS(model.slack.iota == static_cast<int>(model.slack.Q.size()),
                             ErrorKind::kDimension, "slack basis is inconsistent");
}

// Coefficient matrices (ambient rho-1 coordinates after Pi) of the decrease
// condition for one symmetric unit E placed in L_j:
//   at power j:   Pi (G' E A_a + A_a' E G + eps G' E G) Pi'
//   at power j+1: Pi (G' E A_b + A_b' E G) Pi'
struct DecreaseTerms {
  Eigen::MatrixXd agent;
  Eigen::MatrixXd coupling;
};

inline DecreaseTerms decrease_terms(const Eigen::MatrixXd& E, const Eigen::MatrixXd& gamma,
                                    const Eigen::MatrixXd& pi, const Eigen::MatrixXd& A_a,
                                    const Eigen::MatrixXd& A_b, double epsilon) {
  const Eigen::MatrixXd GE = gamma.transpose() * E;
  Eigen::MatrixXd agent = GE * A_a;
  agent += agent.transpose().eval();
  agent += epsilon * GE * gamma;
  Eigen::MatrixXd coupling = GE * A_b;
  coupling += coupling.transpose().eval();
  return {pi * agent * pi.transpose(), pi * coupling * pi.transpose()};
}

}  // namespace detail

/// Per-eigenvalue LMIs: a positivity block (size n) and a decrease block
/// (size rho-1) per distinct nonzero eigenvalue.
inline AssembledLmis assemble_theorem1(const ModelMatrices& model, const SpectralData& spectral,
                                       int l, double epsilon) {
  detail::check_model(model, l);
  POLYCONSENSUS_THROW_UNLESS(epsilon >= 0.0, ErrorKind::kInvalidArgument,
                             "epsilon must be non-negative");
  const int n = model.basis.n();
  const int rho = model.basis.rho();
  const Eigen::MatrixXd gamma = selector_gamma(model.basis);
  const Eigen::MatrixXd pi = selector_pi(model.basis);

  AssembledLmis out;
  out.method = Method::kTheorem1;
  out.layout = DecisionLayout::make(n, l, model.slack.iota);
  out.lambdas = spectral.distinct_nonzero();
  out.lambda_min = spectral.lambda_min;
  out.lambda_max = spectral.lambda_max;
  out.equalities = {Eigen::MatrixXd(0, out.layout.size), Eigen::VectorXd(0)};
  if (l > spectral.N()) {
    out.warnings.push_back("l = " + std::to_string(l) + " exceeds the agent count N = " +
                           std::to_string(spectral.N()) +
                           "; higher powers of P are linearly dependent");
  }

  std::vector<Eigen::MatrixXd> slack_projected;
  for (int k = 0; k < model.slack.iota; ++k)
    slack_projected.push_back(pi * model.slack.as_double(k) * pi.transpose());

  for (double lambda : out.lambdas) {
    LmiBlock pos;
    pos.label = "positivity @ lambda=" + std::to_string(lambda);
    pos.orientation = Orientation::kPositive;
    pos.strict = true;
    pos.lambda = lambda;
    pos.F = AffineSymMatrix(n);

    LmiBlock neg;
    neg.label = "decrease @ lambda=" + std::to_string(lambda);
    neg.orientation = Orientation::kNegative;
    neg.strict = false;
    neg.lambda = lambda;
    neg.F = AffineSymMatrix(rho - 1);

    for (int j = 1; j <= l; ++j) {
      const double lj = std::pow(lambda, j);
      for (int s = 0; s < sym_count(n); ++s) {
        const int var = out.layout.L_offset(j) + s;
        const Eigen::MatrixXd E = sym_unit(n, s);
        pos.F.add_term(var, lj * E);
        const auto terms =
            detail::decrease_terms(E, gamma, pi, model.A_a, model.A_b, epsilon);
        neg.F.add_term(var, lj * terms.agent + lj * lambda * terms.coupling);
      }
    }
    for (int k = 0; k < model.slack.iota; ++k)
      neg.F.add_term(out.layout.tau_offset + k, slack_projected[k]);

    normalize_block(pos);
    normalize_block(neg);
    out.blocks.push_back(std::move(pos));
    out.blocks.push_back(std::move(neg));
  }
  return out;
}

/// State-space data whose transfer function is
/// phi(theta) = [theta^m I; theta^{m-1} I; ...; I]  with  m = ceil((l+1)/2).
struct KypRealization {
  int nu = 0;
  int m = 0;
  Eigen::MatrixXd A;  // (m nu) x (m nu)
  Eigen::MatrixXd B;  // (m nu) x nu
  Eigen::MatrixXd C;  // ((m+1) nu) x (m nu)
  Eigen::MatrixXd D;  // ((m+1) nu) x nu

  /// D + C theta (I - A theta)^{-1} B.
  Eigen::MatrixXd transfer(double theta) const {
    const int s = m * nu;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(s, s);
    return D + C * (theta * (I - theta * A).partialPivLu().solve(B));
  }
};

inline int kyp_power(int l) { return (l + 2) / 2; }

inline Eigen::MatrixXd stacked_powers(int nu, int m, double theta) {
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero((m + 1) * nu, nu);
  double power = 1.0;
  for (int a = m; a >= 0; --a) {
    phi.block(a * nu, 0, nu, nu) = power * Eigen::MatrixXd::Identity(nu, nu);
    power *= theta;
  }
  return phi;
}

namespace detail {

inline Eigen::MatrixXd kron_identity(const Eigen::MatrixXd& X, int nu) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(X.rows() * nu, X.cols() * nu);
  for (int r = 0; r < X.rows(); ++r)
    for (int c = 0; c < X.cols(); ++c)
      if (X(r, c) != 0.0)
        out.block(r * nu, c * nu, nu, nu) = X(r, c) * Eigen::MatrixXd::Identity(nu, nu);
  return out;
}

}  // namespace detail

inline KypRealization kyp_realization(int nu, int l) {
  POLYCONSENSUS_THROW_UNLESS(nu >= 1 && l >= 1, ErrorKind::kInvalidArgument,
                             "kyp_realization requires nu >= 1 and l >= 1");
  KypRealization r;
  r.nu = nu;
  r.m = kyp_power(l);
  const int m = r.m;
  Eigen::MatrixXd shift = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i + 1 < m; ++i) shift(i, i + 1) = 1.0;
  Eigen::MatrixXd last = Eigen::MatrixXd::Zero(m, 1);
  last(m - 1, 0) = 1.0;
  Eigen::MatrixXd stack_c = Eigen::MatrixXd::Zero(m + 1, m);
  stack_c.topRows(m).setIdentity();
  Eigen::MatrixXd stack_d = Eigen::MatrixXd::Zero(m + 1, 1);
  stack_d(m, 0) = 1.0;
  r.A = detail::kron_identity(shift, nu);
  r.B = detail::kron_identity(last, nu);
  r.C = detail::kron_identity(stack_c, nu);
  r.D = detail::kron_identity(stack_d, nu);
  return r;
}

/// Gram representation of a matrix polynomial sum_k theta^k C_k in the
/// stacked-powers vector phi (block a of phi carries theta^{m-a}). Each C_k is
/// split equally over all block positions (a, b) with (m-a) + (m-b) = k.
inline Eigen::MatrixXd polynomial_to_gram(const std::vector<Eigen::MatrixXd>& coeffs, int m) {
  POLYCONSENSUS_THROW_UNLESS(!coeffs.empty(), ErrorKind::kInvalidArgument,
                             "polynomial_to_gram needs at least one coefficient");
  POLYCONSENSUS_THROW_UNLESS(static_cast<int>(coeffs.size()) - 1 <= 2 * m,
                             ErrorKind::kInvalidArgument,
                             "polynomial degree " + std::to_string(coeffs.size() - 1) +
                                 " exceeds 2m = " + std::to_string(2 * m));
  const int nu = static_cast<int>(coeffs.front().rows());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero((m + 1) * nu, (m + 1) * nu);
  for (int k = 0; k < static_cast<int>(coeffs.size()); ++k) {
    POLYCONSENSUS_THROW_UNLESS(coeffs[k].rows() == nu && coeffs[k].cols() == nu,
                               ErrorKind::kDimension, "polynomial coefficients differ in size");
    if (coeffs[k].cwiseAbs().maxCoeff() == 0.0) continue;
    int positions = 0;
    for (int a = 0; a <= m; ++a) {
      const int b = 2 * m - k - a;
      if (b >= 0 && b <= m) ++positions;
    }
    for (int a = 0; a <= m; ++a) {
      const int b = 2 * m - k - a;
      if (b < 0 || b > m) continue;
      M.block(a * nu, b * nu, nu, nu) += coeffs[k] / positions;
    }
  }
  return 0.5 * (M + M.transpose());
}

struct Theorem2Options {
  /// Drop coordinates that semidefiniteness forces to vanish before lifting.
  bool reduce_structural_zeros = true;
  /// Treat the decrease pencil as strict (needs a positive margin).
  bool strict_decrease = false;
};

/// Interval-form LMIs: one negative pencil per matrix polynomial (positivity
/// with flipped sign for k = 1, decrease for k = 2), each with a positive
/// multiplier block D_k.
inline AssembledLmis assemble_theorem2(const ModelMatrices& model, double lambda_min,
                                       double lambda_max, int l, double epsilon,
                                       const Theorem2Options& options = {}) {
  detail::check_model(model, l);
  POLYCONSENSUS_THROW_UNLESS(epsilon >= 0.0, ErrorKind::kInvalidArgument,
                             "epsilon must be non-negative");
  POLYCONSENSUS_THROW_UNLESS(lambda_min <= lambda_max, ErrorKind::kInvalidArgument,
                             "lambda_min must not exceed lambda_max");
  if (lambda_min <= 0.0 && lambda_max >= 0.0) {
    throw Error(ErrorKind::kIntervalContainsZero,
                "eigenvalue interval [" + std::to_string(lambda_min) + ", " +
                    std::to_string(lambda_max) +
                    "] contains 0; the interval form cannot certify positivity there");
  }
  const int n = model.basis.n();
  const int rho = model.basis.rho();
  const int nu2 = rho - 1;
  const int m = kyp_power(l);
  const Eigen::MatrixXd gamma = selector_gamma(model.basis);
  const Eigen::MatrixXd pi = selector_pi(model.basis);

  AssembledLmis out;
  out.method = Method::kTheorem2;
  out.lambda_min = lambda_min;
  out.lambda_max = lambda_max;
  out.lambdas = {lambda_min, lambda_max};
  DecisionLayout base = DecisionLayout::make(n, l, model.slack.iota);

  // Matrix polynomial coefficients, power 0..deg, affine in the base decisions.
  std::vector<AffineSymMatrix> poly1(l + 1, AffineSymMatrix(n));
  std::vector<AffineSymMatrix> poly2(l + 2, AffineSymMatrix(nu2));
  for (int j = 1; j <= l; ++j) {
    for (int s = 0; s < sym_count(n); ++s) {
      const int var = base.L_offset(j) + s;
      const Eigen::MatrixXd E = sym_unit(n, s);
      poly1[j].add_term(var, -E);
      const auto terms = detail::decrease_terms(E, gamma, pi, model.A_a, model.A_b, epsilon);
      poly2[j].add_term(var, terms.agent);
      poly2[j + 1].add_term(var, terms.coupling);
    }
  }
  for (int k = 0; k < model.slack.iota; ++k)
    poly2[0].add_term(base.tau_offset + k, pi * model.slack.as_double(k) * pi.transpose());

  std::vector<int> coords1(n), coords2(nu2);
  for (int i = 0; i < n; ++i) coords1[i] = i;
  for (int i = 0; i < nu2; ++i) coords2[i] = i;
  AffineSubspace subspace = AffineSubspace::full(base.size);
  if (options.reduce_structural_zeros) {
    RowFamily f1{"positivity polynomial", {}, true};
    for (const auto& c : poly1) f1.members.push_back(&c);
    RowFamily f2{"decrease polynomial", {}, options.strict_decrease};
    for (const auto& c : poly2) f2.members.push_back(&c);
    const StructuralReduction red = reduce_structural_zeros({f1, f2}, subspace);
    if (red.infeasibility) {
      out.structural_infeasibility =
          *red.infeasibility +
          " (the interval form forces the slack-matched terms to hold for every theta, "
          "but the slack multipliers do not depend on theta)";
    }
    subspace = red.subspace;
    coords1 = red.kept_rows[0];
    coords2 = red.kept_rows[1];
  }

  DecisionLayout layout = base;
  const std::vector<std::vector<int>> coords = {coords1, coords2};
  const std::vector<std::vector<AffineSymMatrix>*> polys = {&poly1, &poly2};
  std::vector<int> family_of_kyp;
  for (int k = 0; k < 2; ++k) {
    if (coords[k].empty()) continue;
    layout.add_kyp(static_cast<int>(coords[k].size()), m, coords[k]);
    family_of_kyp.push_back(k);
  }
  out.layout = layout;

  // Equalities implied by the reduction, re-expressed on the full layout.
  {
    const int p0 = base.size;
    const int extra = layout.size - p0;
    const Eigen::MatrixXd& Z = subspace.basis;
    // Rows orthogonal to the admissible directions: E = N' with N spanning the
    // orthogonal complement of range(Z).
    Eigen::MatrixXd N;
    if (Z.cols() == 0) {
      N = Eigen::MatrixXd::Identity(p0, p0);
    } else {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(Z, Eigen::ComputeFullU);
      int rank = 0;
      for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > 1e-10) ++rank;
      N = svd.matrixU().rightCols(p0 - rank);
    }
    out.equalities.E = Eigen::MatrixXd::Zero(N.cols(), p0 + extra);
    out.equalities.E.leftCols(p0) = N.transpose();
    out.equalities.e = N.transpose() * subspace.offset;
  }

  for (std::size_t kk = 0; kk < layout.kyp.size(); ++kk) {
    const KypLayout& K = layout.kyp[kk];
    const int k = family_of_kyp[kk];
    const auto& poly = *polys[k];
    const int nu = K.nu;
    const int state = K.state;
    const int dim = (m + 1) * nu;
    const KypRealization real = kyp_realization(nu, l);

    // W = [I 0; A B] maps [q; u] to [q; p] with q = theta p.
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(2 * state, dim);
    W.topLeftCorner(state, state).setIdentity();
    W.bottomLeftCorner(state, state) = real.A;
    W.bottomRightCorner(state, nu) = real.B;
    const double s = lambda_min + lambda_max;
    const double p = lambda_min * lambda_max;

    LmiBlock pencil;
    pencil.label = k == 0 ? "interval positivity (KYP)" : "interval decrease (KYP)";
    pencil.orientation = Orientation::kNegative;
    pencil.strict = k == 0 ? true : options.strict_decrease;
    pencil.F = AffineSymMatrix(dim);

    // [C D]' M [C D] with [C D] = I, so the Gram matrix enters as is.
    std::map<int, std::vector<Eigen::MatrixXd>> per_var;
    for (int power = 0; power < static_cast<int>(poly.size()); ++power) {
      const AffineSymMatrix reduced = poly[power].restricted(K.coordinates);
      for (const auto& [var, coeff] : reduced.terms) {
        auto& list = per_var[var];
        if (list.empty()) list.assign(poly.size(), Eigen::MatrixXd::Zero(nu, nu));
        list[power] = coeff;
      }
    }
    for (const auto& [var, list] : per_var) pencil.F.add_term(var, polynomial_to_gram(list, m));

    for (int e = 0; e < sym_count(state); ++e) {
      const Eigen::MatrixXd Du = sym_unit(state, e);
      Eigen::MatrixXd Xi(2 * state, 2 * state);
      Xi << -2.0 * Du, s * Du, s * Du, -2.0 * p * Du;
      pencil.F.add_term(K.D_offset + e, W.transpose() * Xi * W);
    }
    for (int e = 0; e < skew_count(state); ++e) {
      const Eigen::MatrixXd Gu = skew_unit(state, e);
      Eigen::MatrixXd Xi = Eigen::MatrixXd::Zero(2 * state, 2 * state);
      Xi.topRightCorner(state, state) = Gu;
      Xi.bottomLeftCorner(state, state) = -Gu;
      pencil.F.add_term(K.G_offset + e, W.transpose() * Xi * W);
    }

    LmiBlock multiplier;
    multiplier.label = k == 0 ? "multiplier D1" : "multiplier D2";
    multiplier.orientation = Orientation::kPositive;
    multiplier.strict = true;
    multiplier.F = AffineSymMatrix(state);
    for (int e = 0; e < sym_count(state); ++e)
      multiplier.F.add_term(K.D_offset + e, sym_unit(state, e));

    normalize_block(pencil);
    normalize_block(multiplier);
    out.blocks.push_back(std::move(pencil));
    out.blocks.push_back(std::move(multiplier));
  }
  if (coords1.empty() && !out.structural_infeasibility) {
    out.structural_infeasibility = "every coordinate of the positivity polynomial vanishes";
  }
  return out;
}

}  // namespace polyconsensus
