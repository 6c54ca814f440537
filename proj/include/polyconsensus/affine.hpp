#pragma once

/// \file affine.hpp
/// Symmetric matrices that depend affinely on a flat decision vector, affine
/// parametrizations of the decision space, and the structural-zero reduction
/// shared by LMI assembly and the solver presolve.
///
/// Structural reduction: if a matrix required to be semidefinite has a diagonal
/// entry that vanishes for every admissible decision vector, its whole row must
/// vanish. Those rows become linear equalities on the decisions and are dropped
/// from the matrix; the process repeats until nothing changes. A row that is
/// forced to zero in a matrix that must be strictly definite proves the system
/// infeasible.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "polyconsensus/error.hpp"

namespace polyconsensus {

struct AffineSymMatrix {
  int size = 0;
  Eigen::MatrixXd constant;
  /// Coefficient matrix per decision index; absent entries are zero.
  std::map<int, Eigen::MatrixXd> terms;

  AffineSymMatrix() = default;
  explicit AffineSymMatrix(int n) : size(n), constant(Eigen::MatrixXd::Zero(n, n)) {}

  void add_term(int var, const Eigen::MatrixXd& coeff) {
    if (coeff.size() == 0 || coeff.cwiseAbs().maxCoeff() == 0.0) return;
    auto it = terms.find(var);
    if (it == terms.end()) {
      terms.emplace(var, coeff);
    } else {
      it->second += coeff;
    }
  }

  Eigen::MatrixXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& y) const {
    Eigen::MatrixXd out = constant;
    for (const auto& [var, coeff] : terms) {
      POLYCONSENSUS_THROW_UNLESS(var < y.size(), ErrorKind::kDimension,
                                 "decision vector is shorter than the block layout");
      if (y[var] != 0.0) out += y[var] * coeff;
    }
    return out;
  }

  /// Largest |entry| over the constant and all coefficient matrices.
  double max_abs() const {
    double m = size > 0 ? constant.cwiseAbs().maxCoeff() : 0.0;
    for (const auto& [var, coeff] : terms) m = std::max(m, coeff.cwiseAbs().maxCoeff());
    return m;
  }

  AffineSymMatrix scaled(double factor) const {
    AffineSymMatrix out = *this;
    out.constant *= factor;
    for (auto& [var, coeff] : out.terms) coeff *= factor;
    return out;
  }

  /// Principal submatrix on the given rows/columns.
  AffineSymMatrix restricted(const std::vector<int>& rows) const {
    const int k = static_cast<int>(rows.size());
    AffineSymMatrix out(k);
    auto take = [&](const Eigen::MatrixXd& m) {
      Eigen::MatrixXd r(k, k);
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) r(a, b) = m(rows[a], rows[b]);
      return r;
    };
    out.constant = take(constant);
    for (const auto& [var, coeff] : terms) out.add_term(var, take(coeff));
    return out;
  }
};

/// y = offset + basis * w.
struct AffineSubspace {
  Eigen::VectorXd offset;
  Eigen::MatrixXd basis;

  static AffineSubspace full(int p) {
    return AffineSubspace{Eigen::VectorXd::Zero(p), Eigen::MatrixXd::Identity(p, p)};
  }

  int ambient_dim() const { return static_cast<int>(offset.size()); }
  int dim() const { return static_cast<int>(basis.cols()); }

  Eigen::VectorXd lift(const Eigen::Ref<const Eigen::VectorXd>& w) const {
    return offset + basis * w;
  }

  /// Intersects with {y : E y = e}. Returns false (and leaves *this untouched)
  /// if the equalities are inconsistent on the current subspace.
  bool restrict(const Eigen::MatrixXd& E, const Eigen::VectorXd& e, double rel_tol = 1e-10) {
    if (E.rows() == 0) return true;
    Eigen::MatrixXd A = E * basis;
    Eigen::VectorXd b = e - E * offset;
    for (int r = 0; r < A.rows(); ++r) {
      const double s = std::max(A.row(r).cwiseAbs().maxCoeff(), std::abs(b[r]));
      if (s > 0.0) {
        A.row(r) /= s;
        b[r] /= s;
      }
    }
    if (A.cols() == 0) return b.cwiseAbs().maxCoeff() <= rel_tol;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv[0] : 0.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] > rel_tol * std::max(smax, 1.0)) ++rank;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(A.cols());
    const Eigen::VectorXd utb = svd.matrixU().transpose() * b;
    for (int i = 0; i < rank; ++i) w += svd.matrixV().col(i) * (utb[i] / sv[i]);
    const double residual = (A * w - b).cwiseAbs().maxCoeff();
    if (residual > 1e3 * rel_tol * (1.0 + b.cwiseAbs().maxCoeff())) return false;
    offset += basis * w;
    basis = basis * svd.matrixV().rightCols(A.cols() - rank);
    return true;
  }
};

/// A matrix-valued quantity required to be semidefinite (of either sign). When
/// it has several members (e.g. the coefficients of a matrix polynomial that
/// must be semidefinite on an interval), a row is forced to zero only if its
/// diagonal entry vanishes identically in every member.
struct RowFamily {
  std::string label;
  std::vector<const AffineSymMatrix*> members;
  /// Strict families need a positive margin, so a forced-zero row is fatal.
  bool strict = false;
};

struct StructuralReduction {
  AffineSubspace subspace;
  /// Surviving row indices per family, in the order the families were given.
  std::vector<std::vector<int>> kept_rows;
  int forced_rows = 0;
  /// Set when the reduction proves infeasibility; describes the argument.
  std::optional<std::string> infeasibility;
};

namespace detail {

// Entry (r, c) of m as an affine function of w: value = c0 + g . w.
inline void entry_on_subspace(const AffineSymMatrix& m, int r, int c, const AffineSubspace& s,
                              double* c0, Eigen::VectorXd* g) {
  *c0 = m.constant(r, c);
  g->setZero(s.dim());
  for (const auto& [var, coeff] : m.terms) {
    const double f = coeff(r, c);
    if (f == 0.0) continue;
    *c0 += f * s.offset[var];
    if (s.dim() > 0) *g += f * s.basis.row(var).transpose();
  }
}

}  // namespace detail

inline StructuralReduction reduce_structural_zeros(const std::vector<RowFamily>& families,
                                                   AffineSubspace start,
                                                   double rel_tol = 1e-10) {
  StructuralReduction out;
  out.subspace = std::move(start);
  out.kept_rows.resize(families.size());
  std::vector<double> scales(families.size(), 0.0);
  for (std::size_t f = 0; f < families.size(); ++f) {
    const auto& fam = families[f];
    POLYCONSENSUS_THROW_UNLESS(!fam.members.empty(), ErrorKind::kInvalidArgument,
                               "row family '" + fam.label + "' has no members");
    const int size = fam.members.front()->size;
    for (const auto* m : fam.members) {
      POLYCONSENSUS_THROW_UNLESS(m->size == size, ErrorKind::kDimension,
                                 "row family '" + fam.label + "' mixes matrix sizes");
      scales[f] = std::max(scales[f], m->max_abs());
    }
    for (int r = 0; r < size; ++r) out.kept_rows[f].push_back(r);
  }

  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> rhs;
    for (std::size_t f = 0; f < families.size(); ++f) {
      const auto& fam = families[f];
      const double tol = rel_tol * std::max(scales[f], 1e-300);
      std::vector<int> kept;
      for (int r : out.kept_rows[f]) {
        bool zero = true;
        for (const auto* m : fam.members) {
          double c0;
          Eigen::VectorXd g;
          detail::entry_on_subspace(*m, r, r, out.subspace, &c0, &g);
          if (std::abs(c0) > tol || (g.size() > 0 && g.cwiseAbs().maxCoeff() > tol)) {
            zero = false;
            break;
          }
        }
        if (!zero) {
          kept.push_back(r);
          continue;
        }
        if (fam.strict) {
          out.infeasibility = "diagonal entry " + std::to_string(r + 1) + " of '" + fam.label +
                              "' is identically zero on the admissible decision set, but the "
                              "matrix must be strictly definite";
          return out;
        }
        for (const auto* m : fam.members) {
          for (int c : out.kept_rows[f]) {
            double c0;
            Eigen::VectorXd g;
            detail::entry_on_subspace(*m, r, c, out.subspace, &c0, &g);
            if (std::abs(c0) <= tol && (g.size() == 0 || g.cwiseAbs().maxCoeff() <= tol)) continue;
            rows.push_back(g);
            rhs.push_back(-c0);
          }
        }
        ++out.forced_rows;
        changed = true;
      }
      out.kept_rows[f] = std::move(kept);
    }
    if (!rows.empty()) {
      // Equalities are expressed in w; lift them back to y-space coordinates.
      const int k = out.subspace.dim();
      Eigen::MatrixXd A(rows.size(), k);
      Eigen::VectorXd b(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        A.row(i) = rows[i].transpose();
        b[i] = rhs[i];
      }
      AffineSubspace local{Eigen::VectorXd::Zero(k), Eigen::MatrixXd::Identity(k, k)};
      if (!local.restrict(A, b, rel_tol)) {
        out.infeasibility =
            "rows forced to zero by semidefiniteness impose inconsistent linear equalities";
        return out;
      }
      out.subspace.offset += out.subspace.basis * local.offset;
      out.subspace.basis = out.subspace.basis * local.basis;
    }
  }
  return out;
}

}  // namespace polyconsensus
