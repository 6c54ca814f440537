#pragma once

/// \file polybasis.hpp
/// Monomial bases of degree <= d in n variables, the Gram map that sends a
/// symmetric matrix X to the coefficients of chi^T X chi, and the slack
/// matrices spanning the kernel of that map.
///
/// Monomials are ordered graded-lexicographically with x_1 ranked highest:
/// the constant comes first, then x_1..x_n, then within each total degree the
/// exponents are sorted descending on the power of x_1, then x_2, and so on.
/// For n = 2, d = 2 this gives [1, x1, x2, x1^2, x1 x2, x2^2].

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyconsensus/error.hpp"

namespace polyconsensus {

/// Exact binomial coefficient. Throws ErrorKind::kSize when the result does not
/// fit in 64 bits.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // result * (n - k + i) is divisible by i after the multiplication.
    unsigned __int128 wide =
        static_cast<unsigned __int128>(result) * (n - k + i) / i;
    if (wide > UINT64_MAX) {
      throw Error(ErrorKind::kSize, "binomial(" + std::to_string(n) + ", " +
                                        std::to_string(k) +
                                        ") overflows 64-bit integers");
    }
    result = static_cast<std::uint64_t>(wide);
  }
  return result;
}

/// Number of monomials of degree <= d in n variables.
inline std::uint64_t count_rho(int n, int d) {
  POLYCONSENSUS_THROW_UNLESS(n >= 1 && d >= 0, ErrorKind::kInvalidArgument,
                             "count_rho requires n >= 1 and d >= 0");
  return binomial(static_cast<std::uint64_t>(n + d), static_cast<std::uint64_t>(n));
}

/// Number of independent symmetric slack matrices Q with chi^T Q chi == 0.
inline std::uint64_t count_iota(int n, int d) {
  POLYCONSENSUS_THROW_UNLESS(n >= 1 && d >= 0, ErrorKind::kInvalidArgument,
                             "count_iota requires n >= 1 and d >= 0");
  const std::uint64_t r = binomial(static_cast<std::uint64_t>(d + n),
                                   static_cast<std::uint64_t>(d));
  const std::uint64_t full = binomial(static_cast<std::uint64_t>(n + 2 * d),
                                      static_cast<std::uint64_t>(2 * d));
  unsigned __int128 pairs = static_cast<unsigned __int128>(r) * r + r;
  pairs /= 2;
  if (pairs > UINT64_MAX) {
    throw Error(ErrorKind::kSize, "count_iota overflows 64-bit integers");
  }
  return static_cast<std::uint64_t>(pairs) - full;
}

struct Exponent {
  std::vector<int> powers;

  int degree() const {
    int total = 0;
    for (int p : powers) total += p;
    return total;
  }

  bool operator==(const Exponent&) const = default;
};

inline Exponent operator+(const Exponent& a, const Exponent& b) {
  Exponent sum{a.powers};
  for (std::size_t i = 0; i < sum.powers.size(); ++i) sum.powers[i] += b.powers[i];
  return sum;
}

class MonomialBasis {
 public:
  MonomialBasis() = default;

  int n() const { return n_; }
  int d() const { return d_; }
  int rho() const { return static_cast<int>(exponents_.size()); }
  const std::vector<Exponent>& exponents() const { return exponents_; }
  const Exponent& exponent(int j) const { return exponents_.at(j); }

  /// Position of a monomial in the basis, or -1 if it is not a member.
  int index_of(const std::vector<int>& powers) const {
    auto it = index_.find(powers);
    return it == index_.end() ? -1 : it->second;
  }

  /// Human-readable monomial, e.g. "x1^2*x2" or "1".
  std::string label(int j) const {
    const auto& p = exponents_.at(j).powers;
    std::string out;
    for (int i = 0; i < n_; ++i) {
      if (p[i] == 0) continue;
      if (!out.empty()) out += "*";
      out += "x" + std::to_string(i + 1);
      if (p[i] > 1) out += "^" + std::to_string(p[i]);
    }
    return out.empty() ? "1" : out;
  }

  friend MonomialBasis build_basis(int n, int d);

 private:
  int n_ = 0;
  int d_ = 0;
  std::vector<Exponent> exponents_;
  std::map<std::vector<int>, int> index_;
};

namespace detail {

// Appends all exponents of exactly `remaining` total degree over variables
// [var, n), lexicographically descending.
inline void enumerate_degree(int n, int var, int remaining, std::vector<int>& prefix,
                             std::vector<Exponent>& out) {
  if (var == n - 1) {
    prefix[var] = remaining;
    out.push_back(Exponent{prefix});
    return;
  }
  for (int p = remaining; p >= 0; --p) {
    prefix[var] = p;
    enumerate_degree(n, var + 1, remaining - p, prefix, out);
  }
  prefix[var] = 0;
}

}  // namespace detail

inline MonomialBasis build_basis(int n, int d) {
  POLYCONSENSUS_THROW_UNLESS(n >= 1, ErrorKind::kInvalidArgument,
                             "build_basis requires n >= 1");
  POLYCONSENSUS_THROW_UNLESS(d >= 1, ErrorKind::kInvalidArgument,
                             "build_basis requires d >= 1");
  // The Gram codomain is indexed by degree <= 2d monomials, so that count has
  // to be representable too.
  const std::uint64_t rho = count_rho(n, d);
  binomial(static_cast<std::uint64_t>(n + 2 * d), static_cast<std::uint64_t>(2 * d));
  if (rho > (1u << 20)) {
    throw Error(ErrorKind::kSize, "monomial basis with " + std::to_string(rho) +
                                      " entries is too large to materialize");
  }

  MonomialBasis basis;
  basis.n_ = n;
  basis.d_ = d;
  basis.exponents_.reserve(rho);
  std::vector<int> prefix(n, 0);
  for (int degree = 0; degree <= d; ++degree) {
    detail::enumerate_degree(n, 0, degree, prefix, basis.exponents_);
  }
  POLYCONSENSUS_THROW_UNLESS(basis.exponents_.size() == rho, ErrorKind::kInternal,
                             "monomial enumeration produced the wrong count");
  for (int j = 0; j < basis.rho(); ++j) basis.index_[basis.exponents_[j].powers] = j;
  return basis;
}

/// Evaluates chi(x): entry j is prod_i x_i^{powers_j[i]}.
inline Eigen::VectorXd eval_chi(const MonomialBasis& basis,
                                const Eigen::Ref<const Eigen::VectorXd>& x) {
  POLYCONSENSUS_THROW_UNLESS(x.size() == basis.n(), ErrorKind::kDimension,
                             "eval_chi: x has the wrong length");
  Eigen::VectorXd chi(basis.rho());
  for (int j = 0; j < basis.rho(); ++j) {
    double value = 1.0;
    const auto& p = basis.exponent(j).powers;
    for (int i = 0; i < basis.n(); ++i) {
      for (int k = 0; k < p[i]; ++k) value *= x[i];
    }
    chi[j] = value;
  }
  return chi;
}

/// The basis of degree <= 2d monomials that indexes gram_map's output.
inline MonomialBasis gram_codomain(const MonomialBasis& basis) {
  return build_basis(basis.n(), 2 * basis.d());
}

/// Coefficients of the polynomial chi^T X chi, indexed by gram_codomain(basis).
/// Linear in X; X is expected to be symmetric.
inline Eigen::VectorXd gram_map(const MonomialBasis& basis, const MonomialBasis& codomain,
                                const Eigen::Ref<const Eigen::MatrixXd>& X) {
  const int rho = basis.rho();
  POLYCONSENSUS_THROW_UNLESS(X.rows() == rho && X.cols() == rho, ErrorKind::kDimension,
                             "gram_map: X must be rho x rho");
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(codomain.rho());
  for (int a = 0; a < rho; ++a) {
    for (int b = 0; b < rho; ++b) {
      if (X(a, b) == 0.0) continue;
      const int g = codomain.index_of((basis.exponent(a) + basis.exponent(b)).powers);
      coeffs[g] += X(a, b);
    }
  }
  return coeffs;
}

inline Eigen::VectorXd gram_map(const MonomialBasis& basis,
                                const Eigen::Ref<const Eigen::MatrixXd>& X) {
  return gram_map(basis, gram_codomain(basis), X);
}

struct SlackBasis {
  int iota = 0;
  /// Integer-valued symmetric rho x rho annihilators.
  std::vector<Eigen::MatrixXi> Q;

  Eigen::MatrixXd as_double(int k) const { return Q.at(k).cast<double>(); }
};

/// For every target monomial with several unordered representations {a, b},
/// emits the difference of consecutive representation matrices. A
/// representation contributes chi_a chi_b to the quadratic form; doubled so
/// that entries are integers, it is 2 E_aa on the diagonal and E_ab + E_ba off
/// it.
inline SlackBasis build_slack_basis(const MonomialBasis& basis) {
  const int rho = basis.rho();
  const MonomialBasis codomain = gram_codomain(basis);
  std::vector<std::vector<std::pair<int, int>>> reps(codomain.rho());
  for (int a = 0; a < rho; ++a) {
    for (int b = a; b < rho; ++b) {
      const int g = codomain.index_of((basis.exponent(a) + basis.exponent(b)).powers);
      reps[g].emplace_back(a, b);
    }
  }

  auto doubled_rep = [rho](std::pair<int, int> ab) {
    Eigen::MatrixXi R = Eigen::MatrixXi::Zero(rho, rho);
    if (ab.first == ab.second) {
      R(ab.first, ab.first) = 2;
    } else {
      R(ab.first, ab.second) = 1;
      R(ab.second, ab.first) = 1;
    }
    return R;
  };

  SlackBasis slack;
  for (const auto& list : reps) {
    for (std::size_t k = 0; k + 1 < list.size(); ++k) {
      slack.Q.push_back(doubled_rep(list[k]) - doubled_rep(list[k + 1]));
    }
  }
  slack.iota = static_cast<int>(slack.Q.size());
  const std::uint64_t expected = count_iota(basis.n(), basis.d());
  if (static_cast<std::uint64_t>(slack.iota) != expected) {
    throw Error(ErrorKind::kInternal,
                "slack basis has " + std::to_string(slack.iota) +
                    " matrices, expected " + std::to_string(expected));
  }
  return slack;
}

/// n x rho selector with Gamma * chi(x) == x.
inline Eigen::MatrixXd selector_gamma(const MonomialBasis& basis) {
  const int n = basis.n();
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(n, basis.rho());
  gamma.block(0, 1, n, n).setIdentity();
  return gamma;
}

/// (rho-1) x rho selector dropping the constant monomial.
inline Eigen::MatrixXd selector_pi(const MonomialBasis& basis) {
  const int rho = basis.rho();
  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(rho - 1, rho);
  pi.block(0, 1, rho - 1, rho - 1).setIdentity();
  return pi;
}

}  // namespace polyconsensus
