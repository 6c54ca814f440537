#pragma once

/// \file sdpa.hpp
/// SDPA sparse (.dat-s) export of a max-margin feasibility problem and import
/// of an external solver's primal vector.
///
/// Variables are the decisions y_1..y_p followed by the margin t (m = p + 1).
/// The SDPA constraint is  sum_i x_i F_i - F_0 >= 0  with objective
/// minimize c'x, so c = -e_t. Require-negative blocks are negated into the
/// ">= 0" form and every LMI block carries -I on t. An optional trailing
/// diagonal block holds the box |y_r| <= R and the equalities as inequality pairs.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyconsensus/error.hpp"
#include "polyconsensus/sdp.hpp"

namespace polyconsensus {

struct SdpaExportOptions {
  /// Bound on |y_r|; 0 disables the box rows.
  double box = 1.0;
};

struct SdpaEntry {
  int matno = 0;  // 0 is F_0
  int blkno = 0;  // 1-based
  int i = 0;      // 1-based, i <= j
  int j = 0;
  double value = 0.0;
};

struct SdpaProblem {
  int m = 0;
  /// Negative sizes mark diagonal blocks, as in the file format.
  std::vector<int> block_sizes;
  Eigen::VectorXd c;
  std::vector<SdpaEntry> entries;

  /// Dense matrix F_matno on block blkno.
  Eigen::MatrixXd matrix(int matno, int blkno) const {
    const int s = std::abs(block_sizes.at(blkno - 1));
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(s, s);
    for (const auto& e : entries) {
      if (e.matno != matno || e.blkno != blkno) continue;
      F(e.i - 1, e.j - 1) = e.value;
      F(e.j - 1, e.i - 1) = e.value;
    }
    return F;
  }

  /// sum_i x_i F_i - F_0 on block blkno.
  Eigen::MatrixXd evaluate(int blkno, const Eigen::Ref<const Eigen::VectorXd>& x) const {
    POLYCONSENSUS_THROW_UNLESS(x.size() == m, ErrorKind::kDimension,
                               "SDPA evaluate: x must have length m");
    Eigen::MatrixXd out = -matrix(0, blkno);
    for (int i = 1; i <= m; ++i)
      if (x[i - 1] != 0.0) out += x[i - 1] * matrix(i, blkno);
    return out;
  }
};

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void emit_matrix(std::vector<SdpaEntry>& out, int matno, int blkno,
                        const Eigen::MatrixXd& M) {
  for (int i = 0; i < M.rows(); ++i)
    for (int j = i; j < M.cols(); ++j)
      if (M(i, j) != 0.0) out.push_back({matno, blkno, i + 1, j + 1, M(i, j)});
}

}  // namespace detail

inline SdpaProblem to_sdpa(const FeasibilityProblem& problem, const SdpaExportOptions& options = {}) {
  const int p = problem.layout.size;
  SdpaProblem out;
  out.m = p + 1;
  out.c = Eigen::VectorXd::Zero(out.m);
  out.c[p] = -1.0;
  int blkno = 0;
  for (const auto& b : problem.blocks) {
    ++blkno;
    const int s = b.size();
    out.block_sizes.push_back(s);
    const double sign = b.orientation == Orientation::kPositive ? 1.0 : -1.0;
    detail::emit_matrix(out.entries, 0, blkno, -sign * b.F.constant);
    for (const auto& [var, F] : b.F.terms) detail::emit_matrix(out.entries, var + 1, blkno, sign * F);
    detail::emit_matrix(out.entries, p + 1, blkno, -Eigen::MatrixXd::Identity(s, s));
  }
  const int q = problem.equalities.count();
  const int diag = (options.box > 0.0 ? 2 * p : 0) + 2 * q;
  if (diag > 0) {
    ++blkno;
    out.block_sizes.push_back(-diag);
    int row = 0;
    if (options.box > 0.0) {
      for (int r = 0; r < p; ++r) {
        for (double sgn : {-1.0, 1.0}) {
          ++row;
          out.entries.push_back({0, blkno, row, row, -options.box});
          out.entries.push_back({r + 1, blkno, row, row, sgn});
        }
      }
    }
    for (int e = 0; e < q; ++e) {
      for (double sgn : {1.0, -1.0}) {
        ++row;
        if (problem.equalities.e[e] != 0.0)
          out.entries.push_back({0, blkno, row, row, sgn * problem.equalities.e[e]});
        for (int r = 0; r < p; ++r)
          if (problem.equalities.E(e, r) != 0.0)
            out.entries.push_back({r + 1, blkno, row, row, sgn * problem.equalities.E(e, r)});
      }
    }
  }
  return out;
}

inline std::string format_sdpa(const SdpaProblem& sdpa) {
  std::ostringstream os;
  os << sdpa.m << "\n" << sdpa.block_sizes.size() << "\n";
  for (std::size_t b = 0; b < sdpa.block_sizes.size(); ++b)
    os << (b ? " " : "") << sdpa.block_sizes[b];
  os << "\n";
  for (int i = 0; i < sdpa.m; ++i) os << (i ? " " : "") << detail::format_double(sdpa.c[i]);
  os << "\n";
  for (const auto& e : sdpa.entries)
    os << e.matno << " " << e.blkno << " " << e.i << " " << e.j << " "
       << detail::format_double(e.value) << "\n";
  return os.str();
}

inline void export_sdpa(const FeasibilityProblem& problem, const std::string& path,
                        const SdpaExportOptions& options = {}) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::kIo, "cannot open '" + path + "' for writing");
  f << format_sdpa(to_sdpa(problem, options));
  if (!f) throw Error(ErrorKind::kIo, "failed writing '" + path + "'");
}

namespace detail {

// Reads the next non-comment line; SDPA allows leading '"' or '*' comment lines.
inline bool next_data_line(std::istream& in, std::string* line) {
  while (std::getline(in, *line)) {
    const auto pos = line->find_first_not_of(" \t\r");
    if (pos == std::string::npos) continue;
    const char c = (*line)[pos];
    if (c == '"' || c == '*') continue;
    return true;
  }
  return false;
}

// Numbers on a line, treating the punctuation SDPA allows ({},() and commas)
// as separators. Lenient mode stops at the first non-numeric token, which
// skips trailing annotations such as "= mDIM".
inline std::vector<double> numbers_in(std::string line, bool lenient = false) {
  for (char& ch : line)
    if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')') ch = ' ';
  std::istringstream is(line);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) {
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      if (lenient) break;
      throw Error(ErrorKind::kParse, "unexpected token '" + tok + "' in SDPA data");
    }
  }
  return out;
}

}  // namespace detail

inline SdpaProblem parse_sdpa(std::istream& in) {
  SdpaProblem out;
  std::string line;
  auto need = [&](const char* what) {
    if (!detail::next_data_line(in, &line))
      throw Error(ErrorKind::kParse, std::string("SDPA data ends before ") + what);
    return detail::numbers_in(line, true);
  };
  auto v = need("the variable count");
  POLYCONSENSUS_THROW_UNLESS(!v.empty() && v[0] >= 1, ErrorKind::kParse, "bad SDPA m line");
  out.m = static_cast<int>(v[0]);
  v = need("the block count");
  POLYCONSENSUS_THROW_UNLESS(!v.empty() && v[0] >= 1, ErrorKind::kParse,
                             "bad SDPA block count line");
  const int nblocks = static_cast<int>(v[0]);
  v = need("the block structure");
  POLYCONSENSUS_THROW_UNLESS(static_cast<int>(v.size()) >= nblocks, ErrorKind::kParse,
                             "SDPA block structure lists fewer sizes than blocks");
  for (int b = 0; b < nblocks; ++b) out.block_sizes.push_back(static_cast<int>(v[b]));
  std::vector<double> c;
  while (static_cast<int>(c.size()) < out.m) {
    v = need("the objective vector");
    c.insert(c.end(), v.begin(), v.end());
  }
  out.c = Eigen::Map<Eigen::VectorXd>(c.data(), out.m);
  while (detail::next_data_line(in, &line)) {
    v = detail::numbers_in(line);
    if (v.empty()) continue;
    POLYCONSENSUS_THROW_UNLESS(v.size() == 5, ErrorKind::kParse,
                               "SDPA entry line must have 5 fields: '" + line + "'");
    SdpaEntry e{static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]),
                static_cast<int>(v[3]), v[4]};
    POLYCONSENSUS_THROW_UNLESS(e.matno >= 0 && e.matno <= out.m && e.blkno >= 1 &&
                                   e.blkno <= nblocks,
                               ErrorKind::kParse, "SDPA entry out of range: '" + line + "'");
    const int s = std::abs(out.block_sizes[e.blkno - 1]);
    POLYCONSENSUS_THROW_UNLESS(e.i >= 1 && e.j >= 1 && e.i <= s && e.j <= s, ErrorKind::kParse,
                               "SDPA entry index out of range: '" + line + "'");
    if (e.i > e.j) std::swap(e.i, e.j);
    out.entries.push_back(e);
  }
  return out;
}

inline SdpaProblem read_sdpa(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::kIo, "cannot open '" + path + "'");
  return parse_sdpa(f);
}

/// Reads the primal vector x from a solver result. Understands SDPA output
/// ("xVec =" followed by {..}) and CSDP solution files (x on the first line).
inline Eigen::VectorXd parse_sdpa_solution(std::istream& in, int m) {
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::vector<double> x;
  const std::regex xvec(R"(xVec\s*=\s*\{([^}]*)\})");
  std::smatch match;
  if (std::regex_search(text, match, xvec)) {
    x = detail::numbers_in(match[1].str());
  } else {
    std::istringstream is(text);
    std::string line;
    if (detail::next_data_line(is, &line)) x = detail::numbers_in(line);
  }
  if (static_cast<int>(x.size()) != m) {
    throw Error(ErrorKind::kParse, "solution has " + std::to_string(x.size()) +
                                       " entries, expected " + std::to_string(m));
  }
  return Eigen::Map<Eigen::VectorXd>(x.data(), m);
}

inline Eigen::VectorXd import_sdpa_solution(const std::string& path, int m) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::kIo, "cannot open '" + path + "'");
  return parse_sdpa_solution(f, m);
}

}  // namespace polyconsensus
