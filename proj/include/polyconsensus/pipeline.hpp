#pragma once

/// \file pipeline.hpp
/// Model -> LMIs -> solver -> certificate -> independent verification.
/// A certificate is only reported as certified after verify_certificate passes.

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "polyconsensus/dynamics.hpp"
#include "polyconsensus/error.hpp"
#include "polyconsensus/lmi.hpp"
#include "polyconsensus/pattern.hpp"
#include "polyconsensus/polybasis.hpp"
#include "polyconsensus/sdp.hpp"
#include "polyconsensus/sdpa.hpp"

namespace polyconsensus {

struct CertifyRequest {
  Method method = Method::kTheorem1;
  int l = 6;
  double epsilon = 1.0;
  Margins margins;
  double tol_verify = 1e-7;
  SolveOptions solve;
  Theorem2Options theorem2;
  /// Command used for the external path as "<cmd> <in.dat-s> <out>"; empty
  /// selects the built-in solver.
  std::string external_solver;
  /// Where the external path writes its files.
  std::string work_prefix = "polyconsensus";
};

struct CertifyOutcome {
  SolveStatus status = SolveStatus::kUnknown;
  SolveResult solve;
  std::optional<Certificate> certificate;
  std::optional<VerificationReport> verification;
  std::vector<std::string> warnings;
  std::string message;
  int block_count = 0;
  std::vector<double> lambdas;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

/// Precomputed pieces every pipeline stage needs.
struct PreparedModel {
  const FormationModel* model = nullptr;
  SlackBasis slack;
  SpectralData spectral;

  ModelMatrices matrices() const {
    return {model->basis, slack, model->agent.A, model->coupling.A};
  }
};

/// Throws ErrorKind::kInvalidArgument with the violation report when the
/// pattern does not satisfy the single-zero-eigenvalue assumption.
inline PreparedModel prepare(const FormationModel& model) {
  const Assumption1Report report = check_assumption1(model.pattern);
  if (!report.ok()) {
    throw Error(ErrorKind::kInvalidArgument,
                std::string("pattern matrix violates the consensus assumption (") +
                    to_string(report.violation) + "): " + report.message);
  }
  PreparedModel p;
  p.model = &model;
  p.slack = build_slack_basis(model.basis);
  p.spectral = eigendecompose(model.pattern);
  return p;
}

inline AssembledLmis assemble(const PreparedModel& prepared, const CertifyRequest& request) {
  if (request.method == Method::kTheorem1)
    return assemble_theorem1(prepared.matrices(), prepared.spectral, request.l, request.epsilon);
  return assemble_theorem2(prepared.matrices(), prepared.spectral.lambda_min,
                           prepared.spectral.lambda_max, request.l, request.epsilon,
                           request.theorem2);
}

/// Solves the presolved problem with an external SDPA-format solver.
inline SolveResult solve_external(const FeasibilityProblem& problem, const SolveOptions& options,
                                  const std::string& command, const std::string& prefix) {
  const PresolvedProblem pre = presolve(problem, options.presolve);
  if (pre.infeasibility) {
    SolveResult r;
    r.status = SolveStatus::kInfeasible;
    r.forced_rows = pre.forced_rows;
    r.evidence = *pre.infeasibility;
    return r;
  }
  const std::string dat = prefix + ".dat-s";
  const std::string out = prefix + ".out";
  export_sdpa(pre.reduced, dat);
  const std::string cmd = command + " '" + dat + "' '" + out + "' > '" + prefix + ".log' 2>&1";
  const int rc = std::system(cmd.c_str());
  if (!std::filesystem::exists(out)) {
    SolveResult r;
    r.status = SolveStatus::kUnknown;
    r.evidence = "external solver exited with status " + std::to_string(rc) +
                 " and wrote no solution";
    return r;
  }
  const int k = pre.reduced.layout.size;
  const Eigen::VectorXd x = import_sdpa_solution(out, k + 1);
  SolveResult r = classify(problem, pre, x.head(k), std::numeric_limits<double>::quiet_NaN(),
                           rc == 0);
  r.evidence += " (external solver)";
  return r;
}

inline CertifyOutcome certify(const PreparedModel& prepared, const CertifyRequest& request) {
  CertifyOutcome out;
  const AssembledLmis lmis = assemble(prepared, request);
  out.warnings = lmis.warnings;
  out.block_count = static_cast<int>(lmis.blocks.size());
  out.lambdas = lmis.lambdas;
  out.lambda_min = lmis.lambda_min;
  out.lambda_max = lmis.lambda_max;

  const FeasibilityProblem problem = FeasibilityProblem::from(lmis, request.margins);
  out.solve = request.external_solver.empty()
                  ? solve(problem, request.solve)
                  : solve_external(problem, request.solve, request.external_solver,
                                   request.work_prefix);
  out.status = out.solve.status;
  out.message = out.solve.evidence;
  if (out.status != SolveStatus::kCertified) return out;

  Certificate cert = make_certificate(lmis, out.solve, request.epsilon);
  const FormationModel& m = *prepared.model;
  VerificationReport report = verify_certificate(cert, m.basis, prepared.slack, m.agent.A,
                                                 m.coupling.A, prepared.spectral,
                                                 request.tol_verify);
  out.certificate = std::move(cert);
  out.verification = report;
  if (!report.pass) {
    out.status = SolveStatus::kUnknown;
    out.message = "solver point failed independent verification at " + report.worst_label +
                  " (miss " + std::to_string(report.worst_violation) + ")";
  }
  return out;
}

inline CertifyOutcome certify(const FormationModel& model, const CertifyRequest& request) {
  return certify(prepare(model), request);
}

}  // namespace polyconsensus
