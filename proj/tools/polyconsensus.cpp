// polyconsensus command-line front end.
//
// Exit codes: 0 success, 1 input error, 2 not certified / verification failed,
// 3 simulation diverged.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "polyconsensus/polyconsensus.hpp"

namespace pc = polyconsensus;
using pc::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNotCertified = 2;
constexpr int kExitDiverged = 3;

struct CertifyArgs {
  std::string config;
  std::string method = "theorem1";
  int l = 0;
  double epsilon = -1.0;
  double margin = -1.0;
  std::string solver = "builtin";
  std::string out;
  int max_iters = 100;
};

struct VerifyArgs {
  std::string config;
  std::string cert;
  double tol = -1.0;
};

struct SimulateArgs {
  std::string config;
  std::string cert;
  double dt = 1e-3;
  double t_final = 20.0;
  unsigned long long seed = 1;
  double amplitude = 2.0;
  bool consensus = false;
  std::string out = "trace.csv";
};

struct ExampleArgs {
  std::string which;
  std::string out = ".";
};

json verification_json(const pc::VerificationReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"family", c.family},
                      {"lambda", c.lambda},
                      {"min_eig", c.min_eig},
                      {"max_eig", c.max_eig},
                      {"threshold", c.threshold},
                      {"pass", c.pass}});
  }
  return {{"verdict", r.pass ? "pass" : "fail"},
          {"worst_violation", r.worst_violation},
          {"worst_label", r.worst_label},
          {"worst_positivity_min_eig", r.worst_positivity},
          {"worst_decrease_max_eig", r.worst_decrease},
          {"checks", checks}};
}

int run_certify(const CertifyArgs& a) {
  const pc::ModelConfig cfg = pc::load_model_config(a.config);
  const pc::FormationModel model = pc::build_model(cfg);
  pc::CertifyRequest req;
  if (a.method == "theorem1") {
    req.method = pc::Method::kTheorem1;
  } else if (a.method == "theorem2") {
    req.method = pc::Method::kTheorem2;
  } else {
    std::cerr << "error: --method must be theorem1 or theorem2\n";
    return kExitInput;
  }
  req.l = a.l > 0 ? a.l : cfg.defaults.l;
  req.epsilon = a.epsilon >= 0 ? a.epsilon : cfg.defaults.epsilon;
  req.margins.positive = a.margin >= 0 ? a.margin : cfg.defaults.margin;
  req.tol_verify = cfg.defaults.tol_verify;
  req.solve.max_iters = a.max_iters;

  const std::string out = a.out.empty() ? "certificate.json" : a.out;
  if (a.solver == "sdpa-export") {
    const char* env = std::getenv("POLYCONSENSUS_SDPA_SOLVER");
    const std::string prefix = out + ".sdpa";
    if (env == nullptr || *env == '\0') {
      const pc::PreparedModel prepared = pc::prepare(model);
      const pc::AssembledLmis lmis = pc::assemble(prepared, req);
      const pc::PresolvedProblem pre =
          pc::presolve(pc::FeasibilityProblem::from(lmis, req.margins));
      if (pre.infeasibility) {
        std::cout << "status: infeasible\nevidence: " << *pre.infeasibility << "\n";
        return kExitNotCertified;
      }
      pc::export_sdpa(pre.reduced, prefix + ".dat-s");
      std::cout << "status: unknown\nwrote " << prefix
                << ".dat-s; set POLYCONSENSUS_SDPA_SOLVER to solve and verify in one step\n";
      return kExitNotCertified;
    }
    req.external_solver = env;
    req.work_prefix = prefix;
  } else if (a.solver != "builtin") {
    std::cerr << "error: --solver must be builtin or sdpa-export\n";
    return kExitInput;
  }

  const pc::CertifyOutcome outcome = pc::certify(model, req);
  for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "method: " << pc::to_string(req.method) << "  l: " << req.l
            << "  epsilon: " << req.epsilon << "  blocks: " << outcome.block_count << "\n";
  std::cout << "status: " << pc::to_string(outcome.status) << "\n";
  std::cout << "evidence: " << outcome.message << "\n";
  if (outcome.solve.forced_rows > 0)
    std::cout << "structurally forced rows: " << outcome.solve.forced_rows << "\n";
  if (outcome.verification) {
    std::cout << "verification: " << (outcome.verification->pass ? "pass" : "fail")
              << "  worst positivity min-eig " << outcome.verification->worst_positivity
              << "  worst decrease max-eig " << outcome.verification->worst_decrease << "\n";
  }
  if (outcome.status != pc::SolveStatus::kCertified) return kExitNotCertified;

  json doc = pc::certificate_to_json(*outcome.certificate);
  doc["model_hash"] = pc::content_hash(cfg.source);
  doc["solver"] = {{"name", req.external_solver.empty() ? "builtin" : "external"},
                   {"iterations", outcome.solve.iterations},
                   {"forced_rows", outcome.solve.forced_rows}};
  doc["verification"] = verification_json(*outcome.verification);
  pc::write_json_file(out, doc);
  std::cout << "certified and verified; certificate written to " << out << "\n";
  return kExitOk;
}

int run_verify(const VerifyArgs& a) {
  const pc::ModelConfig cfg = pc::load_model_config(a.config);
  const pc::FormationModel model = pc::build_model(cfg);
  const json cdoc = pc::read_json_file(a.cert);
  const pc::Certificate cert = pc::certificate_from_json(cdoc);
  const std::string hash = pc::content_hash(cfg.source);
  if (!cdoc.contains("model_hash") || cdoc["model_hash"] != hash) {
    std::cerr << "warning: certificate model hash "
              << (cdoc.contains("model_hash") ? cdoc["model_hash"].dump() : "(none)")
              << " does not match the config hash \"" << hash
              << "\"; verifying the given pair anyway\n";
  }
  const pc::PreparedModel prepared = pc::prepare(model);
  const double tol = a.tol > 0 ? a.tol : cfg.defaults.tol_verify;
  const pc::VerificationReport report =
      pc::verify_certificate(cert, model.basis, prepared.slack, model.agent.A, model.coupling.A,
                             prepared.spectral, tol);
  json out = verification_json(report);
  out["model_hash"] = hash;
  std::cout << out.dump(2) << "\n";
  return report.pass ? kExitOk : kExitNotCertified;
}

int run_simulate(const SimulateArgs& a) {
  const pc::ModelConfig cfg = pc::load_model_config(a.config);
  const pc::FormationModel model = pc::build_model(cfg);
  const pc::Assumption1Report check = pc::check_assumption1(model.pattern);
  if (!check.ok()) {
    std::cerr << "error: " << check.message << "\n";
    return kExitInput;
  }
  std::optional<pc::Certificate> cert;
  std::string cert_hash;
  if (!a.cert.empty()) {
    const json cdoc = pc::read_json_file(a.cert);
    cert = pc::certificate_from_json(cdoc);
    cert_hash = pc::content_hash(cdoc);
    if (cert->L.front().rows() != model.n()) {
      std::cerr << "error: certificate L_j size does not match the model state dimension\n";
      return kExitInput;
    }
  }
  const int n = model.n();
  const int N = model.N();
  std::mt19937_64 rng(a.seed);
  std::uniform_real_distribution<double> dist(-a.amplitude, a.amplitude);
  Eigen::VectorXd x0(n * N);
  if (a.consensus) {
    Eigen::VectorXd common(n);
    for (int i = 0; i < n; ++i) common[i] = dist(rng);
    for (int k = 0; k < N; ++k) x0.segment(k * n, n) = common;
  } else {
    for (int i = 0; i < n * N; ++i) x0[i] = dist(rng);
  }
  const pc::SimulationTrace trace =
      pc::rk4_simulate(model, x0, a.dt, a.t_final, cert ? &cert->L : nullptr);

  std::ofstream csv(a.out);
  if (!csv) {
    std::cerr << "error: cannot open '" << a.out << "' for writing\n";
    return kExitInput;
  }
  csv << "t";
  for (int k = 1; k <= N; ++k)
    for (int i = 1; i <= n; ++i) csv << ",x_" << k << "_" << i;
  csv << ",V,disagreement\n";
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return std::string(buf);
  };
  for (std::size_t s = 0; s < trace.times.size(); ++s) {
    csv << num(trace.times[s]);
    for (int i = 0; i < n * N; ++i) csv << "," << num(trace.states[s][i]);
    csv << "," << (trace.V.empty() ? std::string() : num(trace.V[s])) << ","
        << num(trace.disagreement[s]) << "\n";
  }
  csv.close();

  const double d0 = trace.disagreement.front();
  const double d1 = trace.disagreement.back();
  json meta = {{"seed", a.seed},
               {"dt", a.dt},
               {"t_final", a.t_final},
               {"amplitude", a.amplitude},
               {"consensus_start", a.consensus},
               {"model_hash", pc::content_hash(cfg.source)},
               {"certificate_hash", cert ? json(cert_hash) : json(nullptr)},
               {"steps", trace.times.size() - 1},
               {"diverged", trace.diverged},
               {"initial_disagreement", d0},
               {"final_disagreement", d1}};
  double v_ratio = std::numeric_limits<double>::quiet_NaN();
  if (!trace.V.empty() && trace.V.front() != 0.0) v_ratio = trace.V.back() / trace.V.front();
  meta["V_ratio"] = std::isfinite(v_ratio) ? json(v_ratio) : json(nullptr);
  pc::write_json_file(a.out + ".meta.json", meta);

  std::cout << "t_end " << trace.times.back() << "  disagreement " << d0 << " -> " << d1;
  if (std::isfinite(v_ratio)) std::cout << "  V(t_end)/V(0) " << v_ratio;
  std::cout << "\n";
  if (trace.diverged) {
    std::cerr << "error: state exceeded the divergence guard at t = " << trace.times.back()
              << "; partial trace written\n";
    return kExitDiverged;
  }
  return kExitOk;
}

int run_example(const ExampleArgs& a) {
  const json doc = pc::example_config(a.which);
  std::filesystem::create_directories(a.out);
  const std::string path = (std::filesystem::path(a.out) / (a.which + ".json")).string();
  pc::write_json_file(path, doc);
  std::cout << path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consensus certificates for coupled polynomial agents"};
  app.require_subcommand(1);

  CertifyArgs ca;
  auto* certify = app.add_subcommand("certify", "Assemble, solve and verify the consensus LMIs");
  certify->add_option("--config", ca.config, "Model JSON")->required()->check(CLI::ExistingFile);
  certify->add_option("--method", ca.method, "theorem1 | theorem2")
      ->check(CLI::IsMember({"theorem1", "theorem2"}));
  certify->add_option("--l", ca.l, "Number of Lyapunov powers (default from config)");
  certify->add_option("--epsilon", ca.epsilon, "Decay rate in the decrease condition");
  certify->add_option("--margin", ca.margin, "Required margin on require-positive blocks");
  certify->add_option("--solver", ca.solver, "builtin | sdpa-export")
      ->check(CLI::IsMember({"builtin", "sdpa-export"}));
  certify->add_option("--out", ca.out, "Certificate output path");
  certify->add_option("--max-iters", ca.max_iters, "Interior-point iteration budget");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Check a certificate against a model");
  verify->add_option("--config", va.config, "Model JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("--cert", va.cert, "Certificate JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("--tol", va.tol, "Relative verification tolerance");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Integrate the formation with RK4");
  simulate->add_option("--config", sa.config, "Model JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--cert", sa.cert, "Certificate JSON (adds the V column)")
      ->check(CLI::ExistingFile);
  simulate->add_option("--dt", sa.dt, "Step size [s]")->check(CLI::PositiveNumber);
  simulate->add_option("--t-final", sa.t_final, "Horizon [s]")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sa.seed, "Initial-condition seed");
  simulate->add_option("--amplitude", sa.amplitude, "Initial states uniform in [-a, a]")
      ->check(CLI::PositiveNumber);
  simulate->add_flag("--consensus", sa.consensus, "Start every agent at the same state");
  simulate->add_option("--out", sa.out, "Trace CSV path");

  ExampleArgs ea;
  auto* example = app.add_subcommand("example", "Write a built-in example config");
  example->add_option("which", ea.which, "vdp | lorenz")
      ->required()
      ->check(CLI::IsMember({"vdp", "lorenz"}));
  example->add_option("--out", ea.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*certify) return run_certify(ca);
    if (*verify) return run_verify(va);
    if (*simulate) return run_simulate(sa);
    if (*example) return run_example(ea);
  } catch (const pc::Error& e) {
    std::cerr << "error (" << pc::to_string(e.kind()) << "): " << e.what() << "\n";
    return e.kind() == pc::ErrorKind::kNonConvergence ? kExitNotCertified : kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
