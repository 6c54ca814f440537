#pragma once

/// \file config.hpp
/// Model configuration and certificate JSON. Validation errors name the
/// offending location as a JSON pointer (e.g. /agent_terms/2/powers).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "polyconsensus/dynamics.hpp"
#include "polyconsensus/error.hpp"
#include "polyconsensus/models.hpp"
#include "polyconsensus/pattern.hpp"
#include "polyconsensus/sdp.hpp"

namespace polyconsensus {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct MethodDefaults {
  int l = 6;
  double epsilon = 1.0;
  double margin = 1e-6;
  double tol_verify = 1e-7;
};

struct ModelConfig {
  std::string name;
  int n = 0;
  int N = 0;
  std::vector<Term> agent_terms;
  std::vector<Term> coupling_terms;  // before the gain is applied
  double gain = 1.0;
  PatternMatrix pattern;
  MethodDefaults defaults;
  json parameters = json::object();
  json source;  // the document as read, for hashing
};

namespace detail {

[[noreturn]] inline void schema_error(const std::string& pointer, const std::string& what) {
  throw Error(ErrorKind::kParse, (pointer.empty() ? std::string("/") : pointer) + ": " + what);
}

inline const json& require(const json& obj, const std::string& pointer, const char* key) {
  if (!obj.contains(key)) schema_error(pointer, std::string("missing required field '") + key + "'");
  return obj.at(key);
}

inline int as_int(const json& v, const std::string& pointer, int min_value) {
  if (!v.is_number_integer()) schema_error(pointer, "expected an integer");
  const auto x = v.get<long long>();
  if (x < min_value) schema_error(pointer, "must be >= " + std::to_string(min_value));
  if (x > 1000000) schema_error(pointer, "is unreasonably large");
  return static_cast<int>(x);
}

inline double as_number(const json& v, const std::string& pointer) {
  if (!v.is_number()) schema_error(pointer, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) schema_error(pointer, "must be finite");
  return x;
}

inline std::vector<Term> parse_terms(const json& arr, const std::string& pointer, int n) {
  if (!arr.is_array()) schema_error(pointer, "expected an array of terms");
  std::vector<Term> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = pointer + "/" + std::to_string(i);
    const json& t = arr[i];
    if (!t.is_object()) schema_error(p, "expected an object {row, coeff, powers}");
    for (const auto& [key, value] : t.items()) {
      if (key != "row" && key != "coeff" && key != "powers")
        schema_error(p + "/" + key, "unknown field");
    }
    Term term;
    term.row = as_int(require(t, p, "row"), p + "/row", 1);
    if (term.row > n) schema_error(p + "/row", "row exceeds n = " + std::to_string(n));
    term.coeff = as_number(require(t, p, "coeff"), p + "/coeff");
    const json& pw = require(t, p, "powers");
    if (!pw.is_array() || static_cast<int>(pw.size()) != n)
      schema_error(p + "/powers", "expected an array of " + std::to_string(n) + " integers");
    for (std::size_t k = 0; k < pw.size(); ++k)
      term.powers.push_back(as_int(pw[k], p + "/powers/" + std::to_string(k), 0));
    out.push_back(term);
  }
  return out;
}

inline PatternMatrix parse_pattern(const json& v, const std::string& pointer, int N) {
  if (!v.is_object() || v.size() != 1)
    schema_error(pointer, "expected exactly one of {\"cycle\"}, {\"matrix\"}, {\"edges\"}");
  if (v.contains("cycle")) {
    const int c = as_int(v.at("cycle"), pointer + "/cycle", 3);
    if (c != N) schema_error(pointer + "/cycle", "cycle size must equal N = " + std::to_string(N));
    return cycle_laplacian(N, 1.0);
  }
  if (v.contains("matrix")) {
    const json& m = v.at("matrix");
    const std::string p = pointer + "/matrix";
    if (!m.is_array() || static_cast<int>(m.size()) != N)
      schema_error(p, "expected " + std::to_string(N) + " rows");
    PatternMatrix P{Eigen::MatrixXd(N, N)};
    for (int i = 0; i < N; ++i) {
      const std::string pr = p + "/" + std::to_string(i);
      if (!m[i].is_array() || static_cast<int>(m[i].size()) != N)
        schema_error(pr, "expected " + std::to_string(N) + " entries");
      for (int j = 0; j < N; ++j) P.entries(i, j) = as_number(m[i][j], pr + "/" + std::to_string(j));
    }
    return P;
  }
  if (v.contains("edges")) {
    const json& e = v.at("edges");
    const std::string p = pointer + "/edges";
    if (!e.is_array()) schema_error(p, "expected an array of [i, j, weight]");
    std::vector<Edge> edges;
    for (std::size_t k = 0; k < e.size(); ++k) {
      const std::string pe = p + "/" + std::to_string(k);
      if (!e[k].is_array() || (e[k].size() != 2 && e[k].size() != 3))
        schema_error(pe, "expected [i, j] or [i, j, weight]");
      Edge edge;
      edge.i = as_int(e[k][0], pe + "/0", 1);
      edge.j = as_int(e[k][1], pe + "/1", 1);
      if (e[k].size() == 3) edge.weight = as_number(e[k][2], pe + "/2");
      if (edge.i > N || edge.j > N) schema_error(pe, "node index exceeds N = " + std::to_string(N));
      if (edge.i == edge.j) schema_error(pe, "self-loops are not allowed");
      edges.push_back(edge);
    }
    return from_edge_list(N, edges);
  }
  schema_error(pointer, "expected one of \"cycle\", \"matrix\", \"edges\"");
}

}  // namespace detail

inline ModelConfig parse_model_config(const json& doc) {
  using detail::schema_error;
  if (!doc.is_object()) schema_error("", "expected a JSON object");
  static const std::vector<std::string> known = {
      "schema_version", "name", "n", "N", "agent_terms", "coupling_terms", "gain",
      "pattern", "method", "parameters"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      schema_error("/" + key, "unknown field");
  }
  const int version = detail::as_int(detail::require(doc, "", "schema_version"), "/schema_version", 1);
  if (version != kSchemaVersion)
    schema_error("/schema_version", "unsupported version " + std::to_string(version));
  ModelConfig cfg;
  cfg.source = doc;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) schema_error("/name", "expected a string");
    cfg.name = doc["name"].get<std::string>();
  }
  cfg.n = detail::as_int(detail::require(doc, "", "n"), "/n", 1);
  cfg.N = detail::as_int(detail::require(doc, "", "N"), "/N", 2);
  cfg.agent_terms = detail::parse_terms(detail::require(doc, "", "agent_terms"), "/agent_terms", cfg.n);
  cfg.coupling_terms =
      detail::parse_terms(detail::require(doc, "", "coupling_terms"), "/coupling_terms", cfg.n);
  if (doc.contains("gain")) cfg.gain = detail::as_number(doc["gain"], "/gain");
  cfg.pattern = detail::parse_pattern(detail::require(doc, "", "pattern"), "/pattern", cfg.N);
  if (doc.contains("method")) {
    const json& m = doc["method"];
    if (!m.is_object()) schema_error("/method", "expected an object");
    for (const auto& [key, value] : m.items()) {
      if (key == "l") {
        cfg.defaults.l = detail::as_int(value, "/method/l", 1);
      } else if (key == "epsilon") {
        cfg.defaults.epsilon = detail::as_number(value, "/method/epsilon");
        if (cfg.defaults.epsilon < 0) schema_error("/method/epsilon", "must be >= 0");
      } else if (key == "margin") {
        cfg.defaults.margin = detail::as_number(value, "/method/margin");
      } else if (key == "tol_verify") {
        cfg.defaults.tol_verify = detail::as_number(value, "/method/tol_verify");
        if (cfg.defaults.tol_verify <= 0) schema_error("/method/tol_verify", "must be > 0");
      } else {
        schema_error("/method/" + key, "unknown field");
      }
    }
  }
  if (doc.contains("parameters")) {
    if (!doc["parameters"].is_object()) schema_error("/parameters", "expected an object");
    cfg.parameters = doc["parameters"];
  }
  return cfg;
}

inline json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::kIo, "cannot open '" + path + "'");
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& doc) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::kIo, "cannot open '" + path + "' for writing");
  f << doc.dump(2) << "\n";
  if (!f) throw Error(ErrorKind::kIo, "failed writing '" + path + "'");
}

inline ModelConfig load_model_config(const std::string& path) {
  return parse_model_config(read_json_file(path));
}

/// Coupling terms scaled by the gain, then the formation model.
inline FormationModel build_model(const ModelConfig& cfg) {
  std::vector<Term> coupling = cfg.coupling_terms;
  for (auto& t : coupling) t.coeff *= cfg.gain;
  return make_model(cfg.n, cfg.agent_terms, coupling, cfg.pattern);
}

/// 64-bit FNV-1a over the compact canonical dump, as 16 hex digits.
inline std::string content_hash(const json& doc) {
  const std::string s = doc.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline json terms_to_json(const std::vector<Term>& terms) {
  json arr = json::array();
  for (const auto& t : terms) arr.push_back({{"row", t.row}, {"coeff", t.coeff}, {"powers", t.powers}});
  return arr;
}

inline json example_config(const std::string& which) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  if (which == "vdp") {
    const VanDerPolParams p;
    VanDerPolParams unit = p;
    unit.c = 1.0;
    const ExampleTerms t = van_der_pol_terms(unit);
    doc["name"] = "van-der-pol ring";
    doc["n"] = t.n;
    doc["N"] = p.N;
    doc["agent_terms"] = terms_to_json(t.agent);
    doc["coupling_terms"] = terms_to_json(t.coupling);
    doc["gain"] = p.c;
    doc["pattern"] = {{"cycle", p.N}};
    doc["method"] = {{"l", p.l}, {"epsilon", 1.0}, {"margin", 1e-6}, {"tol_verify", 1e-7}};
    doc["parameters"] = {{"mu", p.mu}, {"c", p.c}, {"N", p.N}, {"l", p.l}};
  } else if (which == "lorenz") {
    const LorenzParams p;
    LorenzParams unit = p;
    unit.c = 1.0;
    const ExampleTerms t = lorenz_terms(unit);
    doc["name"] = "lorenz ring";
    doc["n"] = t.n;
    doc["N"] = p.N;
    doc["agent_terms"] = terms_to_json(t.agent);
    doc["coupling_terms"] = terms_to_json(t.coupling);
    doc["gain"] = p.c;
    doc["pattern"] = {{"cycle", p.N}};
    doc["method"] = {{"l", p.l}, {"epsilon", 1.0}, {"margin", 1e-6}, {"tol_verify", 1e-7}};
    doc["parameters"] = {{"sigma", p.sigma}, {"rho", p.rho}, {"beta", p.beta},
                         {"c", p.c},         {"N", p.N},     {"l", p.l}};
  } else {
    throw Error(ErrorKind::kInvalidArgument, "unknown example '" + which + "' (vdp | lorenz)");
  }
  return doc;
}

inline json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const json& v, const std::string& pointer) {
  if (!v.is_array()) detail::schema_error(pointer, "expected a matrix (array of rows)");
  const int rows = static_cast<int>(v.size());
  const int cols = rows ? static_cast<int>(v[0].size()) : 0;
  Eigen::MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const std::string pr = pointer + "/" + std::to_string(i);
    if (!v[i].is_array() || static_cast<int>(v[i].size()) != cols)
      detail::schema_error(pr, "rows must all have " + std::to_string(cols) + " entries");
    for (int j = 0; j < cols; ++j) M(i, j) = detail::as_number(v[i][j], pr + "/" + std::to_string(j));
  }
  return M;
}

inline json certificate_to_json(const Certificate& c) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["method"] = to_string(c.method);
  doc["l"] = c.l;
  doc["epsilon"] = c.epsilon;
  json L = json::array();
  for (const auto& Lj : c.L) L.push_back(matrix_to_json(Lj));
  doc["L"] = L;
  doc["tau"] = std::vector<double>(c.tau.data(), c.tau.data() + c.tau.size());
  doc["achieved_margin"] = c.achieved_margin;
  doc["normalization"] = c.normalization;
  doc["lambdas"] = c.lambdas;
  if (c.method == Method::kTheorem2) {
    json kyp;
    kyp["lambda_min"] = c.lambda_min;
    kyp["lambda_max"] = c.lambda_max;
    auto put = [&](const char* key, const std::optional<KypMultipliers>& km) {
      if (!km) {
        kyp[key] = nullptr;
        return;
      }
      kyp[key] = {{"coordinates", km->coordinates},
                  {"D", matrix_to_json(km->D)},
                  {"G", matrix_to_json(km->G)}};
    };
    put("positivity", c.kyp_positivity);
    put("decrease", c.kyp_decrease);
    doc["kyp"] = kyp;
  }
  return doc;
}

inline Certificate certificate_from_json(const json& doc) {
  using detail::schema_error;
  if (!doc.is_object()) schema_error("", "expected a JSON object");
  const int version = detail::as_int(detail::require(doc, "", "schema_version"), "/schema_version", 1);
  if (version != kSchemaVersion)
    schema_error("/schema_version", "unsupported version " + std::to_string(version));
  Certificate c;
  const json& method = detail::require(doc, "", "method");
  if (method == "theorem1") {
    c.method = Method::kTheorem1;
  } else if (method == "theorem2") {
    c.method = Method::kTheorem2;
  } else {
    schema_error("/method", "expected \"theorem1\" or \"theorem2\"");
  }
  c.l = detail::as_int(detail::require(doc, "", "l"), "/l", 1);
  c.epsilon = detail::as_number(detail::require(doc, "", "epsilon"), "/epsilon");
  const json& L = detail::require(doc, "", "L");
  if (!L.is_array() || static_cast<int>(L.size()) != c.l)
    schema_error("/L", "expected l = " + std::to_string(c.l) + " matrices");
  for (std::size_t j = 0; j < L.size(); ++j) {
    Eigen::MatrixXd Lj = matrix_from_json(L[j], "/L/" + std::to_string(j));
    if (Lj.rows() != Lj.cols()) schema_error("/L/" + std::to_string(j), "must be square");
    c.L.push_back(Lj);
  }
  const json& tau = detail::require(doc, "", "tau");
  if (!tau.is_array()) schema_error("/tau", "expected an array");
  c.tau.resize(static_cast<int>(tau.size()));
  for (std::size_t k = 0; k < tau.size(); ++k)
    c.tau[static_cast<int>(k)] = detail::as_number(tau[k], "/tau/" + std::to_string(k));
  if (doc.contains("achieved_margin") && doc["achieved_margin"].is_number())
    c.achieved_margin = doc["achieved_margin"].get<double>();
  if (doc.contains("normalization")) c.normalization = doc["normalization"].get<std::vector<double>>();
  if (doc.contains("lambdas")) c.lambdas = doc["lambdas"].get<std::vector<double>>();
  if (c.method == Method::kTheorem2 && doc.contains("kyp")) {
    const json& kyp = doc["kyp"];
    c.lambda_min = detail::as_number(detail::require(kyp, "/kyp", "lambda_min"), "/kyp/lambda_min");
    c.lambda_max = detail::as_number(detail::require(kyp, "/kyp", "lambda_max"), "/kyp/lambda_max");
    auto get = [&](const char* key) -> std::optional<KypMultipliers> {
      if (!kyp.contains(key) || kyp[key].is_null()) return std::nullopt;
      const std::string p = std::string("/kyp/") + key;
      const json& v = kyp[key];
      KypMultipliers km;
      km.coordinates = detail::require(v, p, "coordinates").get<std::vector<int>>();
      km.D = matrix_from_json(detail::require(v, p, "D"), p + "/D");
      km.G = matrix_from_json(detail::require(v, p, "G"), p + "/G");
      return km;
    };
    c.kyp_positivity = get("positivity");
    c.kyp_decrease = get("decrease");
  }
  return c;
}

}  // namespace polyconsensus
