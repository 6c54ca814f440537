#pragma once

/// \file models.hpp
/// The two coupled-oscillator examples: Van der Pol rings and Lorenz rings,
/// both diffusively coupled over a unit-weight cycle with the gain folded into
/// the coupling field.

#include <string>
#include <vector>

#include "polyconsensus/dynamics.hpp"
#include "polyconsensus/pattern.hpp"

namespace polyconsensus {

enum class VanDerPolVariant {
  kBilinear,   // y' = mu (1 - x) y - x
  kClassical,  // y' = mu (1 - x^2) y - x
};

struct VanDerPolParams {
  double mu = 0.5;
  int N = 10;
  double c = 15.0;
  int l = 6;
  VanDerPolVariant variant = VanDerPolVariant::kBilinear;
};

struct LorenzParams {
  double sigma = 10.0;
  double rho = 28.0;
  double beta = 8.0 / 3.0;
  int N = 8;
  double c = 50.0;
  int l = 6;
};

struct ExampleTerms {
  int n = 0;
  int N = 0;
  std::vector<Term> agent;
  std::vector<Term> coupling;
};

inline ExampleTerms van_der_pol_terms(const VanDerPolParams& p) {
  ExampleTerms t;
  t.n = 2;
  t.N = p.N;
  t.agent = {
      {1, 1.0, {0, 1}},
      {2, -1.0, {1, 0}},
      {2, p.mu, {0, 1}},
  };
  if (p.variant == VanDerPolVariant::kBilinear) {
    t.agent.push_back({2, -p.mu, {1, 1}});
  } else {
    t.agent.push_back({2, -p.mu, {2, 1}});
  }
  // -c r_i with r = (P kron [0 0; 1 1]) x.
  t.coupling = {{2, -p.c, {1, 0}}, {2, -p.c, {0, 1}}};
  return t;
}

inline ExampleTerms lorenz_terms(const LorenzParams& p) {
  ExampleTerms t;
  t.n = 3;
  t.N = p.N;
  t.agent = {
      {1, -p.sigma, {1, 0, 0}}, {1, p.sigma, {0, 1, 0}},
      {2, p.rho, {1, 0, 0}},    {2, -1.0, {0, 1, 0}},   {2, -1.0, {1, 0, 1}},
      {3, 1.0, {1, 1, 0}},      {3, -p.beta, {0, 0, 1}},
  };
  t.coupling = {{1, -p.c, {1, 0, 0}}, {2, -p.c, {0, 1, 0}}, {3, -p.c, {0, 0, 1}}};
  return t;
}

inline FormationModel van_der_pol_model(const VanDerPolParams& p = {}) {
  const ExampleTerms t = van_der_pol_terms(p);
  return make_model(t.n, t.agent, t.coupling, cycle_laplacian(p.N, 1.0));
}

inline FormationModel lorenz_model(const LorenzParams& p = {}) {
  const ExampleTerms t = lorenz_terms(p);
  return make_model(t.n, t.agent, t.coupling, cycle_laplacian(p.N, 1.0));
}

}  // namespace polyconsensus
