#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddm/sequence_model.hpp"

namespace ddm {

struct OracleResult {
  Index i_star = 1;
  double rate_sq = 0.0;
  double variance_term = 0.0;
  double bias_term = 0.0;
};

struct SurrogateOracleResult {
  Index i_bar = 1;
  double surr_rate_sq = 0.0;
  double sigma_sum = 0.0;
};

struct EbrMembership {
  bool member = true;
  double ratio = 0.0;
  double tau = 0.0;
  Index i_bar = 1;
};

// r^2(I, theta) = Sigma(I) + sum_{i > I} theta_i^2, for I >= 0.
double local_rate_sq(const Signal& signal, const ModelConfig& model, Index I);

OracleResult oracle(const Signal& signal, const ModelConfig& model);
SurrogateOracleResult surrogate_oracle(const Signal& signal,
                                       const ModelConfig& model);
EbrMembership ebr_check(const Signal& signal, const ModelConfig& model,
                        double tau);

bool pt_check(const Signal& signal, double L0, Index N0, double rho0);
double pt_to_ebr_tau(double L0, Index N0, double rho0, double p);

struct SigmaConstants {
  double K1 = 0.0;
  double K2 = 0.0;
  double K3 = 0.0;
  double K4 = 0.0;
  double tau = 0.0;
  double K5 = 0.0;
};

SigmaConstants sigma_constants(double p, double rho, double gamma, double tau0);

struct SigmaViolation {
  std::string condition;
  Index n = 0;
  double parameter = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct SigmaReport {
  double p = 0.0;
  Index n_max = 0;
  std::vector<double> rho_grid;
  std::vector<double> gamma_grid;
  std::vector<double> tau0_grid;
  std::size_t checks = 0;
  std::vector<SigmaViolation> violations;

  bool ok() const { return violations.empty(); }
};

// Scans conditions (i)-(v) for n <= n_max over small grids of rho, gamma and
// tau0. Only the shape of sigma_i matters, so the noise level is irrelevant.
SigmaReport verify_sigma_conditions(const ModelConfig& model, Index n_max);
SigmaReport verify_sigma_conditions(double p, Index n_max,
                                    std::vector<double> rho_grid,
                                    std::vector<double> gamma_grid,
                                    std::vector<double> tau0_grid);

enum class ClassKind { Ellipsoid, Hyperrectangle };

std::string to_string(ClassKind kind);

// Ellipsoid sum a_i^{-2} theta_i^2 <= 1 or hyperrectangle |theta_i| <= a_i.
struct SmoothnessClass {
  ClassKind kind = ClassKind::Ellipsoid;
  Vector a;
  std::string label;
};

SmoothnessClass sobolev_ellipsoid(double beta, double Q, Index n);
SmoothnessClass sobolev_hyperrectangle(double beta, double Q, Index n);
SmoothnessClass analytic_ellipsoid(double c, double d, double Q, Index n);
SmoothnessClass parametric_hyperrectangle(Index N0, double Q, Index n);

bool contains(const SmoothnessClass& cls, const Signal& signal,
              double rel_tol = 1e-12);

struct MinimaxRate {
  Index i_star = 1;
  double rate_sq = 0.0;
};

MinimaxRate minimax_rate(const SmoothnessClass& cls, const ModelConfig& model);

// Upper constant for sup r^2 / R^2 over the class.
double local_global_constant(ClassKind kind);

struct CoversReport {
  Index n_samples = 0;
  double minimax_rate_sq = 0.0;
  double worst_ratio = 0.0;
  double bound = 0.0;
  bool within_bound = true;
  // Linear-estimator covering: min over trials of R^2_lin / (r^2(N_lambda)/4).
  double worst_linear_margin = 0.0;
  bool linear_ok = true;

  bool ok() const { return within_bound && linear_ok; }
};

CoversReport covers_check(const SmoothnessClass& cls, const ModelConfig& model,
                          Index n_samples, std::uint64_t seed);

// R^2_lin(lambda, theta) = sum sigma_i^2 lambda_i^2 + (1 - lambda_i)^2 theta_i^2.
double linear_risk(const Vector& lambda, const Signal& signal,
                   const ModelConfig& model);

// Checks R^2_lin(lambda, theta) >= r^2(N_lambda, theta) / 4 and returns the
// ratio of the two sides (>= 1 when the inequality holds).
double linear_cover_margin(const Vector& lambda, const Signal& signal,
                           const ModelConfig& model);

}  // namespace ddm
