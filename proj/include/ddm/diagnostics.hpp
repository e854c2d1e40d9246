#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ddm/credible_sets.hpp"
#include "ddm/oracle_rates.hpp"

namespace ddm {

enum class ConditionKind { Phi1, Psi, Phi2 };
enum class CenterRule { DefaultCenter, PosteriorMean, TrueParameter };
enum class PsiScaling { OracleRate, SigmaSum };

std::string to_string(ConditionKind k);
std::string to_string(CenterRule r);
std::string to_string(PsiScaling s);
CenterRule center_rule_from_string(const std::string& name);
PsiScaling psi_scaling_from_string(const std::string& name);

struct ConditionEstimate {
  ConditionKind kind = ConditionKind::Phi1;
  double argument = 0.0;
  double value = 0.0;
  double std_error = 0.0;
  Index reps = 0;
  Index inner_mc = 0;
  std::uint64_t seed = 0;
  CenterRule center = CenterRule::DefaultCenter;
  // False when a small-ball radius lies outside the range where the theorem
  // is stated. The estimate is still computed.
  bool within_range = true;
};

struct DiagnosticOptions {
  CenterRule center = CenterRule::DefaultCenter;
  Variant variant = Variant::Mixture;
  Index fixed_component = 0;  // > 0 replaces the weights by a point mass here
  Index reps = 500;
  Index inner_mc = 2000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

// All grid points share the simulated data and draws of each replication, so
// the estimates are exactly monotone along the grid.
std::vector<ConditionEstimate> estimate_phi1(const std::vector<double>& M_grid,
                                             const ModelConfig& model,
                                             const Signal& signal,
                                             const DdmParams& params,
                                             const DiagnosticOptions& opt);

std::vector<ConditionEstimate> estimate_psi(const std::vector<double>& delta_grid,
                                            const ModelConfig& model,
                                            const Signal& signal,
                                            const DdmParams& params,
                                            PsiScaling scaling,
                                            const DiagnosticOptions& opt);

std::vector<ConditionEstimate> estimate_phi2(const std::vector<double>& M_grid,
                                             const ModelConfig& model,
                                             const Signal& signal,
                                             const DdmParams& params,
                                             const DiagnosticOptions& opt);

ConditionEstimate estimate_phi1(double M, const ModelConfig& model,
                                const Signal& signal, const DdmParams& params,
                                const DiagnosticOptions& opt);
ConditionEstimate estimate_psi(double delta, const ModelConfig& model,
                               const Signal& signal, const DdmParams& params,
                               PsiScaling scaling, const DiagnosticOptions& opt);
ConditionEstimate estimate_phi2(double M, const ModelConfig& model,
                                const Signal& signal, const DdmParams& params,
                                const DiagnosticOptions& opt);

struct BoundInputs {
  double phi1_at_M = 0.0;
  double psi_at_delta = 0.0;
  double phi2_at_M_delta = 0.0;
  double psi2_at_delta_M = 0.0;
  double alpha_at_delta = 0.0;
  double M = 1.0;
  double delta = 1.0;
  double kappa = 0.5;
};

struct PropositionBounds {
  double miss = 0.0;   // phi2(M delta) + psi(delta) / (1 - kappa)
  double size = 0.0;   // phi1(M) / kappa
  double minimal = 0.0;  // psi2(delta M) + alpha(delta) / kappa
  double M = 1.0;
  double delta = 1.0;
  double kappa = 0.5;
};

PropositionBounds proposition_bounds(const BoundInputs& in);

struct TransferredConditions {
  double phi1 = 0.0;
  double phi2 = 0.0;
};

// Conditions for the default ball (p = 2/3, varsigma = 1/2) from a
// contraction bound phi around the truth:
// phi1(M) = 1.5 phi(M/5) + phi(M/2), phi2(M) = 1.5 phi(2M/5).
TransferredConditions transfer_conditions(const std::function<double(double)>& phi,
                                          double M);

struct OversmoothingEstimate {
  double kappa_frac = 0.0;
  Index i_bar = 1;
  Index cutoff = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  Index reps = 0;
  std::uint64_t seed = 0;

  bool within_bound() const { return estimate <= bound + 3.0 * std_error; }
};

// Average over datasets of the posterior mass on I <= floor(kappa_frac * I_bar).
OversmoothingEstimate oversmoothing_probability(const ModelConfig& model,
                                                const Signal& signal,
                                                const DdmParams& params,
                                                double kappa_frac, Index reps,
                                                std::uint64_t seed,
                                                unsigned threads = 0);

struct BallVolume {
  double bound = 0.0;
  double exact = 0.0;
  double log_bound = 0.0;
  double log_exact = 0.0;

  bool holds() const { return log_bound >= log_exact; }
};

BallVolume ball_volume_bound(Index k, double r);

// Contraction constant from the upper-bound proof. Reported, never asserted.
double c_or_reference(double p, const DdmParams& params);

}  // namespace ddm
