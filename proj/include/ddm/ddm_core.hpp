#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddm/sequence_model.hpp"

namespace ddm {

// Prior lambda_I = C_alpha e^{-alpha I} on the truncation index and component
// variance factor L = K / (K + 1).
struct DdmParams {
  double K = 2.0;
  double alpha = 0.04;

  double L() const { return K / (K + 1.0); }
  double c_alpha() const;
  double log_prior(Index I) const;
  double a_K() const;
  double penalty() const;
  double kappa0() const;
  double delta_sb(double p) const;
};

DdmParams make_params(double K, double alpha);

struct ParamDiagnostics {
  double K = 0.0;
  double alpha = 0.0;
  double a_K = 0.0;
  bool upper_regime = false;
  bool lower_regime = false;
  double penalty = 0.0;
  double delta_sb = 0.0;
  double kappa0 = 0.0;
};

ParamDiagnostics validate_params(double K, double alpha, double p = 0.0);

// Normalized posterior probabilities over I = 1..i_max, stored as logs.
class MixtureWeights {
 public:
  MixtureWeights() = default;
  // Normalizes the given unnormalized log weights.
  explicit MixtureWeights(const Vector& log_unnormalized);

  Index i_max() const { return log_w_.size(); }
  const Vector& log_weights() const { return log_w_; }
  double log_weight(Index I) const { return log_w_(I - 1); }
  double weight(Index I) const { return w_(I - 1); }
  const Vector& weights() const { return w_; }
  // tail()(i - 1) = sum_{I >= i} w_I.
  const Vector& tail() const { return tail_; }

  static MixtureWeights degenerate(Index I, Index i_max);

 private:
  Vector log_w_;
  Vector w_;
  Vector tail_;
};

// i_max = 0 means the data length.
MixtureWeights mixture_weights(const ObservedData& data,
                               const DdmParams& params, Index i_max = 0);

// Log weights over I = 1..i_max up to a common shift (the largest is zero).
Vector mixture_log_weights_unnormalized(const ObservedData& data,
                                        const DdmParams& params, Index i_max);

Index eb_index(const MixtureWeights& weights);

double crit(const ObservedData& data, const DdmParams& params, Index I);
Index crit_argmin(const ObservedData& data, const DdmParams& params,
                  Index i_max = 0);

Vector posterior_mean(const ObservedData& data, const MixtureWeights& weights);

enum class Variant { Mixture, EbIndex, FullBayesShrunk };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

class DdmPosterior {
 public:
  DdmPosterior(ObservedData data, DdmParams params, MixtureWeights weights,
               Variant variant);

  const ObservedData& data() const { return data_; }
  const DdmParams& params() const { return params_; }
  const MixtureWeights& weights() const { return weights_; }
  Variant variant() const { return variant_; }
  Index i_max() const { return weights_.i_max(); }

  // Component I has coordinates i <= I distributed N(shrink X_i, L sigma_i^2).
  double shrink() const {
    return variant_ == Variant::FullBayesShrunk ? params_.L() : 1.0;
  }
  Vector component_mean(Index I) const;
  Vector mean() const;
  Index eb_index() const { return ddm::eb_index(weights_); }

 private:
  ObservedData data_;
  DdmParams params_;
  MixtureWeights weights_;
  Variant variant_;
};

DdmPosterior make_posterior(const ObservedData& data, const DdmParams& params,
                            Variant variant = Variant::Mixture,
                            Index i_max = 0);

MixtureWeights shrunk_full_bayes_weights(const ObservedData& data,
                                         const DdmParams& params,
                                         Index i_max = 0);
DdmPosterior shrunk_full_bayes(const ObservedData& data,
                               const DdmParams& params, Index i_max = 0);

struct PosteriorDraw {
  Index component = 1;
  Vector theta;
};

std::vector<PosteriorDraw> sample_posterior(const DdmPosterior& posterior,
                                            Index n_draws, std::uint64_t seed);

// Draws kept in compressed form: component index plus the I standard normals
// that define coordinates 1..I. Distances to a center cost O(I) per draw.
class PosteriorSample {
 public:
  PosteriorSample(const DdmPosterior& posterior, Index n_draws,
                  std::uint64_t seed);

  Index size() const { return static_cast<Index>(components_.size()); }
  Index component(Index k) const { return components_[k]; }
  Vector draw(Index k) const;

  // ||theta_k - c||^2 where center_tail(I) = sum_{i > I} c_i^2.
  double distance_sq(Index k, const Vector& center,
                     const Vector& center_tail) const;
  // All distances (not squared) to a center.
  std::vector<double> distances(const Vector& center) const;

 private:
  Vector mean_;
  Vector scale_;
  std::vector<Index> components_;
  std::vector<std::size_t> offsets_;
  std::vector<double> normals_;
};

}  // namespace ddm
