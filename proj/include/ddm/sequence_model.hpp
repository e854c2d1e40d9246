#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ddm/common.hpp"

namespace ddm {

// X_i ~ N(theta_i, sigma_i^2) with sigma_i = epsilon * i^p, i = 1..n_trunc.
class ModelConfig {
 public:
  ModelConfig(double epsilon, double p, Index n_trunc);

  double epsilon() const { return epsilon_; }
  double p() const { return p_; }
  Index n_trunc() const { return n_trunc_; }

  // 1-based coordinate index.
  double kappa(Index i) const;
  double sigma(Index i) const { return epsilon_ * kappa(i); }
  double variance(Index i) const { return sigma(i) * sigma(i); }

  Vector sigmas() const;
  Vector variances() const;
  // cumulative_variance()(I) = Sigma(I) = sum_{i <= I} sigma_i^2, I = 0..n.
  const Vector& cumulative_variance() const { return sigma_sum_; }
  double sigma_sum(Index I) const { return sigma_sum_(I); }

 private:
  double epsilon_;
  double p_;
  Index n_trunc_;
  Vector sigma_sum_;
};

ModelConfig make_model(double epsilon, double p, Index n_trunc);

enum class SignalKind {
  Zero,
  SobolevBoundary,
  SobolevRandom,
  Analytic,
  Parametric,
  Deceptive,
  Custom
};

std::string to_string(SignalKind kind);
SignalKind signal_kind_from_string(const std::string& name);

// Generator parameters. Unused fields are ignored by a given kind. The
// deceptive kind needs epsilon and p of the model it is meant to fool.
struct SignalParams {
  double beta = 1.0;
  double Q = 1.0;
  double c = 1.0;
  double d = 1.0;
  Index N0 = 1;
  std::optional<double> epsilon;
  std::optional<double> p;
  // Filled in by the deceptive generator.
  Index spike_index = 0;
  double spike_mass = 0.0;
};

// Finite coefficient sequence theta_1..theta_N with an exact zero tail.
class Signal {
 public:
  Signal() = default;
  Signal(Vector coeffs, SignalKind kind = SignalKind::Custom,
         SignalParams params = {});

  const Vector& coeffs() const { return coeffs_; }
  Index size() const { return coeffs_.size(); }
  SignalKind kind() const { return kind_; }
  const SignalParams& params() const { return params_; }

  // sum_{i > I} theta_i^2 for I = 0..N; zero for I >= N.
  double tail_energy(Index I) const {
    return I >= size() ? 0.0 : tail_(std::max<Index>(I, 0));
  }
  const Vector& tail_energies() const { return tail_; }

  // Copy padded with zeros (or truncated) to length n.
  Signal resized(Index n) const;

 private:
  Vector coeffs_;
  SignalKind kind_ = SignalKind::Custom;
  SignalParams params_;
  Vector tail_ = Vector::Zero(1);
};

Signal generate_signal(SignalKind kind, const SignalParams& params,
                       Index n_trunc, std::optional<std::uint64_t> seed = {});

struct ObservedData {
  Vector x;
  ModelConfig model;
  std::uint64_t seed = 0;

  Index size() const { return x.size(); }
};

ObservedData simulate(const ModelConfig& model, const Signal& signal,
                      std::uint64_t seed);

// Fills z with iid standard normals from the stream seeded by `seed`.
void standard_normals(std::uint64_t seed, Eigen::Ref<Vector> z);

}  // namespace ddm
