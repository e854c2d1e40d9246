#include "ddm/sequence_model.hpp"

#include <cmath>
#include <stdexcept>

#include "ddm/oracle_rates.hpp"

namespace ddm {

ModelConfig::ModelConfig(double epsilon, double p, Index n_trunc)
    : epsilon_(epsilon), p_(p), n_trunc_(n_trunc) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw std::invalid_argument("epsilon must be positive and finite");
  if (!(p >= 0.0) || !std::isfinite(p))
    throw std::invalid_argument("p must be nonnegative and finite");
  if (n_trunc < 1) throw std::invalid_argument("n_trunc must be at least 1");
  sigma_sum_ = prefix_sums(variances());
}

double ModelConfig::kappa(Index i) const {
  return p_ == 0.0 ? 1.0 : std::pow(static_cast<double>(i), p_);
}

Vector ModelConfig::sigmas() const {
  Vector s(n_trunc_);
  for (Index i = 0; i < n_trunc_; ++i) s(i) = sigma(i + 1);
  return s;
}

Vector ModelConfig::variances() const { return sigmas().array().square(); }

ModelConfig make_model(double epsilon, double p, Index n_trunc) {
  return ModelConfig(epsilon, p, n_trunc);
}

std::string to_string(SignalKind kind) {
  switch (kind) {
    case SignalKind::Zero: return "zero";
    case SignalKind::SobolevBoundary: return "sobolev-boundary";
    case SignalKind::SobolevRandom: return "sobolev-random";
    case SignalKind::Analytic: return "analytic";
    case SignalKind::Parametric: return "parametric";
    case SignalKind::Deceptive: return "deceptive";
    case SignalKind::Custom: return "custom";
  }
  return "custom";
}

SignalKind signal_kind_from_string(const std::string& name) {
  for (auto k : {SignalKind::Zero, SignalKind::SobolevBoundary,
                 SignalKind::SobolevRandom, SignalKind::Analytic,
                 SignalKind::Parametric, SignalKind::Deceptive,
                 SignalKind::Custom}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown signal kind '" + name + "'");
}

Signal::Signal(Vector coeffs, SignalKind kind, SignalParams params)
    : coeffs_(std::move(coeffs)), kind_(kind), params_(params) {
  if (!coeffs_.allFinite())
    throw std::invalid_argument("signal coefficients must be finite");
  tail_ = tail_sums(coeffs_.array().square());
}

Signal Signal::resized(Index n) const {
  Vector c = Vector::Zero(n);
  Index m = std::min(n, size());
  c.head(m) = coeffs_.head(m);
  return Signal(std::move(c), kind_, params_);
}

namespace {

void check_params(SignalKind kind, const SignalParams& prm, Index n) {
  if (n < 1) throw std::invalid_argument("n_trunc must be at least 1");
  auto need = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  switch (kind) {
    case SignalKind::SobolevBoundary:
    case SignalKind::SobolevRandom:
      need(prm.Q > 0.0, "Q must be positive");
      need(prm.beta > 0.0, "beta must be positive");
      break;
    case SignalKind::Analytic:
      need(prm.Q > 0.0, "Q must be positive");
      need(prm.c > 0.0 && prm.d > 0.0, "c and d must be positive");
      break;
    case SignalKind::Parametric:
      need(prm.Q > 0.0, "Q must be positive");
      need(prm.N0 >= 1 && prm.N0 <= n, "N0 must lie in [1, n_trunc]");
      break;
    case SignalKind::Deceptive:
      need(prm.epsilon.has_value() && *prm.epsilon > 0.0,
           "deceptive signal needs a positive epsilon");
      need(prm.p.has_value() && *prm.p >= 0.0,
           "deceptive signal needs a nonnegative p");
      break;
    case SignalKind::Custom:
      throw std::invalid_argument("custom signals are built from coefficients");
    case SignalKind::Zero:
      break;
  }
}

}  // namespace

Signal generate_signal(SignalKind kind, const SignalParams& params,
                       Index n_trunc, std::optional<std::uint64_t> seed) {
  check_params(kind, params, n_trunc);
  Vector theta = Vector::Zero(n_trunc);
  SignalParams prm = params;
  switch (kind) {
    case SignalKind::Zero:
      break;
    case SignalKind::SobolevBoundary:
      for (Index i = 1; i <= n_trunc; ++i)
        theta(i - 1) = std::sqrt(prm.Q) * std::pow(double(i), -(prm.beta + 0.5));
      break;
    case SignalKind::SobolevRandom: {
      Rng rng(seed.value_or(0));
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (Index i = 1; i <= n_trunc; ++i)
        theta(i - 1) =
            u(rng) * std::sqrt(prm.Q) * std::pow(double(i), -(prm.beta + 0.5));
      break;
    }
    case SignalKind::Analytic:
      for (Index i = 1; i <= n_trunc; ++i)
        theta(i - 1) = std::sqrt(prm.Q * std::exp(-prm.c * std::pow(double(i), prm.d)));
      break;
    case SignalKind::Parametric:
      theta.head(prm.N0).setConstant(std::sqrt(prm.Q));
      break;
    case SignalKind::Deceptive: {
      const double eps = *prm.epsilon;
      const double p = *prm.p;
      const double j_real = std::ceil(2.0 / std::pow(eps, 2.0 / (2.0 * p + 1.0)));
      if (!(j_real <= static_cast<double>(n_trunc)))
        throw std::invalid_argument("deceptive spike index exceeds n_trunc");
      const Index j = static_cast<Index>(j_real);
      const double m = 10.0 * eps * eps * std::pow(double(j), 2.0 * p);
      theta(j - 1) = std::sqrt(m);
      prm.spike_index = j;
      prm.spike_mass = m;
      Signal s(theta, kind, prm);
      if (ebr_check(s, make_model(eps, p, n_trunc), 1.0).member)
        throw std::logic_error("deceptive construction passes the EBR check");
      return s;
    }
    case SignalKind::Custom:
      break;
  }
  return Signal(std::move(theta), kind, prm);
}

void standard_normals(std::uint64_t seed, Eigen::Ref<Vector> z) {
  Rng rng(seed);
  std::normal_distribution<double> nd;
  for (Index i = 0; i < z.size(); ++i) z(i) = nd(rng);
}

ObservedData simulate(const ModelConfig& model, const Signal& signal,
                      std::uint64_t seed) {
  const Index n = model.n_trunc();
  if (signal.size() > n)
    throw std::invalid_argument("signal is longer than n_trunc");
  Vector z(n);
  standard_normals(seed, z);
  Vector x(n);
  for (Index i = 0; i < n; ++i) {
    double theta = i < signal.size() ? signal.coeffs()(i) : 0.0;
    x(i) = theta + model.sigma(i + 1) * z(i);
  }
  return ObservedData{std::move(x), model, seed};
}

}  // namespace ddm
