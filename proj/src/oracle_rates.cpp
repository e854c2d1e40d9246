#include "ddm/oracle_rates.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ddm {

namespace {

constexpr double kRelTol = 1e-12;

bool leq(double lhs, double rhs) {
  return lhs <= rhs + kRelTol * std::max(std::abs(lhs), std::abs(rhs));
}

void check_length(const Signal& signal, const ModelConfig& model) {
  if (signal.size() > model.n_trunc())
    throw std::invalid_argument("signal is longer than n_trunc");
}

}  // namespace

double local_rate_sq(const Signal& signal, const ModelConfig& model, Index I) {
  if (I < 0 || I > model.n_trunc())
    throw std::out_of_range("index outside [0, n_trunc]");
  return model.sigma_sum(I) + signal.tail_energy(I);
}

OracleResult oracle(const Signal& signal, const ModelConfig& model) {
  check_length(signal, model);
  OracleResult best;
  best.rate_sq = std::numeric_limits<double>::infinity();
  for (Index I = 1; I <= model.n_trunc(); ++I) {
    const double v = model.sigma_sum(I);
    const double b = signal.tail_energy(I);
    if (v + b < best.rate_sq) best = {I, v + b, v, b};
  }
  return best;
}

SurrogateOracleResult surrogate_oracle(const Signal& signal,
                                       const ModelConfig& model) {
  check_length(signal, model);
  const Index n = model.n_trunc();
  const double eps2 = model.epsilon() * model.epsilon();
  Vector scaled = Vector::Zero(n);
  for (Index i = 0; i < signal.size(); ++i) {
    const double k = model.kappa(i + 1);
    scaled(i) = signal.coeffs()(i) * signal.coeffs()(i) / (k * k);
  }
  const Vector tail = tail_sums(scaled);
  SurrogateOracleResult best;
  best.surr_rate_sq = std::numeric_limits<double>::infinity();
  for (Index I = 1; I <= n; ++I) {
    const double R = static_cast<double>(I) * eps2 + tail(I);
    if (R < best.surr_rate_sq) best = {I, R, model.sigma_sum(I)};
  }
  return best;
}

EbrMembership ebr_check(const Signal& signal, const ModelConfig& model,
                        double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  const auto s = surrogate_oracle(signal, model);
  EbrMembership out;
  out.i_bar = s.i_bar;
  out.tau = tau;
  out.ratio = signal.tail_energy(s.i_bar) / s.sigma_sum;
  out.member = out.ratio <= tau;
  return out;
}

bool pt_check(const Signal& signal, double L0, Index N0, double rho0) {
  if (!(L0 >= 1.0)) throw std::invalid_argument("L0 must be at least 1");
  if (N0 < 1) throw std::invalid_argument("N0 must be at least 1");
  if (!(rho0 >= 2.0)) throw std::invalid_argument("rho0 must be at least 2");
  const Index n = signal.size();
  for (Index N = N0; N <= n; ++N) {
    const double tail = signal.tail_energy(N - 1);
    const Index hi = std::min<Index>(
        n, static_cast<Index>(std::floor(rho0 * static_cast<double>(N))));
    const double window = tail - signal.tail_energy(hi);
    if (!leq(tail, L0 * window)) return false;
  }
  return true;
}

SigmaConstants sigma_constants(double p, double rho, double gamma,
                               double tau0) {
  if (!(p >= 0.0)) throw std::invalid_argument("p must be nonnegative");
  if (!(rho >= 1.0) || !(tau0 >= 1.0))
    throw std::invalid_argument("rho and tau0 must be at least 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  const double e = std::numbers::e;
  SigmaConstants k;
  k.K1 = 2.0 * p + 1.0;
  k.K2 = std::pow(rho + 1.0, 2.0 * p + 1.0);
  k.K3 = 4.0 * std::pow(8.0 * p + 4.0, 2.0 * p) /
         (std::pow(e * gamma, 2.0 * p + 1.0) * std::expm1(gamma / 2.0));
  k.K4 = 0.5;
  k.tau = std::pow(2.0, 1.0 + 1.0 / (2.0 * p + 1.0));
  k.K5 = std::pow(2.0 * tau0, -2.0 * p);
  return k;
}

double pt_to_ebr_tau(double L0, Index N0, double rho0, double p) {
  if (!(L0 >= 1.0) || N0 < 1 || !(rho0 >= 2.0))
    throw std::invalid_argument("PT parameters out of range");
  const auto k = sigma_constants(p, rho0 * static_cast<double>(N0), 1.0, 1.0);
  return L0 * k.K1 * k.K2;
}

SigmaReport verify_sigma_conditions(const ModelConfig& model, Index n_max) {
  const double tau = sigma_constants(model.p(), 1.0, 1.0, 1.0).tau;
  return verify_sigma_conditions(model.p(), n_max, {1.0, 2.0, 3.5},
                                 {0.002, 0.1, 1.0}, {1.5, 2.0, 3.5, tau});
}

SigmaReport verify_sigma_conditions(double p, Index n_max,
                                    std::vector<double> rho_grid,
                                    std::vector<double> gamma_grid,
                                    std::vector<double> tau0_grid) {
  if (n_max < 1) throw std::invalid_argument("n_max must be at least 1");
  SigmaReport rep;
  rep.p = p;
  rep.n_max = n_max;
  rep.rho_grid = rho_grid;
  rep.gamma_grid = gamma_grid;
  rep.tau0_grid = tau0_grid;

  double rho_max = 1.0;
  for (double r : rho_grid) rho_max = std::max(rho_max, r);
  const Index len = static_cast<Index>(std::ceil(rho_max * double(n_max))) + 1;
  // sigma_i^2 up to scale; the conditions are homogeneous in epsilon.
  Vector var(len);
  for (Index i = 1; i <= len; ++i) var(i - 1) = std::pow(double(i), 2.0 * p);
  const Vector S = prefix_sums(var);

  auto record = [&](const char* cond, Index n, double prm, double lhs,
                    double rhs) {
    ++rep.checks;
    if (!leq(lhs, rhs)) rep.violations.push_back({cond, n, prm, lhs, rhs});
  };

  const auto base = sigma_constants(p, 1.0, 1.0, 1.0);
  for (Index n = 1; n <= n_max; ++n)
    record("i", n, 0.0, double(n) * var(n - 1), base.K1 * S(n));

  for (double rho : rho_grid) {
    const double K2 = sigma_constants(p, rho, 1.0, 1.0).K2;
    for (Index n = 1; n <= n_max; ++n) {
      const Index m = static_cast<Index>(std::floor(rho * double(n)));
      record("ii", n, rho, S(m), K2 * S(n));
    }
  }

  for (double gamma : gamma_grid) {
    const double K3 = sigma_constants(p, 1.0, gamma, 1.0).K3;
    // Series summed to convergence, well past n_max when gamma is small.
    double sum = 0.0, partial = 0.0;
    const double peak = (2.0 * p + 1.0) / gamma;
    for (Index n = 1;; ++n) {
      partial += std::pow(double(n), 2.0 * p);
      const double term = std::exp(-gamma * double(n)) * partial;
      sum += term;
      if (double(n) > peak && term < 1e-17 * sum) break;
    }
    record("iii", 0, gamma, sum, K3 * var(0));
  }

  {
    const double tau = base.tau;
    const double K4 = base.K4;
    for (Index m = static_cast<Index>(std::ceil(tau)); m <= n_max; ++m) {
      const Index lo = static_cast<Index>(std::floor(double(m) / tau));
      record("iv", m, tau, S(lo), (1.0 - K4) * S(m));
    }
  }

  for (double tau0 : tau0_grid) {
    const double K5 = sigma_constants(p, 1.0, 1.0, tau0).K5;
    for (Index l = static_cast<Index>(std::ceil(tau0)); l <= n_max; ++l) {
      const Index lo = static_cast<Index>(std::floor(double(l) / tau0));
      record("v", l, tau0, K5 * (S(l) - S(lo)), double(l) * var(lo - 1));
    }
  }
  return rep;
}

std::string to_string(ClassKind kind) {
  return kind == ClassKind::Ellipsoid ? "ellipsoid" : "hyperrectangle";
}

SmoothnessClass sobolev_ellipsoid(double beta, double Q, Index n) {
  SmoothnessClass c{ClassKind::Ellipsoid, Vector(n), "sobolev-ellipsoid"};
  for (Index i = 1; i <= n; ++i) c.a(i - 1) = std::sqrt(Q) * std::pow(double(i), -beta);
  return c;
}

SmoothnessClass sobolev_hyperrectangle(double beta, double Q, Index n) {
  SmoothnessClass c{ClassKind::Hyperrectangle, Vector(n), "sobolev-hyperrectangle"};
  for (Index i = 1; i <= n; ++i)
    c.a(i - 1) = std::sqrt(Q) * std::pow(double(i), -(beta + 0.5));
  return c;
}

SmoothnessClass analytic_ellipsoid(double c_, double d, double Q, Index n) {
  SmoothnessClass c{ClassKind::Ellipsoid, Vector(n), "analytic-ellipsoid"};
  for (Index i = 1; i <= n; ++i)
    c.a(i - 1) = std::sqrt(Q * std::exp(-c_ * std::pow(double(i), d)));
  return c;
}

SmoothnessClass parametric_hyperrectangle(Index N0, double Q, Index n) {
  if (N0 < 1 || N0 > n) throw std::invalid_argument("N0 must lie in [1, n]");
  SmoothnessClass c{ClassKind::Hyperrectangle, Vector::Zero(n),
                    "parametric-hyperrectangle"};
  c.a.head(N0).setConstant(std::sqrt(Q));
  return c;
}

bool contains(const SmoothnessClass& cls, const Signal& signal,
              double rel_tol) {
  const Vector& th = signal.coeffs();
  auto a_at = [&](Index i) { return i < cls.a.size() ? cls.a(i) : 0.0; };
  if (cls.kind == ClassKind::Hyperrectangle) {
    for (Index i = 0; i < th.size(); ++i)
      if (std::abs(th(i)) > a_at(i) * (1.0 + rel_tol)) return false;
    return true;
  }
  double s = 0.0;
  for (Index i = 0; i < th.size(); ++i) {
    if (th(i) == 0.0) continue;
    if (a_at(i) == 0.0) return false;
    s += th(i) * th(i) / (a_at(i) * a_at(i));
  }
  return s <= 1.0 + rel_tol;
}

namespace {

void check_class(const SmoothnessClass& cls, const ModelConfig& model) {
  if (cls.a.size() == 0) throw std::invalid_argument("empty class sequence");
  for (Index i = 0; i < cls.a.size(); ++i) {
    if (!(cls.a(i) >= 0.0)) throw std::invalid_argument("a must be nonnegative");
    if (i > 0 && cls.a(i) > cls.a(i - 1))
      throw std::invalid_argument("a must be nonincreasing");
  }
  if (cls.a(0) < model.epsilon())
    throw std::invalid_argument("a_1 must be at least epsilon");
}

}  // namespace

MinimaxRate minimax_rate(const SmoothnessClass& cls, const ModelConfig& model) {
  check_class(cls, model);
  const Index n = model.n_trunc();
  Vector a2 = Vector::Zero(n + 1);
  const Index m = std::min(n, cls.a.size());
  a2.head(m) = cls.a.head(m).array().square();
  const Vector tail = tail_sums(a2.head(n));
  MinimaxRate best;
  best.rate_sq = std::numeric_limits<double>::infinity();
  for (Index I = 1; I <= n; ++I) {
    const double bias = cls.kind == ClassKind::Ellipsoid ? a2(I) : tail(I);
    const double r = model.sigma_sum(I) + bias;
    if (r < best.rate_sq) best = {I, r};
  }
  return best;
}

double local_global_constant(ClassKind kind) {
  return kind == ClassKind::Ellipsoid
             ? 4.0 * std::numbers::pi * std::numbers::pi
             : 2.5;
}

double linear_risk(const Vector& lambda, const Signal& signal,
                   const ModelConfig& model) {
  double r = 0.0;
  for (Index i = 0; i < model.n_trunc(); ++i) {
    const double l = i < lambda.size() ? lambda(i) : 0.0;
    const double th = i < signal.size() ? signal.coeffs()(i) : 0.0;
    r += model.variance(i + 1) * l * l + (1.0 - l) * (1.0 - l) * th * th;
  }
  return r;
}

double linear_cover_margin(const Vector& lambda, const Signal& signal,
                           const ModelConfig& model) {
  Index n_lambda = 0;
  for (Index i = 0; i < lambda.size(); ++i)
    if (lambda(i) >= 0.5) n_lambda = i + 1;
  n_lambda = std::min(n_lambda, model.n_trunc());
  const double rhs = local_rate_sq(signal, model, n_lambda) / 4.0;
  const double lhs = linear_risk(lambda, signal, model);
  if (rhs == 0.0) return std::numeric_limits<double>::infinity();
  return lhs / rhs;
}

namespace {

Signal sample_boundary_signal(const SmoothnessClass& cls, Index n, Index s,
                              Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  Vector a = Vector::Zero(n);
  const Index m = std::min(n, cls.a.size());
  a.head(m) = cls.a.head(m);
  Index support = 0;
  while (support < n && a(support) > 0.0) ++support;
  support = std::max<Index>(support, 1);
  // Log-uniform index in [1, support], which favours the low frequencies that
  // drive the oracle rate.
  auto random_index = [&]() {
    const double u = unif(rng);
    Index j = static_cast<Index>(std::floor(std::exp(u * std::log(double(support) + 1.0))));
    return std::clamp<Index>(j, 1, support);
  };
  auto sign = [&]() { return unif(rng) < 0.5 ? -1.0 : 1.0; };

  Vector th = Vector::Zero(n);
  if (cls.kind == ClassKind::Hyperrectangle) {
    switch (s % 3) {
      case 0:
        for (Index i = 0; i < n; ++i) th(i) = sign() * a(i);
        break;
      case 1:
        for (Index i = 0; i < n; ++i) th(i) = (2.0 * unif(rng) - 1.0) * a(i);
        break;
      default: {
        const Index j = random_index();
        for (Index i = 0; i < j; ++i) th(i) = sign() * a(i);
      }
    }
    return Signal(std::move(th));
  }
  switch (s % 3) {
    case 0: {
      const Index j = random_index();
      th(j - 1) = sign() * a(j - 1);
      break;
    }
    case 1: {
      Vector w(support);
      for (Index i = 0; i < support; ++i) w(i) = expo(rng);
      w /= w.sum();
      for (Index i = 0; i < support; ++i) th(i) = sign() * a(i) * std::sqrt(w(i));
      break;
    }
    default: {
      const Index lo = random_index();
      const Index hi = std::min<Index>(support, 2 * lo);
      Vector w(hi - lo + 1);
      for (Index i = 0; i < w.size(); ++i) w(i) = expo(rng);
      w /= w.sum();
      for (Index i = 0; i < w.size(); ++i)
        th(lo - 1 + i) = sign() * a(lo - 1 + i) * std::sqrt(w(i));
    }
  }
  return Signal(std::move(th));
}

Vector sample_monotone_lambda(Index n, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector lam(n);
  if (unif(rng) < 0.5) {
    for (Index i = 0; i < n; ++i) lam(i) = unif(rng);
    std::sort(lam.data(), lam.data() + n, std::greater<double>());
  } else {
    const Index k = static_cast<Index>(unif(rng) * double(n));
    const double mid = unif(rng);
    for (Index i = 0; i < n; ++i) lam(i) = i < k ? 1.0 : (i == k ? mid : 0.0);
  }
  return lam;
}

}  // namespace

CoversReport covers_check(const SmoothnessClass& cls, const ModelConfig& model,
                          Index n_samples, std::uint64_t seed) {
  const auto R = minimax_rate(cls, model);
  CoversReport rep;
  rep.n_samples = n_samples;
  rep.minimax_rate_sq = R.rate_sq;
  rep.bound = local_global_constant(cls.kind);
  rep.worst_linear_margin = std::numeric_limits<double>::infinity();
  const Index n = model.n_trunc();

  // The zero signal is always in the class.
  rep.worst_ratio = oracle(Signal(Vector::Zero(n)), model).rate_sq / R.rate_sq;
  for (Index s = 0; s < n_samples; ++s) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
    const Signal th = sample_boundary_signal(cls, n, s, rng);
    rep.worst_ratio = std::max(rep.worst_ratio, oracle(th, model).rate_sq / R.rate_sq);
    const Vector lam = sample_monotone_lambda(n, rng);
    rep.worst_linear_margin =
        std::min(rep.worst_linear_margin, linear_cover_margin(lam, th, model));
  }
  rep.within_bound = rep.worst_ratio <= rep.bound;
  rep.linear_ok = rep.worst_linear_margin >= 1.0 - kRelTol;
  return rep;
}

}  // namespace ddm
