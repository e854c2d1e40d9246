#include "ddm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ddm {

std::string to_string(ConditionKind k) {
  switch (k) {
    case ConditionKind::Phi1: return "phi1";
    case ConditionKind::Psi: return "psi";
    case ConditionKind::Phi2: return "phi2";
  }
  return "phi1";
}

std::string to_string(CenterRule r) {
  switch (r) {
    case CenterRule::DefaultCenter: return "default-center";
    case CenterRule::PosteriorMean: return "posterior-mean";
    case CenterRule::TrueParameter: return "true-parameter";
  }
  return "default-center";
}

std::string to_string(PsiScaling s) {
  return s == PsiScaling::OracleRate ? "oracle-rate" : "sigma-sum-surrogate";
}

CenterRule center_rule_from_string(const std::string& name) {
  for (auto r : {CenterRule::DefaultCenter, CenterRule::PosteriorMean,
                 CenterRule::TrueParameter})
    if (to_string(r) == name) return r;
  throw std::invalid_argument("unknown center rule '" + name + "'");
}

PsiScaling psi_scaling_from_string(const std::string& name) {
  for (auto s : {PsiScaling::OracleRate, PsiScaling::SigmaSum})
    if (to_string(s) == name) return s;
  throw std::invalid_argument("unknown psi scaling '" + name + "'");
}

namespace {

void check_options(const DiagnosticOptions& opt) {
  if (opt.reps < 1) throw std::invalid_argument("reps must be at least 1");
  if (opt.inner_mc < 1) throw std::invalid_argument("inner_mc must be at least 1");
}

DdmPosterior build_posterior(const ObservedData& data, const DdmParams& params,
                             const DiagnosticOptions& opt) {
  if (opt.fixed_component > 0) {
    return DdmPosterior(data, params,
                        MixtureWeights::degenerate(opt.fixed_component, data.size()),
                        opt.variant);
  }
  return make_posterior(data, params, opt.variant);
}

Vector pick_center(const DdmPosterior& post, const Signal& truth,
                   const DiagnosticOptions& opt, std::uint64_t seed) {
  switch (opt.center) {
    case CenterRule::DefaultCenter:
      return default_center(post, 2.0 / 3.0, 0.5, std::max<Index>(opt.inner_mc, 1000), seed)
          .center;
    case CenterRule::PosteriorMean:
      return post.mean();
    case CenterRule::TrueParameter:
      return truth.coeffs();
  }
  return post.mean();
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v, std::size_t stride, std::size_t col) {
  const std::size_t n = v.size() / stride;
  double s = 0.0;
  for (std::size_t r = 0; r < n; ++r) s += v[r * stride + col];
  const double m = s / double(n);
  double ss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double d = v[r * stride + col] - m;
    ss += d * d;
  }
  const double se = n > 1 ? std::sqrt(ss / double(n - 1) / double(n)) : 0.0;
  return {m, se};
}

// Per replication: simulate, build the posterior and center, draw inner_mc
// posterior samples and hand the distances to `fill`, which writes one value
// per grid point.
template <class Fill>
std::vector<double> run_reps(const ModelConfig& model, const Signal& signal,
                             const DdmParams& params, const DiagnosticOptions& opt,
                             std::size_t grid, bool need_draws, Fill&& fill) {
  check_options(opt);
  const Signal truth = signal.resized(model.n_trunc());
  std::vector<double> out(static_cast<std::size_t>(opt.reps) * grid);
  parallel_for(opt.reps, opt.threads, [&](Index r) {
    const std::uint64_t rs = derive_seed(opt.seed, static_cast<std::uint64_t>(r));
    const ObservedData data = simulate(model, truth, derive_seed(rs, 0));
    const DdmPosterior post = build_posterior(data, params, opt);
    const Vector center = pick_center(post, truth, opt, derive_seed(rs, 1));
    std::vector<double> d;
    if (need_draws) d = PosteriorSample(post, opt.inner_mc, derive_seed(rs, 2)).distances(center);
    const double d0 = distance(truth.coeffs(), center);
    fill(d, d0, &out[static_cast<std::size_t>(r) * grid]);
  });
  return out;
}

std::vector<ConditionEstimate> collect(ConditionKind kind,
                                       const std::vector<double>& grid,
                                       const std::vector<double>& per_rep,
                                       const DiagnosticOptions& opt) {
  std::vector<ConditionEstimate> out;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const MeanSe ms = mean_se(per_rep, grid.size(), g);
    ConditionEstimate e;
    e.kind = kind;
    e.argument = grid[g];
    e.value = ms.mean;
    e.std_error = ms.se;
    e.reps = opt.reps;
    e.inner_mc = opt.inner_mc;
    e.seed = opt.seed;
    e.center = opt.center;
    out.push_back(e);
  }
  return out;
}

double fraction(const std::vector<double>& d, auto pred) {
  std::size_t k = 0;
  for (double x : d) k += pred(x) ? 1 : 0;
  return double(k) / double(d.size());
}

void check_grid(const std::vector<double>& grid, bool allow_zero) {
  if (grid.empty()) throw std::invalid_argument("empty grid");
  for (double v : grid)
    if (!(allow_zero ? v >= 0.0 : v > 0.0))
      throw std::invalid_argument("grid values must be positive");
}

}  // namespace

std::vector<ConditionEstimate> estimate_phi1(const std::vector<double>& M_grid,
                                             const ModelConfig& model,
                                             const Signal& signal,
                                             const DdmParams& params,
                                             const DiagnosticOptions& opt) {
  check_grid(M_grid, false);
  const double r = std::sqrt(oracle(signal.resized(model.n_trunc()), model).rate_sq);
  auto per_rep = run_reps(model, signal, params, opt, M_grid.size(), true,
                          [&](const std::vector<double>& d, double, double* row) {
                            for (std::size_t g = 0; g < M_grid.size(); ++g) {
                              const double lim = M_grid[g] * r;
                              row[g] = fraction(d, [&](double x) { return x >= lim; });
                            }
                          });
  return collect(ConditionKind::Phi1, M_grid, per_rep, opt);
}

std::vector<ConditionEstimate> estimate_psi(const std::vector<double>& delta_grid,
                                            const ModelConfig& model,
                                            const Signal& signal,
                                            const DdmParams& params,
                                            PsiScaling scaling,
                                            const DiagnosticOptions& opt) {
  check_grid(delta_grid, true);
  const Signal truth = signal.resized(model.n_trunc());
  const double s = scaling == PsiScaling::OracleRate
                       ? std::sqrt(oracle(truth, model).rate_sq)
                       : std::sqrt(surrogate_oracle(truth, model).sigma_sum);
  auto per_rep = run_reps(model, signal, params, opt, delta_grid.size(), true,
                          [&](const std::vector<double>& d, double, double* row) {
                            for (std::size_t g = 0; g < delta_grid.size(); ++g) {
                              const double lim = delta_grid[g] * s;
                              row[g] = lim > 0.0
                                           ? fraction(d, [&](double x) { return x <= lim; })
                                           : 0.0;
                            }
                          });
  auto out = collect(ConditionKind::Psi, delta_grid, per_rep, opt);
  if (scaling == PsiScaling::SigmaSum) {
    const double dsb = params.delta_sb(model.p());
    for (auto& e : out) e.within_range = e.argument <= dsb;
  }
  return out;
}

std::vector<ConditionEstimate> estimate_phi2(const std::vector<double>& M_grid,
                                             const ModelConfig& model,
                                             const Signal& signal,
                                             const DdmParams& params,
                                             const DiagnosticOptions& opt) {
  check_grid(M_grid, false);
  const double r = std::sqrt(oracle(signal.resized(model.n_trunc()), model).rate_sq);
  auto per_rep = run_reps(model, signal, params, opt, M_grid.size(), false,
                          [&](const std::vector<double>&, double d0, double* row) {
                            for (std::size_t g = 0; g < M_grid.size(); ++g)
                              row[g] = d0 >= M_grid[g] * r ? 1.0 : 0.0;
                          });
  return collect(ConditionKind::Phi2, M_grid, per_rep, opt);
}

ConditionEstimate estimate_phi1(double M, const ModelConfig& model,
                                const Signal& signal, const DdmParams& params,
                                const DiagnosticOptions& opt) {
  return estimate_phi1(std::vector<double>{M}, model, signal, params, opt).front();
}

ConditionEstimate estimate_psi(double delta, const ModelConfig& model,
                               const Signal& signal, const DdmParams& params,
                               PsiScaling scaling, const DiagnosticOptions& opt) {
  return estimate_psi(std::vector<double>{delta}, model, signal, params, scaling, opt)
      .front();
}

ConditionEstimate estimate_phi2(double M, const ModelConfig& model,
                                const Signal& signal, const DdmParams& params,
                                const DiagnosticOptions& opt) {
  return estimate_phi2(std::vector<double>{M}, model, signal, params, opt).front();
}

PropositionBounds proposition_bounds(const BoundInputs& in) {
  for (double v : {in.phi1_at_M, in.psi_at_delta, in.phi2_at_M_delta,
                   in.psi2_at_delta_M, in.alpha_at_delta})
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("condition values must lie in [0, 1]");
  if (!(in.kappa > 0.0 && in.kappa < 1.0))
    throw std::invalid_argument("kappa must lie in (0, 1)");
  PropositionBounds b;
  b.miss = in.phi2_at_M_delta + in.psi_at_delta / (1.0 - in.kappa);
  b.size = in.phi1_at_M / in.kappa;
  b.minimal = in.psi2_at_delta_M + in.alpha_at_delta / in.kappa;
  b.M = in.M;
  b.delta = in.delta;
  b.kappa = in.kappa;
  return b;
}

TransferredConditions transfer_conditions(const std::function<double(double)>& phi,
                                          double M) {
  if (!(M > 0.0)) throw std::invalid_argument("M must be positive");
  return {1.5 * phi(M / 5.0) + phi(M / 2.0), 1.5 * phi(2.0 * M / 5.0)};
}

OversmoothingEstimate oversmoothing_probability(const ModelConfig& model,
                                                const Signal& signal,
                                                const DdmParams& params,
                                                double kappa_frac, Index reps,
                                                std::uint64_t seed,
                                                unsigned threads) {
  const double a = params.a_K();
  if (!(params.alpha < a))
    throw std::invalid_argument("oversmoothing bound needs alpha < a(K)");
  if (!(kappa_frac >= 0.0 && kappa_frac < params.kappa0()))
    throw std::invalid_argument("kappa_frac must lie in [0, kappa0)");
  if (reps < 1) throw std::invalid_argument("reps must be at least 1");

  const Signal truth = signal.resized(model.n_trunc());
  OversmoothingEstimate out;
  out.kappa_frac = kappa_frac;
  out.i_bar = surrogate_oracle(truth, model).i_bar;
  out.cutoff = static_cast<Index>(std::floor(kappa_frac * double(out.i_bar)));
  out.bound = std::exp(-(a * (1.0 - kappa_frac) - params.alpha) * double(out.i_bar)) /
              params.c_alpha();
  out.reps = reps;
  out.seed = seed;

  std::vector<double> mass(static_cast<std::size_t>(reps), 0.0);
  if (out.cutoff > 0) {
    parallel_for(reps, threads, [&](Index r) {
      const auto data = simulate(model, truth, derive_seed(seed, static_cast<std::uint64_t>(r)));
      const auto w = mixture_weights(data, params);
      mass[static_cast<std::size_t>(r)] = w.weights().head(out.cutoff).sum();
    });
  }
  const MeanSe ms = mean_se(mass, 1, 0);
  out.estimate = ms.mean;
  out.std_error = ms.se;
  return out;
}

BallVolume ball_volume_bound(Index k, double r) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (!(r > 0.0)) throw std::invalid_argument("r must be positive");
  const double pi = std::numbers::pi;
  const double e = std::numbers::e;
  const double kd = static_cast<double>(k);
  BallVolume v;
  v.log_bound = 1.0 - 0.5 * std::log(pi) + kd * std::log(r) -
                0.5 * (kd + 1.0) * std::log(kd) + 0.5 * kd * std::log(2.0 * pi * e);
  v.log_exact = kd * std::log(r) + 0.5 * kd * std::log(pi) - std::lgamma(1.0 + 0.5 * kd);
  v.bound = std::exp(v.log_bound);
  v.exact = std::exp(v.log_exact);
  return v;
}

double c_or_reference(double p, const DdmParams& params) {
  const double alpha = params.alpha;
  const double aK = 0.5 * std::log((params.K + 1.0) / 2.0);
  const double gamma = alpha / 20.0;
  const auto base = sigma_constants(p, 1.0, gamma, 1.0);
  const double tau = base.tau;
  const auto at_tau = sigma_constants(p, tau, gamma, tau);
  const double K3_half = sigma_constants(p, 1.0, gamma / 2.0, 1.0).K3;
  const double C2 = 4.0 + 4.0 * (alpha + aK) * base.K1 / 5.0 +
                    std::exp(-(1.0 + alpha + aK)) / (1.0 - std::exp(-(alpha + aK)));
  const double tau2 = 10.0 * tau / (9.0 * alpha * (tau - 2.0) * base.K4 * at_tau.K5);
  return C2 + 1.0 + 2.0 * at_tau.K2 + 2.0 * (1.0 + tau2) + 1.0 + base.K3 +
         std::sqrt(3.0) * K3_half;
}

}  // namespace ddm
