#include "ddm/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ddm/json_io.hpp"

namespace ddm {

using nlohmann::json;

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Contraction: return "contraction";
    case ExperimentKind::OracleInequality: return "oracle-inequality";
    case ExperimentKind::SmallBall: return "small-ball";
    case ExperimentKind::CoverageSize: return "coverage-size";
    case ExperimentKind::Overshrinkage: return "overshrinkage";
    case ExperimentKind::ScaleAdaptation: return "scale-adaptation";
  }
  return "contraction";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (auto k : {ExperimentKind::Contraction, ExperimentKind::OracleInequality,
                 ExperimentKind::SmallBall, ExperimentKind::CoverageSize,
                 ExperimentKind::Overshrinkage, ExperimentKind::ScaleAdaptation})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown experiment kind '" + name + "'");
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt_exact(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Signal SignalSpec::build(Index n, double epsilon, double p, std::uint64_t seed) const {
  if (kind == SignalKind::Custom) return Signal(coeffs, kind, params).resized(n);
  SignalParams prm = params;
  if (kind == SignalKind::Deceptive) {
    if (!prm.epsilon) prm.epsilon = epsilon;
    if (!prm.p) prm.p = p;
  }
  return generate_signal(kind, prm, n, seed);
}

std::string SignalSpec::params_label() const {
  switch (kind) {
    case SignalKind::SobolevBoundary:
    case SignalKind::SobolevRandom:
      return "beta=" + fmt(params.beta) + ";Q=" + fmt(params.Q);
    case SignalKind::Analytic:
      return "c=" + fmt(params.c) + ";d=" + fmt(params.d) + ";Q=" + fmt(params.Q);
    case SignalKind::Parametric:
      return "N0=" + std::to_string(params.N0) + ";Q=" + fmt(params.Q);
    case SignalKind::Custom:
      return "n=" + std::to_string(coeffs.size());
    case SignalKind::Deceptive:
    case SignalKind::Zero:
      break;
  }
  return "";
}

SmoothnessClass ScaleSpec::build(Index n) const {
  if (name == "sobolev-ellipsoid") return sobolev_ellipsoid(beta, Q, n);
  if (name == "sobolev-hyperrectangle") return sobolev_hyperrectangle(beta, Q, n);
  if (name == "analytic-ellipsoid") return analytic_ellipsoid(c, d, Q, n);
  if (name == "parametric-hyperrectangle") return parametric_hyperrectangle(N0, Q, n);
  throw std::invalid_argument("unknown scale class '" + name + "'");
}

std::string ScaleSpec::params_label() const {
  if (name == "analytic-ellipsoid")
    return "c=" + fmt(c) + ";d=" + fmt(d) + ";Q=" + fmt(Q);
  if (name == "parametric-hyperrectangle")
    return "N0=" + std::to_string(N0) + ";Q=" + fmt(Q);
  return "beta=" + fmt(beta) + ";Q=" + fmt(Q);
}

std::optional<double> ScaleSpec::rate_exponent(double p) const {
  if (name == "sobolev-ellipsoid" || name == "sobolev-hyperrectangle")
    return 2.0 * beta / (2.0 * beta + 2.0 * p + 1.0);
  return std::nullopt;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("slope fit needs at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("slope fit needs distinct x values");
  return sxy / sxx;
}

void validate_spec(const ExperimentSpec& s) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
  };
  need(!s.epsilons.empty(), "epsilon grid is empty");
  for (double e : s.epsilons) need(e > 0.0, "epsilon values must be positive");
  need(!s.p_values.empty(), "p grid is empty");
  for (double p : s.p_values) need(p >= 0.0, "p values must be nonnegative");
  need(s.n_trunc >= 1, "n_trunc must be at least 1");
  need(s.reps >= 1, "reps must be at least 1");
  need(s.inner_mc >= 1, "inner_mc must be at least 1");
  need(s.kappa > 0.0 && s.kappa < 1.0, "kappa must lie in (0, 1)");
  need(s.ebr_tau > 0.0, "ebr_tau must be positive");
  need(!s.calibration.enabled || s.calibration.reps >= 1, "calibration reps must be positive");
  if (s.kind != ExperimentKind::ScaleAdaptation)
    need(!s.signals.empty(), "signal grid is empty");

  const auto d = validate_params(s.K, s.alpha);
  const bool upper = s.kind == ExperimentKind::Contraction ||
                     s.kind == ExperimentKind::OracleInequality ||
                     s.kind == ExperimentKind::CoverageSize;
  const bool lower = s.kind == ExperimentKind::SmallBall ||
                     s.kind == ExperimentKind::CoverageSize;
  need(!upper || d.upper_regime, "K is below the contraction regime (K >= 1.87)");
  need(!lower || d.lower_regime, "alpha must be below a(K) for this experiment");

  switch (s.kind) {
    case ExperimentKind::Contraction:
      need(!s.grid.empty(), "M grid is empty");
      for (double M : s.grid) need(M > 0.0, "M values must be positive");
      break;
    case ExperimentKind::SmallBall:
      need(!s.grid.empty(), "delta grid is empty");
      for (double v : s.grid) need(v > 0.0 && v < 1.0, "delta values must lie in (0, 1)");
      need(!s.scalings.empty(), "no psi scalings selected");
      break;
    case ExperimentKind::CoverageSize:
      need(s.inner_mc >= 1000, "coverage-size needs inner_mc >= 1000");
      for (double v : s.grid) need(v > 0.0, "C values must be positive");
      for (double v : s.c_grid) need(v > 0.0, "c values must be positive");
      need(!s.psi_grid.empty(), "psi grid is empty");
      need(s.calibration.enabled || (s.calibration.C && s.calibration.c),
           "coverage-size needs calibration or fixed C and c");
      break;
    default:
      break;
  }
  if (s.center == CenterRule::DefaultCenter &&
      (s.kind == ExperimentKind::Contraction || s.kind == ExperimentKind::SmallBall))
    need(s.inner_mc >= 1000, "the default center needs inner_mc >= 1000");
}

namespace {

struct CellContext {
  std::size_t index = 0;
  const SignalSpec* signal = nullptr;
  double p = 0.0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
};

std::uint64_t pilot_master(std::uint64_t seed) {
  return derive_seed(seed, 0x70696c6f74ULL);
}

// Visits (signal, p, epsilon) in a fixed order; the cell seed depends only
// on the master seed and the position in that order.
void for_each_cell(const ExperimentSpec& s, std::uint64_t master,
                   const std::function<void(const CellContext&)>& fn) {
  std::size_t k = 0;
  for (const auto& sig : s.signals)
    for (double p : s.p_values)
      for (double eps : s.epsilons) {
        fn(CellContext{k, &sig, p, eps, derive_seed(master, k)});
        ++k;
      }
}

Cell make_cell(const CellContext& c, const std::string& metric, double grid,
               double stat, double se) {
  Cell out;
  out.metric = metric;
  out.signal_kind = to_string(c.signal->kind);
  out.signal_params = c.signal->params_label();
  out.p = c.p;
  out.epsilon = c.epsilon;
  out.grid_value = grid;
  out.statistic = stat;
  out.std_error = se;
  out.seed = c.seed;
  return out;
}

Cell failed_cell(const CellContext& c, const std::string& metric, const std::string& why) {
  Cell out = make_cell(c, metric, kNaN, kNaN, kNaN);
  out.failed = true;
  out.error = why;
  return out;
}

json cell_key(const CellContext& c) {
  return {{"signal", to_string(c.signal->kind)},
          {"params", c.signal->params_label()},
          {"p", c.p},
          {"epsilon", c.epsilon},
          {"seed", c.seed}};
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += x;
  const double m = s / n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

double binomial_se(double f, std::size_t n) {
  return std::sqrt(std::max(f * (1.0 - f), 0.0) / static_cast<double>(n));
}

// ---------------------------------------------------------------- contraction

void run_contraction(const ExperimentSpec& s, ExperimentReport& rep) {
  const DdmParams prm = make_params(s.K, s.alpha);
  json groups = json::array();
  bool ok = true;
  for_each_cell(s, s.seed, [&](const CellContext& c) {
    json g = cell_key(c);
    try {
      const ModelConfig model = make_model(c.epsilon, c.p, s.n_trunc);
      const Signal sig = c.signal->build(s.n_trunc, c.epsilon, c.p, c.seed);
      DiagnosticOptions opt{s.center, Variant::Mixture, 0, s.reps, s.inner_mc, c.seed, s.threads};
      const auto est = estimate_phi1(s.grid, model, sig, prm, opt);
      std::vector<double> lx, ly;
      bool monotone = true, decay = true;
      for (std::size_t k = 0; k < est.size(); ++k) {
        rep.cells.push_back(make_cell(c, "phi1", est[k].argument, est[k].value, est[k].std_error));
        if (est[k].value > 0.0) {
          lx.push_back(std::log(est[k].argument));
          ly.push_back(std::log(est[k].value));
        }
        if (k == 0) continue;
        const double prev = est[k - 1].value, cur = est[k].value;
        const double shrink = std::pow(est[k - 1].argument / est[k].argument, 2.0);
        if (est[k].argument > est[k - 1].argument) {
          monotone = monotone && cur <= prev;
          decay = decay && cur <= s.thresholds.decay_factor * shrink * prev;
        }
      }
      g["slope"] = lx.size() >= 2 ? json(fit_slope(lx, ly)) : json(nullptr);
      g["monotone"] = monotone;
      g["decay_ok"] = decay;
      ok = ok && monotone && decay;
    } catch (const std::exception& e) {
      rep.cells.push_back(failed_cell(c, "phi1", e.what()));
      g["error"] = e.what();
      ok = false;
    }
    groups.push_back(g);
  });
  rep.summary["cells"] = groups;
  rep.summary["center"] = to_string(s.center);
  rep.passed = ok;
}

// ---------------------------------------------------------- oracle inequality

std::vector<double> risk_ratios(const ExperimentSpec& s, const DdmParams& prm,
                                const ModelConfig& model, const Signal& sig,
                                Index reps, std::uint64_t seed) {
  const double r2 = oracle(sig, model).rate_sq;
  std::vector<double> out(static_cast<std::size_t>(reps));
  parallel_for(reps, s.threads, [&](Index r) {
    const auto data = simulate(model, sig, derive_seed(seed, static_cast<std::uint64_t>(r)));
    const Vector m = posterior_mean(data, mixture_weights(data, prm));
    out[static_cast<std::size_t>(r)] = (m - sig.coeffs()).squaredNorm() / r2;
  });
  return out;
}

void run_oracle_inequality(const ExperimentSpec& s, ExperimentReport& rep) {
  const DdmParams prm = make_params(s.K, s.alpha);
  json& cal = rep.summary["calibration"];
  double bound = std::numeric_limits<double>::infinity();
  if (s.calibration.ratio_bound) {
    bound = *s.calibration.ratio_bound;
    cal = {{"ratio_bound", bound}, {"source", "spec"}};
  } else if (s.calibration.enabled) {
    double pilot_max = 0.0;
    for_each_cell(s, pilot_master(s.seed), [&](const CellContext& c) {
      try {
        const ModelConfig model = make_model(c.epsilon, c.p, s.n_trunc);
        const Signal sig = c.signal->build(s.n_trunc, c.epsilon, c.p, c.seed);
        pilot_max = std::max(
            pilot_max, mean_se(risk_ratios(s, prm, model, sig, s.calibration.reps, c.seed)).mean);
      } catch (const std::exception&) {
        // Reported by the main run.
      }
    });
    bound = s.calibration.ratio_factor * pilot_max;
    cal = {{"ratio_bound", bound},
           {"pilot_max_ratio", pilot_max},
           {"ratio_factor", s.calibration.ratio_factor},
           {"pilot_reps", s.calibration.reps},
           {"pilot_seed", pilot_master(s.seed)},
           {"source", "pilot"}};
  }

  // (signal index, p) -> points (log eps, log ratio)
  std::map<std::pair<const SignalSpec*, double>, std::pair<std::vector<double>, std::vector<double>>> series;
  double max_ratio = 0.0;
  bool ok = true;
  for_each_cell(s, s.seed, [&](const CellContext& c) {
    try {
      const ModelConfig model = make_model(c.epsilon, c.p, s.n_trunc);
      const Signal sig = c.signal->build(s.n_trunc, c.epsilon, c.p, c.seed);
      const auto ms = mean_se(risk_ratios(s, prm, model, sig, s.reps, c.seed));
      rep.cells.push_back(make_cell(c, "risk_ratio", kNaN, ms.mean, ms.se));
      rep.cells.push_back(make_cell(c, "oracle_rate_sq", static_cast<double>(oracle(sig, model).i_star),
                                    oracle(sig, model).rate_sq, 0.0));
      max_ratio = std::max(max_ratio, ms.mean);
      auto& pts = series[{c.signal, c.p}];
      pts.first.push_back(std::log(c.epsilon));
      pts.second.push_back(std::log(ms.mean));
    } catch (const std::exception& e) {
      rep.cells.push_back(failed_cell(c, "risk_ratio", e.what()));
      ok = false;
    }
  });

  json groups = json::array();
  for (const auto& sig : s.signals)
    for (double p : s.p_values) {
      auto it = series.find({&sig, p});
      if (it == series.end()) continue;
      json g = {{"signal", to_string(sig.kind)}, {"params", sig.params_label()}, {"p", p}};
      if (it->second.first.size() >= 2) {
        const double slope = fit_slope(it->second.first, it->second.second);
        g["slope"] = slope;
        g["slope_ok"] = std::abs(slope) <= s.thresholds.slope;
        ok = ok && std::abs(slope) <= s.thresholds.slope;
      } else {
        g["slope"] = nullptr;
      }
      groups.push_back(g);
    }
  rep.summary["groups"] = groups;
  rep.summary["max_ratio"] = max_ratio;
  rep.summary["ratio_bound"] = std::isfinite(bound) ? json(bound) : json(nullptr);
  rep.summary["max_ratio_ok"] = max_ratio <= bound;
  rep.passed = ok && max_ratio <= bound;
}

// ------------------------------------------------------------------ small ball

void run_small_ball(const ExperimentSpec& s, ExperimentReport& rep) {
  const DdmParams prm = make_params(s.K, s.alpha);
  json groups = json::array();
  bool ok = true;
  const double dmax = *std::max_element(s.grid.begin(), s.grid.end());
  for_each_cell(s, s.seed, [&](const CellContext& c) {
    for (PsiScaling scaling : s.scalings) {
      const std::string metric = "psi_" + to_string(scaling);
      json g = cell_key(c);
      g["scaling"] = to_string(scaling);
      try {
        const ModelConfig model = make_model(c.epsilon, c.p, s.n_trunc);
        const Signal sig = c.signal->build(s.n_trunc, c.epsilon, c.p, c.seed);
        DiagnosticOptions opt{s.center, Variant::Mixture, 0, s.reps, s.inner_mc, c.seed, s.threads};
        const auto est = estimate_psi(s.grid, model, sig, prm, scaling, opt);
        auto envelope = [&](double d) { return d * std::pow(std::log(1.0 / d), c.p + 0.5); };
        double at_max = 0.0;
        for (const auto& e : est)
          if (e.argument == dmax) at_max = e.value;
        const double C_hat = at_max / envelope(dmax);
        bool dominated = true, in_range = true;
        json points = json::array();
        for (const auto& e : est) {
          rep.cells.push_back(make_cell(c, metric, e.argument, e.value, e.std_error));
          const double env = C_hat * envelope(e.argument);
          dominated = dominated && e.value <= env;
          in_range = in_range && e.within_range;
          points.push_back({{"delta", e.argument}, {"psi", e.value}, {"envelope", env}});
        }
        const auto sur = surrogate_oracle(sig, model);
        g["i_bar"] = sur.i_bar;
        g["ebr_ratio"] = ebr_check(sig, model, s.ebr_tau).ratio;
        g["C_hat"] = C_hat;
        g["dominated"] = dominated;
        g["within_theorem_range"] = in_range;
        g["delta_sb"] = prm.delta_sb(c.p);
        g["points"] = points;
        if (scaling == PsiScaling::SigmaSum) ok = ok && dominated;
      } catch (const std::exception& e) {
        rep.cells.push_back(failed_cell(c, metric, e.what()));
        g["error"] = e.what();
        ok = false;
      }
      groups.push_back(g);
    }
  });
  rep.summary["groups"] = groups;
  rep.summary["checked_scaling"] = to_string(PsiScaling::SigmaSum);
  rep.passed = ok;
}

// --------------------------------------------------------------- coverage/size

struct CoverageRep {
  double t = 0.0;        // ||theta0 - center|| / r_hat
  double s = 0.0;        // r_hat / r(theta0)
  double d0_rel = 0.0;   // ||theta0 - center|| / r(theta0)
  std::vector<double> psi;  // posterior mass within delta r(theta0), per psi_grid
  bool verified = false;
};

std::vector<CoverageRep> coverage_reps(const ExperimentSpec& s, const DdmParams& prm,
                                       const ModelConfig& model, const Signal& sig,
                                       Index reps, std::uint64_t seed) {
  const double r0 = std::sqrt(oracle(sig, model).rate_sq);
  std::vector<CoverageRep> out(static_cast<std::size_t>(reps));
  parallel_for(reps, s.threads, [&](Index r) {
    const std::uint64_t rs = derive_seed(seed, static_cast<std::uint64_t>(r));
    const auto data = simulate(model, sig, derive_seed(rs, 0));
    const auto post = make_posterior(data, prm, Variant::Mixture);
    const auto dc = default_center(post, 2.0 / 3.0, 0.5, s.inner_mc, derive_seed(rs, 1));
    const auto d = PosteriorSample(post, s.inner_mc, derive_seed(rs, 2)).distances(dc.center);
    const double rad = radius_from_distances(d, s.kappa).value;
    const double d0 = distance(sig.coeffs(), dc.center);
    CoverageRep& cr = out[static_cast<std::size_t>(r)];
    cr.t = rad > 0.0 ? d0 / rad : std::numeric_limits<double>::infinity();
    cr.s = rad / r0;
    cr.d0_rel = d0 / r0;
    cr.verified = dc.verified;
    for (double delta : s.psi_grid) {
      std::size_t k = 0;
      for (double x : d) k += x <= delta * r0 ? 1 : 0;
      cr.psi.push_back(static_cast<double>(k) / static_cast<double>(d.size()));
    }
  });
  return out;
}

double order_stat(std::vector<double> v, Index rank) {
  std::sort(v.begin(), v.end());
  rank = std::clamp<Index>(rank, 1, static_cast<Index>(v.size()));
  return v[static_cast<std::size_t>(rank - 1)];
}

// Smallest C with freq(t <= C) >= target.
double coverage_constant(const std::vector<CoverageRep>& reps, double target) {
  std::vector<double> t;
  for (const auto& r : reps) t.push_back(r.t);
  const double n = static_cast<double>(t.size());
  return order_stat(t, static_cast<Index>(std::ceil(target * n - 1e-9)));
}

// Smallest c with freq(s >= c) <= tail.
double size_constant(const std::vector<CoverageRep>& reps, double tail) {
  std::vector<double> v;
  for (const auto& r : reps) v.push_back(r.s);
  const Index n = static_cast<Index>(v.size());
  const Index allowed = static_cast<Index>(std::floor(tail * double(n) + 1e-9));
  const double x = order_stat(v, n - allowed);
  return std::nextafter(x, std::numeric_limits<double>::infinity());
}

double freq(const std::vector<CoverageRep>& reps, const std::function<bool(const CoverageRep&)>& f) {
  std::size_t k = 0;
  for (const auto& r : reps) k += f(r) ? 1 : 0;
  return static_cast<double>(k) / static_cast<double>(reps.size());
}

void run_coverage_size(const ExperimentSpec& s, ExperimentReport& rep) {
  const DdmParams prm = make_params(s.K, s.alpha);
  json& cal = rep.summary["calibration"];
  double C = 0.0, c_size = 0.0;
  if (s.calibration.C && s.calibration.c) {
    C = *s.calibration.C;
    c_size = *s.calibration.c;
    cal = {{"C", C}, {"c", c_size}, {"source", "spec"}};
  } else {
    double C_pilot = 0.0, c_pilot = 0.0;
    for_each_cell(s, pilot_master(s.seed), [&](const CellContext& cc) {
      try {
        const ModelConfig model = make_model(cc.epsilon, cc.p, s.n_trunc);
        const Signal sig = cc.signal->build(s.n_trunc, cc.epsilon, cc.p, cc.seed);
        const auto reps = coverage_reps(s, prm, model, sig, s.calibration.reps, cc.seed);
        if (ebr_check(sig, model, s.ebr_tau).member)
          C_pilot = std::max(C_pilot, coverage_constant(reps, s.calibration.coverage_target));
        c_pilot = std::max(c_pilot, size_constant(reps, s.calibration.size_tail));
      } catch (const std::exception&) {
        // Reported by the main run.
      }
    });
    C = s.calibration.C.value_or(C_pilot);
    c_size = s.calibration.c.value_or(c_pilot);
    cal = {{"C", C},
           {"c", c_size},
           {"coverage_target", s.calibration.coverage_target},
           {"size_tail", s.calibration.size_tail},
           {"pilot_reps", s.calibration.reps},
           {"pilot_seed", pilot_master(s.seed)},
           {"source", "pilot"}};
  }

  std::vector<double> C_values = s.grid;
  C_values.push_back(C);
  std::sort(C_values.begin(), C_values.end());
  C_values.erase(std::unique(C_values.begin(), C_values.end()), C_values.end());
  std::vector<double> c_values = s.c_grid;
  c_values.push_back(c_size);
  std::sort(c_values.begin(), c_values.end());
  c_values.erase(std::unique(c_values.begin(), c_values.end()), c_values.end());

  struct Outcome {
    bool member = false;
    double coverage = 0.0, coverage_se = 0.0;
  };
  std::vector<Outcome> outcomes;
  json groups = json::array();
  bool size_ok = true, duality_ok = true, all_ran = true;
  for_each_cell(s, s.seed, [&](const CellContext& cc) {
    json g = cell_key(cc);
    try {
      const ModelConfig model = make_model(cc.epsilon, cc.p, s.n_trunc);
      const Signal sig = cc.signal->build(s.n_trunc, cc.epsilon, cc.p, cc.seed);
      const auto ebr = ebr_check(sig, model, s.ebr_tau);
      const auto reps = coverage_reps(s, prm, model, sig, s.reps, cc.seed);
      const std::size_t n = reps.size();
      rep.cells.push_back(make_cell(cc, "ebr_ratio", s.ebr_tau, ebr.ratio, 0.0));
      const double verified = freq(reps, [](const CoverageRep& r) { return r.verified; });
      rep.cells.push_back(make_cell(cc, "center_verified", kNaN, verified, binomial_se(verified, n)));
      for (double Cv : C_values) {
        const double f = freq(reps, [&](const CoverageRep& r) { return r.t <= Cv; });
        rep.cells.push_back(make_cell(cc, "coverage", Cv, f, binomial_se(f, n)));
      }
      for (double cv : c_values) {
        const double f = freq(reps, [&](const CoverageRep& r) { return r.s >= cv; });
        rep.cells.push_back(make_cell(cc, "size_exceedance", cv, f, binomial_se(f, n)));
      }
      const double cover = freq(reps, [&](const CoverageRep& r) { return r.t <= C; });
      const double cover_se = binomial_se(cover, n);
      const double size = freq(reps, [&](const CoverageRep& r) { return r.s >= c_size; });
      size_ok = size_ok && size <= s.thresholds.size;

      // Miss frequency against phi2(C delta) + psi(delta) / (1 - kappa).
      bool dual = true;
      json bounds = json::array();
      for (std::size_t k = 0; k < s.psi_grid.size(); ++k) {
        const double delta = s.psi_grid[k];
        std::vector<double> psi_k;
        for (const auto& r : reps) psi_k.push_back(r.psi[k]);
        const auto psi = mean_se(psi_k);
        const double phi2 = freq(reps, [&](const CoverageRep& r) { return r.d0_rel >= C * delta; });
        const double miss_bound = phi2 + psi.mean / (1.0 - s.kappa);
        const double se = std::sqrt(cover_se * cover_se + binomial_se(phi2, n) * binomial_se(phi2, n) +
                                    std::pow(psi.se / (1.0 - s.kappa), 2.0));
        const bool holds = 1.0 - cover <= miss_bound + 3.0 * se;
        dual = dual && holds;
        rep.cells.push_back(make_cell(cc, "psi", delta, psi.mean, psi.se));
        rep.cells.push_back(make_cell(cc, "miss_bound", delta, miss_bound, se));
        bounds.push_back({{"delta", delta}, {"miss_bound", miss_bound}, {"holds", holds}});
      }
      duality_ok = duality_ok && dual;

      g["ebr_member"] = ebr.member;
      g["ebr_ratio"] = ebr.ratio;
      g["coverage"] = cover;
      g["coverage_se"] = cover_se;
      g["size_exceedance"] = size;
      g["center_verified"] = verified;
      g["duality_ok"] = dual;
      g["duality"] = bounds;
      outcomes.push_back({ebr.member, cover, cover_se});
    } catch (const std::exception& e) {
      rep.cells.push_back(failed_cell(cc, "coverage", e.what()));
      g["error"] = e.what();
      all_ran = false;
    }
    groups.push_back(g);
  });

  bool coverage_ok = true;
  const Outcome* worst = nullptr;
  for (const auto& o : outcomes) {
    if (!o.member) continue;
    coverage_ok = coverage_ok && o.coverage >= s.thresholds.coverage;
    if (!worst || o.coverage < worst->coverage) worst = &o;
  }
  json breakdown = nullptr;
  bool breakdown_ok = true;
  for (const auto& o : outcomes) {
    if (o.member || !worst) continue;
    const double se = std::sqrt(o.coverage_se * o.coverage_se + worst->coverage_se * worst->coverage_se);
    const bool below = o.coverage < worst->coverage - 3.0 * se;
    breakdown_ok = breakdown_ok && below;
    breakdown = breakdown_ok;
  }
  rep.summary["cells"] = groups;
  rep.summary["C"] = C;
  rep.summary["c"] = c_size;
  rep.summary["min_ebr_coverage"] = worst ? json(worst->coverage) : json(nullptr);
  rep.summary["coverage_ok"] = coverage_ok;
  rep.summary["size_ok"] = size_ok;
  rep.summary["duality_ok"] = duality_ok;
  rep.summary["deceptive_breakdown"] = breakdown;
  rep.passed = all_ran && coverage_ok && size_ok && duality_ok && breakdown_ok;
}

// -------------------------------------------------------------- overshrinkage

void run_overshrinkage(const ExperimentSpec& s, ExperimentReport& rep) {
  const DdmParams prm = make_params(s.K, s.alpha);
  const double L = prm.L();
  json groups = json::array();
  bool ok = true;
  for_each_cell(s, s.seed, [&](const CellContext& c) {
    json g = cell_key(c);
    try {
      const ModelConfig model = make_model(c.epsilon, c.p, s.n_trunc);
      const Signal sig = c.signal->build(s.n_trunc, c.epsilon, c.p, c.seed);
      const Index ib = surrogate_oracle(sig, model).i_bar;
      const std::size_t n = static_cast<std::size_t>(s.reps);
      std::vector<double> mix(n), shr(n), gap(n);
      parallel_for(s.reps, s.threads, [&](Index r) {
        const auto data = simulate(model, sig, derive_seed(c.seed, static_cast<std::uint64_t>(r)));
        const Vector m = make_posterior(data, prm, Variant::Mixture).mean();
        const Vector f = shrunk_full_bayes(data, prm).mean();
        double e1 = 0.0, e2 = 0.0, e3 = 0.0;
        for (Index i = 0; i < ib; ++i) {
          const double th = sig.coeffs()(i);
          if (th == 0.0) continue;
          e1 = std::max(e1, std::abs(m(i) - th) / std::abs(th));
          e2 = std::max(e2, std::abs(f(i) - L * th) / std::abs(L * th));
          e3 = std::max(e3, std::abs(f(i) - th) / std::abs(th));
        }
        mix[static_cast<std::size_t>(r)] = e1;
        shr[static_cast<std::size_t>(r)] = e2;
        gap[static_cast<std::size_t>(r)] = e3;
      });
      const double worst_mix = *std::max_element(mix.begin(), mix.end());
      const double worst_shr = *std::max_element(shr.begin(), shr.end());
      auto a = mean_se(mix), b = mean_se(shr), d = mean_se(gap);
      rep.cells.push_back(make_cell(c, "mixture_rel_error", static_cast<double>(ib), a.mean, a.se));
      rep.cells.push_back(make_cell(c, "shrunk_rel_error_vs_L_theta0", static_cast<double>(ib), b.mean, b.se));
      rep.cells.push_back(make_cell(c, "shrunk_rel_error_vs_theta0", static_cast<double>(ib), d.mean, d.se));
      const bool cell_ok = worst_mix <= s.thresholds.relative_error &&
                           worst_shr <= s.thresholds.relative_error;
      g["i_bar"] = ib;
      g["max_mixture_rel_error"] = worst_mix;
      g["max_shrunk_rel_error_vs_L_theta0"] = worst_shr;
      g["mean_shrunk_gap_vs_theta0"] = d.mean;
      g["expected_gap"] = 1.0 - L;
      g["ok"] = cell_ok;
      ok = ok && cell_ok;
    } catch (const std::exception& e) {
      rep.cells.push_back(failed_cell(c, "mixture_rel_error", e.what()));
      g["error"] = e.what();
      ok = false;
    }
    groups.push_back(g);
  });
  rep.summary["cells"] = groups;
  rep.summary["L"] = L;
  rep.passed = ok;
}

// ------------------------------------------------------------ scale adaptation

std::vector<ScaleSpec> default_scales() {
  ScaleSpec es, hs, ea, hp;
  es.name = "sobolev-ellipsoid";
  hs.name = "sobolev-hyperrectangle";
  ea.name = "analytic-ellipsoid";
  hp.name = "parametric-hyperrectangle";
  return {es, hs, ea, hp};
}

void run_scale_adaptation(const ExperimentSpec& s, ExperimentReport& rep) {
  const auto scales = s.scales.empty() ? default_scales() : s.scales;
  json groups = json::array();
  bool ok = true;
  std::size_t k = 0;
  for (const auto& sc : scales)
    for (double p : s.p_values) {
      std::vector<double> lx, ly;
      json g = {{"scale", sc.name}, {"params", sc.params_label()}, {"p", p}};
      json pts = json::array();
      for (double eps : s.epsilons) {
        const std::uint64_t seed = derive_seed(s.seed, k++);
        auto cell = [&](const std::string& metric, double grid, double stat) {
          Cell out;
          out.metric = metric;
          out.signal_kind = sc.name;
          out.signal_params = sc.params_label();
          out.p = p;
          out.epsilon = eps;
          out.grid_value = grid;
          out.statistic = stat;
          out.std_error = 0.0;
          out.seed = seed;
          return out;
        };
        try {
          const ModelConfig model = make_model(eps, p, s.n_trunc);
          const SmoothnessClass cls = sc.build(s.n_trunc);
          const auto R = minimax_rate(cls, model);
          const auto cov = covers_check(cls, model, s.reps, seed);
          rep.cells.push_back(cell("minimax_rate_sq", static_cast<double>(R.i_star), R.rate_sq));
          rep.cells.push_back(cell("worst_ratio", cov.bound, cov.worst_ratio));
          rep.cells.push_back(cell("linear_margin", 1.0, cov.worst_linear_margin));
          lx.push_back(std::log(eps * eps));
          ly.push_back(std::log(R.rate_sq));
          pts.push_back({{"epsilon", eps}, {"rate_sq", R.rate_sq},
                         {"worst_ratio", cov.worst_ratio}, {"bound", cov.bound},
                         {"linear_ok", cov.linear_ok}});
          ok = ok && cov.ok();
        } catch (const std::exception& e) {
          Cell f = cell("worst_ratio", kNaN, kNaN);
          f.failed = true;
          f.error = e.what();
          rep.cells.push_back(f);
          ok = false;
        }
      }
      g["points"] = pts;
      g["rate_slope"] = lx.size() >= 2 ? json(fit_slope(lx, ly)) : json(nullptr);
      const auto expo = sc.rate_exponent(p);
      g["theory_slope"] = expo ? json(*expo) : json(nullptr);
      groups.push_back(g);
    }
  rep.summary["groups"] = groups;
  rep.passed = ok;
}

std::string utc_timestamp(const char* pattern) {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, pattern, &tm);
  return buf;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  validate_spec(spec);
  ExperimentReport rep;
  rep.spec = spec;
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_timestamp("%Y-%m-%dT%H:%M:%SZ");
  switch (spec.kind) {
    case ExperimentKind::Contraction: run_contraction(spec, rep); break;
    case ExperimentKind::OracleInequality: run_oracle_inequality(spec, rep); break;
    case ExperimentKind::SmallBall: run_small_ball(spec, rep); break;
    case ExperimentKind::CoverageSize: run_coverage_size(spec, rep); break;
    case ExperimentKind::Overshrinkage: run_overshrinkage(spec, rep); break;
    case ExperimentKind::ScaleAdaptation: run_scale_adaptation(spec, rep); break;
  }
  std::size_t failed = 0;
  for (const auto& c : rep.cells) failed += c.failed ? 1 : 0;
  rep.summary["failed_cells"] = failed;
  rep.summary["passed"] = rep.passed;
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.runtime = {{"started_at", started},
                 {"wall_seconds", secs},
                 {"threads", resolve_threads(spec.threads)}};
  return rep;
}

std::string report_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "kind,signal_kind,signal_params,epsilon,grid_value,statistic,std_error,seed,p,metric\n";
  const std::string kind = to_string(report.spec.kind);
  for (const auto& c : report.cells) {
    out << kind << ',' << c.signal_kind << ',' << c.signal_params << ','
        << fmt_exact(c.epsilon) << ',' << fmt_exact(c.grid_value) << ','
        << fmt_exact(c.statistic) << ',' << fmt_exact(c.std_error) << ',' << c.seed
        << ',' << fmt_exact(c.p) << ',' << c.metric << '\n';
  }
  return out.str();
}

void write_report(const ExperimentReport& report, ReportFormat format,
                  const std::filesystem::path& path) {
  if (format == ReportFormat::Json) {
    write_json_file(json(report), path);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << report_csv(report);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

ExperimentReport read_report_json(const std::filesystem::path& path) {
  return report_from_json(read_json_file(path));
}

namespace {

std::string sanitize(std::string s) {
  for (char& ch : s)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '.' || ch == '_'))
      ch = '_';
  return s;
}

}  // namespace

void emit_plot_data(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto kind = report.spec.kind;
  const bool by_grid = kind == ExperimentKind::Contraction ||
                       kind == ExperimentKind::SmallBall ||
                       kind == ExperimentKind::CoverageSize;
  // Series keyed by file name; rows keep cell order.
  std::map<std::string, std::vector<const Cell*>> series;
  for (const auto& c : report.cells) {
    if (c.failed) continue;
    std::string name = c.metric + "_" + c.signal_kind;
    if (!c.signal_params.empty()) name += "_" + c.signal_params;
    name += "_p" + fmt(c.p);
    if (by_grid) name += "_eps" + fmt(c.epsilon);
    series[sanitize(name)].push_back(&c);
  }
  const std::string xname =
      kind == ExperimentKind::Contraction ? "M"
      : kind == ExperimentKind::SmallBall ? "delta"
      : kind == ExperimentKind::CoverageSize ? "grid_value"
                                              : "epsilon";
  for (const auto& [name, rows] : series) {
    const auto path = dir / (name + ".dat");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "# " << xname << " statistic std_error\n";
    for (const Cell* c : rows)
      out << fmt_exact(by_grid ? c->grid_value : c->epsilon) << ' ' << fmt_exact(c->statistic)
          << ' ' << fmt_exact(c->std_error) << '\n';
  }
}

std::filesystem::path write_outputs(const ExperimentReport& report,
                                    const std::filesystem::path& root) {
  const std::filesystem::path base = root / to_string(report.spec.kind);
  const std::string stamp = utc_timestamp("%Y%m%dT%H%M%SZ");
  std::filesystem::path dir = base / stamp;
  for (int k = 1; std::filesystem::exists(dir); ++k)
    dir = base / (stamp + "-" + std::to_string(k));
  std::filesystem::create_directories(dir);
  write_report(report, ReportFormat::Json, dir / "report.json");
  write_report(report, ReportFormat::Csv, dir / "cells.csv");
  emit_plot_data(report, dir / "plots");
  return dir;
}

}  // namespace ddm
