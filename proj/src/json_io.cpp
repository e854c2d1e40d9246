#include "ddm/json_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

namespace ddm {

namespace {

json vec_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vec_from(const json& a, const char* what) {
  if (!a.is_array()) throw std::invalid_argument(std::string(what) + " must be an array");
  Vector v(static_cast<Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) throw std::invalid_argument(std::string(what) + " must hold numbers");
    v(static_cast<Index>(i)) = a[i].get<double>();
  }
  return v;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
  if (!j.is_object()) throw std::invalid_argument(context + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key()))
      throw std::invalid_argument("unknown key '" + it.key() + "' in " + context);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string("bad value for '") + key + "'");
  }
}

double num_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

std::vector<double> doubles(const json& j, const char* key,
                            std::vector<double> fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_array()) throw std::invalid_argument(std::string(key) + " must be an array");
  std::vector<double> out;
  for (const auto& v : *it) {
    if (!v.is_number()) throw std::invalid_argument(std::string(key) + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

void to_json(json& j, const ModelConfig& m) {
  j = {{"epsilon", m.epsilon()}, {"p", m.p()}, {"n_trunc", m.n_trunc()}};
}

void to_json(json& j, const SignalParams& p) {
  j = {{"beta", p.beta}, {"Q", p.Q}, {"c", p.c}, {"d", p.d}, {"N0", p.N0}};
  if (p.epsilon) j["epsilon"] = *p.epsilon;
  if (p.p) j["p"] = *p.p;
  if (p.spike_index > 0) {
    j["spike_index"] = p.spike_index;
    j["spike_mass"] = p.spike_mass;
  }
}

void to_json(json& j, const Signal& s) {
  j = {{"kind", to_string(s.kind())}, {"params", s.params()}, {"coeffs", vec_json(s.coeffs())}};
}

void to_json(json& j, const ObservedData& d) {
  j = {{"x", vec_json(d.x)}, {"model", d.model}, {"seed", d.seed}};
}

void to_json(json& j, const OracleResult& r) {
  j = {{"i_star", r.i_star}, {"rate_sq", r.rate_sq},
       {"variance_term", r.variance_term}, {"bias_term", r.bias_term}};
}

void to_json(json& j, const SurrogateOracleResult& r) {
  j = {{"i_bar", r.i_bar}, {"surr_rate_sq", r.surr_rate_sq}, {"sigma_sum", r.sigma_sum}};
}

void to_json(json& j, const EbrMembership& r) {
  j = {{"member", r.member}, {"ratio", r.ratio}, {"tau", r.tau}, {"i_bar", r.i_bar}};
}

void to_json(json& j, const SigmaConstants& k) {
  j = {{"K1", k.K1}, {"K2", k.K2}, {"K3", k.K3}, {"K4", k.K4}, {"tau", k.tau}, {"K5", k.K5}};
}

void to_json(json& j, const SigmaReport& r) {
  json v = json::array();
  for (const auto& x : r.violations)
    v.push_back({{"condition", x.condition}, {"n", x.n}, {"parameter", x.parameter},
                 {"lhs", x.lhs}, {"rhs", x.rhs}});
  j = {{"p", r.p}, {"n_max", r.n_max}, {"rho_grid", r.rho_grid},
       {"gamma_grid", r.gamma_grid}, {"tau0_grid", r.tau0_grid},
       {"checks", r.checks}, {"ok", r.ok()}, {"violations", v}};
}

void to_json(json& j, const MinimaxRate& r) {
  j = {{"i_star", r.i_star}, {"rate_sq", r.rate_sq}};
}

void to_json(json& j, const CoversReport& r) {
  j = {{"n_samples", r.n_samples}, {"minimax_rate_sq", r.minimax_rate_sq},
       {"worst_ratio", r.worst_ratio}, {"bound", r.bound},
       {"within_bound", r.within_bound}, {"worst_linear_margin", r.worst_linear_margin},
       {"linear_ok", r.linear_ok}};
}

void to_json(json& j, const ParamDiagnostics& d) {
  j = {{"K", d.K}, {"alpha", d.alpha}, {"a_K", d.a_K},
       {"upper_regime", d.upper_regime}, {"lower_regime", d.lower_regime},
       {"penalty", d.penalty}, {"delta_sb", d.delta_sb}, {"kappa0", d.kappa0}};
}

void to_json(json& j, const MixtureWeights& w) {
  j = {{"i_max", w.i_max()}, {"weights", vec_json(w.weights())}, {"eb_index", eb_index(w)}};
}

void to_json(json& j, const RadiusEstimate& r) {
  j = {{"value", r.value}, {"level", r.level}, {"mc_samples", r.mc_samples},
       {"std_error", r.std_error}};
}

void to_json(json& j, const CredibleBall& b) {
  j = {{"center", vec_json(b.center)}, {"radius", b.radius}, {"level", b.level},
       {"M", b.inflation}, {"effective_radius", b.effective_radius()}};
}

void to_json(json& j, const DefaultCenter& c) {
  j = {{"r_star", c.r_star}, {"chosen", c.chosen}, {"chosen_index", c.chosen_index},
       {"candidates", c.candidates}, {"mean_radius", c.mean_radius},
       {"verified_mass", c.verified_mass}, {"verified", c.verified}};
}

void to_json(json& j, const ConditionEstimate& e) {
  j = {{"kind", to_string(e.kind)}, {"argument", e.argument}, {"value", e.value},
       {"std_error", e.std_error}, {"reps", e.reps}, {"inner_mc", e.inner_mc},
       {"seed", e.seed}, {"center", to_string(e.center)}, {"within_range", e.within_range}};
}

void to_json(json& j, const PropositionBounds& b) {
  j = {{"miss", b.miss}, {"size", b.size}, {"minimal", b.minimal},
       {"M", b.M}, {"delta", b.delta}, {"kappa", b.kappa}};
}

void to_json(json& j, const OversmoothingEstimate& e) {
  j = {{"kappa_frac", e.kappa_frac}, {"i_bar", e.i_bar}, {"cutoff", e.cutoff},
       {"estimate", e.estimate}, {"std_error", e.std_error}, {"bound", e.bound},
       {"reps", e.reps}, {"seed", e.seed}, {"within_bound", e.within_bound()}};
}

void to_json(json& j, const BallVolume& v) {
  j = {{"bound", v.bound}, {"exact", v.exact}, {"log_bound", v.log_bound},
       {"log_exact", v.log_exact}, {"holds", v.holds()}};
}

void to_json(json& j, const SignalSpec& s) {
  j = {{"kind", to_string(s.kind)}, {"params", s.params}};
  if (s.kind == SignalKind::Custom) j["coeffs"] = vec_json(s.coeffs);
}

void to_json(json& j, const ScaleSpec& s) {
  j = {{"class", s.name}, {"beta", s.beta}, {"Q", s.Q}, {"c", s.c}, {"d", s.d}, {"N0", s.N0}};
}

void to_json(json& j, const CalibrationSpec& c) {
  j = {{"enabled", c.enabled}, {"reps", c.reps}, {"ratio_factor", c.ratio_factor},
       {"coverage_target", c.coverage_target}, {"size_tail", c.size_tail}};
  if (c.ratio_bound) j["ratio_bound"] = *c.ratio_bound;
  if (c.C) j["C"] = *c.C;
  if (c.c) j["c"] = *c.c;
}

void to_json(json& j, const Thresholds& t) {
  j = {{"coverage", t.coverage}, {"size", t.size}, {"slope", t.slope},
       {"decay_factor", t.decay_factor}, {"relative_error", t.relative_error}};
}

void to_json(json& j, const ExperimentSpec& s) {
  json scal = json::array();
  for (auto x : s.scalings) scal.push_back(to_string(x));
  j = {{"kind", to_string(s.kind)},
       {"signals", s.signals},
       {"scales", s.scales},
       {"epsilons", s.epsilons},
       {"p", s.p_values},
       {"n_trunc", s.n_trunc},
       {"K", s.K},
       {"alpha", s.alpha},
       {"grid", s.grid},
       {"c_grid", s.c_grid},
       {"psi_grid", s.psi_grid},
       {"center", to_string(s.center)},
       {"scalings", scal},
       {"kappa", s.kappa},
       {"ebr_tau", s.ebr_tau},
       {"reps", s.reps},
       {"inner_mc", s.inner_mc},
       {"seed", s.seed},
       {"threads", s.threads},
       {"output", s.output},
       {"calibration", s.calibration},
       {"thresholds", s.thresholds}};
}

void to_json(json& j, const Cell& c) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  j = {{"metric", c.metric}, {"signal_kind", c.signal_kind},
       {"signal_params", c.signal_params}, {"p", c.p}, {"epsilon", c.epsilon},
       {"grid_value", num(c.grid_value)}, {"statistic", num(c.statistic)},
       {"std_error", num(c.std_error)}, {"seed", c.seed}, {"failed", c.failed}};
  if (!c.error.empty()) j["error"] = c.error;
}

void to_json(json& j, const ExperimentReport& r) {
  j = {{"spec", r.spec}, {"cells", r.cells}, {"summary", r.summary},
       {"passed", r.passed}, {"runtime", r.runtime}};
}

ModelConfig model_from_json(const json& j) {
  check_keys(j, {"epsilon", "p", "n_trunc"}, "model");
  return make_model(j.at("epsilon").get<double>(), get_or(j, "p", 0.0),
                    get_or<Index>(j, "n_trunc", 4096));
}

SignalParams signal_params_from_json(const json& j) {
  check_keys(j, {"beta", "Q", "c", "d", "N0", "epsilon", "p", "spike_index", "spike_mass"},
             "signal params");
  SignalParams p;
  p.beta = get_or(j, "beta", p.beta);
  p.Q = get_or(j, "Q", p.Q);
  p.c = get_or(j, "c", p.c);
  p.d = get_or(j, "d", p.d);
  p.N0 = get_or(j, "N0", p.N0);
  if (j.contains("epsilon")) p.epsilon = j["epsilon"].get<double>();
  if (j.contains("p")) p.p = j["p"].get<double>();
  p.spike_index = get_or<Index>(j, "spike_index", 0);
  p.spike_mass = get_or(j, "spike_mass", 0.0);
  return p;
}

Signal signal_from_json(const json& j, Index n_trunc) {
  check_keys(j, {"kind", "params", "coeffs", "seed"}, "signal");
  const SignalKind kind =
      signal_kind_from_string(get_or<std::string>(j, "kind", "custom"));
  const SignalParams prm =
      j.contains("params") ? signal_params_from_json(j["params"]) : SignalParams{};
  if (j.contains("coeffs")) return Signal(vec_from(j["coeffs"], "coeffs"), kind, prm);
  std::optional<std::uint64_t> seed;
  if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
  return generate_signal(kind, prm, n_trunc, seed);
}

ObservedData data_from_json(const json& j) {
  check_keys(j, {"x", "model", "seed"}, "data");
  ModelConfig m = model_from_json(j.at("model"));
  Vector x = vec_from(j.at("x"), "x");
  if (x.size() != m.n_trunc())
    throw std::invalid_argument("data length does not match model.n_trunc");
  return ObservedData{std::move(x), m, get_or<std::uint64_t>(j, "seed", 0)};
}

SignalSpec signal_spec_from_json(const json& j) {
  check_keys(j, {"kind", "params", "coeffs"}, "signal spec");
  SignalSpec s;
  s.kind = signal_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("params")) s.params = signal_params_from_json(j["params"]);
  if (j.contains("coeffs")) s.coeffs = vec_from(j["coeffs"], "coeffs");
  if (s.kind == SignalKind::Custom && s.coeffs.size() == 0)
    throw std::invalid_argument("custom signal needs coeffs");
  return s;
}

ScaleSpec scale_spec_from_json(const json& j) {
  check_keys(j, {"class", "beta", "Q", "c", "d", "N0"}, "scale");
  ScaleSpec s;
  s.name = j.at("class").get<std::string>();
  s.beta = get_or(j, "beta", s.beta);
  s.Q = get_or(j, "Q", s.Q);
  s.c = get_or(j, "c", s.c);
  s.d = get_or(j, "d", s.d);
  s.N0 = get_or(j, "N0", s.N0);
  s.build(std::max<Index>(s.N0, 1));  // rejects unknown class names early
  return s;
}

ExperimentSpec spec_from_json(const json& j) {
  check_keys(j,
             {"kind", "signals", "scales", "epsilons", "p", "n_trunc", "K", "alpha",
              "grid", "c_grid", "psi_grid", "center", "scalings", "kappa", "ebr_tau",
              "reps", "inner_mc", "seed", "threads", "output", "calibration",
              "thresholds"},
             "experiment spec");
  ExperimentSpec s;
  s.kind = experiment_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("signals"))
    for (const auto& x : j["signals"]) s.signals.push_back(signal_spec_from_json(x));
  if (j.contains("scales"))
    for (const auto& x : j["scales"]) s.scales.push_back(scale_spec_from_json(x));
  s.epsilons = doubles(j, "epsilons", s.epsilons);
  s.p_values = doubles(j, "p", s.p_values);
  s.n_trunc = get_or(j, "n_trunc", s.n_trunc);
  s.K = get_or(j, "K", s.K);
  s.alpha = get_or(j, "alpha", s.alpha);
  s.grid = doubles(j, "grid", s.grid);
  s.c_grid = doubles(j, "c_grid", s.c_grid);
  s.psi_grid = doubles(j, "psi_grid", s.psi_grid);
  s.center = center_rule_from_string(get_or<std::string>(j, "center", to_string(s.center)));
  if (j.contains("scalings")) {
    s.scalings.clear();
    for (const auto& x : j["scalings"])
      s.scalings.push_back(psi_scaling_from_string(x.get<std::string>()));
  }
  s.kappa = get_or(j, "kappa", s.kappa);
  s.ebr_tau = get_or(j, "ebr_tau", s.ebr_tau);
  s.reps = get_or(j, "reps", s.reps);
  s.inner_mc = get_or(j, "inner_mc", s.inner_mc);
  s.seed = get_or(j, "seed", s.seed);
  s.threads = get_or(j, "threads", s.threads);
  s.output = get_or(j, "output", s.output);
  if (j.contains("calibration")) {
    const json& c = j["calibration"];
    check_keys(c, {"enabled", "reps", "ratio_factor", "coverage_target", "size_tail",
                   "ratio_bound", "C", "c"},
               "calibration");
    auto& cal = s.calibration;
    cal.enabled = get_or(c, "enabled", cal.enabled);
    cal.reps = get_or(c, "reps", cal.reps);
    cal.ratio_factor = get_or(c, "ratio_factor", cal.ratio_factor);
    cal.coverage_target = get_or(c, "coverage_target", cal.coverage_target);
    cal.size_tail = get_or(c, "size_tail", cal.size_tail);
    if (c.contains("ratio_bound")) cal.ratio_bound = c["ratio_bound"].get<double>();
    if (c.contains("C")) cal.C = c["C"].get<double>();
    if (c.contains("c")) cal.c = c["c"].get<double>();
  }
  if (j.contains("thresholds")) {
    const json& t = j["thresholds"];
    check_keys(t, {"coverage", "size", "slope", "decay_factor", "relative_error"},
               "thresholds");
    auto& th = s.thresholds;
    th.coverage = get_or(t, "coverage", th.coverage);
    th.size = get_or(t, "size", th.size);
    th.slope = get_or(t, "slope", th.slope);
    th.decay_factor = get_or(t, "decay_factor", th.decay_factor);
    th.relative_error = get_or(t, "relative_error", th.relative_error);
  }
  validate_spec(s);
  return s;
}

Cell cell_from_json(const json& j) {
  Cell c;
  c.metric = j.at("metric").get<std::string>();
  c.signal_kind = j.at("signal_kind").get<std::string>();
  c.signal_params = j.at("signal_params").get<std::string>();
  c.p = j.at("p").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
  c.grid_value = num_or_nan(j.at("grid_value"));
  c.statistic = num_or_nan(j.at("statistic"));
  c.std_error = num_or_nan(j.at("std_error"));
  c.seed = j.at("seed").get<std::uint64_t>();
  c.failed = j.at("failed").get<bool>();
  c.error = get_or<std::string>(j, "error", "");
  return c;
}

ExperimentReport report_from_json(const json& j) {
  ExperimentReport r;
  r.spec = spec_from_json(j.at("spec"));
  for (const auto& c : j.at("cells")) r.cells.push_back(cell_from_json(c));
  r.summary = j.at("summary");
  r.passed = j.at("passed").get<bool>();
  r.runtime = j.at("runtime");
  return r;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace ddm
