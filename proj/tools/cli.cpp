#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ddm/json_io.hpp"

namespace ddm::cli {

namespace {

struct SimulateArgs {
  std::string signal_file;
  std::string kind = "zero";
  SignalParams params;
  double eps = 0.1;
  double p = 0.0;
  Index n = 4096;
  std::uint64_t seed = 1;
  std::string out;
};

struct InferenceArgs {
  std::string data_file;
  double K = 2.0;
  double alpha = 0.04;
  std::string variant = "mixture";
  Index i_max = 0;
  double kappa = 0.5;
  double M = 1.0;
  Index mc = 2000;
  std::uint64_t seed = 1;
  std::string out;
};

struct ClassifyArgs {
  std::string signal_file;
  double eps = 0.1;
  double p = 0.0;
  Index n = 0;
  double tau = 5.0;
  double L0 = 2.0;
  Index N0 = 1;
  double rho0 = 2.0;
};

struct ExperimentArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 0;
  bool check = false;
};

struct ConstantsArgs {
  double p = 0.0;
  Index n_max = 10000;
  double K = 2.0;
  double alpha = 0.04;
  Index k_max = 200;
};

void emit(const json& j, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << j.dump(2) << '\n';
  } else {
    write_json_file(j, path);
  }
}

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  const ModelConfig model = make_model(a.eps, a.p, a.n);
  Signal sig;
  if (!a.signal_file.empty()) {
    sig = signal_from_json(read_json_file(a.signal_file), a.n);
  } else {
    SignalParams prm = a.params;
    const SignalKind kind = signal_kind_from_string(a.kind);
    if (kind == SignalKind::Deceptive) {
      prm.epsilon = a.eps;
      prm.p = a.p;
    }
    sig = generate_signal(kind, prm, a.n, a.seed);
  }
  emit(json(simulate(model, sig.resized(a.n), a.seed)), a.out, out);
  return kOk;
}

int run_posterior(const InferenceArgs& a, std::ostream& out) {
  const ObservedData data = data_from_json(read_json_file(a.data_file));
  const DdmPosterior post =
      make_posterior(data, make_params(a.K, a.alpha), variant_from_string(a.variant), a.i_max);
  const Vector mean = post.mean();
  json j = {{"variant", a.variant},
            {"weights", post.weights()},
            {"eb_index", post.eb_index()},
            {"posterior_mean", std::vector<double>(mean.data(), mean.data() + mean.size())}};
  emit(j, a.out, out);
  return kOk;
}

int run_ball(const InferenceArgs& a, std::ostream& out) {
  const ObservedData data = data_from_json(read_json_file(a.data_file));
  const DdmPosterior post =
      make_posterior(data, make_params(a.K, a.alpha), variant_from_string(a.variant), a.i_max);
  const DefaultBall b = default_ball(post, a.kappa, a.M, a.mc, a.seed);
  json j = {{"ball", b.ball}, {"radius", b.radius}, {"default_center", b.center}};
  emit(j, a.out, out);
  return kOk;
}

int run_classify(const ClassifyArgs& a, std::ostream& out) {
  const json js = read_json_file(a.signal_file);
  Signal sig = signal_from_json(js, a.n > 0 ? a.n : 4096);
  const Index n = a.n > 0 ? a.n : sig.size();
  sig = sig.resized(n);
  const ModelConfig model = make_model(a.eps, a.p, n);
  json j = {{"model", model},
            {"oracle", oracle(sig, model)},
            {"surrogate", surrogate_oracle(sig, model)},
            {"ebr", ebr_check(sig, model, a.tau)},
            {"pt",
             {{"L0", a.L0},
              {"N0", a.N0},
              {"rho0", a.rho0},
              {"member", pt_check(sig, a.L0, a.N0, a.rho0)},
              {"implied_ebr_tau", pt_to_ebr_tau(a.L0, a.N0, a.rho0, a.p)}}}};
  out << j.dump(2) << '\n';
  return kOk;
}

int run_experiment_cmd(const ExperimentArgs& a, bool verbose, std::ostream& out,
                       std::ostream& err) {
  ExperimentSpec spec = spec_from_json(read_json_file(a.config));
  if (a.seed) spec.seed = *a.seed;
  if (a.threads > 0) spec.threads = a.threads;
  if (!a.out.empty()) spec.output = a.out;
  if (verbose)
    err << "running " << to_string(spec.kind) << " with "
        << resolve_threads(spec.threads) << " thread(s)\n";
  const ExperimentReport report = run_experiment(spec);
  const auto dir = write_outputs(report, spec.output);
  json j = {{"kind", to_string(spec.kind)},
            {"output", dir.string()},
            {"passed", report.passed},
            {"summary", report.summary},
            {"runtime", report.runtime}};
  out << j.dump(2) << '\n';
  if (a.check && !report.passed) {
    err << "acceptance thresholds not met\n";
    return kCheckFailed;
  }
  return kOk;
}

int run_constants(const ConstantsArgs& a, std::ostream& out) {
  const ModelConfig model = make_model(1.0, a.p, 1);
  const SigmaReport sigma = verify_sigma_conditions(model, a.n_max);
  Index lemma2_violations = 0;
  for (Index k = 1; k <= a.k_max; ++k)
    for (double r : {0.1, 1.0, 10.0})
      lemma2_violations += ball_volume_bound(k, r).holds() ? 0 : 1;
  const auto at_tau = sigma_constants(a.p, 1.0, 1.0, 1.0);
  json j = {{"sigma_constants", sigma_constants(a.p, 2.0, a.alpha / 20.0, at_tau.tau)},
            {"sigma_conditions", sigma},
            {"params", validate_params(a.K, a.alpha, a.p)},
            {"c_or_reference", c_or_reference(a.p, make_params(a.K, a.alpha))},
            {"lemma2", {{"k_max", a.k_max}, {"radii", {0.1, 1.0, 10.0}},
                        {"violations", lemma2_violations}}}};
  out << j.dump(2) << '\n';
  return sigma.ok() && lemma2_violations == 0 ? kOk : kCheckFailed;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Data-dependent measures for the inverse Gaussian sequence model", "ddm"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Progress messages on stderr");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate observations for a signal");
  c_sim->add_option("--signal", sim.signal_file, "Signal JSON file");
  c_sim->add_option("--kind", sim.kind, "Generator kind when no signal file is given");
  c_sim->add_option("--beta", sim.params.beta);
  c_sim->add_option("--Q", sim.params.Q);
  c_sim->add_option("--c", sim.params.c);
  c_sim->add_option("--d", sim.params.d);
  c_sim->add_option("--N0", sim.params.N0);
  c_sim->add_option("--eps", sim.eps, "Noise level")->required();
  c_sim->add_option("--p", sim.p, "Ill-posedness exponent");
  c_sim->add_option("--n", sim.n, "Truncation level");
  c_sim->add_option("--seed", sim.seed);
  c_sim->add_option("--out", sim.out, "Output file (stdout when omitted)");

  InferenceArgs post;
  auto* c_post = app.add_subcommand("posterior", "Posterior weights, eb index and mean");
  InferenceArgs ball;
  auto* c_ball = app.add_subcommand("ball", "Default credible ball");
  for (auto [cmd, a] : {std::pair{c_post, &post}, std::pair{c_ball, &ball}}) {
    cmd->add_option("--data", a->data_file, "Data JSON from `simulate`")->required();
    cmd->add_option("--K", a->K);
    cmd->add_option("--alpha", a->alpha);
    cmd->add_option("--variant", a->variant, "mixture | eb-index | full-bayes-shrunk");
    cmd->add_option("--i-max", a->i_max, "Largest component index (0: data length)");
    cmd->add_option("--out", a->out, "Output file (stdout when omitted)");
  }
  c_ball->add_option("--kappa", ball.kappa, "Radius level");
  c_ball->add_option("--M", ball.M, "Inflation factor");
  c_ball->add_option("--mc", ball.mc, "Posterior draws");
  c_ball->add_option("--seed", ball.seed);

  ClassifyArgs cls;
  auto* c_cls = app.add_subcommand("classify", "Oracle, surrogate oracle, EBR and PT membership");
  c_cls->add_option("--signal", cls.signal_file, "Signal JSON file")->required();
  c_cls->add_option("--eps", cls.eps)->required();
  c_cls->add_option("--p", cls.p);
  c_cls->add_option("--n", cls.n, "Truncation level (default: signal length)");
  c_cls->add_option("--tau", cls.tau, "EBR threshold");
  c_cls->add_option("--L0", cls.L0);
  c_cls->add_option("--N0", cls.N0);
  c_cls->add_option("--rho0", cls.rho0);

  ExperimentArgs exp;
  auto* c_exp = app.add_subcommand("experiment", "Run an experiment from a JSON config");
  c_exp->add_option("--config", exp.config, "Experiment JSON")->required();
  c_exp->add_option("--seed", exp.seed, "Override the master seed");
  c_exp->add_option("--out", exp.out, "Output root directory");
  c_exp->add_option("--threads", exp.threads, "Worker threads (default: DDM_THREADS or all cores)");
  c_exp->add_flag("--check", exp.check, "Exit 2 when acceptance thresholds fail");

  ConstantsArgs cst;
  auto* c_cst = app.add_subcommand("verify-constants",
                                   "Sigma conditions, parameter regimes and the volume bound");
  c_cst->add_option("--p", cst.p);
  c_cst->add_option("--nmax", cst.n_max);
  c_cst->add_option("--K", cst.K);
  c_cst->add_option("--alpha", cst.alpha);
  c_cst->add_option("--kmax", cst.k_max, "Largest dimension for the volume sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (c_sim->parsed()) return run_simulate(sim, out);
    if (c_post->parsed()) return run_posterior(post, out);
    if (c_ball->parsed()) return run_ball(ball, out);
    if (c_cls->parsed()) return run_classify(cls, out);
    if (c_exp->parsed()) return run_experiment_cmd(exp, verbose, out, err);
    if (c_cst->parsed()) return run_constants(cst, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  err << app.help();
  return kUsage;
}

}  // namespace ddm::cli
