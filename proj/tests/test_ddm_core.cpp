#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ddm/ddm_core.hpp"

using namespace ddm;

namespace {

ObservedData make_data(std::initializer_list<double> xs, double eps, double p) {
  Vector x(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double v : xs) x(i++) = v;
  return {x, make_model(eps, p, x.size()), 0};
}

// Log posterior of I, up to a constant, from the product of normal
// densities: N(X_i, sigma_i^2 + K eps^2) at X_i for i <= I, N(0, sigma_i^2)
// at X_i beyond.
Vector direct_log_weights(const ObservedData& d, const DdmParams& prm) {
  const Index n = d.size();
  const double Keps2 = prm.K * d.model.epsilon() * d.model.epsilon();
  const double log2pi = std::log(2 * std::numbers::pi);
  Vector lw(n);
  for (Index I = 1; I <= n; ++I) {
    double s = std::log(std::expm1(prm.alpha)) - prm.alpha * double(I);
    for (Index i = 1; i <= n; ++i) {
      const double v = d.model.variance(i), x = d.x(i - 1);
      if (i <= I)
        s += -0.5 * (log2pi + std::log(v + Keps2));
      else
        s += -0.5 * (log2pi + std::log(v)) - x * x / (2 * v);
    }
    lw(I - 1) = s;
  }
  return lw;
}

}  // namespace

TEST(Params, Constants) {
  const auto prm = make_params(2.0, 0.04);
  EXPECT_NEAR(prm.penalty(), 1.178612288668, 1e-12);
  EXPECT_NEAR(prm.a_K(), 0.047267445946, 1e-12);
  EXPECT_NEAR(prm.kappa0(), 0.153751610659, 1e-12);
  EXPECT_NEAR(prm.delta_sb(0.0), 0.0970927877586, 1e-12);
  EXPECT_NEAR(prm.delta_sb(1.0), 0.00237800519483, 1e-14);
  EXPECT_DOUBLE_EQ(prm.L(), 2.0 / 3.0);
  EXPECT_THROW(make_params(0.0, 0.1), std::invalid_argument);
  EXPECT_THROW(make_params(1.0, -0.1), std::invalid_argument);
}

TEST(Params, Regimes) {
  const auto ok = validate_params(2.0, 0.04);
  EXPECT_TRUE(ok.upper_regime);
  EXPECT_TRUE(ok.lower_regime);
  // a_K is negative once K + 1 > 2 e^{1/2}, so no alpha satisfies the lower regime.
  const auto big = validate_params(3.0, 0.01);
  EXPECT_TRUE(big.upper_regime);
  EXPECT_FALSE(big.lower_regime);
  EXPECT_EQ(big.kappa0, 0.0);
  EXPECT_FALSE(validate_params(1.0, 0.01).upper_regime);
  EXPECT_FALSE(validate_params(2.0, 0.05).lower_regime);
}

TEST(Weights, IncrementAndCrit) {
  const auto d = make_data({2.0, 0.0}, 1.0, 0.0);
  const auto prm = make_params(2.0, 0.04);
  const auto w = mixture_weights(d, prm);
  EXPECT_NEAR(w.log_weight(2) - w.log_weight(1), -0.589306144334, 1e-12);
  EXPECT_NEAR(crit(d, prm, 1), -2.821387711332, 1e-12);
  EXPECT_NEAR(crit(d, prm, 2), -1.642775422664, 1e-12);
  EXPECT_EQ(crit_argmin(d, prm), 1);
  EXPECT_EQ(eb_index(w), 1);
}

TEST(Weights, RecursionMatchesDirectFormula) {
  Rng rng(4);
  std::normal_distribution<double> nd;
  for (double p : {0.0, 1.0, 2.5}) {
    const auto m = make_model(0.1, p, 80);
    Vector x(80);
    for (Index i = 0; i < 80; ++i) x(i) = m.sigma(i + 1) * nd(rng) + (i < 5 ? 1.0 : 0.0);
    const ObservedData d{x, m, 0};
    const auto prm = make_params(2.0, 0.04);
    const auto w = mixture_weights(d, prm);
    const MixtureWeights ref(direct_log_weights(d, prm));
    for (Index I = 1; I <= 80; ++I)
      EXPECT_NEAR(w.log_weight(I), ref.log_weight(I), 1e-10 * (1 + std::abs(ref.log_weight(I))));
    EXPECT_NEAR(w.weights().sum(), 1.0, 1e-12);
    EXPECT_NEAR(w.tail()(0), 1.0, 1e-12);
  }
}

TEST(Weights, ExtremeValuesStayFinite) {
  const auto d = make_data({1e3, -1e3, 1e-300, 0.0}, 1e-3, 0.0);
  const auto w = mixture_weights(d, make_params(2.0, 0.04));
  EXPECT_TRUE(w.weights().allFinite());
  EXPECT_NEAR(w.weights().sum(), 1.0, 1e-12);
  EXPECT_EQ(eb_index(w), 2);
}

TEST(Weights, Degenerate) {
  const auto w = MixtureWeights::degenerate(3, 5);
  EXPECT_EQ(w.weight(3), 1.0);
  EXPECT_EQ(w.weight(1), 0.0);
  EXPECT_EQ(w.tail()(2), 1.0);
  EXPECT_EQ(w.tail()(3), 0.0);
  EXPECT_EQ(eb_index(w), 3);
  EXPECT_THROW(MixtureWeights::degenerate(6, 5), std::out_of_range);
}

TEST(EbIndex, TiesPickSmallest) {
  Vector lw(4);
  lw << 0.0, 1.0, 1.0, 0.5;
  EXPECT_EQ(eb_index(MixtureWeights(lw)), 2);
}

TEST(EbIndex, MatchesPenalizedCriterion) {
  const auto prm = make_params(2.0, 0.04);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto m = make_model(0.05, 0.0, 200);
    Vector th(200);
    for (Index i = 1; i <= 200; ++i) th(i - 1) = std::pow(double(i), -1.5);
    const auto d = simulate(m, Signal(th), s);
    EXPECT_EQ(eb_index(mixture_weights(d, prm)), crit_argmin(d, prm));
  }
}

TEST(PosteriorMean, UsesTailWeights) {
  const auto d = make_data({1.0, 2.0, 3.0}, 1.0, 0.0);
  Vector lw(3);
  lw << std::log(0.5), std::log(0.3), std::log(0.2);
  const MixtureWeights w(lw);
  const Vector m = posterior_mean(d, w);
  EXPECT_NEAR(m(0), 1.0, 1e-15);
  EXPECT_NEAR(m(1), 2.0 * 0.5, 1e-15);
  EXPECT_NEAR(m(2), 3.0 * 0.2, 1e-15);
}

TEST(Posterior, VariantsAndShrinkage) {
  const auto d = make_data({3.0, 0.1, 0.2, -0.1}, 0.5, 0.0);
  const auto prm = make_params(2.0, 0.04);
  const auto mix = make_posterior(d, prm);
  const auto eb = make_posterior(d, prm, Variant::EbIndex);
  const auto fb = make_posterior(d, prm, Variant::FullBayesShrunk);
  EXPECT_EQ(eb.weights().weight(mix.eb_index()), 1.0);
  EXPECT_EQ(fb.shrink(), 2.0 / 3.0);
  EXPECT_NEAR(fb.component_mean(1)(0), 2.0, 1e-15);
  EXPECT_EQ(variant_from_string("full-bayes-shrunk"), Variant::FullBayesShrunk);
  EXPECT_THROW(variant_from_string("median"), std::invalid_argument);
  EXPECT_THROW(make_posterior(d, prm, Variant::Mixture, 5), std::out_of_range);
  EXPECT_EQ(make_posterior(d, prm, Variant::Mixture, 2).i_max(), 2);
}

TEST(Posterior, ShrunkWeightsIncrement) {
  const auto d = make_data({1.5, 0.7}, 0.3, 1.0);
  const auto prm = make_params(2.0, 0.04);
  const auto w = shrunk_full_bayes_weights(d, prm);
  const double v = 0.09 * 4.0, Ke = 2.0 * 0.09;
  const double inc = 0.5 * 0.49 * Ke / (v * (v + Ke)) - 0.5 * std::log1p(Ke / v) - 0.04;
  EXPECT_NEAR(w.log_weight(2) - w.log_weight(1), inc, 1e-14);
}

TEST(Posterior, IgnoresDataBeyondIMax) {
  const auto m = make_model(0.1, 0.0, 10);
  Vector x = Vector::LinSpaced(10, 1.0, 0.1);
  ObservedData a{x, m, 0}, b{x, m, 0};
  b.x.tail(4).array() += 7.0;
  const auto prm = make_params(2.0, 0.04);
  EXPECT_EQ(mixture_weights(a, prm, 6).weights(), mixture_weights(b, prm, 6).weights());
}

TEST(Sampling, DeterministicAndCompressed) {
  const auto m = make_model(0.2, 0.5, 30);
  const auto d = simulate(m, Signal(Vector::Constant(30, 0.3)), 3);
  const auto post = make_posterior(d, make_params(2.0, 0.04));
  const PosteriorSample a(post, 200, 9), b(post, 200, 9);
  const Vector c = Vector::LinSpaced(30, 0.5, -0.5);
  const auto da = a.distances(c), db = b.distances(c);
  EXPECT_EQ(da, db);
  for (Index k = 0; k < 200; ++k) {
    EXPECT_NEAR(da[k], (a.draw(k) - c).norm(), 1e-12);
    const Index I = a.component(k);
    EXPECT_TRUE((a.draw(k).tail(30 - I).array() == 0.0).all());
  }
  const auto draws = sample_posterior(post, 200, 9);
  EXPECT_EQ(draws[17].theta, a.draw(17));
}

TEST(Sampling, ComponentMoments) {
  const auto d = make_data({1.0, -2.0, 0.5}, 0.4, 1.0);
  const auto prm = make_params(2.0, 0.04);
  const DdmPosterior post(d, prm, MixtureWeights::degenerate(3, 3), Variant::Mixture);
  const Index n = 40000;
  const PosteriorSample s(post, n, 5);
  Vector sum = Vector::Zero(3), sq = Vector::Zero(3);
  for (Index k = 0; k < n; ++k) {
    const Vector t = s.draw(k);
    sum += t;
    sq += t.cwiseProduct(t);
  }
  for (Index i = 0; i < 3; ++i) {
    const double mean = sum(i) / n, var = sq(i) / n - mean * mean;
    const double target = prm.L() * d.model.variance(i + 1);
    EXPECT_NEAR(mean, d.x(i), 4 * std::sqrt(target / n));
    EXPECT_NEAR(var / target, 1.0, 0.05);
  }
}

TEST(Sampling, ComponentFrequencies) {
  const auto d = make_data({0, 0, 0, 0}, 1.0, 0.0);
  Vector lw(4);
  lw << std::log(0.1), std::log(0.2), std::log(0.3), std::log(0.4);
  const DdmPosterior post(d, make_params(2.0, 0.04), MixtureWeights(lw), Variant::Mixture);
  const Index n = 50000;
  const PosteriorSample s(post, n, 1);
  std::vector<double> freq(4, 0.0);
  for (Index k = 0; k < n; ++k) freq[s.component(k) - 1] += 1.0 / n;
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(freq[i], 0.1 * (i + 1), 0.01);
}
