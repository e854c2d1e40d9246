#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <numbers>

#include "ddm/oracle_rates.hpp"

using namespace ddm;

namespace {

// O(N^2) reference: evaluates every sum from scratch.
std::pair<Index, double> brute_oracle(const Vector& th, const ModelConfig& m) {
  Index best = 0;
  double best_r = 0.0;
  for (Index I = 1; I <= m.n_trunc(); ++I) {
    double r = 0.0;
    for (Index i = 1; i <= I; ++i) r += m.variance(i);
    for (Index i = I + 1; i <= th.size(); ++i) r += th(i - 1) * th(i - 1);
    if (best == 0 || r < best_r) {
      best = I;
      best_r = r;
    }
  }
  return {best, best_r};
}

Signal harmonic(Index n) {
  Vector th(n);
  for (Index i = 1; i <= n; ++i) th(i - 1) = 1.0 / double(i);
  return Signal(th);
}

}  // namespace

TEST(Oracle, ZeroSignal) {
  for (double eps : {0.3, 0.01}) {
    const auto m = make_model(eps, 0.7, 50);
    const auto r = oracle(Signal(Vector::Zero(50)), m);
    EXPECT_EQ(r.i_star, 1);
    EXPECT_DOUBLE_EQ(r.rate_sq, eps * eps);
  }
}

TEST(Oracle, SingleCoordinate) {
  Vector th = Vector::Zero(20);
  th(0) = 1.0;
  const auto r = oracle(Signal(th), make_model(0.1, 0.0, 20));
  EXPECT_EQ(r.i_star, 1);
  EXPECT_NEAR(r.rate_sq, 0.01, 1e-15);
}

TEST(Oracle, HarmonicSignal) {
  const auto m = make_model(0.4, 0.0, 4096);
  const auto r = oracle(harmonic(4096), m);
  EXPECT_EQ(r.i_star, 2);
  EXPECT_NEAR(r.rate_sq, 0.714689956023, 1e-10);
  EXPECT_DOUBLE_EQ(r.rate_sq, r.variance_term + r.bias_term);
}

TEST(Oracle, MatchesBruteForce) {
  Rng rng(3);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 20; ++t) {
    const Index n = 60;
    Vector th(n);
    for (Index i = 0; i < n; ++i) th(i) = nd(rng) / (1.0 + i);
    const auto m = make_model(0.05 + 0.01 * t, 0.5 * (t % 3), n);
    const auto r = oracle(Signal(th), m);
    const auto b = brute_oracle(th, m);
    EXPECT_EQ(r.i_star, b.first);
    EXPECT_NEAR(r.rate_sq, b.second, 1e-12);
    EXPECT_GE(r.rate_sq, m.epsilon() * m.epsilon() * (1 - 1e-12));
    for (Index I = 1; I <= n; ++I)
      EXPECT_LE(r.rate_sq, local_rate_sq(Signal(th), m, I) + 1e-15);
  }
}

TEST(Oracle, ScalingNeverLowersRate) {
  const auto m = make_model(0.1, 1.0, 200);
  const auto s = harmonic(200);
  double prev = 0.0;
  for (double c : {1.0, 1.5, 3.0, 10.0}) {
    const double r = oracle(Signal(c * s.coeffs()), m).rate_sq;
    EXPECT_GE(r, prev);
    prev = r;
  }
}

TEST(SurrogateOracle, DirectCaseEqualsOracle) {
  Rng rng(8);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 30; ++t) {
    Vector th(100);
    for (Index i = 0; i < 100; ++i) th(i) = nd(rng) * std::pow(1.0 + i, -0.8);
    const auto m = make_model(0.02 * (1 + t % 5), 0.0, 100);
    EXPECT_EQ(surrogate_oracle(Signal(th), m).i_bar, oracle(Signal(th), m).i_star);
  }
  EXPECT_EQ(surrogate_oracle(Signal(Vector::Zero(10)), make_model(1.0, 2.0, 10)).i_bar, 1);
}

TEST(SurrogateOracle, IllPosedScan) {
  const Index n = 300;
  const auto m = make_model(0.05, 1.0, n);
  Vector th(n);
  for (Index i = 1; i <= n; ++i) th(i - 1) = std::pow(double(i), -2.5);
  const auto r = surrogate_oracle(Signal(th), m);
  // R(I) = I eps^2 + sum_{i > I} i^{-2p} theta_i^2, summed directly.
  auto R = [&](Index I) {
    double t = 0.0;
    for (Index i = I + 1; i <= n; ++i) t += std::pow(double(i), -7.0);
    return double(I) * 0.0025 + t;
  };
  Index best = 1;
  for (Index I = 2; I <= n; ++I)
    if (R(I) < R(best)) best = I;
  EXPECT_EQ(r.i_bar, best);
  EXPECT_NEAR(r.surr_rate_sq, R(best), 1e-12);
  EXPECT_NEAR(r.sigma_sum, m.sigma_sum(best), 1e-15);
}

TEST(Ebr, ZeroAndSobolev) {
  const auto zero = ebr_check(Signal(Vector::Zero(30)), make_model(0.1, 0.0, 30), 0.5);
  EXPECT_TRUE(zero.member);
  EXPECT_EQ(zero.ratio, 0.0);

  SignalParams prm;
  const auto s = generate_signal(SignalKind::SobolevBoundary, prm, 4096);
  const auto m = make_model(0.1, 0.0, 4096);
  const auto r = ebr_check(s, m, 2.0);
  // Independent evaluation of the tail beyond the surrogate oracle.
  double tail = 0.0;
  for (Index i = r.i_bar + 1; i <= 4096; ++i) tail += std::pow(double(i), -3.0);
  EXPECT_EQ(r.i_bar, 4);
  EXPECT_NEAR(r.ratio, tail / (4 * 0.01), 1e-10);
  EXPECT_NEAR(r.ratio, 0.6098709081877, 1e-10);
  EXPECT_TRUE(r.member);
  EXPECT_FALSE(ebr_check(s, m, 0.5).member);
}

TEST(PolishedTail, Examples) {
  Vector geo(40);
  for (Index i = 1; i <= 40; ++i) geo(i - 1) = std::pow(2.0, -double(i));
  EXPECT_TRUE(pt_check(Signal(geo), 2.0, 1, 2.0));

  Vector spike = Vector::Zero(40);
  spike(9) = 1.0;
  EXPECT_FALSE(pt_check(Signal(spike), 100.0, 1, 2.0));
  EXPECT_TRUE(pt_check(Signal(Vector::Zero(40)), 1.0, 1, 2.0));
  EXPECT_THROW(pt_check(Signal(geo), 0.5, 1, 2.0), std::invalid_argument);
  EXPECT_THROW(pt_check(Signal(geo), 2.0, 1, 1.5), std::invalid_argument);
}

TEST(PolishedTail, ImpliedEbrTau) {
  EXPECT_DOUBLE_EQ(pt_to_ebr_tau(2.0, 1, 2.0, 0.0), 6.0);
  EXPECT_DOUBLE_EQ(pt_to_ebr_tau(1.0, 1, 2.0, 0.0), 3.0);
  EXPECT_DOUBLE_EQ(pt_to_ebr_tau(1.0, 2, 2.0, 1.0), 3.0 * 125.0);
}

TEST(SigmaConstants, RemarkFormulas) {
  const auto k = sigma_constants(0.0, 3.0, 1.0, 2.0);
  EXPECT_DOUBLE_EQ(k.K1, 1.0);
  EXPECT_DOUBLE_EQ(k.K2, 4.0);
  EXPECT_DOUBLE_EQ(k.K4, 0.5);
  EXPECT_DOUBLE_EQ(k.tau, 4.0);
  EXPECT_DOUBLE_EQ(k.K5, 1.0);
  EXPECT_NEAR(k.K3, 2.268335926611, 1e-11);
  EXPECT_DOUBLE_EQ(sigma_constants(1.0, 2.0, 1.0, 1.0).K2, 27.0);
  EXPECT_NEAR(sigma_constants(1.0, 2.0, 1.0, 1.0).tau, 2.519842099790, 1e-12);
  EXPECT_GT(sigma_constants(2.0, 1.0, 1.0, 1.0).tau, 2.0);
  EXPECT_THROW(sigma_constants(0.0, 0.5, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(sigma_constants(0.0, 1.0, 0.0, 1.0), std::invalid_argument);
}

TEST(SigmaConditions, HoldUpToTenThousand) {
  for (double p : {0.0, 0.5, 1.0}) {
    const auto rep = verify_sigma_conditions(make_model(0.1, p, 10), 10000);
    EXPECT_TRUE(rep.ok()) << "p = " << p << ", first violation: "
                          << (rep.violations.empty() ? "" : rep.violations[0].condition);
    EXPECT_GT(rep.checks, 80000u);
  }
}

TEST(SigmaConditions, CustomGrids) {
  const auto rep = verify_sigma_conditions(2.0, 500, {1.0, 4.0}, {0.05}, {1.2});
  EXPECT_TRUE(rep.ok());
  EXPECT_EQ(rep.rho_grid.size(), 2u);
  EXPECT_THROW(verify_sigma_conditions(0.0, 0, {1.0}, {1.0}, {1.0}), std::invalid_argument);
}

TEST(Minimax, EllipsoidAndHyperrectangle) {
  SmoothnessClass ell{ClassKind::Ellipsoid, Vector(100), "test"};
  for (Index i = 1; i <= 100; ++i) ell.a(i - 1) = 1.0 / double(i);
  const auto r = minimax_rate(ell, make_model(0.1, 0.0, 100));
  EXPECT_EQ(r.i_star, 5);
  EXPECT_NEAR(r.rate_sq, 0.05 + 1.0 / 36.0, 1e-15);

  SmoothnessClass box{ClassKind::Hyperrectangle, Vector::Zero(50), "test"};
  box.a(0) = 1.0;
  const auto b = minimax_rate(box, make_model(0.1, 0.0, 50));
  EXPECT_EQ(b.i_star, 1);
  EXPECT_NEAR(b.rate_sq, 0.01, 1e-15);
}

TEST(Minimax, RejectsBadSequences) {
  SmoothnessClass c{ClassKind::Ellipsoid, Vector(3), "bad"};
  c.a << 1.0, 2.0, 0.5;
  EXPECT_THROW(minimax_rate(c, make_model(0.1, 0.0, 3)), std::invalid_argument);
  c.a << 0.05, 0.01, 0.0;
  EXPECT_THROW(minimax_rate(c, make_model(0.1, 0.0, 3)), std::invalid_argument);
}

TEST(Minimax, SobolevRateExponent) {
  for (double p : {0.0, 1.0})
    for (double beta : {1.0, 2.0}) {
      const auto cls = sobolev_ellipsoid(beta, 1.0, 200000);
      std::vector<double> lx, ly;
      for (double eps : {1e-3, 3e-4, 1e-4}) {
        const auto m = make_model(eps, p, 200000);
        lx.push_back(std::log(eps * eps));
        ly.push_back(std::log(minimax_rate(cls, m).rate_sq));
      }
      const double slope = (ly.back() - ly.front()) / (lx.back() - lx.front());
      EXPECT_NEAR(slope, 2 * beta / (2 * beta + 2 * p + 1), 0.03) << beta << " " << p;
    }
}

TEST(Covers, LocalRatesStayBelowGlobal) {
  const auto m = make_model(0.05, 0.5, 400);
  for (const auto& cls : {sobolev_ellipsoid(1.0, 1.0, 400), sobolev_hyperrectangle(1.0, 1.0, 400),
                          analytic_ellipsoid(1.0, 1.0, 1.0, 400),
                          parametric_hyperrectangle(5, 1.0, 400)}) {
    const auto rep = covers_check(cls, m, 300, 17);
    EXPECT_TRUE(rep.ok()) << cls.label << " " << rep.worst_ratio;
    EXPECT_LE(rep.worst_ratio, local_global_constant(cls.kind));
    EXPECT_GE(rep.worst_ratio, m.epsilon() * m.epsilon() / rep.minimax_rate_sq);
  }
  EXPECT_NEAR(local_global_constant(ClassKind::Ellipsoid), 4 * std::numbers::pi * std::numbers::pi, 1e-12);
}

TEST(Covers, BoundarySignalsInEllipsoid) {
  const auto m = make_model(0.05, 0.0, 300);
  const auto cls = sobolev_ellipsoid(1.0, 1.0, 300);
  const double R = minimax_rate(cls, m).rate_sq;
  for (Index j = 1; j <= 300; ++j) {
    Vector th = Vector::Zero(300);
    th(j - 1) = cls.a(j - 1);
    ASSERT_TRUE(contains(cls, Signal(th)));
    EXPECT_LE(oracle(Signal(th), m).rate_sq, 4 * std::numbers::pi * std::numbers::pi * R);
  }
}

TEST(Covers, MonotoneLinearWeights) {
  Rng rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> nd;
  const auto m = make_model(0.3, 0.5, 50);
  for (int t = 0; t < 1000; ++t) {
    Vector lam(50), th(50);
    for (Index i = 0; i < 50; ++i) {
      lam(i) = u(rng);
      th(i) = nd(rng) * (t % 2 ? 1.0 : 0.1);
    }
    std::sort(lam.data(), lam.data() + 50, std::greater<double>());
    EXPECT_GE(linear_cover_margin(lam, Signal(th), m), 1.0);
  }
}
