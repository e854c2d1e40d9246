#include <gtest/gtest.h>

#include <cmath>

#include "ddm/credible_sets.hpp"

using namespace ddm;

namespace {

DdmPosterior point_mass(std::initializer_list<double> xs, Index I, double eps = 1.0) {
  Vector x(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double v : xs) x(i++) = v;
  ObservedData d{x, make_model(eps, 0.0, x.size()), 0};
  return DdmPosterior(d, make_params(2.0, 0.04), MixtureWeights::degenerate(I, x.size()),
                      Variant::Mixture);
}

}  // namespace

TEST(Radius, OrderStatistic) {
  std::vector<double> d{5, 1, 4, 2, 3, 6, 8, 7, 10, 9};
  const auto r = radius_from_distances(d, 0.5);
  EXPECT_EQ(r.value, 5.0);
  EXPECT_EQ(radius_from_distances(d, 0.05).value, 10.0);
  EXPECT_EQ(radius_from_distances(d, 0.9).value, 1.0);
  EXPECT_GT(r.std_error, 0.0);
  EXPECT_THROW(radius_from_distances(d, 1.0), std::invalid_argument);
  EXPECT_THROW(radius_from_distances({}, 0.5), std::invalid_argument);
}

TEST(Radius, OneDimensionalGaussian) {
  // Single component at I = 1, eps = 1: |theta - X| ~ sqrt(L) |Z|, median sqrt(2/3) * 0.6745.
  const auto post = point_mass({0.3, 0.0}, 1);
  const Vector c = post.component_mean(1);
  const auto r = radius_at_level(post, c, 0.5, 20000, 7);
  EXPECT_NEAR(r.value, 0.550718574906, 3 * r.std_error);
  EXPECT_LT(r.std_error, 0.01);
  const auto r4 = radius_at_level(post, c, 0.5, 80000, 7);
  EXPECT_NEAR(r4.std_error / r.std_error, 0.5, 0.15);
  EXPECT_THROW(radius_at_level(post, c, 0.5, 999, 7), std::invalid_argument);
}

TEST(Radius, MonotoneInLevelAndCenterShift) {
  const auto m = make_model(0.1, 0.0, 50);
  const auto d = simulate(m, generate_signal(SignalKind::SobolevBoundary, {}, 50), 2);
  const auto post = make_posterior(d, make_params(2.0, 0.04));
  const Vector c = post.mean();
  double prev = 0.0;
  for (double kappa : {0.9, 0.5, 0.2, 0.05}) {
    const double r = radius_at_level(post, c, kappa, 4000, 3).value;
    EXPECT_GE(r, prev);
    prev = r;
  }
  const double near = radius_at_level(post, c, 0.5, 4000, 3).value;
  const double far = radius_at_level(post, c + Vector::Constant(50, 1.0), 0.5, 4000, 3).value;
  EXPECT_GT(far, near + 5.0);
}

TEST(DefaultCenter, PointMassPicksProjection) {
  const auto post = point_mass({1.0, 2.0, 0.5, 0.1}, 3, 0.2);
  const auto dc = default_center(post, 2.0 / 3.0, 0.5, 4000, 11);
  EXPECT_NEAR(distance(dc.center, post.component_mean(3)), 0.0, 1e-15);
  EXPECT_LE(dc.r_star, dc.mean_radius);
  EXPECT_TRUE(dc.verified);
  EXPECT_GE(dc.verified_mass, 2.0 / 3.0);
}

TEST(DefaultCenter, TwoComponents) {
  ObservedData d{Vector::Zero(6), make_model(0.5, 0.0, 6), 0};
  d.x << 3.0, 2.0, 1.0, 0.0, 0.0, 0.0;
  Vector lw = Vector::Constant(6, -1e300);
  lw(0) = std::log(0.7);
  lw(2) = std::log(0.3);
  const DdmPosterior post(d, make_params(2.0, 0.04), MixtureWeights(lw), Variant::Mixture);
  const auto dc = default_center(post, 2.0 / 3.0, 0.5, 5000, 2);
  EXPECT_EQ(dc.candidates, 3);
  EXPECT_LE(dc.r_star, dc.mean_radius);
  EXPECT_TRUE(dc.verified);
  // The 0.7 component alone carries the 2/3 mass, so its projection wins.
  EXPECT_EQ(dc.chosen, "projection");
  EXPECT_EQ(dc.chosen_index, 1);
}

TEST(DefaultCenter, ZeroSignalRadiusScalesWithNoise) {
  for (double eps : {0.1, 0.01}) {
    const auto m = make_model(eps, 0.0, 500);
    const auto d = simulate(m, Signal(Vector::Zero(500)), 5);
    const auto post = make_posterior(d, make_params(2.0, 0.04));
    const auto dc = default_center(post, 2.0 / 3.0, 0.5, 2000, 1);
    EXPECT_LT(dc.r_star, 5 * eps);
    EXPECT_GT(dc.r_star, 0.1 * eps);
  }
}

TEST(Ball, MembershipAndDeterminism) {
  CredibleBall b{Vector::Zero(3), 1.0, 0.5, 2.0};
  Vector on(3), out(3);
  on << 2.0, 0.0, 0.0;
  out << 2.0, 0.01, 0.0;
  EXPECT_TRUE(contains(b, on));
  EXPECT_FALSE(contains(b, out));
  Vector longer = Vector::Zero(5);
  longer(4) = 1.5;
  EXPECT_TRUE(contains(b, longer));
  EXPECT_DOUBLE_EQ(distance(on, longer), 2.5);

  const auto m = make_model(0.05, 1.0, 100);
  const auto d = simulate(m, generate_signal(SignalKind::Analytic, {}, 100), 4);
  const auto post = make_posterior(d, make_params(2.0, 0.04));
  const auto a = default_ball(post, 0.5, 3.0, 2000, 8);
  const auto c = default_ball(post, 0.5, 3.0, 2000, 8);
  EXPECT_EQ(a.ball.center, c.ball.center);
  EXPECT_EQ(a.ball.radius, c.ball.radius);
  EXPECT_DOUBLE_EQ(a.ball.effective_radius(), 3.0 * a.radius.value);
  EXPECT_THROW(make_confidence_ball(a.ball.center, a.radius, -1.0), std::invalid_argument);
}
