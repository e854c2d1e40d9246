#include "ddm/credible_sets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ddm {

namespace {

constexpr double kCandidateWeight = 1e-3;

Index quantile_rank(double q, Index n) {
  const double r = std::ceil(q * static_cast<double>(n) - 1e-9);
  return std::clamp<Index>(static_cast<Index>(r), 1, n);
}

void check_kappa(double kappa) {
  if (!(kappa > 0.0 && kappa < 1.0))
    throw std::invalid_argument("kappa must lie in (0, 1)");
}

}  // namespace

RadiusEstimate radius_from_distances(std::vector<double> d, double kappa) {
  check_kappa(kappa);
  if (d.empty()) throw std::invalid_argument("no distances");
  std::sort(d.begin(), d.end());
  const Index n = static_cast<Index>(d.size());
  const double q = 1.0 - kappa;
  const double half = std::sqrt(static_cast<double>(n) * kappa * q);
  const double mid = q * static_cast<double>(n);
  const Index lo = std::clamp<Index>(static_cast<Index>(std::floor(mid - half)), 1, n);
  const Index hi = std::clamp<Index>(static_cast<Index>(std::ceil(mid + half)), 1, n);
  RadiusEstimate r;
  r.value = d[static_cast<std::size_t>(quantile_rank(q, n) - 1)];
  r.level = kappa;
  r.mc_samples = n;
  r.std_error = 0.5 * (d[static_cast<std::size_t>(hi - 1)] - d[static_cast<std::size_t>(lo - 1)]);
  return r;
}

RadiusEstimate radius_at_level(const DdmPosterior& posterior,
                               const Vector& center, double kappa,
                               Index mc_samples, std::uint64_t seed) {
  check_kappa(kappa);
  if (mc_samples < 1000) throw std::invalid_argument("mc_samples must be at least 1000");
  PosteriorSample s(posterior, mc_samples, seed);
  return radius_from_distances(s.distances(center), kappa);
}

DefaultCenter default_center(const DdmPosterior& posterior, double p_level,
                             double varsigma, Index mc_samples,
                             std::uint64_t seed) {
  if (!(p_level > 0.0 && p_level < 1.0))
    throw std::invalid_argument("p_level must lie in (0, 1)");
  if (!(varsigma >= 0.0)) throw std::invalid_argument("varsigma must be nonnegative");
  if (mc_samples < 1000) throw std::invalid_argument("mc_samples must be at least 1000");

  const double kappa = 1.0 - p_level;
  PosteriorSample shared(posterior, mc_samples, derive_seed(seed, 0));

  std::vector<Index> indices{posterior.eb_index()};
  const Vector& w = posterior.weights().weights();
  for (Index I = 1; I <= posterior.i_max(); ++I)
    if (w(I - 1) >= kCandidateWeight && I != indices.front()) indices.push_back(I);

  DefaultCenter out;
  out.center = posterior.mean();
  out.chosen = "posterior-mean";
  out.r_star = radius_from_distances(shared.distances(out.center), kappa).value;
  out.mean_radius = out.r_star;
  out.candidates = 1 + static_cast<Index>(indices.size());
  for (Index I : indices) {
    Vector c = posterior.component_mean(I);
    const double r = radius_from_distances(shared.distances(c), kappa).value;
    if (r < out.r_star) {
      out.r_star = r;
      out.center = std::move(c);
      out.chosen = "projection";
      out.chosen_index = I;
    }
  }

  PosteriorSample fresh(posterior, mc_samples, derive_seed(seed, 1));
  const double limit = (1.0 + varsigma) * out.r_star;
  Index inside = 0;
  for (double d : fresh.distances(out.center)) inside += d <= limit ? 1 : 0;
  out.verified_mass = static_cast<double>(inside) / static_cast<double>(mc_samples);
  out.verified = out.verified_mass >= p_level;
  return out;
}

CredibleBall make_confidence_ball(const Vector& center,
                                  const RadiusEstimate& radius, double M) {
  if (!(M >= 0.0)) throw std::invalid_argument("M must be nonnegative");
  return CredibleBall{center, radius.value, radius.level, M};
}

double distance(const Vector& a, const Vector& b) {
  const Index n = std::max(a.size(), b.size());
  double s = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double d = (i < a.size() ? a(i) : 0.0) - (i < b.size() ? b(i) : 0.0);
    s += d * d;
  }
  return std::sqrt(s);
}

bool contains(const CredibleBall& ball, const Vector& theta) {
  return distance(theta, ball.center) <= ball.effective_radius();
}

DefaultBall default_ball(const DdmPosterior& posterior, double kappa, double M,
                         Index mc_samples, std::uint64_t seed) {
  DefaultBall out;
  out.center = default_center(posterior, 2.0 / 3.0, 0.5, mc_samples, derive_seed(seed, 0));
  out.radius = radius_at_level(posterior, out.center.center, kappa, mc_samples,
                               derive_seed(seed, 1));
  out.ball = make_confidence_ball(out.center.center, out.radius, M);
  return out;
}

}  // namespace ddm
