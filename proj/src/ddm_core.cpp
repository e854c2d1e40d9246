#include "ddm/ddm_core.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ddm {

double DdmParams::c_alpha() const { return std::expm1(alpha); }

double DdmParams::log_prior(Index I) const {
  return std::log(c_alpha()) - alpha * static_cast<double>(I);
}

double DdmParams::a_K() const { return 0.25 - 0.5 * std::log((K + 1.0) / 2.0); }

double DdmParams::penalty() const { return std::log(K + 1.0) + 2.0 * alpha; }

double DdmParams::kappa0() const { return (a_K() - alpha) / a_K(); }

double DdmParams::delta_sb(double p) const {
  const double a = a_K();
  if (!(a > alpha)) return 0.0;
  const double base = (a - alpha) / (4.0 * std::numbers::e * a);
  const double v =
      std::sqrt(K * (2.0 * p + 1.0) / (K + 1.0)) * std::pow(base, p + 0.5);
  return std::min(1.0, v);
}

DdmParams make_params(double K, double alpha) {
  if (!(K > 0.0) || !std::isfinite(K)) throw std::invalid_argument("K must be positive");
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("alpha must be positive");
  return DdmParams{K, alpha};
}

ParamDiagnostics validate_params(double K, double alpha, double p) {
  const DdmParams prm = make_params(K, alpha);
  ParamDiagnostics d;
  d.K = K;
  d.alpha = alpha;
  d.a_K = prm.a_K();
  d.upper_regime = K >= 1.87;
  d.lower_regime = alpha < d.a_K;
  d.penalty = prm.penalty();
  d.delta_sb = prm.delta_sb(p);
  d.kappa0 = d.lower_regime ? prm.kappa0() : 0.0;
  return d;
}

MixtureWeights::MixtureWeights(const Vector& log_unnormalized) {
  const Index n = log_unnormalized.size();
  if (n < 1) throw std::invalid_argument("empty weight vector");
  const double m = log_unnormalized.maxCoeff();
  if (!std::isfinite(m)) throw std::invalid_argument("log weights must have a finite maximum");
  // std::exp rather than the vectorized exp, which clamps tiny arguments to a
  // subnormal instead of returning zero.
  auto exp = [](double v) { return std::exp(v); };
  const Vector shifted = log_unnormalized.array() - m;
  const Vector e = shifted.unaryExpr(exp);
  const double total = e.sum();
  log_w_ = shifted.array() - std::log(total);
  w_ = e / total;
  tail_.resize(n);
  double acc = 0.0;
  for (Index i = n - 1; i >= 0; --i) {
    acc += w_(i);
    tail_(i) = acc;
  }
}

MixtureWeights MixtureWeights::degenerate(Index I, Index i_max) {
  if (I < 1 || I > i_max) throw std::out_of_range("component outside [1, i_max]");
  Vector lw = Vector::Constant(i_max, -std::numeric_limits<double>::infinity());
  lw(I - 1) = 0.0;
  return MixtureWeights(lw);
}

namespace {

Index resolve_i_max(const ObservedData& data, Index i_max) {
  if (i_max == 0) i_max = data.size();
  if (i_max < 1 || i_max > data.size())
    throw std::out_of_range("i_max must lie in [1, data length]");
  return i_max;
}

}  // namespace

namespace {

// Turns increments d_I = log w_I - log w_{I-1} (d_1 = log w_1) into log
// weights shifted so the largest is zero. Summing outward from the argmax
// keeps entries near the mode accurate even when early coordinates add
// terms many orders of magnitude larger.
Vector log_weights_from_increments(const Vector& inc) {
  const Index n = inc.size();
  long double acc = 0.0L, best = 0.0L;
  Index top = 0;
  for (Index i = 0; i < n; ++i) {
    acc += inc(i);
    if (i == 0 || acc > best) {
      best = acc;
      top = i;
    }
  }
  Vector lw(n);
  lw(top) = 0.0;
  for (Index i = top + 1; i < n; ++i) lw(i) = lw(i - 1) + inc(i);
  for (Index i = top - 1; i >= 0; --i) lw(i) = lw(i + 1) - inc(i + 1);
  return lw;
}

template <class Term>
Vector log_weights(const ObservedData& data, const DdmParams& params, Index i_max,
                   Term term) {
  i_max = resolve_i_max(data, i_max);
  const double Keps2 = params.K * data.model.epsilon() * data.model.epsilon();
  Vector inc(i_max);
  for (Index I = 1; I <= i_max; ++I) {
    const double v = data.model.variance(I);
    const double x = data.x(I - 1);
    inc(I - 1) = term(x, v, Keps2) - 0.5 * std::log1p(Keps2 / v) +
                 (I == 1 ? params.log_prior(1) : -params.alpha);
  }
  return log_weights_from_increments(inc);
}

}  // namespace

Vector mixture_log_weights_unnormalized(const ObservedData& data,
                                        const DdmParams& params, Index i_max) {
  return log_weights(data, params, i_max,
                     [](double x, double v, double) { return x * x / (2.0 * v); });
}

MixtureWeights mixture_weights(const ObservedData& data,
                               const DdmParams& params, Index i_max) {
  return MixtureWeights(mixture_log_weights_unnormalized(data, params, i_max));
}

MixtureWeights shrunk_full_bayes_weights(const ObservedData& data,
                                         const DdmParams& params,
                                         Index i_max) {
  return MixtureWeights(log_weights(data, params, i_max, [](double x, double v, double Ke) {
    return 0.5 * x * x * Ke / (v * (v + Ke));
  }));
}

Index eb_index(const MixtureWeights& weights) {
  const Vector& lw = weights.log_weights();
  Index best = 0;
  for (Index i = 1; i < lw.size(); ++i)
    if (lw(i) > lw(best)) best = i;
  return best + 1;
}

double crit(const ObservedData& data, const DdmParams& params, Index I) {
  if (I < 1 || I > data.size()) throw std::out_of_range("I outside [1, n]");
  const double eps2 = data.model.epsilon() * data.model.epsilon();
  return -data.x.head(I).squaredNorm() +
         params.penalty() * eps2 * static_cast<double>(I);
}

Index crit_argmin(const ObservedData& data, const DdmParams& params,
                  Index i_max) {
  i_max = resolve_i_max(data, i_max);
  Index best = 1;
  double best_val = crit(data, params, 1);
  for (Index I = 2; I <= i_max; ++I) {
    const double c = crit(data, params, I);
    if (c < best_val) {
      best_val = c;
      best = I;
    }
  }
  return best;
}

Vector posterior_mean(const ObservedData& data, const MixtureWeights& weights) {
  Vector m = Vector::Zero(data.size());
  const Index k = std::min(weights.i_max(), data.size());
  m.head(k) = data.x.head(k).cwiseProduct(weights.tail().head(k));
  return m;
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Mixture: return "mixture";
    case Variant::EbIndex: return "eb-index";
    case Variant::FullBayesShrunk: return "full-bayes-shrunk";
  }
  return "mixture";
}

Variant variant_from_string(const std::string& name) {
  for (auto v : {Variant::Mixture, Variant::EbIndex, Variant::FullBayesShrunk})
    if (to_string(v) == name) return v;
  throw std::invalid_argument("unknown posterior variant '" + name + "'");
}

DdmPosterior::DdmPosterior(ObservedData data, DdmParams params,
                           MixtureWeights weights, Variant variant)
    : data_(std::move(data)),
      params_(params),
      weights_(std::move(weights)),
      variant_(variant) {
  if (weights_.i_max() > data_.size())
    throw std::invalid_argument("weights extend beyond the data");
}

Vector DdmPosterior::component_mean(Index I) const {
  if (I < 1 || I > i_max()) throw std::out_of_range("component outside [1, i_max]");
  Vector m = Vector::Zero(data_.size());
  m.head(I) = shrink() * data_.x.head(I);
  return m;
}

Vector DdmPosterior::mean() const {
  return shrink() * posterior_mean(data_, weights_);
}

DdmPosterior make_posterior(const ObservedData& data, const DdmParams& params,
                            Variant variant, Index i_max) {
  switch (variant) {
    case Variant::Mixture:
      return DdmPosterior(data, params, mixture_weights(data, params, i_max), variant);
    case Variant::EbIndex: {
      const auto w = mixture_weights(data, params, i_max);
      return DdmPosterior(data, params,
                          MixtureWeights::degenerate(eb_index(w), w.i_max()), variant);
    }
    case Variant::FullBayesShrunk:
      return shrunk_full_bayes(data, params, i_max);
  }
  throw std::invalid_argument("unknown variant");
}

DdmPosterior shrunk_full_bayes(const ObservedData& data,
                               const DdmParams& params, Index i_max) {
  return DdmPosterior(data, params, shrunk_full_bayes_weights(data, params, i_max),
                      Variant::FullBayesShrunk);
}

PosteriorSample::PosteriorSample(const DdmPosterior& posterior, Index n_draws,
                                 std::uint64_t seed) {
  if (n_draws < 1) throw std::invalid_argument("n_draws must be at least 1");
  const Index k = posterior.i_max();
  const auto& data = posterior.data();
  mean_ = posterior.shrink() * data.x.head(k);
  scale_.resize(k);
  const double sl = std::sqrt(posterior.params().L());
  for (Index i = 0; i < k; ++i) scale_(i) = sl * data.model.sigma(i + 1);

  const Vector& w = posterior.weights().weights();
  std::vector<double> cum(static_cast<std::size_t>(k));
  double acc = 0.0;
  Index last_positive = 1;
  for (Index i = 0; i < k; ++i) {
    acc += w(i);
    cum[static_cast<std::size_t>(i)] = acc;
    if (w(i) > 0.0) last_positive = i + 1;
  }

  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, acc);
  std::normal_distribution<double> nd;
  components_.resize(static_cast<std::size_t>(n_draws));
  offsets_.resize(static_cast<std::size_t>(n_draws) + 1);
  offsets_[0] = 0;
  for (Index d = 0; d < n_draws; ++d) {
    const double u = unif(rng);
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    Index I = it == cum.end() ? last_positive
                              : static_cast<Index>(it - cum.begin()) + 1;
    components_[static_cast<std::size_t>(d)] = I;
    for (Index i = 0; i < I; ++i) normals_.push_back(nd(rng));
    offsets_[static_cast<std::size_t>(d) + 1] = normals_.size();
  }
}

Vector PosteriorSample::draw(Index k) const {
  const Index I = component(k);
  Vector th = Vector::Zero(mean_.size());
  const double* z = normals_.data() + offsets_[static_cast<std::size_t>(k)];
  for (Index i = 0; i < I; ++i) th(i) = mean_(i) + scale_(i) * z[i];
  return th;
}

double PosteriorSample::distance_sq(Index k, const Vector& center,
                                    const Vector& center_tail) const {
  const Index I = component(k);
  const double* z = normals_.data() + offsets_[static_cast<std::size_t>(k)];
  const Index nc = center.size();
  double s = 0.0;
  for (Index i = 0; i < I; ++i) {
    const double c = i < nc ? center(i) : 0.0;
    const double d = mean_(i) + scale_(i) * z[i] - c;
    s += d * d;
  }
  return s + (I < center_tail.size() ? center_tail(I) : 0.0);
}

std::vector<double> PosteriorSample::distances(const Vector& center) const {
  const Vector tail = tail_sums(center.array().square());
  std::vector<double> out(static_cast<std::size_t>(size()));
  for (Index k = 0; k < size(); ++k)
    out[static_cast<std::size_t>(k)] = std::sqrt(distance_sq(k, center, tail));
  return out;
}

std::vector<PosteriorDraw> sample_posterior(const DdmPosterior& posterior,
                                            Index n_draws, std::uint64_t seed) {
  PosteriorSample s(posterior, n_draws, seed);
  std::vector<PosteriorDraw> out;
  out.reserve(static_cast<std::size_t>(n_draws));
  for (Index k = 0; k < n_draws; ++k) out.push_back({s.component(k), s.draw(k)});
  return out;
}

}  // namespace ddm
