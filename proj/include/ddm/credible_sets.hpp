#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddm/ddm_core.hpp"

namespace ddm {

struct RadiusEstimate {
  double value = 0.0;
  double level = 0.5;  // kappa: the ball holds posterior mass 1 - kappa
  Index mc_samples = 0;
  double std_error = 0.0;
};

// Order statistic of rank ceil((1 - kappa) n). The error is half the spread
// of the ranks (1 - kappa) n +- sqrt(n kappa (1 - kappa)).
RadiusEstimate radius_from_distances(std::vector<double> distances,
                                     double kappa);

RadiusEstimate radius_at_level(const DdmPosterior& posterior,
                               const Vector& center, double kappa,
                               Index mc_samples, std::uint64_t seed);

struct DefaultCenter {
  Vector center;
  double r_star = 0.0;
  std::string chosen;      // "posterior-mean" or "projection"
  Index chosen_index = 0;  // I for a projection candidate
  Index candidates = 0;
  // Radius at the posterior mean on the shared draws; r_star never exceeds it.
  double mean_radius = 0.0;
  double verified_mass = 0.0;
  bool verified = false;
};

DefaultCenter default_center(const DdmPosterior& posterior,
                             double p_level = 2.0 / 3.0, double varsigma = 0.5,
                             Index mc_samples = 2000, std::uint64_t seed = 0);

struct CredibleBall {
  Vector center;
  double radius = 0.0;
  double level = 0.5;
  double inflation = 1.0;

  double effective_radius() const { return inflation * radius; }
};

CredibleBall make_confidence_ball(const Vector& center,
                                  const RadiusEstimate& radius, double M);

// Closed ball: ||theta - center|| <= M * radius.
bool contains(const CredibleBall& ball, const Vector& theta);

struct DefaultBall {
  DefaultCenter center;
  RadiusEstimate radius;
  CredibleBall ball;
};

// Ball around the default center with the level-kappa radius on fresh draws.
DefaultBall default_ball(const DdmPosterior& posterior, double kappa, double M,
                         Index mc_samples, std::uint64_t seed);

double distance(const Vector& a, const Vector& b);

}  // namespace ddm
