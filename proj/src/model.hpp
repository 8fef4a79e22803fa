#pragma once

#include "types.hpp"

namespace lsirm {

inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

namespace density {

// log(1 + exp(x)) without overflow for large |x|.
inline double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double log_normal_pdf(double x, double mean, double sd) {
  const double t = (x - mean) / sd;
  return -0.5 * kLogTwoPi - std::log(sd) - 0.5 * t * t;
}

// Log-normal on x > 0 parameterized by the location/scale of log(x).
inline double log_lognormal_pdf(double x, double mu, double sd) {
  return log_normal_pdf(std::log(x), mu, sd) - std::log(x);
}

inline double log_inv_gamma_pdf(double x, double shape, double scale) {
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

// log Bernoulli(y; logistic(eta)); y must be 0 or 1.
inline double log_bernoulli_logit(double y, double eta) {
  return y == 1.0 ? -softplus(-eta) : -softplus(eta);
}

}  // namespace density

double euclidean_distance(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                          const Eigen::Ref<const Eigen::RowVectorXd>& b);

// theta_k + beta_i - gamma * d(z_k, w_i), with alpha_i scaling theta under TwoPL.
double linear_predictor(const ChainState& state, const ModelSpec& spec, int k, int i);

double cell_log_likelihood(const ChainState& state, const ModelSpec& spec, int k, int i, double y);

// Sum over cells that inform the likelihood: observed cells under
// Complete/MCAR, observed plus currently imputed cells under MAR.
double total_log_likelihood(const ChainState& state, const ModelSpec& spec,
                            const ResponseMatrix& data);

double log_prior(const ChainState& state, const ModelSpec& spec, const Hyperparameters& hp);

}  // namespace lsirm
