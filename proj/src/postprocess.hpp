#pragma once

#include <optional>

#include "sampler.hpp"
#include "types.hpp"

namespace lsirm {

// Retained draws mapped into a common frame by rigid motions.
struct AlignedSamples {
  std::vector<Matrix> z_aligned; // S of N x D
  std::vector<Matrix> w_aligned; // S of P x D
  int reference_index = 0;
};

// Posterior means plus the acceptance block.
struct FitSummary {
  Vector beta_estimate;
  Vector theta_estimate;
  Vector alpha_estimate; // TwoPL only, empty otherwise
  double gamma_estimate = 0.0;
  double sigma_theta_estimate = 0.0;
  double sigma_eps_estimate = 0.0; // Continuous only
  Matrix z_estimate; // N x D, mean of aligned draws
  Matrix w_estimate; // P x D
  std::optional<double> pi_estimate; // SpikeSlab only
  Vector imp_estimate; // MAR only, respondent-major

  Vector accept_theta, accept_beta, accept_alpha, accept_z, accept_w;
  double accept_gamma = 0.0;
};

// Joint Procrustes alignment of every draw's stacked (z; w) configuration to a
// reference draw. The reference is the retained draw with maximum unnormalized
// log posterior unless overridden. Translation first, then the orthogonal
// polar factor; no dilation, so all person-item distances are preserved.
AlignedSamples procrustes_align(const PosteriorSamples& samples, int reference_override = -1);

FitSummary point_estimates(const PosteriorSamples& samples, const AlignedSamples& aligned,
                           const ModelSpec& spec);

struct ObliminResult {
  Matrix z_rot;
  Matrix w_rot;
  Matrix transform; // applied on the right to both configurations
  bool converged = false;
  int iterations = 0;
  double criterion = 0.0;
};

// Oblimin simplicity criterion of a loading/coordinate matrix.
double oblimin_criterion(const Matrix& loadings, double obliquity = 0.0);

// Gradient-projection oblimin rotation driven by the item configuration; the
// resulting oblique transform is applied to both items and respondents.
// Non-convergence returns the best iterate with converged = false.
ObliminResult oblimin_rotate(const Matrix& z_est, const Matrix& w_est, double obliquity = 0.0,
                             double tol = 1e-6, int max_iter = 500);

struct ScoreGroup {
  double score_lo = 0.0;
  double score_hi = 0.0;
  int count = 0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

// Box statistics of theta_estimate by total score: one group per integer sum
// score for binary data, ten equal-width bins for continuous data.
std::vector<ScoreGroup> theta_by_score_summary(const ResponseMatrix& data,
                                               const FitSummary& summary);

// Linear-interpolation empirical quantile of a sorted sample.
double quantile_type7(const std::vector<double>& sorted, double p);

// Per-column quantiles of an S x P draw matrix; result is P x |probs|.
Matrix column_quantiles(const Matrix& draws, const std::vector<double>& probs);

inline Matrix beta_quantiles(const PosteriorSamples& samples, const std::vector<double>& probs) {
  return column_quantiles(samples.beta, probs);
}

}  // namespace lsirm
