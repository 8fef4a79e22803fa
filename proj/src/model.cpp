#include "model.hpp"

#include <sstream>

namespace lsirm {

double euclidean_distance(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                          const Eigen::Ref<const Eigen::RowVectorXd>& b) {
  if (a.size() != b.size()) {
    std::ostringstream os;
    os << "dimension mismatch: " << a.size() << " vs " << b.size();
    throw std::invalid_argument(os.str());
  }
  if (a.size() < 1) throw std::invalid_argument("vectors must have dimension >= 1");
  return (a - b).norm();
}

double linear_predictor(const ChainState& state, const ModelSpec& spec, int k, int i) {
  const double d = (state.z.row(k) - state.w.row(i)).norm();
  const double g = state.effective_gamma(spec);
  const double slope = spec.item_params == ItemParams::TwoPL ? state.alpha[i] : 1.0;
  return slope * state.theta[k] + state.beta[i] - g * d;
}

double cell_log_likelihood(const ChainState& state, const ModelSpec& spec, int k, int i, double y) {
  const double eta = linear_predictor(state, spec, k, i);
  if (spec.family == ResponseFamily::Binary) {
    if (y != 0.0 && y != 1.0) {
      std::ostringstream os;
      os << "binary response must be 0 or 1, got " << y;
      throw std::invalid_argument(os.str());
    }
    return density::log_bernoulli_logit(y, eta);
  }
  return density::log_normal_pdf(y, eta, std::sqrt(state.sigma_eps_sq));
}

double total_log_likelihood(const ChainState& state, const ModelSpec& spec,
                            const ResponseMatrix& data) {
  const int n = data.n_respondents();
  const int p = data.n_items();
  if (state.theta.size() != n || state.beta.size() != p)
    throw std::invalid_argument("state dimensions do not match data");

  const bool mar = spec.missing_mode == MissingMode::Mar;
  double total = 0.0;
  std::size_t m = 0; // respondent-major missing-cell cursor
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < p; ++i) {
      if (data.is_observed(k, i)) {
        total += cell_log_likelihood(state, spec, k, i, data.values(k, i));
      } else if (mar) {
        if (m >= state.imputed.size())
          throw std::invalid_argument("MAR state has fewer imputed values than missing cells");
        total += cell_log_likelihood(state, spec, k, i, state.imputed[m]);
        ++m;
      }
    }
  }
  if (mar && m != state.imputed.size())
    throw std::invalid_argument("MAR state imputed count does not match missing cells");
  return total;
}

double log_prior(const ChainState& state, const ModelSpec& spec, const Hyperparameters& hp) {
  double total = 0.0;
  const double sigma = std::sqrt(state.sigma_sq);
  for (Eigen::Index k = 0; k < state.theta.size(); ++k)
    total += density::log_normal_pdf(state.theta[k], hp.pr_mean_theta, sigma);
  for (Eigen::Index i = 0; i < state.beta.size(); ++i)
    total += density::log_normal_pdf(state.beta[i], hp.pr_mean_beta, hp.pr_sd_beta);
  if (spec.item_params == ItemParams::TwoPL)
    for (Eigen::Index i = 0; i < state.alpha.size(); ++i)
      total += density::log_lognormal_pdf(state.alpha[i], hp.pr_mean_alpha, hp.pr_sd_alpha);
  if (spec.gamma_mode == GammaMode::Free) {
    total += density::log_normal_pdf(state.log_gamma, hp.pr_mean_gamma, hp.pr_sd_gamma);
  } else if (spec.gamma_mode == GammaMode::SpikeSlab) {
    total += state.slab_on
                 ? density::log_normal_pdf(state.log_gamma, hp.pr_mean_gamma, hp.pr_sd_gamma)
                 : density::log_normal_pdf(state.log_gamma, hp.pr_spike_mean, hp.pr_spike_sd);
  }
  total += density::log_inv_gamma_pdf(state.sigma_sq, hp.pr_a_theta, hp.pr_b_theta);
  if (spec.family == ResponseFamily::Continuous)
    total += density::log_inv_gamma_pdf(state.sigma_eps_sq, hp.pr_a_eps, hp.pr_b_eps);
  for (Eigen::Index k = 0; k < state.z.rows(); ++k)
    for (Eigen::Index d = 0; d < state.z.cols(); ++d)
      total += density::log_normal_pdf(state.z(k, d), 0.0, 1.0);
  for (Eigen::Index i = 0; i < state.w.rows(); ++i)
    for (Eigen::Index d = 0; d < state.w.cols(); ++d)
      total += density::log_normal_pdf(state.w(i, d), 0.0, 1.0);
  return total;
}

}  // namespace lsirm
