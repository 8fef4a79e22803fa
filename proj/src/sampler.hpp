#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "rng.hpp"
#include "types.hpp"

namespace lsirm {

struct McmcConfig {
  int niter = 15000;
  int nburn = 2500;
  int nthin = 5;
  int nprint = 500;
  std::uint64_t seed = 0;

  void validate() const {
    if (niter < 1) throw ValidationError("niter must be >= 1");
    if (nburn < 0) throw ValidationError("nburn must be >= 0");
    if (nburn >= niter) throw ValidationError("nburn must be smaller than niter");
    if (nthin < 1) throw ValidationError("nthin must be >= 1");
    if (nprint < 1) throw ValidationError("nprint must be >= 1");
  }

  // Post-burn-in sweeps retained at stride nthin, starting at sweep nburn.
  int n_stored() const { return (niter - nburn + nthin - 1) / nthin; }
};

// Integer accept/attempt accounting over post-burn-in proposals.
struct AcceptCounters {
  Eigen::VectorXi theta_accepted, theta_attempted;
  Eigen::VectorXi beta_accepted, beta_attempted;
  Eigen::VectorXi alpha_accepted, alpha_attempted;
  Eigen::VectorXi z_accepted, z_attempted;
  Eigen::VectorXi w_accepted, w_attempted;
  long gamma_accepted = 0;
  long gamma_attempted = 0;

  static Vector ratio(const Eigen::VectorXi& accepted, const Eigen::VectorXi& attempted) {
    Vector out(accepted.size());
    for (Eigen::Index j = 0; j < accepted.size(); ++j)
      out[j] = attempted[j] > 0 ? static_cast<double>(accepted[j]) / attempted[j] : 0.0;
    return out;
  }

  double gamma_ratio() const {
    return gamma_attempted > 0 ? static_cast<double>(gamma_accepted) / gamma_attempted : 0.0;
  }
};

// Thinned post-burn-in draws plus run provenance.
struct PosteriorSamples {
  ModelSpec spec;
  Hyperparameters hp;
  JumpingRules jr;
  McmcConfig config;
  int n = 0, p = 0, d = 0;

  Matrix theta; // S x N
  Matrix beta;  // S x P
  Matrix alpha; // S x P (TwoPL), 0 x 0 otherwise
  Vector gamma; // S, effective gamma per stored draw
  Vector sigma_sq;     // S
  Vector sigma_eps_sq; // S (Continuous), empty otherwise
  std::vector<Matrix> z; // S of N x D
  std::vector<Matrix> w; // S of P x D
  std::vector<std::uint8_t> slab_indicator; // S (SpikeSlab), empty otherwise
  Matrix imputed; // S x M (MAR), 0 x 0 otherwise
  std::vector<std::pair<int, int>> missing_cells; // M, respondent-major
  Vector log_posterior; // S, unnormalized

  AcceptCounters accept;

  int n_samples() const { return static_cast<int>(theta.rows()); }
};

struct ProgressLine {
  long iter = 0; // 1-based sweep count
  double loglik = 0.0;
  double accept_gamma = 0.0;
};

// Stable single-line format: iter=<n> loglik=<value> accept_gamma=<ratio>
std::string format_progress_line(const ProgressLine& line);

using ProgressFn = std::function<void(const ProgressLine&)>;

// Metropolis-Hastings-within-Gibbs kernel over one chain state. Each update_*
// method consumes the substream of its own (sweep, block, row), so two runs
// with the same seed coincide regardless of row-level parallelism.
class GibbsSampler {
 public:
  GibbsSampler(const ResponseMatrix& data, const ModelSpec& spec, const Hyperparameters& hp,
               const JumpingRules& jr);

  const ChainState& state() const { return st_; }
  void set_state(const ChainState& s);

  // Prior draws for all blocks; marginal observed item means seed the imputations.
  void initialize(const SweepRng& rng);

  std::vector<std::uint8_t> update_theta(const SweepRng& rng);
  std::vector<std::uint8_t> update_beta(const SweepRng& rng);
  std::vector<std::uint8_t> update_alpha(const SweepRng& rng); // TwoPL only
  // Random walk on log(gamma); under SpikeSlab the active regime (slab or
  // spike) supplies the prior. Not defined under FixedAtOne.
  bool update_gamma(const SweepRng& rng);
  std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> update_positions(
      const SweepRng& rng); // z rows then w rows
  void update_sigma_sq(const SweepRng& rng);
  void update_sigma_eps_sq(const SweepRng& rng); // Continuous only
  // Draws the mixture indicator from the slab/spike density ratio at the
  // current log(gamma). SpikeSlab only.
  bool update_slab_indicator(const SweepRng& rng);
  void impute_missing(const SweepRng& rng); // MAR only

  double current_log_likelihood() const;
  double current_log_posterior() const;

  // Conditional Inv-Gamma (shape, scale) for sigma_sq given theta.
  static std::pair<double, double> sigma_sq_posterior(const ChainState& state,
                                                      const Hyperparameters& hp);
  // Conditional Inv-Gamma (shape, scale) for sigma_eps_sq given everything else.
  std::pair<double, double> sigma_eps_sq_posterior() const;

  const std::vector<std::pair<int, int>>& missing_cells() const { return cells_; }
  const ModelSpec& spec() const { return spec_; }

 private:
  bool contributes(int k, int i) const { return include_all_ || data_->is_observed(k, i); }
  double cell_ll(double y, double eta) const;
  double theta_row_ll(int k, double theta_k) const;
  double beta_col_ll(int i, double beta_i) const;
  double alpha_col_ll(int i, double alpha_i) const;
  double z_row_ll(int k, const double* z_row) const;
  double w_row_ll(int i, const double* w_row) const;
  double full_ll_at_gamma(double gamma) const;
  void rebuild_caches();
  void refresh_sigma_eps_consts();

  const ResponseMatrix* data_;
  ModelSpec spec_;
  Hyperparameters hp_;
  JumpingRules jr_;
  int n_ = 0, p_ = 0, d_ = 0;
  bool binary_ = true;
  bool twopl_ = false;
  bool include_all_ = false; // MAR: imputed cells enter the likelihood

  ChainState st_;
  Matrix y_;    // effective responses (imputed values at missing cells under MAR)
  Matrix dist_; // N x P pairwise distances
  double gamma_eff_ = 1.0;
  double log_sigma_eps_sq_ = 0.0;
  double inv_two_sigma_eps_ = 0.5;
  std::vector<std::pair<int, int>> cells_; // missing cells, respondent-major
};

// Full MH-within-Gibbs run. Scan order per sweep: impute (MAR), theta, beta,
// alpha (TwoPL), gamma or slab indicator, sigma_sq, sigma_eps_sq (Continuous),
// z, w. Fully deterministic given cfg.seed.
PosteriorSamples run_chain(const ResponseMatrix& data, const ModelSpec& spec,
                           const Hyperparameters& hp, const JumpingRules& jr,
                           const McmcConfig& cfg, const ProgressFn& progress = {});

}  // namespace lsirm
