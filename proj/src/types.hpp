#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lsirm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MaskMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Error taxonomy; the C API maps these onto status codes.
class ValidationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class ParseError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class IntegrityError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ResponseFamily { Binary, Continuous };
enum class ItemParams { OnePL, TwoPL };
enum class GammaMode { Free, FixedAtOne, SpikeSlab };
enum class MissingMode { Complete, Mcar, Mar };

// N x P observed responses with a missingness mask. Unobserved cells carry no
// information; their stored value is ignored by every likelihood computation.
struct ResponseMatrix {
  ResponseFamily family = ResponseFamily::Binary;
  Matrix values;       // N x P
  MaskMatrix observed; // N x P, 1 = observed

  int n_respondents() const { return static_cast<int>(values.rows()); }
  int n_items() const { return static_cast<int>(values.cols()); }

  bool is_observed(int k, int i) const { return observed(k, i) != 0; }

  long n_missing() const {
    long m = 0;
    for (int k = 0; k < observed.rows(); ++k)
      for (int i = 0; i < observed.cols(); ++i)
        if (!observed(k, i)) ++m;
    return m;
  }

  bool fully_observed() const { return n_missing() == 0; }

  // Missing cells in respondent-major order; fixes the layout of imputed draws.
  std::vector<std::pair<int, int>> missing_cells() const {
    std::vector<std::pair<int, int>> cells;
    for (int k = 0; k < observed.rows(); ++k)
      for (int i = 0; i < observed.cols(); ++i)
        if (!observed(k, i)) cells.emplace_back(k, i);
    return cells;
  }

  // Validating constructor. Degenerate sizes and binary-domain violations are
  // rejected here; file-level checks (all-missing rows) live in the io module.
  static ResponseMatrix make(ResponseFamily family, Matrix values, MaskMatrix observed);

  static ResponseMatrix make_fully_observed(ResponseFamily family, Matrix values) {
    MaskMatrix obs = MaskMatrix::Constant(values.rows(), values.cols(), 1);
    return make(family, std::move(values), std::move(obs));
  }
};

// Which model to fit. FixedAtOne and SpikeSlab are mutually exclusive by
// construction (single enum).
struct ModelSpec {
  ItemParams item_params = ItemParams::OnePL;
  ResponseFamily family = ResponseFamily::Binary;
  GammaMode gamma_mode = GammaMode::Free;
  MissingMode missing_mode = MissingMode::Complete;
  int latent_dim = 2;

  void validate() const {
    if (latent_dim < 1) throw ValidationError("latent_dim must be >= 1");
  }
};

// Prior constants; defaults follow the package's argument tables. The spike
// parameters describe the near-zero mixture component used for gamma model
// selection: under spike-and-slab, log(gamma) follows the slab prior
// N(pr_mean_gamma, pr_sd_gamma^2) when the indicator is on and the spike prior
// N(pr_spike_mean, pr_spike_sd^2) when it is off.
struct Hyperparameters {
  double pr_mean_theta = 0.0;
  double pr_mean_beta = 0.0;
  double pr_sd_beta = 1.0;
  double pr_mean_alpha = 0.5; // location of log(alpha)
  double pr_sd_alpha = 1.0;
  double pr_mean_gamma = 0.5; // location of log(gamma), slab component
  double pr_sd_gamma = 1.0;
  double pr_spike_mean = -3.0; // location of log(gamma), spike component
  double pr_spike_sd = 1.0;
  double pr_a_theta = 0.001;
  double pr_b_theta = 0.001;
  double pr_a_eps = 0.001;
  double pr_b_eps = 0.001;

  void validate() const {
    if (!(pr_sd_beta > 0.0 && pr_sd_alpha > 0.0 && pr_sd_gamma > 0.0 && pr_spike_sd > 0.0))
      throw ValidationError("prior standard deviations must be positive");
    if (!(pr_a_theta > 0.0 && pr_b_theta > 0.0 && pr_a_eps > 0.0 && pr_b_eps > 0.0))
      throw ValidationError("inverse-gamma prior parameters must be positive");
  }
};

// Gaussian random-walk proposal standard deviations.
struct JumpingRules {
  double jump_theta = 1.0;
  double jump_beta = 0.4;
  double jump_alpha = 1.0; // on log(alpha)
  double jump_gamma = 0.025; // on log(gamma)
  double jump_z = 0.5;
  double jump_w = 0.5;

  // Zero is allowed as a degenerate identity-proposal test hook.
  void validate() const {
    if (jump_theta < 0 || jump_beta < 0 || jump_alpha < 0 || jump_gamma < 0 ||
        jump_z < 0 || jump_w < 0)
      throw ValidationError("jumping rules must be nonnegative");
  }
};

// One full parameter configuration of the chain.
struct ChainState {
  Vector theta; // N
  Vector beta;  // P
  Vector alpha; // P for TwoPL, empty otherwise
  double log_gamma = 0.0;
  Matrix z; // N x D
  Matrix w; // P x D
  double sigma_sq = 1.0;
  double sigma_eps_sq = 1.0; // Continuous only
  // SpikeSlab only: selects the prior regime of log_gamma (slab vs spike).
  // gamma itself stays active in the likelihood under both regimes; the spike
  // prior pins it near zero when the indicator is off.
  bool slab_on = true;
  std::vector<double> imputed; // MAR only; respondent-major over missing cells

  // gamma as seen by the likelihood under the given mode.
  double effective_gamma(const ModelSpec& spec) const {
    if (spec.gamma_mode == GammaMode::FixedAtOne) return 1.0;
    return std::exp(log_gamma);
  }

  void validate(const ModelSpec& spec) const;
};

}  // namespace lsirm
