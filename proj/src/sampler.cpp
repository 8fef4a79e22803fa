#include "sampler.hpp"

#include <cstdio>
#include <iostream>

#include "model.hpp"

namespace lsirm {

std::string format_progress_line(const ProgressLine& line) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "iter=%ld loglik=%.6f accept_gamma=%.6f", line.iter,
                line.loglik, line.accept_gamma);
  return std::string(buf);
}

GibbsSampler::GibbsSampler(const ResponseMatrix& data, const ModelSpec& spec,
                           const Hyperparameters& hp, const JumpingRules& jr)
    : data_(&data), spec_(spec), hp_(hp), jr_(jr) {
  spec_.validate();
  hp_.validate();
  jr_.validate();
  if (data.family != spec.family)
    throw std::invalid_argument("data family does not match model spec family");
  if (spec.missing_mode == MissingMode::Complete && !data.fully_observed())
    throw std::invalid_argument("data contain missing cells under missing_mode=complete; use mcar or mar");
  n_ = data.n_respondents();
  p_ = data.n_items();
  d_ = spec.latent_dim;
  binary_ = spec.family == ResponseFamily::Binary;
  twopl_ = spec.item_params == ItemParams::TwoPL;
  include_all_ = spec.missing_mode == MissingMode::Mar;
  cells_ = data.missing_cells();

  st_.theta = Vector::Zero(n_);
  st_.beta = Vector::Zero(p_);
  if (twopl_) st_.alpha = Vector::Ones(p_);
  st_.z = Matrix::Zero(n_, d_);
  st_.w = Matrix::Zero(p_, d_);
  st_.log_gamma = 0.0;
  st_.sigma_sq = 1.0;
  st_.sigma_eps_sq = 1.0;
  st_.slab_on = true;
  st_.imputed.assign(include_all_ ? cells_.size() : 0, 0.0);
  rebuild_caches();
}

void GibbsSampler::set_state(const ChainState& s) {
  s.validate(spec_);
  if (s.theta.size() != n_ || s.beta.size() != p_)
    throw std::invalid_argument("state dimensions do not match data");
  if (include_all_ && s.imputed.size() != cells_.size())
    throw std::invalid_argument("MAR state must carry one imputed value per missing cell");
  st_ = s;
  rebuild_caches();
}

void GibbsSampler::rebuild_caches() {
  gamma_eff_ = st_.effective_gamma(spec_);
  refresh_sigma_eps_consts();
  y_ = data_->values;
  if (include_all_)
    for (std::size_t m = 0; m < cells_.size(); ++m)
      y_(cells_[m].first, cells_[m].second) = st_.imputed[m];
  dist_.resize(n_, p_);
  for (int k = 0; k < n_; ++k)
    for (int i = 0; i < p_; ++i)
      dist_(k, i) = (st_.z.row(k) - st_.w.row(i)).norm();
}

void GibbsSampler::refresh_sigma_eps_consts() {
  log_sigma_eps_sq_ = std::log(st_.sigma_eps_sq);
  inv_two_sigma_eps_ = 0.5 / st_.sigma_eps_sq;
}

double GibbsSampler::cell_ll(double y, double eta) const {
  if (binary_) return y == 1.0 ? -density::softplus(-eta) : -density::softplus(eta);
  const double r = y - eta;
  return -0.5 * (kLogTwoPi + log_sigma_eps_sq_) - r * r * inv_two_sigma_eps_;
}

double GibbsSampler::theta_row_ll(int k, double theta_k) const {
  double s = 0.0;
  for (int i = 0; i < p_; ++i) {
    if (!contributes(k, i)) continue;
    const double slope = twopl_ ? st_.alpha[i] : 1.0;
    s += cell_ll(y_(k, i), slope * theta_k + st_.beta[i] - gamma_eff_ * dist_(k, i));
  }
  return s;
}

double GibbsSampler::beta_col_ll(int i, double beta_i) const {
  double s = 0.0;
  for (int k = 0; k < n_; ++k) {
    if (!contributes(k, i)) continue;
    const double slope = twopl_ ? st_.alpha[i] : 1.0;
    s += cell_ll(y_(k, i), slope * st_.theta[k] + beta_i - gamma_eff_ * dist_(k, i));
  }
  return s;
}

double GibbsSampler::alpha_col_ll(int i, double alpha_i) const {
  double s = 0.0;
  for (int k = 0; k < n_; ++k) {
    if (!contributes(k, i)) continue;
    s += cell_ll(y_(k, i), alpha_i * st_.theta[k] + st_.beta[i] - gamma_eff_ * dist_(k, i));
  }
  return s;
}

double GibbsSampler::z_row_ll(int k, const double* z_row) const {
  double s = 0.0;
  for (int i = 0; i < p_; ++i) {
    if (!contributes(k, i)) continue;
    double sq = 0.0;
    for (int j = 0; j < d_; ++j) {
      const double diff = z_row[j] - st_.w(i, j);
      sq += diff * diff;
    }
    const double slope = twopl_ ? st_.alpha[i] : 1.0;
    s += cell_ll(y_(k, i), slope * st_.theta[k] + st_.beta[i] - gamma_eff_ * std::sqrt(sq));
  }
  return s;
}

double GibbsSampler::w_row_ll(int i, const double* w_row) const {
  double s = 0.0;
  for (int k = 0; k < n_; ++k) {
    if (!contributes(k, i)) continue;
    double sq = 0.0;
    for (int j = 0; j < d_; ++j) {
      const double diff = st_.z(k, j) - w_row[j];
      sq += diff * diff;
    }
    const double slope = twopl_ ? st_.alpha[i] : 1.0;
    s += cell_ll(y_(k, i), slope * st_.theta[k] + st_.beta[i] - gamma_eff_ * std::sqrt(sq));
  }
  return s;
}

double GibbsSampler::full_ll_at_gamma(double gamma) const {
  std::vector<double> part(n_, 0.0);
#pragma omp parallel for schedule(static)
  for (int k = 0; k < n_; ++k) {
    double s = 0.0;
    for (int i = 0; i < p_; ++i) {
      if (!contributes(k, i)) continue;
      const double slope = twopl_ ? st_.alpha[i] : 1.0;
      s += cell_ll(y_(k, i), slope * st_.theta[k] + st_.beta[i] - gamma * dist_(k, i));
    }
    part[k] = s;
  }
  double total = 0.0; // fixed-order combine keeps the sum thread-count independent
  for (int k = 0; k < n_; ++k) total += part[k];
  return total;
}

double GibbsSampler::current_log_likelihood() const { return full_ll_at_gamma(gamma_eff_); }

double GibbsSampler::current_log_posterior() const {
  return current_log_likelihood() + log_prior(st_, spec_, hp_);
}

void GibbsSampler::initialize(const SweepRng& rng) {
  for (int k = 0; k < n_; ++k)
    st_.theta[k] = rng.stream(Block::init_theta, k).normal(hp_.pr_mean_theta, 1.0);
  for (int i = 0; i < p_; ++i)
    st_.beta[i] = rng.stream(Block::init_beta, i).normal(hp_.pr_mean_beta, hp_.pr_sd_beta);
  if (twopl_)
    for (int i = 0; i < p_; ++i)
      st_.alpha[i] =
          std::exp(rng.stream(Block::init_alpha, i).normal(hp_.pr_mean_alpha, hp_.pr_sd_alpha));
  if (spec_.gamma_mode == GammaMode::FixedAtOne)
    st_.log_gamma = 0.0;
  else
    st_.log_gamma = rng.stream(Block::init_gamma).normal(hp_.pr_mean_gamma, hp_.pr_sd_gamma);
  for (int k = 0; k < n_; ++k) {
    auto r = rng.stream(Block::init_z, k);
    for (int j = 0; j < d_; ++j) st_.z(k, j) = r.normal();
  }
  for (int i = 0; i < p_; ++i) {
    auto r = rng.stream(Block::init_w, i);
    for (int j = 0; j < d_; ++j) st_.w(i, j) = r.normal();
  }
  st_.sigma_sq = 1.0;
  st_.sigma_eps_sq = 1.0;
  st_.slab_on = true;

  if (include_all_) {
    // Seed imputations from the marginal observed item statistics.
    Vector item_mean = Vector::Zero(p_);
    Eigen::VectorXi item_count = Eigen::VectorXi::Zero(p_);
    for (int k = 0; k < n_; ++k)
      for (int i = 0; i < p_; ++i)
        if (data_->is_observed(k, i)) {
          item_mean[i] += data_->values(k, i);
          item_count[i] += 1;
        }
    for (int i = 0; i < p_; ++i)
      item_mean[i] = item_count[i] > 0 ? item_mean[i] / item_count[i] : (binary_ ? 0.5 : 0.0);
    st_.imputed.assign(cells_.size(), 0.0);
    for (std::size_t m = 0; m < cells_.size(); ++m) {
      const int i = cells_[m].second;
      if (binary_) {
        auto r = rng.stream(Block::init_impute, m);
        st_.imputed[m] = r.bernoulli(item_mean[i]) ? 1.0 : 0.0;
      } else {
        st_.imputed[m] = item_mean[i];
      }
    }
  }
  rebuild_caches();
}

std::vector<std::uint8_t> GibbsSampler::update_theta(const SweepRng& rng) {
  std::vector<std::uint8_t> acc(n_, 0);
  const double sigma = std::sqrt(st_.sigma_sq);
#pragma omp parallel for schedule(static)
  for (int k = 0; k < n_; ++k) {
    auto r = rng.stream(Block::theta, k);
    const double cur = st_.theta[k];
    const double prop = cur + jr_.jump_theta * r.normal();
    const double delta = theta_row_ll(k, prop) - theta_row_ll(k, cur) +
                         density::log_normal_pdf(prop, hp_.pr_mean_theta, sigma) -
                         density::log_normal_pdf(cur, hp_.pr_mean_theta, sigma);
    const double u = r.uniform_pos();
    if (delta >= 0.0 || std::log(u) < delta) {
      st_.theta[k] = prop;
      acc[k] = 1;
    }
  }
  return acc;
}

std::vector<std::uint8_t> GibbsSampler::update_beta(const SweepRng& rng) {
  std::vector<std::uint8_t> acc(p_, 0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < p_; ++i) {
    auto r = rng.stream(Block::beta, i);
    const double cur = st_.beta[i];
    const double prop = cur + jr_.jump_beta * r.normal();
    const double delta = beta_col_ll(i, prop) - beta_col_ll(i, cur) +
                         density::log_normal_pdf(prop, hp_.pr_mean_beta, hp_.pr_sd_beta) -
                         density::log_normal_pdf(cur, hp_.pr_mean_beta, hp_.pr_sd_beta);
    const double u = r.uniform_pos();
    if (delta >= 0.0 || std::log(u) < delta) {
      st_.beta[i] = prop;
      acc[i] = 1;
    }
  }
  return acc;
}

std::vector<std::uint8_t> GibbsSampler::update_alpha(const SweepRng& rng) {
  if (!twopl_) throw std::logic_error("alpha update requires a TwoPL model");
  std::vector<std::uint8_t> acc(p_, 0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < p_; ++i) {
    auto r = rng.stream(Block::alpha, i);
    const double cur_log = std::log(st_.alpha[i]);
    const double prop_log = cur_log + jr_.jump_alpha * r.normal();
    // Normal densities on log(alpha) = log-normal prior plus the Jacobian of
    // the log-scale random walk.
    const double delta = alpha_col_ll(i, std::exp(prop_log)) - alpha_col_ll(i, st_.alpha[i]) +
                         density::log_normal_pdf(prop_log, hp_.pr_mean_alpha, hp_.pr_sd_alpha) -
                         density::log_normal_pdf(cur_log, hp_.pr_mean_alpha, hp_.pr_sd_alpha);
    const double u = r.uniform_pos();
    if (delta >= 0.0 || std::log(u) < delta) {
      st_.alpha[i] = std::exp(prop_log);
      acc[i] = 1;
    }
  }
  return acc;
}

bool GibbsSampler::update_gamma(const SweepRng& rng) {
  if (spec_.gamma_mode == GammaMode::FixedAtOne)
    throw std::logic_error("gamma update is not defined under fixed gamma");
  // Under spike-and-slab the indicator selects the prior regime of log(gamma).
  const bool spike = spec_.gamma_mode == GammaMode::SpikeSlab && !st_.slab_on;
  const double prior_mean = spike ? hp_.pr_spike_mean : hp_.pr_mean_gamma;
  const double prior_sd = spike ? hp_.pr_spike_sd : hp_.pr_sd_gamma;
  auto r = rng.stream(Block::gamma);
  const double cur = st_.log_gamma;
  const double prop = cur + jr_.jump_gamma * r.normal();
  const double delta = full_ll_at_gamma(std::exp(prop)) - full_ll_at_gamma(std::exp(cur)) +
                       density::log_normal_pdf(prop, prior_mean, prior_sd) -
                       density::log_normal_pdf(cur, prior_mean, prior_sd);
  const double u = r.uniform_pos();
  if (delta >= 0.0 || std::log(u) < delta) {
    st_.log_gamma = prop;
    gamma_eff_ = st_.effective_gamma(spec_);
    return true;
  }
  return false;
}

std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> GibbsSampler::update_positions(
    const SweepRng& rng) {
  std::vector<std::uint8_t> acc_z(n_, 0), acc_w(p_, 0);
  constexpr int kMaxDim = 64;
  if (d_ > kMaxDim) throw ValidationError("latent_dim above supported limit of 64");

#pragma omp parallel for schedule(static)
  for (int k = 0; k < n_; ++k) {
    auto r = rng.stream(Block::pos_z, k);
    double prop[kMaxDim];
    double prior_delta = 0.0;
    for (int j = 0; j < d_; ++j) {
      prop[j] = st_.z(k, j) + jr_.jump_z * r.normal();
      prior_delta += density::log_normal_pdf(prop[j], 0.0, 1.0) -
                     density::log_normal_pdf(st_.z(k, j), 0.0, 1.0);
    }
    double cur[kMaxDim];
    for (int j = 0; j < d_; ++j) cur[j] = st_.z(k, j);
    const double delta = z_row_ll(k, prop) - z_row_ll(k, cur) + prior_delta;
    const double u = r.uniform_pos();
    if (delta >= 0.0 || std::log(u) < delta) {
      for (int j = 0; j < d_; ++j) st_.z(k, j) = prop[j];
      for (int i = 0; i < p_; ++i) dist_(k, i) = (st_.z.row(k) - st_.w.row(i)).norm();
      acc_z[k] = 1;
    }
  }

#pragma omp parallel for schedule(static)
  for (int i = 0; i < p_; ++i) {
    auto r = rng.stream(Block::pos_w, i);
    double prop[kMaxDim];
    double prior_delta = 0.0;
    for (int j = 0; j < d_; ++j) {
      prop[j] = st_.w(i, j) + jr_.jump_w * r.normal();
      prior_delta += density::log_normal_pdf(prop[j], 0.0, 1.0) -
                     density::log_normal_pdf(st_.w(i, j), 0.0, 1.0);
    }
    double cur[kMaxDim];
    for (int j = 0; j < d_; ++j) cur[j] = st_.w(i, j);
    const double delta = w_row_ll(i, prop) - w_row_ll(i, cur) + prior_delta;
    const double u = r.uniform_pos();
    if (delta >= 0.0 || std::log(u) < delta) {
      for (int j = 0; j < d_; ++j) st_.w(i, j) = prop[j];
      for (int k = 0; k < n_; ++k) dist_(k, i) = (st_.z.row(k) - st_.w.row(i)).norm();
      acc_w[i] = 1;
    }
  }
  return {std::move(acc_z), std::move(acc_w)};
}

std::pair<double, double> GibbsSampler::sigma_sq_posterior(const ChainState& state,
                                                           const Hyperparameters& hp) {
  double ss = 0.0;
  for (Eigen::Index k = 0; k < state.theta.size(); ++k) {
    const double dev = state.theta[k] - hp.pr_mean_theta;
    ss += dev * dev;
  }
  return {0.5 * static_cast<double>(state.theta.size()) + hp.pr_a_theta,
          0.5 * ss + hp.pr_b_theta};
}

void GibbsSampler::update_sigma_sq(const SweepRng& rng) {
  const auto [shape, scale] = sigma_sq_posterior(st_, hp_);
  auto r = rng.stream(Block::sigma_sq);
  st_.sigma_sq = r.inv_gamma(shape, scale);
}

std::pair<double, double> GibbsSampler::sigma_eps_sq_posterior() const {
  if (binary_) throw std::logic_error("sigma_eps_sq update requires a continuous model");
  std::vector<double> part(n_, 0.0);
  std::vector<long> cnt(n_, 0);
#pragma omp parallel for schedule(static)
  for (int k = 0; k < n_; ++k) {
    double s = 0.0;
    long c = 0;
    for (int i = 0; i < p_; ++i) {
      if (!contributes(k, i)) continue;
      const double slope = twopl_ ? st_.alpha[i] : 1.0;
      const double resid = y_(k, i) - (slope * st_.theta[k] + st_.beta[i] - gamma_eff_ * dist_(k, i));
      s += resid * resid;
      ++c;
    }
    part[k] = s;
    cnt[k] = c;
  }
  double ss = 0.0;
  long count = 0;
  for (int k = 0; k < n_; ++k) {
    ss += part[k];
    count += cnt[k];
  }
  return {0.5 * static_cast<double>(count) + hp_.pr_a_eps, 0.5 * ss + hp_.pr_b_eps};
}

void GibbsSampler::update_sigma_eps_sq(const SweepRng& rng) {
  const auto [shape, scale] = sigma_eps_sq_posterior();
  auto r = rng.stream(Block::sigma_eps_sq);
  st_.sigma_eps_sq = r.inv_gamma(shape, scale);
  refresh_sigma_eps_consts();
}

bool GibbsSampler::update_slab_indicator(const SweepRng& rng) {
  if (spec_.gamma_mode != GammaMode::SpikeSlab)
    throw std::logic_error("slab indicator update requires spike-and-slab gamma");
  auto r = rng.stream(Block::slab);
  // gamma enters the likelihood identically under both regimes, so the
  // conditional of the indicator reduces to the mixture-weighted ratio of the
  // slab and spike prior densities at the current log(gamma).
  const double mix_w = 0.5; // fixed mixture weight
  const double log_on =
      std::log(mix_w) + density::log_normal_pdf(st_.log_gamma, hp_.pr_mean_gamma, hp_.pr_sd_gamma);
  const double log_off = std::log(1.0 - mix_w) +
                         density::log_normal_pdf(st_.log_gamma, hp_.pr_spike_mean, hp_.pr_spike_sd);
  const double p_on = 1.0 / (1.0 + std::exp(log_off - log_on));
  st_.slab_on = r.uniform() < p_on;
  return st_.slab_on;
}

void GibbsSampler::impute_missing(const SweepRng& rng) {
  if (spec_.missing_mode != MissingMode::Mar)
    throw std::logic_error("imputation requires missing_mode=mar");
  const double sd_eps = std::sqrt(st_.sigma_eps_sq);
#pragma omp parallel for schedule(static)
  for (long m = 0; m < static_cast<long>(cells_.size()); ++m) {
    const auto [k, i] = cells_[m];
    auto r = rng.stream(Block::impute, static_cast<std::uint64_t>(m));
    const double slope = twopl_ ? st_.alpha[i] : 1.0;
    const double eta = slope * st_.theta[k] + st_.beta[i] - gamma_eff_ * dist_(k, i);
    double draw;
    if (binary_)
      draw = r.bernoulli(density::logistic(eta)) ? 1.0 : 0.0;
    else
      draw = eta + sd_eps * r.normal();
    st_.imputed[m] = draw;
    y_(k, i) = draw;
  }
}

PosteriorSamples run_chain(const ResponseMatrix& data, const ModelSpec& spec,
                           const Hyperparameters& hp, const JumpingRules& jr,
                           const McmcConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  if (spec.family == ResponseFamily::Binary) {
    // Constant items are legal but prior-dominated; flag them.
    for (int i = 0; i < data.n_items(); ++i) {
      bool any = false, all_equal = true;
      double first = 0.0;
      for (int k = 0; k < data.n_respondents() && all_equal; ++k) {
        if (!data.is_observed(k, i)) continue;
        if (!any) {
          first = data.values(k, i);
          any = true;
        } else if (data.values(k, i) != first) {
          all_equal = false;
        }
      }
      if (any && all_equal)
        std::cerr << "warning: item " << i + 1
                  << " has constant observed responses; its intercept is prior-dominated\n";
    }
  }
  GibbsSampler sampler(data, spec, hp, jr);
  sampler.initialize(SweepRng(cfg.seed, 0));

  const int n = data.n_respondents();
  const int p = data.n_items();
  const int d = spec.latent_dim;
  const int s_total = cfg.n_stored();
  const bool twopl = spec.item_params == ItemParams::TwoPL;
  const bool continuous = spec.family == ResponseFamily::Continuous;
  const bool spike_slab = spec.gamma_mode == GammaMode::SpikeSlab;
  const bool fixed_gamma = spec.gamma_mode == GammaMode::FixedAtOne;
  const bool mar = spec.missing_mode == MissingMode::Mar;
  const long n_missing = static_cast<long>(sampler.missing_cells().size());

  PosteriorSamples out;
  out.spec = spec;
  out.hp = hp;
  out.jr = jr;
  out.config = cfg;
  out.n = n;
  out.p = p;
  out.d = d;
  out.theta.resize(s_total, n);
  out.beta.resize(s_total, p);
  if (twopl) out.alpha.resize(s_total, p);
  out.gamma.resize(s_total);
  out.sigma_sq.resize(s_total);
  if (continuous) out.sigma_eps_sq.resize(s_total);
  out.z.assign(s_total, Matrix());
  out.w.assign(s_total, Matrix());
  if (spike_slab) out.slab_indicator.assign(s_total, 0);
  if (mar) {
    out.imputed.resize(s_total, n_missing);
    out.missing_cells = sampler.missing_cells();
  }
  out.log_posterior.resize(s_total);

  auto& acc = out.accept;
  acc.theta_accepted = Eigen::VectorXi::Zero(n);
  acc.theta_attempted = Eigen::VectorXi::Zero(n);
  acc.beta_accepted = Eigen::VectorXi::Zero(p);
  acc.beta_attempted = Eigen::VectorXi::Zero(p);
  acc.alpha_accepted = Eigen::VectorXi::Zero(twopl ? p : 0);
  acc.alpha_attempted = Eigen::VectorXi::Zero(twopl ? p : 0);
  acc.z_accepted = Eigen::VectorXi::Zero(n);
  acc.z_attempted = Eigen::VectorXi::Zero(n);
  acc.w_accepted = Eigen::VectorXi::Zero(p);
  acc.w_attempted = Eigen::VectorXi::Zero(p);

  int stored = 0;
  for (int sweep = 0; sweep < cfg.niter; ++sweep) {
    const SweepRng rng(cfg.seed, static_cast<std::uint64_t>(sweep) + 1);
    const bool post_burn = sweep >= cfg.nburn;

    if (mar) sampler.impute_missing(rng);

    const auto at = sampler.update_theta(rng);
    const auto ab = sampler.update_beta(rng);
    std::vector<std::uint8_t> aa;
    if (twopl) aa = sampler.update_alpha(rng);

    bool gamma_attempted = false;
    bool gamma_accepted = false;
    if (!fixed_gamma) {
      gamma_accepted = sampler.update_gamma(rng);
      gamma_attempted = true;
      if (spike_slab) sampler.update_slab_indicator(rng);
    }

    sampler.update_sigma_sq(rng);
    if (continuous) sampler.update_sigma_eps_sq(rng);

    const auto [az, aw] = sampler.update_positions(rng);

    if (post_burn) {
      for (int k = 0; k < n; ++k) {
        acc.theta_attempted[k] += 1;
        acc.theta_accepted[k] += at[k];
        acc.z_attempted[k] += 1;
        acc.z_accepted[k] += az[k];
      }
      for (int i = 0; i < p; ++i) {
        acc.beta_attempted[i] += 1;
        acc.beta_accepted[i] += ab[i];
        acc.w_attempted[i] += 1;
        acc.w_accepted[i] += aw[i];
      }
      if (twopl)
        for (int i = 0; i < p; ++i) {
          acc.alpha_attempted[i] += 1;
          acc.alpha_accepted[i] += aa[i];
        }
      if (gamma_attempted) {
        acc.gamma_attempted += 1;
        acc.gamma_accepted += gamma_accepted ? 1 : 0;
      }
    }

    if (post_burn && (sweep - cfg.nburn) % cfg.nthin == 0) {
      const ChainState& st = sampler.state();
      out.theta.row(stored) = st.theta.transpose();
      out.beta.row(stored) = st.beta.transpose();
      if (twopl) out.alpha.row(stored) = st.alpha.transpose();
      out.gamma[stored] = st.effective_gamma(spec);
      out.sigma_sq[stored] = st.sigma_sq;
      if (continuous) out.sigma_eps_sq[stored] = st.sigma_eps_sq;
      out.z[stored] = st.z;
      out.w[stored] = st.w;
      if (spike_slab) out.slab_indicator[stored] = st.slab_on ? 1 : 0;
      if (mar)
        for (long m = 0; m < n_missing; ++m) out.imputed(stored, m) = st.imputed[m];
      out.log_posterior[stored] = sampler.current_log_posterior();
      ++stored;
    }

    if ((sweep + 1) % cfg.nprint == 0) {
      ProgressLine line;
      line.iter = sweep + 1;
      line.loglik = sampler.current_log_likelihood();
      line.accept_gamma = acc.gamma_ratio();
      if (progress)
        progress(line);
      else
        std::cout << format_progress_line(line) << '\n';
    }
  }

  return out;
}

}  // namespace lsirm
