#include "postprocess.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace lsirm {

namespace {

Matrix stack_config(const Matrix& z, const Matrix& w) {
  Matrix c(z.rows() + w.rows(), z.cols());
  c.topRows(z.rows()) = z;
  c.bottomRows(w.rows()) = w;
  return c;
}

}  // namespace

AlignedSamples procrustes_align(const PosteriorSamples& samples, int reference_override) {
  const int s_total = samples.n_samples();
  if (s_total < 1) throw std::invalid_argument("procrustes_align requires at least one draw");

  int ref = reference_override;
  if (ref < 0) {
    ref = 0;
    for (int s = 1; s < s_total; ++s)
      if (samples.log_posterior[s] > samples.log_posterior[ref]) ref = s;
  }
  if (ref >= s_total) throw std::invalid_argument("reference index out of range");

  const Matrix ref_config = stack_config(samples.z[ref], samples.w[ref]);
  const Eigen::RowVectorXd ref_mean = ref_config.colwise().mean();
  const Matrix ref_centered = ref_config.rowwise() - ref_mean;

  const int n = samples.n;
  AlignedSamples out;
  out.reference_index = ref;
  out.z_aligned.resize(s_total);
  out.w_aligned.resize(s_total);
  for (int s = 0; s < s_total; ++s) {
    const Matrix config = stack_config(samples.z[s], samples.w[s]);
    const Eigen::RowVectorXd mean = config.colwise().mean();
    const Matrix centered = config.rowwise() - mean;
    const Matrix cross = centered.transpose() * ref_centered;
    Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix rotation = svd.matrixU() * svd.matrixV().transpose();
    Matrix aligned = centered * rotation;
    aligned.rowwise() += ref_mean;
    out.z_aligned[s] = aligned.topRows(n);
    out.w_aligned[s] = aligned.bottomRows(config.rows() - n);
  }
  return out;
}

FitSummary point_estimates(const PosteriorSamples& samples, const AlignedSamples& aligned,
                           const ModelSpec& spec) {
  const int s_total = samples.n_samples();
  if (s_total < 1) throw std::invalid_argument("point_estimates requires at least one draw");
  if (static_cast<int>(aligned.z_aligned.size()) != s_total)
    throw std::invalid_argument("aligned draw count does not match samples");

  FitSummary out;
  out.theta_estimate = samples.theta.colwise().mean().transpose();
  out.beta_estimate = samples.beta.colwise().mean().transpose();
  if (spec.item_params == ItemParams::TwoPL && samples.alpha.size() > 0)
    out.alpha_estimate = samples.alpha.colwise().mean().transpose();
  out.gamma_estimate = samples.gamma.mean();
  out.sigma_theta_estimate = samples.sigma_sq.array().sqrt().mean();
  if (spec.family == ResponseFamily::Continuous && samples.sigma_eps_sq.size() > 0)
    out.sigma_eps_estimate = samples.sigma_eps_sq.array().sqrt().mean();

  Matrix z_sum = Matrix::Zero(samples.n, samples.d);
  Matrix w_sum = Matrix::Zero(samples.p, samples.d);
  for (int s = 0; s < s_total; ++s) {
    z_sum += aligned.z_aligned[s];
    w_sum += aligned.w_aligned[s];
  }
  out.z_estimate = z_sum / s_total;
  out.w_estimate = w_sum / s_total;

  if (spec.gamma_mode == GammaMode::SpikeSlab) {
    double on = 0.0;
    for (const auto flag : samples.slab_indicator) on += flag ? 1.0 : 0.0;
    out.pi_estimate = on / s_total;
  }
  if (spec.missing_mode == MissingMode::Mar && samples.imputed.cols() > 0)
    out.imp_estimate = samples.imputed.colwise().mean().transpose();
  else if (spec.missing_mode == MissingMode::Mar)
    out.imp_estimate = Vector::Zero(0);

  out.accept_theta = AcceptCounters::ratio(samples.accept.theta_accepted, samples.accept.theta_attempted);
  out.accept_beta = AcceptCounters::ratio(samples.accept.beta_accepted, samples.accept.beta_attempted);
  if (spec.item_params == ItemParams::TwoPL)
    out.accept_alpha = AcceptCounters::ratio(samples.accept.alpha_accepted, samples.accept.alpha_attempted);
  out.accept_z = AcceptCounters::ratio(samples.accept.z_accepted, samples.accept.z_attempted);
  out.accept_w = AcceptCounters::ratio(samples.accept.w_accepted, samples.accept.w_attempted);
  out.accept_gamma = samples.accept.gamma_ratio();
  return out;
}

double oblimin_criterion(const Matrix& loadings, double obliquity) {
  const auto p = loadings.rows();
  const auto d = loadings.cols();
  const Matrix l2 = loadings.array().square();
  const Matrix offdiag = Matrix::Ones(d, d) - Matrix::Identity(d, d);
  Matrix x = l2 * offdiag;
  if (obliquity != 0.0) {
    const Matrix c = Matrix::Identity(p, p) - Matrix::Constant(p, p, obliquity / static_cast<double>(p));
    x = c * x;
  }
  return 0.25 * (l2.array() * x.array()).sum();
}

namespace {

// Criterion value and gradient with respect to the loadings.
std::pair<double, Matrix> oblimin_value_grad(const Matrix& loadings, double obliquity) {
  const auto p = loadings.rows();
  const auto d = loadings.cols();
  const Matrix l2 = loadings.array().square();
  const Matrix offdiag = Matrix::Ones(d, d) - Matrix::Identity(d, d);
  Matrix x = l2 * offdiag;
  if (obliquity != 0.0) {
    const Matrix c = Matrix::Identity(p, p) - Matrix::Constant(p, p, obliquity / static_cast<double>(p));
    x = c * x;
  }
  const double f = 0.25 * (l2.array() * x.array()).sum();
  const Matrix gq = loadings.array() * x.array();
  return {f, gq};
}

}  // namespace

ObliminResult oblimin_rotate(const Matrix& z_est, const Matrix& w_est, double obliquity,
                             double tol, int max_iter) {
  if (w_est.cols() < 2) throw std::invalid_argument("oblimin rotation requires latent_dim >= 2");
  if (z_est.cols() != w_est.cols())
    throw std::invalid_argument("z and w must share the same latent dimension");

  const auto d = w_est.cols();
  const Matrix& a = w_est;

  Matrix t = Matrix::Identity(d, d);
  Matrix l = a;
  auto [f, gq] = oblimin_value_grad(l, obliquity);
  Matrix g = -(l.transpose() * gq * t.inverse()).transpose();

  double al = 1.0;
  bool converged = false;
  int iterations = 0;
  for (int it = 0; it < max_iter; ++it) {
    iterations = it;
    const Matrix gp = g - t * (t.array() * g.array()).colwise().sum().matrix().asDiagonal();
    const double s = gp.norm();
    if (s < tol) {
      converged = true;
      break;
    }
    al *= 2.0;
    bool improved = false;
    Matrix tt, lt, gqt;
    double ft = f;
    for (int h = 0; h <= 30; ++h) {
      Matrix x = t - al * gp;
      for (Eigen::Index j = 0; j < d; ++j) x.col(j) /= x.col(j).norm();
      const Matrix lt_try = a * x.inverse().transpose();
      auto [ft_try, gq_try] = oblimin_value_grad(lt_try, obliquity);
      if (ft_try < f - 0.5 * s * s * al) {
        tt = x;
        lt = lt_try;
        ft = ft_try;
        gqt = gq_try;
        improved = true;
        break;
      }
      al /= 2.0;
    }
    if (!improved) break; // no downhill step found; keep the current iterate
    t = tt;
    l = lt;
    f = ft;
    g = -(l.transpose() * gqt * t.inverse()).transpose();
  }

  ObliminResult out;
  out.transform = t.inverse().transpose();
  out.w_rot = l;
  out.z_rot = z_est * out.transform;
  out.converged = converged;
  out.iterations = iterations;
  out.criterion = f;
  return out;
}

double quantile_type7(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  const auto n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = static_cast<double>(n - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= n) return sorted[n - 1];
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

Matrix column_quantiles(const Matrix& draws, const std::vector<double>& probs) {
  if (probs.empty()) throw std::invalid_argument("probs must be nonempty");
  for (const double p : probs)
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile probabilities must lie in (0,1)");
  if (draws.rows() < 1) throw std::invalid_argument("quantiles require at least one draw");

  Matrix out(draws.cols(), static_cast<Eigen::Index>(probs.size()));
  std::vector<double> column(draws.rows());
  for (Eigen::Index i = 0; i < draws.cols(); ++i) {
    for (Eigen::Index s = 0; s < draws.rows(); ++s) column[s] = draws(s, i);
    std::sort(column.begin(), column.end());
    for (std::size_t q = 0; q < probs.size(); ++q)
      out(i, static_cast<Eigen::Index>(q)) = quantile_type7(column, probs[q]);
  }
  return out;
}

namespace {

ScoreGroup make_group(double lo, double hi, std::vector<double> thetas) {
  std::sort(thetas.begin(), thetas.end());
  ScoreGroup g;
  g.score_lo = lo;
  g.score_hi = hi;
  g.count = static_cast<int>(thetas.size());
  g.min = thetas.front();
  g.q1 = quantile_type7(thetas, 0.25);
  g.median = quantile_type7(thetas, 0.5);
  g.q3 = quantile_type7(thetas, 0.75);
  g.max = thetas.back();
  return g;
}

}  // namespace

std::vector<ScoreGroup> theta_by_score_summary(const ResponseMatrix& data,
                                               const FitSummary& summary) {
  const int n = data.n_respondents();
  const int p = data.n_items();
  if (summary.theta_estimate.size() != n)
    throw std::invalid_argument("summary does not match data dimensions");

  Vector scores = Vector::Zero(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < p; ++i)
      if (data.is_observed(k, i)) scores[k] += data.values(k, i);

  std::vector<ScoreGroup> out;
  if (data.family == ResponseFamily::Binary) {
    for (int v = 0; v <= p; ++v) {
      std::vector<double> thetas;
      for (int k = 0; k < n; ++k)
        if (static_cast<int>(std::lround(scores[k])) == v)
          thetas.push_back(summary.theta_estimate[k]);
      if (!thetas.empty())
        out.push_back(make_group(static_cast<double>(v), static_cast<double>(v), std::move(thetas)));
    }
    return out;
  }

  const double lo = scores.minCoeff();
  const double hi = scores.maxCoeff();
  if (lo == hi) {
    std::vector<double> thetas(summary.theta_estimate.data(), summary.theta_estimate.data() + n);
    out.push_back(make_group(lo, hi, std::move(thetas)));
    return out;
  }
  constexpr int kBins = 10;
  const double width = (hi - lo) / kBins;
  for (int b = 0; b < kBins; ++b) {
    std::vector<double> thetas;
    for (int k = 0; k < n; ++k) {
      int bin = static_cast<int>((scores[k] - lo) / width);
      bin = std::min(bin, kBins - 1);
      if (bin == b) thetas.push_back(summary.theta_estimate[k]);
    }
    if (!thetas.empty())
      out.push_back(make_group(lo + b * width, lo + (b + 1) * width, std::move(thetas)));
  }
  return out;
}

}  // namespace lsirm
