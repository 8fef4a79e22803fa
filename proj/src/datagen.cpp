#include "datagen.hpp"

#include <cmath>

#include "model.hpp"
#include "rng.hpp"

namespace lsirm {

std::pair<ResponseMatrix, ChainState> generate(const GenSpec& gen, std::uint64_t seed) {
  if (gen.n < 2 || gen.p < 2) throw ValidationError("generator requires n >= 2 and p >= 2");
  if (!(gen.missing_rate >= 0.0 && gen.missing_rate < 1.0))
    throw ValidationError("missing_rate must lie in [0, 1)");
  if (gen.gamma < 0.0) throw ValidationError("gamma must be nonnegative");
  const bool twopl = gen.spec.item_params == ItemParams::TwoPL;
  const bool continuous = gen.spec.family == ResponseFamily::Continuous;
  if (gen.true_params.beta.size() != gen.p)
    throw ValidationError("true_params.beta must have length p");
  if (twopl && gen.true_params.alpha.size() != gen.p)
    throw ValidationError("true_params.alpha must have length p under TwoPL");
  if (gen.true_params.sigma_sq < 0.0 || gen.true_params.sigma_eps_sq < 0.0)
    throw ValidationError("variances must be nonnegative");

  const int n = gen.n, p = gen.p, d = gen.spec.latent_dim;
  const SweepRng rng(seed, 0);

  ChainState st = gen.true_params;
  st.log_gamma = std::log(gen.gamma); // -inf encodes gamma == 0
  st.slab_on = gen.gamma > 0.0;

  const double sigma_theta = std::sqrt(st.sigma_sq);
  st.theta.resize(n);
  for (int k = 0; k < n; ++k)
    st.theta[k] = sigma_theta * rng.stream(Block::datagen_theta, k).normal();

  if (st.z.rows() != n || st.z.cols() != d) {
    st.z.resize(n, d);
    for (int k = 0; k < n; ++k) {
      auto r = rng.stream(Block::datagen_positions, k);
      for (int j = 0; j < d; ++j) st.z(k, j) = r.normal();
    }
  }
  if (st.w.rows() != p || st.w.cols() != d) {
    st.w.resize(p, d);
    for (int i = 0; i < p; ++i) {
      auto r = rng.stream(Block::datagen_positions, static_cast<std::uint64_t>(n) + i);
      for (int j = 0; j < d; ++j) st.w(i, j) = r.normal();
    }
  }

  const double sd_eps = std::sqrt(st.sigma_eps_sq);
  Matrix values(n, p);
  for (int k = 0; k < n; ++k) {
    auto r = rng.stream(Block::datagen_cells, k);
    for (int i = 0; i < p; ++i) {
      const double dist = (st.z.row(k) - st.w.row(i)).norm();
      const double slope = twopl ? st.alpha[i] : 1.0;
      const double eta = slope * st.theta[k] + st.beta[i] - gen.gamma * dist;
      if (continuous)
        values(k, i) = eta + sd_eps * r.normal();
      else
        values(k, i) = r.bernoulli(density::logistic(eta)) ? 1.0 : 0.0;
    }
  }

  MaskMatrix observed = MaskMatrix::Constant(n, p, 1);
  if (gen.missing_mechanism == MissingMechanism::UniformRandom && gen.missing_rate > 0.0) {
    bool ok = false;
    for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
      MaskMatrix mask = MaskMatrix::Constant(n, p, 1);
      auto r = rng.stream(Block::datagen_mask, attempt);
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < p; ++i)
          if (r.bernoulli(gen.missing_rate)) mask(k, i) = 0;
      bool valid = true;
      for (int k = 0; k < n && valid; ++k) {
        int row_obs = 0;
        for (int i = 0; i < p; ++i) row_obs += mask(k, i);
        valid = row_obs > 0;
      }
      for (int i = 0; i < p && valid; ++i) {
        int col_obs = 0;
        for (int k = 0; k < n; ++k) col_obs += mask(k, i);
        valid = col_obs > 0;
      }
      if (valid) {
        observed = mask;
        ok = true;
      }
    }
    if (!ok)
      throw ValidationError("masking emptied a row or column in 100 attempts; lower missing_rate");
  }

  return {ResponseMatrix::make(gen.spec.family, std::move(values), std::move(observed)),
          std::move(st)};
}

Matrix clustered_positions(int p, int d, int n_clusters, double radius, double spread,
                           std::vector<int>* labels, std::uint64_t seed) {
  if (p < 1 || d < 2) throw ValidationError("clustered layout requires p >= 1 and d >= 2");
  if (n_clusters < 1 || n_clusters > p) throw ValidationError("n_clusters must lie in [1, p]");
  const SweepRng rng(seed, 0);
  Matrix w(p, d);
  if (labels) labels->assign(p, 0);
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  for (int i = 0; i < p; ++i) {
    const int c = i * n_clusters / p; // contiguous blocks of items per cluster
    const double angle = kTwoPi * c / n_clusters + kTwoPi / 4.0;
    auto r = rng.stream(Block::datagen_positions, i);
    for (int j = 0; j < d; ++j) {
      const double center = j == 0 ? radius * std::cos(angle) : (j == 1 ? radius * std::sin(angle) : 0.0);
      w(i, j) = center + spread * r.normal();
    }
    if (labels) (*labels)[i] = c;
  }
  return w;
}

}  // namespace lsirm
