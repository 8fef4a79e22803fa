#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "postprocess.hpp"

using namespace lsirm;

namespace {

Matrix random_matrix(int rows, int cols, std::mt19937& gen, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = normal(gen);
  return m;
}

// Minimal sample container with just the fields alignment and estimation use.
PosteriorSamples make_samples(int s_total, int n, int p, int d, std::mt19937& gen) {
  PosteriorSamples out;
  out.spec.item_params = ItemParams::OnePL;
  out.spec.family = ResponseFamily::Binary;
  out.spec.gamma_mode = GammaMode::Free;
  out.spec.missing_mode = MissingMode::Mcar;
  out.spec.latent_dim = d;
  out.n = n;
  out.p = p;
  out.d = d;
  out.theta = random_matrix(s_total, n, gen);
  out.beta = random_matrix(s_total, p, gen);
  out.gamma = random_matrix(s_total, 1, gen).col(0).array().exp();
  out.sigma_sq = random_matrix(s_total, 1, gen).col(0).array().exp();
  out.z.resize(s_total);
  out.w.resize(s_total);
  for (int s = 0; s < s_total; ++s) {
    out.z[s] = random_matrix(n, d, gen);
    out.w[s] = random_matrix(p, d, gen);
  }
  out.log_posterior = random_matrix(s_total, 1, gen).col(0);
  out.accept.theta_accepted = Eigen::VectorXi::Zero(n);
  out.accept.theta_attempted = Eigen::VectorXi::Constant(n, 1);
  out.accept.beta_accepted = Eigen::VectorXi::Zero(p);
  out.accept.beta_attempted = Eigen::VectorXi::Constant(p, 1);
  out.accept.z_accepted = Eigen::VectorXi::Zero(n);
  out.accept.z_attempted = Eigen::VectorXi::Constant(n, 1);
  out.accept.w_accepted = Eigen::VectorXi::Zero(p);
  out.accept.w_attempted = Eigen::VectorXi::Constant(p, 1);
  return out;
}

Matrix pairwise_distances(const Matrix& z, const Matrix& w) {
  Matrix d(z.rows(), w.rows());
  for (Eigen::Index k = 0; k < z.rows(); ++k)
    for (Eigen::Index i = 0; i < w.rows(); ++i) d(k, i) = (z.row(k) - w.row(i)).norm();
  return d;
}

Matrix rotation2d(double angle) {
  Matrix q(2, 2);
  q << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return q;
}

}  // namespace

TEST_CASE("procrustes reference selection and trivial cases") {
  std::mt19937 gen(3);

  SUBCASE("single draw aligns to itself") {
    auto samples = make_samples(1, 4, 3, 2, gen);
    const auto aligned = procrustes_align(samples);
    CHECK(aligned.reference_index == 0);
    CHECK((aligned.z_aligned[0] - samples.z[0]).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((aligned.w_aligned[0] - samples.w[0]).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("reference is the draw with maximum log posterior") {
    auto samples = make_samples(5, 4, 3, 2, gen);
    samples.log_posterior << -10, -3, -20, -1, -7;
    CHECK(procrustes_align(samples).reference_index == 3);
    CHECK(procrustes_align(samples, 2).reference_index == 2);
  }

  SUBCASE("a rigidly moved copy of the reference is recovered exactly") {
    auto samples = make_samples(2, 5, 4, 2, gen);
    samples.log_posterior << 10, 0; // draw 0 is the reference
    const Matrix q = rotation2d(M_PI / 2.0);
    Eigen::RowVectorXd t(2);
    t << 1.0, 1.0;
    samples.z[1] = (samples.z[0] * q).rowwise() + t;
    samples.w[1] = (samples.w[0] * q).rowwise() + t;
    const auto aligned = procrustes_align(samples);
    CHECK((aligned.z_aligned[1] - samples.z[0]).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((aligned.w_aligned[1] - samples.w[0]).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("procrustes preserves every person-item distance") {
  std::mt19937 gen(11);
  auto samples = make_samples(40, 8, 6, 2, gen);
  const auto aligned = procrustes_align(samples);
  for (int s = 0; s < 40; ++s) {
    const Matrix before = pairwise_distances(samples.z[s], samples.w[s]);
    const Matrix after = pairwise_distances(aligned.z_aligned[s], aligned.w_aligned[s]);
    CHECK((before - after).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("procrustes alignment is idempotent") {
  std::mt19937 gen(13);
  auto samples = make_samples(20, 6, 5, 3, gen);
  const auto aligned = procrustes_align(samples);
  PosteriorSamples again = samples;
  again.z = aligned.z_aligned;
  again.w = aligned.w_aligned;
  const auto aligned2 = procrustes_align(again);
  CHECK(aligned2.reference_index == aligned.reference_index);
  for (int s = 0; s < 20; ++s) {
    CHECK((aligned2.z_aligned[s] - aligned.z_aligned[s]).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((aligned2.w_aligned[s] - aligned.w_aligned[s]).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("point estimates") {
  std::mt19937 gen(17);

  SUBCASE("a constant chain is its own estimate") {
    auto samples = make_samples(3, 4, 3, 2, gen);
    for (int s = 1; s < 3; ++s) {
      samples.theta.row(s) = samples.theta.row(0);
      samples.beta.row(s) = samples.beta.row(0);
      samples.gamma[s] = samples.gamma[0];
      samples.sigma_sq[s] = samples.sigma_sq[0];
      samples.z[s] = samples.z[0];
      samples.w[s] = samples.w[0];
      samples.log_posterior[s] = samples.log_posterior[0];
    }
    const auto aligned = procrustes_align(samples);
    const auto summary = point_estimates(samples, aligned, samples.spec);
    CHECK((summary.theta_estimate - samples.theta.row(0).transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((summary.beta_estimate - samples.beta.row(0).transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(summary.gamma_estimate == doctest::Approx(samples.gamma[0]));
    // all draws equal, so the aligned mean equals each aligned draw
    CHECK((summary.z_estimate - aligned.z_aligned[0]).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("two-draw chain averages") {
    auto samples = make_samples(2, 2, 2, 2, gen);
    samples.theta(0, 0) = 0.0;
    samples.theta(1, 0) = 2.0;
    const auto aligned = procrustes_align(samples);
    const auto summary = point_estimates(samples, aligned, samples.spec);
    CHECK(summary.theta_estimate[0] == doctest::Approx(1.0));
  }

  SUBCASE("pi estimate is the slab frequency") {
    auto samples = make_samples(2500, 2, 2, 2, gen);
    samples.spec.gamma_mode = GammaMode::SpikeSlab;
    samples.slab_indicator.assign(2500, 1);
    samples.slab_indicator[100] = 0;
    samples.slab_indicator[200] = 0;
    const auto aligned = procrustes_align(samples);
    const auto summary = point_estimates(samples, aligned, samples.spec);
    REQUIRE(summary.pi_estimate.has_value());
    CHECK(*summary.pi_estimate == doctest::Approx(0.9992));
  }

  SUBCASE("permuting respondents permutes theta and z estimates identically") {
    auto samples = make_samples(10, 5, 3, 2, gen);
    const std::vector<int> perm = {3, 0, 4, 1, 2};
    PosteriorSamples permuted = samples;
    for (int s = 0; s < 10; ++s) {
      for (int k = 0; k < 5; ++k) {
        permuted.theta(s, k) = samples.theta(s, perm[k]);
        permuted.z[s].row(k) = samples.z[s].row(perm[k]);
      }
    }
    const auto sum_a = point_estimates(samples, procrustes_align(samples), samples.spec);
    const auto sum_b = point_estimates(permuted, procrustes_align(permuted), permuted.spec);
    for (int k = 0; k < 5; ++k) {
      CHECK(sum_b.theta_estimate[k] == doctest::Approx(sum_a.theta_estimate[perm[k]]).epsilon(1e-10));
      CHECK((sum_b.z_estimate.row(k) - sum_a.z_estimate.row(perm[k])).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("oblimin rotation") {
  std::mt19937 gen(23);

  SUBCASE("criterion never increases and the descent holds on random configurations") {
    for (int rep = 0; rep < 100; ++rep) {
      const int d = rep % 2 == 0 ? 2 : 3;
      const Matrix w = random_matrix(12, d, gen);
      const Matrix z = random_matrix(20, d, gen);
      const double before = oblimin_criterion(w);
      const auto rot = oblimin_rotate(z, w);
      CHECK(rot.criterion <= before + 1e-12);
      CHECK(rot.criterion == doctest::Approx(oblimin_criterion(rot.w_rot)).epsilon(1e-9));
    }
  }

  SUBCASE("a perfect simple structure is already stationary") {
    Matrix w(6, 2);
    w << 2, 0, 1.5, 0, 1, 0, 0, 2, 0, 1.2, 0, 0.8;
    const Matrix z = random_matrix(4, 2, gen);
    const auto rot = oblimin_rotate(z, w);
    CHECK(rot.converged);
    CHECK(rot.criterion == doctest::Approx(0.0).epsilon(1e-15));
    CHECK((rot.transform - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((rot.w_rot - w).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((rot.z_rot - z).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("repeated rotation reaches a fixed point") {
    Matrix w = random_matrix(10, 2, gen);
    Matrix z = random_matrix(15, 2, gen);
    // Oblique steps compose, so iterate to the joint fixed point first.
    for (int rep = 0; rep < 10; ++rep) {
      const auto rot = oblimin_rotate(z, w);
      z = rot.z_rot;
      w = rot.w_rot;
    }
    const auto again = oblimin_rotate(z, w);
    CHECK((again.transform - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((again.w_rot - w).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((again.z_rot - z).cwiseAbs().maxCoeff() < 1e-6);
  }

  SUBCASE("a 45-degree rotation of axis-aligned clusters is undone") {
    Matrix w(10, 2);
    std::normal_distribution<double> noise(0.0, 0.05);
    for (int i = 0; i < 5; ++i) {
      w(i, 0) = 2.0 + noise(gen);
      w(i, 1) = noise(gen);
    }
    for (int i = 5; i < 10; ++i) {
      w(i, 0) = noise(gen);
      w(i, 1) = 2.0 + noise(gen);
    }
    const double clean = oblimin_criterion(w);
    const Matrix w_rot45 = w * rotation2d(M_PI / 4.0);
    const Matrix z = random_matrix(6, 2, gen);
    const auto rot = oblimin_rotate(z, w_rot45);
    CHECK(rot.converged);
    CHECK(rot.criterion <= oblimin_criterion(w_rot45));
    CHECK(rot.criterion <= clean + 0.05 * std::abs(clean) + 1e-6);
  }

  SUBCASE("shared transform ties items and respondents together") {
    const Matrix w = random_matrix(8, 2, gen);
    const Matrix z = random_matrix(12, 2, gen);
    const auto rot = oblimin_rotate(z, w);
    CHECK((rot.z_rot - z * rot.transform).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((rot.w_rot - w * rot.transform).cwiseAbs().maxCoeff() < 1e-9);
  }

  SUBCASE("one-dimensional configurations are rejected") {
    const Matrix w = random_matrix(8, 1, gen);
    const Matrix z = random_matrix(12, 1, gen);
    CHECK_THROWS_AS(oblimin_rotate(z, w), std::invalid_argument);
  }

  SUBCASE("iteration cap returns the best iterate with a warning flag") {
    const Matrix w = random_matrix(40, 3, gen);
    const Matrix z = random_matrix(10, 3, gen);
    const auto rot = oblimin_rotate(z, w, 0.0, 1e-14, 1);
    CHECK_FALSE(rot.converged);
    CHECK(rot.criterion <= oblimin_criterion(w) + 1e-12);
  }
}

TEST_CASE("quantiles") {
  SUBCASE("textbook median of an even-length sample") {
    CHECK(quantile_type7({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
  }

  SUBCASE("constant chains collapse to the constant") {
    Matrix draws = Matrix::Constant(50, 3, 1.25);
    const Matrix q = column_quantiles(draws, {0.25, 0.5, 0.75});
    CHECK((q.array() == 1.25).all());
  }

  SUBCASE("matches an independent sort-and-interpolate oracle") {
    std::mt19937 gen(31);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix draws(101, 4);
    for (int s = 0; s < 101; ++s)
      for (int i = 0; i < 4; ++i) draws(s, i) = normal(gen);
    const std::vector<double> probs = {0.1, 0.25, 0.5, 0.9};
    const Matrix q = column_quantiles(draws, probs);
    for (int i = 0; i < 4; ++i) {
      std::vector<double> col(101);
      for (int s = 0; s < 101; ++s) col[s] = draws(s, i);
      std::sort(col.begin(), col.end());
      for (std::size_t j = 0; j < probs.size(); ++j) {
        const double h = 100.0 * probs[j];
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const double oracle = col[lo] + (h - std::floor(h)) * (col[lo + 1] - col[lo]);
        CHECK(q(i, static_cast<Eigen::Index>(j)) == doctest::Approx(oracle).epsilon(1e-12));
      }
    }
  }

  SUBCASE("probabilities outside (0,1) are rejected") {
    Matrix draws = Matrix::Zero(10, 2);
    CHECK_THROWS_AS(column_quantiles(draws, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(column_quantiles(draws, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(column_quantiles(draws, {}), std::invalid_argument);
  }
}

TEST_CASE("theta by total score") {
  SUBCASE("all respondents in one group when scores coincide") {
    Matrix values(3, 2);
    values << 1, 0, 0, 1, 1, 0;
    auto data = ResponseMatrix::make_fully_observed(ResponseFamily::Binary, values);
    FitSummary summary;
    summary.theta_estimate.resize(3);
    summary.theta_estimate << -1.0, 0.0, 1.0;
    const auto groups = theta_by_score_summary(data, summary);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].count == 3);
    CHECK(groups[0].median == doctest::Approx(0.0));
    CHECK(groups[0].min == doctest::Approx(-1.0));
    CHECK(groups[0].max == doctest::Approx(1.0));
  }

  SUBCASE("scores zero and P give two singleton groups") {
    Matrix values(2, 3);
    values << 0, 0, 0, 1, 1, 1;
    auto data = ResponseMatrix::make_fully_observed(ResponseFamily::Binary, values);
    FitSummary summary;
    summary.theta_estimate.resize(2);
    summary.theta_estimate << -0.5, 0.7;
    const auto groups = theta_by_score_summary(data, summary);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].score_lo == 0.0);
    CHECK(groups[0].count == 1);
    CHECK(groups[0].median == doctest::Approx(-0.5));
    CHECK(groups[1].score_lo == 3.0);
    CHECK(groups[1].count == 1);
    CHECK(groups[1].median == doctest::Approx(0.7));
  }

  SUBCASE("group medians increase with score on OnePL-generated data") {
    // Use the true generating abilities as estimates; the summary machinery
    // itself is what is under test.
    std::mt19937 gen(41);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int n = 400, p = 12;
    Matrix values(n, p);
    Vector theta(n), beta(p);
    for (int k = 0; k < n; ++k) theta[k] = normal(gen);
    for (int i = 0; i < p; ++i) beta[i] = normal(gen);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < p; ++i) {
        const double pr = 1.0 / (1.0 + std::exp(-(theta[k] + beta[i])));
        values(k, i) = unif(gen) < pr ? 1.0 : 0.0;
      }
    auto data = ResponseMatrix::make_fully_observed(ResponseFamily::Binary, values);
    FitSummary summary;
    summary.theta_estimate = theta;
    const auto groups = theta_by_score_summary(data, summary);
    REQUIRE(groups.size() >= 5);

    // Spearman correlation between group order and group median.
    std::vector<double> medians;
    for (const auto& g : groups) medians.push_back(g.median);
    std::vector<int> rank(medians.size());
    for (std::size_t i = 0; i < rank.size(); ++i) rank[i] = static_cast<int>(i);
    std::sort(rank.begin(), rank.end(), [&](int a, int b) { return medians[a] < medians[b]; });
    std::vector<int> rank_of(medians.size());
    for (std::size_t i = 0; i < rank.size(); ++i) rank_of[rank[i]] = static_cast<int>(i);
    const double m = static_cast<double>(medians.size());
    double d2 = 0.0;
    for (std::size_t i = 0; i < rank_of.size(); ++i) {
      const double diff = static_cast<double>(rank_of[i]) - static_cast<double>(i);
      d2 += diff * diff;
    }
    const double spearman = 1.0 - 6.0 * d2 / (m * (m * m - 1.0));
    CHECK(spearman > 0.9);
  }

  SUBCASE("continuous scores are binned into ten equal-width groups") {
    const int n = 100, p = 4;
    std::mt19937 gen(43);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix values(n, p);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < p; ++i) values(k, i) = normal(gen);
    auto data = ResponseMatrix::make_fully_observed(ResponseFamily::Continuous, values);
    FitSummary summary;
    summary.theta_estimate = Vector::LinSpaced(n, -2.0, 2.0);
    const auto groups = theta_by_score_summary(data, summary);
    CHECK(groups.size() <= 10);
    CHECK(groups.size() >= 5);
    int total = 0;
    for (const auto& g : groups) total += g.count;
    CHECK(total == n);
    for (std::size_t g = 1; g < groups.size(); ++g)
      CHECK(groups[g].score_lo >= groups[g - 1].score_hi - 1e-12);
  }

  SUBCASE("mismatched summary is rejected") {
    Matrix values(2, 2);
    values << 1, 0, 0, 1;
    auto data = ResponseMatrix::make_fully_observed(ResponseFamily::Binary, values);
    FitSummary summary;
    summary.theta_estimate = Vector::Zero(5);
    CHECK_THROWS_AS(theta_by_score_summary(data, summary), std::invalid_argument);
  }
}
