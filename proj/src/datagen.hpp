#pragma once

#include <utility>
#include <vector>

#include "types.hpp"

namespace lsirm {

enum class MissingMechanism { None, UniformRandom };

// Synthetic-data request. beta, alpha, sigma_sq and sigma_eps_sq come from
// true_params; theta is drawn from N(0, sigma_sq), and z/w are drawn from the
// standard MVN unless true_params already carries correctly shaped positions.
// Zero variances are allowed here (and only here) to pin parameters exactly.
struct GenSpec {
  ModelSpec spec;
  int n = 0;
  int p = 0;
  ChainState true_params;
  double gamma = 1.0; // distance weight; 0 recovers the plain IRT model
  double missing_rate = 0.0;
  MissingMechanism missing_mechanism = MissingMechanism::None;
};

// Seed-deterministic forward simulation. Masking is applied after the draw and
// independently of the values, so masked data are MCAR by construction. The
// returned state is the exact generating configuration.
std::pair<ResponseMatrix, ChainState> generate(const GenSpec& gen, std::uint64_t seed);

// Item positions grouped around n_clusters centers on a circle of the given
// radius; labels receives the cluster index per item when non-null.
Matrix clustered_positions(int p, int d, int n_clusters, double radius, double spread,
                           std::vector<int>* labels, std::uint64_t seed);

}  // namespace lsirm
