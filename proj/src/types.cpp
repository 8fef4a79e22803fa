#include "types.hpp"

#include <sstream>

namespace lsirm {

ResponseMatrix ResponseMatrix::make(ResponseFamily family, Matrix values, MaskMatrix observed) {
  if (values.rows() != observed.rows() || values.cols() != observed.cols())
    throw ValidationError("values and observed mask must have identical shape");
  if (values.rows() < 2 || values.cols() < 2) {
    std::ostringstream os;
    os << "response matrix must be at least 2x2, got " << values.rows() << "x" << values.cols();
    throw ValidationError(os.str());
  }
  if (family == ResponseFamily::Binary) {
    std::ostringstream offenders;
    int bad = 0;
    for (int k = 0; k < values.rows(); ++k) {
      for (int i = 0; i < values.cols(); ++i) {
        if (!observed(k, i)) continue;
        const double y = values(k, i);
        if (y != 0.0 && y != 1.0) {
          if (bad < 10) offenders << (bad ? ", " : "") << "(" << k << "," << i << ")=" << y;
          ++bad;
        }
      }
    }
    if (bad > 0) {
      std::ostringstream os;
      os << "binary response matrix has " << bad << " cell(s) outside {0,1}: " << offenders.str();
      throw ValidationError(os.str());
    }
  }
  ResponseMatrix out;
  out.family = family;
  out.values = std::move(values);
  out.observed = std::move(observed);
  return out;
}

void ChainState::validate(const ModelSpec& spec) const {
  const auto n = theta.size();
  const auto p = beta.size();
  if (n < 1 || p < 1) throw ValidationError("chain state has empty theta or beta");
  if (z.rows() != n || w.rows() != p) throw ValidationError("latent position row counts do not match theta/beta");
  if (z.cols() != spec.latent_dim || w.cols() != spec.latent_dim)
    throw ValidationError("latent position dimension does not match spec.latent_dim");
  if (spec.item_params == ItemParams::TwoPL) {
    if (alpha.size() != p) throw ValidationError("TwoPL state requires alpha of length P");
    for (Eigen::Index i = 0; i < alpha.size(); ++i)
      if (!(alpha[i] > 0.0)) throw ValidationError("alpha must be strictly positive");
  }
  if (!(sigma_sq > 0.0)) throw ValidationError("sigma_sq must be strictly positive");
  if (spec.family == ResponseFamily::Continuous && !(sigma_eps_sq > 0.0))
    throw ValidationError("sigma_eps_sq must be strictly positive");
}

}  // namespace lsirm
