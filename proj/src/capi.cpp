#include "lsirm/lsirm.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "datagen.hpp"
#include "io.hpp"
#include "model.hpp"
#include "postprocess.hpp"
#include "rng.hpp"
#include "sampler.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct lsirm_matrix {
  lsirm::ResponseMatrix data;
};

struct lsirm_fit {
  lsirm::PosteriorSamples samples;
  lsirm::AlignedSamples aligned;
  lsirm::FitSummary summary;
  lsirm::ResponseMatrix data;
};

namespace {

thread_local std::string g_last_error;

lsirm_status fail(lsirm_status st, const char* what) {
  g_last_error = what;
  return st;
}

template <typename Fn>
lsirm_status guarded(Fn&& fn) {
  try {
    fn();
    return LSIRM_OK;
  } catch (const lsirm::ParseError& e) {
    return fail(LSIRM_ERR_PARSE, e.what());
  } catch (const lsirm::ValidationError& e) {
    return fail(LSIRM_ERR_VALIDATION, e.what());
  } catch (const lsirm::IntegrityError& e) {
    return fail(LSIRM_ERR_INTEGRITY, e.what());
  } catch (const lsirm::IoError& e) {
    return fail(LSIRM_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(LSIRM_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::logic_error& e) {
    return fail(LSIRM_ERR_INVALID_STATE, e.what());
  } catch (const std::exception& e) {
    return fail(LSIRM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LSIRM_ERR_INTERNAL, "unknown error");
  }
}

lsirm::ResponseFamily family_from(int32_t v) {
  switch (v) {
    case LSIRM_FAMILY_BINARY: return lsirm::ResponseFamily::Binary;
    case LSIRM_FAMILY_NORMAL: return lsirm::ResponseFamily::Continuous;
  }
  throw std::invalid_argument("invalid family code");
}

lsirm::ItemParams model_from(int32_t v) {
  switch (v) {
    case LSIRM_MODEL_1PL: return lsirm::ItemParams::OnePL;
    case LSIRM_MODEL_2PL: return lsirm::ItemParams::TwoPL;
  }
  throw std::invalid_argument("invalid model code");
}

lsirm::GammaMode gamma_mode_from(int32_t v) {
  switch (v) {
    case LSIRM_GAMMA_FREE: return lsirm::GammaMode::Free;
    case LSIRM_GAMMA_FIXED: return lsirm::GammaMode::FixedAtOne;
    case LSIRM_GAMMA_SPIKESLAB: return lsirm::GammaMode::SpikeSlab;
  }
  throw std::invalid_argument("invalid gamma mode code");
}

lsirm::MissingMode missing_mode_from(int32_t v) {
  switch (v) {
    case LSIRM_MISSING_COMPLETE: return lsirm::MissingMode::Complete;
    case LSIRM_MISSING_MCAR: return lsirm::MissingMode::Mcar;
    case LSIRM_MISSING_MAR: return lsirm::MissingMode::Mar;
  }
  throw std::invalid_argument("invalid missing mode code");
}

void unpack_options(const lsirm_options& o, lsirm::ModelSpec* spec, lsirm::Hyperparameters* hp,
                    lsirm::JumpingRules* jr, lsirm::McmcConfig* cfg) {
  spec->item_params = model_from(o.model);
  spec->family = family_from(o.family);
  spec->gamma_mode = gamma_mode_from(o.gamma_mode);
  spec->missing_mode = missing_mode_from(o.missing_mode);
  spec->latent_dim = o.ndim;
  spec->validate();
  hp->pr_mean_theta = o.pr_mean_theta;
  hp->pr_mean_beta = o.pr_mean_beta;
  hp->pr_sd_beta = o.pr_sd_beta;
  hp->pr_mean_alpha = o.pr_mean_alpha;
  hp->pr_sd_alpha = o.pr_sd_alpha;
  hp->pr_mean_gamma = o.pr_mean_gamma;
  hp->pr_sd_gamma = o.pr_sd_gamma;
  hp->pr_spike_mean = o.pr_spike_mean;
  hp->pr_spike_sd = o.pr_spike_sd;
  hp->pr_a_theta = o.pr_a_theta;
  hp->pr_b_theta = o.pr_b_theta;
  hp->pr_a_eps = o.pr_a_eps;
  hp->pr_b_eps = o.pr_b_eps;
  hp->validate();
  jr->jump_theta = o.jump_theta;
  jr->jump_beta = o.jump_beta;
  jr->jump_alpha = o.jump_alpha;
  jr->jump_gamma = o.jump_gamma;
  jr->jump_z = o.jump_z;
  jr->jump_w = o.jump_w;
  jr->validate();
  cfg->niter = o.niter;
  cfg->nburn = o.nburn;
  cfg->nthin = o.nthin;
  cfg->nprint = o.nprint;
  cfg->seed = o.seed;
  cfg->validate();
}

std::string summarize_text_impl(const lsirm_fit& fit, const char* table_dir);

}  // namespace

extern "C" {

const char* lsirm_version(void) { return "1.0.0"; }

const char* lsirm_last_error(void) { return g_last_error.c_str(); }

void lsirm_string_free(char* s) { std::free(s); }

lsirm_status lsirm_matrix_read_csv(const char* path, const char* missing_code, int has_header,
                                   lsirm_family family, lsirm_matrix** out) {
  if (!path || !out) return fail(LSIRM_ERR_INVALID_ARGUMENT, "path and out must be non-null");
  return guarded([&] {
    lsirm::CsvOptions opts;
    if (missing_code) opts.missing_code = missing_code;
    opts.has_header = has_header != 0;
    auto m = std::make_unique<lsirm_matrix>();
    m->data = lsirm::read_response_csv(path, opts, family_from(family));
    *out = m.release();
  });
}

lsirm_status lsirm_matrix_create(int32_t n, int32_t p, lsirm_family family, const double* values,
                                 const uint8_t* observed, lsirm_matrix** out) {
  if (!values || !out) return fail(LSIRM_ERR_INVALID_ARGUMENT, "values and out must be non-null");
  return guarded([&] {
    lsirm::Matrix vals(n, p);
    lsirm::MaskMatrix obs(n, p);
    for (int32_t k = 0; k < n; ++k)
      for (int32_t i = 0; i < p; ++i) {
        vals(k, i) = values[static_cast<size_t>(k) * p + i];
        obs(k, i) = observed ? observed[static_cast<size_t>(k) * p + i] : 1;
      }
    auto m = std::make_unique<lsirm_matrix>();
    m->data = lsirm::ResponseMatrix::make(family_from(family), std::move(vals), std::move(obs));
    *out = m.release();
  });
}

lsirm_status lsirm_matrix_complete_cases(const lsirm_matrix* in, lsirm_matrix** out) {
  if (!in || !out) return fail(LSIRM_ERR_INVALID_ARGUMENT, "in and out must be non-null");
  return guarded([&] {
    auto m = std::make_unique<lsirm_matrix>();
    m->data = lsirm::complete_cases(in->data);
    *out = m.release();
  });
}

lsirm_status lsirm_matrix_dims(const lsirm_matrix* m, int32_t* n, int32_t* p, int64_t* n_missing) {
  if (!m) return fail(LSIRM_ERR_INVALID_ARGUMENT, "matrix handle is null");
  if (n) *n = m->data.n_respondents();
  if (p) *p = m->data.n_items();
  if (n_missing) *n_missing = m->data.n_missing();
  return LSIRM_OK;
}

lsirm_status lsirm_matrix_write_csv(const lsirm_matrix* m, const char* path,
                                    const char* missing_code) {
  if (!m || !path) return fail(LSIRM_ERR_INVALID_ARGUMENT, "matrix and path must be non-null");
  return guarded([&] {
    lsirm::write_response_csv(path, m->data, missing_code ? missing_code : "NA");
  });
}

void lsirm_matrix_free(lsirm_matrix* m) { delete m; }

lsirm_status lsirm_options_init(lsirm_options* opts) {
  if (!opts) return fail(LSIRM_ERR_INVALID_ARGUMENT, "opts must be non-null");
  std::memset(opts, 0, sizeof(*opts));
  opts->model = LSIRM_MODEL_1PL;
  opts->family = LSIRM_FAMILY_BINARY;
  opts->gamma_mode = LSIRM_GAMMA_FREE;
  opts->missing_mode = LSIRM_MISSING_COMPLETE;
  opts->ndim = 2;
  opts->niter = 15000;
  opts->nburn = 2500;
  opts->nthin = 5;
  opts->nprint = 500;
  opts->seed = 0;
  const lsirm::Hyperparameters hp;
  opts->pr_mean_theta = hp.pr_mean_theta;
  opts->pr_mean_beta = hp.pr_mean_beta;
  opts->pr_sd_beta = hp.pr_sd_beta;
  opts->pr_mean_alpha = hp.pr_mean_alpha;
  opts->pr_sd_alpha = hp.pr_sd_alpha;
  opts->pr_mean_gamma = hp.pr_mean_gamma;
  opts->pr_sd_gamma = hp.pr_sd_gamma;
  opts->pr_spike_mean = hp.pr_spike_mean;
  opts->pr_spike_sd = hp.pr_spike_sd;
  opts->pr_a_theta = hp.pr_a_theta;
  opts->pr_b_theta = hp.pr_b_theta;
  opts->pr_a_eps = hp.pr_a_eps;
  opts->pr_b_eps = hp.pr_b_eps;
  const lsirm::JumpingRules jr;
  opts->jump_theta = jr.jump_theta;
  opts->jump_beta = jr.jump_beta;
  opts->jump_alpha = jr.jump_alpha;
  opts->jump_gamma = jr.jump_gamma;
  opts->jump_z = jr.jump_z;
  opts->jump_w = jr.jump_w;
  return LSIRM_OK;
}

lsirm_status lsirm_fit_run(const lsirm_matrix* data, const lsirm_options* opts,
                           lsirm_progress_fn progress, void* user, lsirm_fit** out) {
  if (!data || !opts || !out)
    return fail(LSIRM_ERR_INVALID_ARGUMENT, "data, opts and out must be non-null");
  return guarded([&] {
    lsirm::ModelSpec spec;
    lsirm::Hyperparameters hp;
    lsirm::JumpingRules jr;
    lsirm::McmcConfig cfg;
    unpack_options(*opts, &spec, &hp, &jr, &cfg);

    lsirm::ProgressFn cb;
    if (progress)
      cb = [progress, user](const lsirm::ProgressLine& line) {
        progress(lsirm::format_progress_line(line).c_str(), user);
      };

    auto fit = std::make_unique<lsirm_fit>();
    fit->samples = lsirm::run_chain(data->data, spec, hp, jr, cfg, cb);
    fit->aligned = lsirm::procrustes_align(fit->samples);
    fit->summary = lsirm::point_estimates(fit->samples, fit->aligned, spec);
    fit->data = data->data;
    *out = fit.release();
  });
}

lsirm_status lsirm_fit_save(const lsirm_fit* fit, const char* dir) {
  if (!fit || !dir) return fail(LSIRM_ERR_INVALID_ARGUMENT, "fit and dir must be non-null");
  return guarded([&] {
    lsirm::write_samples(fit->samples, dir, &fit->aligned);
    const fs::path base(dir);
    lsirm::write_summary_json(fit->summary, fit->samples.spec, (base / "summary.json").string());
    lsirm::write_response_csv((base / "data.csv").string(), fit->data, "NA");
  });
}

lsirm_status lsirm_fit_load(const char* dir, lsirm_fit** out) {
  if (!dir || !out) return fail(LSIRM_ERR_INVALID_ARGUMENT, "dir and out must be non-null");
  return guarded([&] {
    auto fit = std::make_unique<lsirm_fit>();
    fit->samples = lsirm::read_samples(dir, &fit->aligned);
    fit->summary = lsirm::point_estimates(fit->samples, fit->aligned, fit->samples.spec);
    const fs::path base(dir);
    lsirm::CsvOptions csv;
    fit->data = lsirm::read_response_csv((base / "data.csv").string(), csv, fit->samples.spec.family);
    *out = fit.release();
  });
}

void lsirm_fit_free(lsirm_fit* fit) { delete fit; }

lsirm_status lsirm_fit_dims(const lsirm_fit* fit, int32_t* n, int32_t* p, int32_t* ndim,
                            int32_t* n_samples, int64_t* n_missing) {
  if (!fit) return fail(LSIRM_ERR_INVALID_ARGUMENT, "fit handle is null");
  if (n) *n = fit->samples.n;
  if (p) *p = fit->samples.p;
  if (ndim) *ndim = fit->samples.d;
  if (n_samples) *n_samples = fit->samples.n_samples();
  if (n_missing) *n_missing = static_cast<int64_t>(fit->samples.missing_cells.size());
  return LSIRM_OK;
}

lsirm_status lsirm_fit_get(const lsirm_fit* fit, const char* name, double* buf, int64_t buflen,
                           int64_t* len_out) {
  if (!fit || !name) return fail(LSIRM_ERR_INVALID_ARGUMENT, "fit and name must be non-null");
  return guarded([&] {
    std::vector<double> values;
    const std::string key(name);
    const auto& s = fit->summary;
    auto push_vector = [&](const lsirm::Vector& v) {
      values.assign(v.data(), v.data() + v.size());
    };
    auto push_matrix = [&](const lsirm::Matrix& m) {
      values.reserve(static_cast<size_t>(m.rows()) * m.cols());
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) values.push_back(m(r, c));
    };
    if (key == "theta_estimate") push_vector(s.theta_estimate);
    else if (key == "beta_estimate") push_vector(s.beta_estimate);
    else if (key == "alpha_estimate") push_vector(s.alpha_estimate);
    else if (key == "gamma_estimate") values.push_back(s.gamma_estimate);
    else if (key == "sigma_theta_estimate") values.push_back(s.sigma_theta_estimate);
    else if (key == "sigma_eps_estimate") values.push_back(s.sigma_eps_estimate);
    else if (key == "pi_estimate") {
      if (!s.pi_estimate) throw std::logic_error("pi_estimate requires a spike-and-slab fit");
      values.push_back(*s.pi_estimate);
    } else if (key == "imp_estimate") push_vector(s.imp_estimate);
    else if (key == "z_estimate") push_matrix(s.z_estimate);
    else if (key == "w_estimate") push_matrix(s.w_estimate);
    else if (key == "accept_theta") push_vector(s.accept_theta);
    else if (key == "accept_beta") push_vector(s.accept_beta);
    else if (key == "accept_alpha") push_vector(s.accept_alpha);
    else if (key == "accept_z") push_vector(s.accept_z);
    else if (key == "accept_w") push_vector(s.accept_w);
    else if (key == "accept_gamma") values.push_back(s.accept_gamma);
    else if (key == "log_posterior") push_vector(fit->samples.log_posterior);
    else if (key == "gamma_samples") push_vector(fit->samples.gamma);
    else if (key == "reference_index")
      values.push_back(static_cast<double>(fit->aligned.reference_index));
    else
      throw std::invalid_argument("unknown quantity '" + key + "'");

    if (len_out) *len_out = static_cast<int64_t>(values.size());
    if (buf) {
      if (buflen < static_cast<int64_t>(values.size()))
        throw std::invalid_argument("buffer too small for '" + key + "'");
      std::memcpy(buf, values.data(), values.size() * sizeof(double));
    }
  });
}

lsirm_status lsirm_fit_summary_json(const lsirm_fit* fit, char** json_out) {
  if (!fit || !json_out) return fail(LSIRM_ERR_INVALID_ARGUMENT, "fit and json_out must be non-null");
  return guarded([&] {
    const std::string text = lsirm::summary_json_string(fit->summary, fit->samples.spec);
    *json_out = static_cast<char*>(std::malloc(text.size() + 1));
    if (!*json_out) throw std::runtime_error("allocation failure");
    std::memcpy(*json_out, text.c_str(), text.size() + 1);
  });
}

lsirm_status lsirm_fit_summarize_text(const lsirm_fit* fit, const char* table_dir,
                                      char** text_out) {
  if (!fit || !text_out) return fail(LSIRM_ERR_INVALID_ARGUMENT, "fit and text_out must be non-null");
  return guarded([&] {
    const std::string text = summarize_text_impl(*fit, table_dir);
    *text_out = static_cast<char*>(std::malloc(text.size() + 1));
    if (!*text_out) throw std::runtime_error("allocation failure");
    std::memcpy(*text_out, text.c_str(), text.size() + 1);
  });
}

lsirm_status lsirm_fit_export_map(const lsirm_fit* fit, const char* csv_path, int rotate_oblimin,
                                  const char* sidecar_json_path) {
  if (!fit || !csv_path) return fail(LSIRM_ERR_INVALID_ARGUMENT, "fit and csv_path must be non-null");
  return guarded([&] {
    lsirm::Matrix z = fit->summary.z_estimate;
    lsirm::Matrix w = fit->summary.w_estimate;
    ordered_json sidecar;
    sidecar["rotation"] = rotate_oblimin ? "oblimin" : "none";
    if (rotate_oblimin) {
      const auto rot = lsirm::oblimin_rotate(z, w);
      z = rot.z_rot;
      w = rot.w_rot;
      ordered_json t = ordered_json::array();
      for (Eigen::Index r = 0; r < rot.transform.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index c = 0; c < rot.transform.cols(); ++c) row.push_back(rot.transform(r, c));
        t.push_back(std::move(row));
      }
      sidecar["transform"] = t;
      sidecar["converged"] = rot.converged;
      sidecar["criterion"] = rot.criterion;
      sidecar["iterations"] = rot.iterations;
    }
    lsirm::write_map_csv(csv_path, z, w);
    if (sidecar_json_path) {
      std::ofstream out(sidecar_json_path);
      if (!out) throw lsirm::IoError(std::string("cannot open '") + sidecar_json_path + "' for writing");
      out << sidecar.dump(2) << '\n';
    }
  });
}

lsirm_status lsirm_synth_init(lsirm_synth_options* opts) {
  if (!opts) return fail(LSIRM_ERR_INVALID_ARGUMENT, "opts must be non-null");
  std::memset(opts, 0, sizeof(*opts));
  opts->n = 200;
  opts->p = 15;
  opts->model = LSIRM_MODEL_1PL;
  opts->family = LSIRM_FAMILY_BINARY;
  opts->ndim = 2;
  opts->gamma = 1.0;
  opts->sigma_sq = 2.0;
  opts->sigma_eps_sq = 1.0;
  opts->missing_rate = 0.0;
  opts->layout = LSIRM_LAYOUT_PRIOR;
  opts->n_clusters = 3;
  opts->cluster_radius = 2.8;
  opts->cluster_spread = 0.3;
  opts->seed = 0;
  return LSIRM_OK;
}

lsirm_status lsirm_synth_generate(const lsirm_synth_options* opts, const char* csv_path,
                                  const char* truth_json_path) {
  if (!opts || !csv_path || !truth_json_path)
    return fail(LSIRM_ERR_INVALID_ARGUMENT, "opts and output paths must be non-null");
  return guarded([&] {
    if (opts->n < 2 || opts->p < 2) throw std::invalid_argument("synth requires n >= 2 and p >= 2");
    lsirm::GenSpec gen;
    gen.spec.item_params = model_from(opts->model);
    gen.spec.family = family_from(opts->family);
    gen.spec.gamma_mode = lsirm::GammaMode::Free;
    gen.spec.missing_mode = lsirm::MissingMode::Complete;
    gen.spec.latent_dim = opts->ndim;
    gen.n = opts->n;
    gen.p = opts->p;
    gen.gamma = opts->gamma;
    gen.missing_rate = opts->missing_rate;
    gen.missing_mechanism = opts->missing_rate > 0.0 ? lsirm::MissingMechanism::UniformRandom
                                                     : lsirm::MissingMechanism::None;

    // Item intercepts are centered at gamma times the typical person-item
    // distance, so the synthetic items are balanced rather than uniformly
    // hard. Discriminations come from a moderate log-normal so slopes stay
    // within a recoverable range.
    const double typical_dist =
        opts->layout == LSIRM_LAYOUT_CLUSTERED
            ? std::sqrt(static_cast<double>(opts->ndim) + opts->cluster_radius * opts->cluster_radius)
            : std::sqrt(2.0 * static_cast<double>(opts->ndim));
    const double beta_center = opts->gamma * typical_dist;
    const lsirm::SweepRng rng(opts->seed, 1);
    gen.true_params.beta.resize(opts->p);
    for (int i = 0; i < opts->p; ++i)
      gen.true_params.beta[i] = rng.stream(lsirm::Block::init_beta, i).normal(beta_center, 1.0);
    if (gen.spec.item_params == lsirm::ItemParams::TwoPL) {
      gen.true_params.alpha.resize(opts->p);
      for (int i = 0; i < opts->p; ++i)
        gen.true_params.alpha[i] =
            std::exp(rng.stream(lsirm::Block::init_alpha, i).normal(0.0, 0.35));
    }
    gen.true_params.sigma_sq = opts->sigma_sq;
    gen.true_params.sigma_eps_sq = opts->sigma_eps_sq;

    std::vector<int> labels;
    if (opts->layout == LSIRM_LAYOUT_CLUSTERED) {
      gen.true_params.w = lsirm::clustered_positions(opts->p, opts->ndim, opts->n_clusters,
                                                     opts->cluster_radius, opts->cluster_spread,
                                                     &labels, opts->seed);
    } else if (opts->layout != LSIRM_LAYOUT_PRIOR) {
      throw std::invalid_argument("invalid layout code");
    }

    auto [data, state] = lsirm::generate(gen, opts->seed);

    lsirm::TruthRecord truth;
    truth.spec = gen.spec;
    truth.gamma = opts->gamma;
    truth.state = state;
    truth.item_cluster = labels;
    truth.seed = opts->seed;
    for (int k = 0; k < data.n_respondents(); ++k)
      for (int i = 0; i < data.n_items(); ++i)
        if (!data.is_observed(k, i)) truth.masked_cells.emplace_back(k, i, data.values(k, i));

    lsirm::write_response_csv(csv_path, data, "NA");
    lsirm::write_truth_json(truth, truth_json_path);
  });
}

} // extern "C"

namespace {

std::string fmt(double x, int prec = 4) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, x);
  return std::string(buf);
}

std::string summarize_text_impl(const lsirm_fit& fit, const char* table_dir) {
  const auto& spec = fit.samples.spec;
  const auto& s = fit.summary;
  const bool twopl = spec.item_params == lsirm::ItemParams::TwoPL;
  const std::vector<double> probs = {0.25, 0.5, 0.75};

  std::ostringstream os;
  os << "model=" << lsirm::to_string(spec.item_params) << " family=" << lsirm::to_string(spec.family)
     << " gamma_mode=" << lsirm::to_string(spec.gamma_mode)
     << " missing=" << lsirm::to_string(spec.missing_mode) << " ndim=" << spec.latent_dim
     << " samples=" << fit.samples.n_samples() << "\n\n";

  os << "estimates\n";
  os << "  gamma_estimate " << fmt(s.gamma_estimate) << "\n";
  os << "  sigma_theta_estimate " << fmt(s.sigma_theta_estimate) << "\n";
  if (spec.family == lsirm::ResponseFamily::Continuous)
    os << "  sigma_eps_estimate " << fmt(s.sigma_eps_estimate) << "\n";
  if (s.pi_estimate) os << "  pi_estimate " << fmt(*s.pi_estimate) << "\n";
  if (spec.missing_mode == lsirm::MissingMode::Mar)
    os << "  imp_estimate [" << s.imp_estimate.size() << " missing cells]\n";
  os << "\n";

  const lsirm::Matrix beta_q = lsirm::beta_quantiles(fit.samples, probs);
  os << "beta quantiles (q25 q50 q75)\n";
  for (Eigen::Index i = 0; i < beta_q.rows(); ++i)
    os << "  item " << i + 1 << "  " << fmt(beta_q(i, 0)) << " " << fmt(beta_q(i, 1)) << " "
       << fmt(beta_q(i, 2)) << "\n";
  os << "\n";

  lsirm::Matrix alpha_q;
  if (twopl) {
    alpha_q = lsirm::column_quantiles(fit.samples.alpha, probs);
    os << "alpha quantiles (q25 q50 q75)\n";
    for (Eigen::Index i = 0; i < alpha_q.rows(); ++i)
      os << "  item " << i + 1 << "  " << fmt(alpha_q(i, 0)) << " " << fmt(alpha_q(i, 1)) << " "
         << fmt(alpha_q(i, 2)) << "\n";
    os << "\n";
  }

  const auto groups = lsirm::theta_by_score_summary(fit.data, s);
  os << "theta by total score (count min q1 median q3 max)\n";
  for (const auto& g : groups) {
    if (g.score_lo == g.score_hi)
      os << "  score " << g.score_lo;
    else
      os << "  score [" << fmt(g.score_lo, 2) << ", " << fmt(g.score_hi, 2) << ")";
    os << "  " << g.count << "  " << fmt(g.min) << " " << fmt(g.q1) << " " << fmt(g.median) << " "
       << fmt(g.q3) << " " << fmt(g.max) << "\n";
  }
  os << "\n";

  os << "acceptance ratios (post burn-in)\n";
  auto range_line = [&os](const char* label, const lsirm::Vector& v) {
    if (v.size() == 0) return;
    os << "  " << label << " mean " << fmt(v.mean()) << " min " << fmt(v.minCoeff()) << " max "
       << fmt(v.maxCoeff()) << "\n";
  };
  range_line("theta", s.accept_theta);
  range_line("beta", s.accept_beta);
  if (twopl) range_line("alpha", s.accept_alpha);
  range_line("z", s.accept_z);
  range_line("w", s.accept_w);
  if (spec.gamma_mode != lsirm::GammaMode::FixedAtOne)
    os << "  gamma " << fmt(s.accept_gamma) << "\n";

  if (table_dir) {
    fs::create_directories(table_dir);
    const fs::path base(table_dir);
    {
      std::ofstream f(base / "beta_quantiles.csv");
      f << "item,q25,q50,q75\n";
      for (Eigen::Index i = 0; i < beta_q.rows(); ++i)
        f << i + 1 << ',' << beta_q(i, 0) << ',' << beta_q(i, 1) << ',' << beta_q(i, 2) << '\n';
    }
    if (twopl) {
      std::ofstream f(base / "alpha_quantiles.csv");
      f << "item,q25,q50,q75\n";
      for (Eigen::Index i = 0; i < alpha_q.rows(); ++i)
        f << i + 1 << ',' << alpha_q(i, 0) << ',' << alpha_q(i, 1) << ',' << alpha_q(i, 2) << '\n';
    }
    {
      std::ofstream f(base / "theta_by_score.csv");
      f << "score_lo,score_hi,count,min,q1,median,q3,max\n";
      for (const auto& g : groups)
        f << g.score_lo << ',' << g.score_hi << ',' << g.count << ',' << g.min << ',' << g.q1 << ','
          << g.median << ',' << g.q3 << ',' << g.max << '\n';
    }
    {
      std::ofstream f(base / "acceptance.csv");
      f << "block,index,ratio\n";
      for (Eigen::Index k = 0; k < s.accept_theta.size(); ++k)
        f << "theta," << k + 1 << ',' << s.accept_theta[k] << '\n';
      for (Eigen::Index i = 0; i < s.accept_beta.size(); ++i)
        f << "beta," << i + 1 << ',' << s.accept_beta[i] << '\n';
      for (Eigen::Index i = 0; i < s.accept_alpha.size(); ++i)
        f << "alpha," << i + 1 << ',' << s.accept_alpha[i] << '\n';
      for (Eigen::Index k = 0; k < s.accept_z.size(); ++k)
        f << "z," << k + 1 << ',' << s.accept_z[k] << '\n';
      for (Eigen::Index i = 0; i < s.accept_w.size(); ++i)
        f << "w," << i + 1 << ',' << s.accept_w[i] << '\n';
      if (spec.gamma_mode != lsirm::GammaMode::FixedAtOne)
        f << "gamma,1," << s.accept_gamma << '\n';
    }
  }
  return os.str();
}

}  // namespace
