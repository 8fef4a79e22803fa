#include "io.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace lsirm {

std::string to_string(ItemParams v) { return v == ItemParams::OnePL ? "1pl" : "2pl"; }
std::string to_string(ResponseFamily v) {
  return v == ResponseFamily::Binary ? "binary" : "normal";
}
std::string to_string(GammaMode v) {
  switch (v) {
    case GammaMode::Free: return "free";
    case GammaMode::FixedAtOne: return "fixed";
    case GammaMode::SpikeSlab: return "spikeslab";
  }
  return "free";
}
std::string to_string(MissingMode v) {
  switch (v) {
    case MissingMode::Complete: return "complete";
    case MissingMode::Mcar: return "mcar";
    case MissingMode::Mar: return "mar";
  }
  return "complete";
}

ItemParams parse_item_params(const std::string& s) {
  if (s == "1pl") return ItemParams::OnePL;
  if (s == "2pl") return ItemParams::TwoPL;
  throw ValidationError("unknown model '" + s + "' (expected 1pl or 2pl)");
}
ResponseFamily parse_family(const std::string& s) {
  if (s == "binary") return ResponseFamily::Binary;
  if (s == "normal" || s == "continuous") return ResponseFamily::Continuous;
  throw ValidationError("unknown family '" + s + "' (expected binary or normal)");
}
GammaMode parse_gamma_mode(const std::string& s) {
  if (s == "free") return GammaMode::Free;
  if (s == "fixed") return GammaMode::FixedAtOne;
  if (s == "spikeslab") return GammaMode::SpikeSlab;
  throw ValidationError("unknown gamma mode '" + s + "'");
}
MissingMode parse_missing_mode(const std::string& s) {
  if (s == "complete") return MissingMode::Complete;
  if (s == "mcar") return MissingMode::Mcar;
  if (s == "mar") return MissingMode::Mar;
  throw ValidationError("unknown missing mode '" + s + "' (expected complete, mcar or mar)");
}

namespace {

std::string fmt_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back("");
  return out;
}

bool parse_double(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  *out = v;
  return true;
}

}  // namespace

ResponseMatrix read_response_csv(const std::string& path, const CsvOptions& opts,
                                 ResponseFamily family) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");

  double missing_value = 0.0;
  const bool missing_is_numeric = parse_double(opts.missing_code, &missing_value);

  std::vector<std::vector<double>> rows;
  std::vector<std::vector<std::uint8_t>> obs_rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t ncols = 0;
  bool skipped_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    if (opts.has_header && !skipped_header) {
      skipped_header = true;
      continue;
    }
    const auto fields = split_csv_line(line);
    if (ncols == 0) {
      ncols = fields.size();
    } else if (fields.size() != ncols) {
      std::ostringstream os;
      os << path << ": line " << lineno << ": expected " << ncols << " fields, got "
         << fields.size();
      throw ParseError(os.str());
    }
    std::vector<double> vals(fields.size(), 0.0);
    std::vector<std::uint8_t> obs(fields.size(), 1);
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string& cell = fields[c];
      if (cell == opts.missing_code) {
        obs[c] = 0;
        continue;
      }
      double v = 0.0;
      if (!parse_double(cell, &v)) {
        std::ostringstream os;
        os << path << ": line " << lineno << ", column " << c + 1 << ": non-numeric cell '"
           << cell << "'";
        throw ParseError(os.str());
      }
      if (missing_is_numeric && v == missing_value) {
        obs[c] = 0;
        continue;
      }
      vals[c] = v;
    }
    rows.push_back(std::move(vals));
    obs_rows.push_back(std::move(obs));
  }
  if (rows.empty()) throw ParseError(path + ": no data rows");

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(ncols);
  Matrix values(n, p);
  MaskMatrix observed(n, p);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < p; ++i) {
      values(k, i) = rows[k][i];
      observed(k, i) = obs_rows[k][i];
    }

  for (Eigen::Index k = 0; k < n; ++k)
    if ((observed.row(k).array() == 0).all()) {
      std::ostringstream os;
      os << path << ": respondent row " << k + 1 << " has no observed cells";
      throw ValidationError(os.str());
    }
  for (Eigen::Index i = 0; i < p; ++i)
    if ((observed.col(i).array() == 0).all()) {
      std::ostringstream os;
      os << path << ": item column " << i + 1 << " has no observed cells";
      throw ValidationError(os.str());
    }

  return ResponseMatrix::make(family, std::move(values), std::move(observed));
}

ResponseMatrix complete_cases(const ResponseMatrix& data) {
  std::vector<int> keep;
  for (int k = 0; k < data.n_respondents(); ++k) {
    bool complete = true;
    for (int i = 0; i < data.n_items() && complete; ++i) complete = data.is_observed(k, i);
    if (complete) keep.push_back(k);
  }
  if (keep.empty()) throw ValidationError("no complete cases; use mcar or mar");
  if (static_cast<int>(keep.size()) == data.n_respondents()) return data;
  if (static_cast<int>(keep.size()) < 2)
    throw ValidationError("fewer than two complete cases; use mcar or mar");

  Matrix values(keep.size(), data.n_items());
  for (std::size_t r = 0; r < keep.size(); ++r) values.row(r) = data.values.row(keep[r]);
  return ResponseMatrix::make_fully_observed(data.family, std::move(values));
}

void write_response_csv(const std::string& path, const ResponseMatrix& data,
                        const std::string& missing_code) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (int k = 0; k < data.n_respondents(); ++k) {
    for (int i = 0; i < data.n_items(); ++i) {
      if (i) out << ',';
      if (data.is_observed(k, i))
        out << fmt_full(data.values(k, i));
      else
        out << missing_code;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed while writing '" + path + "'");
}

namespace {

void write_block(const fs::path& path, const Matrix& block) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  for (Eigen::Index r = 0; r < block.rows(); ++r) {
    for (Eigen::Index c = 0; c < block.cols(); ++c) {
      if (c) out << ' ';
      out << fmt_full(block(r, c));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed while writing '" + path.string() + "'");
}

Matrix read_block(const fs::path& path, Eigen::Index rows, Eigen::Index cols) {
  std::ifstream in(path);
  if (!in) throw IntegrityError("missing sample block '" + path.string() + "'");
  std::vector<std::vector<double>> data;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::istringstream is(line);
    std::vector<double> row;
    double v;
    while (is >> v) row.push_back(v);
    data.push_back(std::move(row));
  }
  if (static_cast<Eigen::Index>(data.size()) != rows) {
    std::ostringstream os;
    os << path.string() << ": expected " << rows << " rows, found " << data.size();
    throw IntegrityError(os.str());
  }
  Matrix out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(data[r].size()) != cols) {
      std::ostringstream os;
      os << path.string() << ": row " << r + 1 << ": expected " << cols << " values, found "
         << data[r].size();
      throw IntegrityError(os.str());
    }
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = data[r][c];
  }
  return out;
}

Matrix flatten_draws(const std::vector<Matrix>& draws) {
  if (draws.empty()) return Matrix();
  const auto rows = static_cast<Eigen::Index>(draws.size());
  const auto n = draws[0].rows();
  const auto d = draws[0].cols();
  Matrix out(rows, n * d);
  for (Eigen::Index s = 0; s < rows; ++s)
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index j = 0; j < d; ++j) out(s, k * d + j) = draws[s](k, j);
  return out;
}

std::vector<Matrix> unflatten_draws(const Matrix& flat, Eigen::Index n, Eigen::Index d) {
  std::vector<Matrix> out(flat.rows());
  for (Eigen::Index s = 0; s < flat.rows(); ++s) {
    out[s].resize(n, d);
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index j = 0; j < d; ++j) out[s](k, j) = flat(s, k * d + j);
  }
  return out;
}

ordered_json vector_json(const Vector& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

ordered_json ivector_json(const Eigen::VectorXi& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

ordered_json matrix_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::VectorXi ivector_from_json(const ordered_json& arr) {
  Eigen::VectorXi out(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) out[static_cast<Eigen::Index>(i)] = arr[i].get<int>();
  return out;
}

ordered_json accept_block_json(const Eigen::VectorXi& accepted, const Eigen::VectorXi& attempted) {
  ordered_json b;
  b["accepted"] = ivector_json(accepted);
  b["attempted"] = ivector_json(attempted);
  b["ratio"] = vector_json(AcceptCounters::ratio(accepted, attempted));
  return b;
}

}  // namespace

void write_samples(const PosteriorSamples& samples, const std::string& dir,
                   const AlignedSamples* aligned) {
  fs::create_directories(dir);
  const fs::path base(dir);
  const bool twopl = samples.spec.item_params == ItemParams::TwoPL;
  const bool continuous = samples.spec.family == ResponseFamily::Continuous;
  const bool spike_slab = samples.spec.gamma_mode == GammaMode::SpikeSlab;
  const bool mar = samples.spec.missing_mode == MissingMode::Mar;
  const auto s_total = static_cast<Eigen::Index>(samples.n_samples());

  write_block(base / "theta.txt", samples.theta);
  write_block(base / "beta.txt", samples.beta);
  if (twopl) write_block(base / "alpha.txt", samples.alpha);
  write_block(base / "gamma.txt", samples.gamma);
  write_block(base / "sigma_sq.txt", samples.sigma_sq);
  if (continuous) write_block(base / "sigma_eps_sq.txt", samples.sigma_eps_sq);
  write_block(base / "z.txt", flatten_draws(samples.z));
  write_block(base / "w.txt", flatten_draws(samples.w));
  if (spike_slab) {
    Matrix flags(s_total, 1);
    for (Eigen::Index s = 0; s < s_total; ++s) flags(s, 0) = samples.slab_indicator[s] ? 1.0 : 0.0;
    write_block(base / "slab_indicator.txt", flags);
  }
  if (mar && samples.imputed.cols() > 0) write_block(base / "imputed.txt", samples.imputed);
  write_block(base / "log_posterior.txt", samples.log_posterior);
  if (aligned) {
    write_block(base / "z_aligned.txt", flatten_draws(aligned->z_aligned));
    write_block(base / "w_aligned.txt", flatten_draws(aligned->w_aligned));
  }

  ordered_json m;
  m["format_version"] = 1;
  m["model"] = to_string(samples.spec.item_params);
  m["family"] = to_string(samples.spec.family);
  m["gamma_mode"] = to_string(samples.spec.gamma_mode);
  m["missing_mode"] = to_string(samples.spec.missing_mode);
  m["ndim"] = samples.d;
  m["n_respondents"] = samples.n;
  m["n_items"] = samples.p;
  m["n_samples"] = samples.n_samples();
  m["niter"] = samples.config.niter;
  m["nburn"] = samples.config.nburn;
  m["nthin"] = samples.config.nthin;
  m["nprint"] = samples.config.nprint;
  m["seed"] = samples.config.seed;

  ordered_json hp;
  hp["pr_mean_theta"] = samples.hp.pr_mean_theta;
  hp["pr_mean_beta"] = samples.hp.pr_mean_beta;
  hp["pr_sd_beta"] = samples.hp.pr_sd_beta;
  hp["pr_mean_alpha"] = samples.hp.pr_mean_alpha;
  hp["pr_sd_alpha"] = samples.hp.pr_sd_alpha;
  hp["pr_mean_gamma"] = samples.hp.pr_mean_gamma;
  hp["pr_sd_gamma"] = samples.hp.pr_sd_gamma;
  hp["pr_spike_mean"] = samples.hp.pr_spike_mean;
  hp["pr_spike_sd"] = samples.hp.pr_spike_sd;
  hp["pr_a_theta"] = samples.hp.pr_a_theta;
  hp["pr_b_theta"] = samples.hp.pr_b_theta;
  hp["pr_a_eps"] = samples.hp.pr_a_eps;
  hp["pr_b_eps"] = samples.hp.pr_b_eps;
  m["hyperparameters"] = hp;

  ordered_json jr;
  jr["jump_theta"] = samples.jr.jump_theta;
  jr["jump_beta"] = samples.jr.jump_beta;
  jr["jump_alpha"] = samples.jr.jump_alpha;
  jr["jump_gamma"] = samples.jr.jump_gamma;
  jr["jump_z"] = samples.jr.jump_z;
  jr["jump_w"] = samples.jr.jump_w;
  m["jumping_rules"] = jr;

  ordered_json acc;
  acc["window"] = "post_burn_in";
  acc["theta"] = accept_block_json(samples.accept.theta_accepted, samples.accept.theta_attempted);
  acc["beta"] = accept_block_json(samples.accept.beta_accepted, samples.accept.beta_attempted);
  if (twopl)
    acc["alpha"] = accept_block_json(samples.accept.alpha_accepted, samples.accept.alpha_attempted);
  acc["z"] = accept_block_json(samples.accept.z_accepted, samples.accept.z_attempted);
  acc["w"] = accept_block_json(samples.accept.w_accepted, samples.accept.w_attempted);
  ordered_json gacc;
  gacc["accepted"] = samples.accept.gamma_accepted;
  gacc["attempted"] = samples.accept.gamma_attempted;
  gacc["ratio"] = samples.accept.gamma_ratio();
  acc["gamma"] = gacc;
  m["acceptance"] = acc;

  if (aligned)
    m["reference_index"] = aligned->reference_index;
  else
    m["reference_index"] = nullptr;

  ordered_json cells = ordered_json::array();
  for (const auto& [k, i] : samples.missing_cells) cells.push_back(ordered_json::array({k, i}));
  m["missing_cells"] = cells;

  std::ofstream out(base / "manifest.json");
  if (!out) throw IoError("cannot open manifest for writing in '" + dir + "'");
  out << m.dump(2) << '\n';
}

PosteriorSamples read_samples(const std::string& dir, AlignedSamples* aligned_out) {
  const fs::path base(dir);
  std::ifstream in(base / "manifest.json");
  if (!in) throw IoError("cannot open '" + (base / "manifest.json").string() + "'");
  ordered_json m;
  try {
    in >> m;
  } catch (const std::exception& e) {
    throw ParseError("manifest.json: " + std::string(e.what()));
  }

  PosteriorSamples out;
  out.spec.item_params = parse_item_params(m.at("model").get<std::string>());
  out.spec.family = parse_family(m.at("family").get<std::string>());
  out.spec.gamma_mode = parse_gamma_mode(m.at("gamma_mode").get<std::string>());
  out.spec.missing_mode = parse_missing_mode(m.at("missing_mode").get<std::string>());
  out.spec.latent_dim = m.at("ndim").get<int>();
  out.n = m.at("n_respondents").get<int>();
  out.p = m.at("n_items").get<int>();
  out.d = out.spec.latent_dim;
  const int s_total = m.at("n_samples").get<int>();
  out.config.niter = m.at("niter").get<int>();
  out.config.nburn = m.at("nburn").get<int>();
  out.config.nthin = m.at("nthin").get<int>();
  out.config.nprint = m.at("nprint").get<int>();
  out.config.seed = m.at("seed").get<std::uint64_t>();

  const auto& hp = m.at("hyperparameters");
  out.hp.pr_mean_theta = hp.at("pr_mean_theta").get<double>();
  out.hp.pr_mean_beta = hp.at("pr_mean_beta").get<double>();
  out.hp.pr_sd_beta = hp.at("pr_sd_beta").get<double>();
  out.hp.pr_mean_alpha = hp.at("pr_mean_alpha").get<double>();
  out.hp.pr_sd_alpha = hp.at("pr_sd_alpha").get<double>();
  out.hp.pr_mean_gamma = hp.at("pr_mean_gamma").get<double>();
  out.hp.pr_sd_gamma = hp.at("pr_sd_gamma").get<double>();
  out.hp.pr_spike_mean = hp.at("pr_spike_mean").get<double>();
  out.hp.pr_spike_sd = hp.at("pr_spike_sd").get<double>();
  out.hp.pr_a_theta = hp.at("pr_a_theta").get<double>();
  out.hp.pr_b_theta = hp.at("pr_b_theta").get<double>();
  out.hp.pr_a_eps = hp.at("pr_a_eps").get<double>();
  out.hp.pr_b_eps = hp.at("pr_b_eps").get<double>();

  const auto& jr = m.at("jumping_rules");
  out.jr.jump_theta = jr.at("jump_theta").get<double>();
  out.jr.jump_beta = jr.at("jump_beta").get<double>();
  out.jr.jump_alpha = jr.at("jump_alpha").get<double>();
  out.jr.jump_gamma = jr.at("jump_gamma").get<double>();
  out.jr.jump_z = jr.at("jump_z").get<double>();
  out.jr.jump_w = jr.at("jump_w").get<double>();

  const bool twopl = out.spec.item_params == ItemParams::TwoPL;
  const bool continuous = out.spec.family == ResponseFamily::Continuous;
  const bool spike_slab = out.spec.gamma_mode == GammaMode::SpikeSlab;
  const bool mar = out.spec.missing_mode == MissingMode::Mar;

  for (const auto& cell : m.at("missing_cells"))
    out.missing_cells.emplace_back(cell[0].get<int>(), cell[1].get<int>());

  out.theta = read_block(base / "theta.txt", s_total, out.n);
  out.beta = read_block(base / "beta.txt", s_total, out.p);
  if (twopl) out.alpha = read_block(base / "alpha.txt", s_total, out.p);
  out.gamma = read_block(base / "gamma.txt", s_total, 1).col(0);
  out.sigma_sq = read_block(base / "sigma_sq.txt", s_total, 1).col(0);
  if (continuous) out.sigma_eps_sq = read_block(base / "sigma_eps_sq.txt", s_total, 1).col(0);
  out.z = unflatten_draws(read_block(base / "z.txt", s_total, static_cast<Eigen::Index>(out.n) * out.d),
                          out.n, out.d);
  out.w = unflatten_draws(read_block(base / "w.txt", s_total, static_cast<Eigen::Index>(out.p) * out.d),
                          out.p, out.d);
  if (spike_slab) {
    const Matrix flags = read_block(base / "slab_indicator.txt", s_total, 1);
    out.slab_indicator.resize(s_total);
    for (int s = 0; s < s_total; ++s) out.slab_indicator[s] = flags(s, 0) != 0.0 ? 1 : 0;
  }
  if (mar && !out.missing_cells.empty())
    out.imputed = read_block(base / "imputed.txt", s_total,
                             static_cast<Eigen::Index>(out.missing_cells.size()));
  else if (mar)
    out.imputed.resize(s_total, 0);
  out.log_posterior = read_block(base / "log_posterior.txt", s_total, 1).col(0);

  const auto& acc = m.at("acceptance");
  out.accept.theta_accepted = ivector_from_json(acc.at("theta").at("accepted"));
  out.accept.theta_attempted = ivector_from_json(acc.at("theta").at("attempted"));
  out.accept.beta_accepted = ivector_from_json(acc.at("beta").at("accepted"));
  out.accept.beta_attempted = ivector_from_json(acc.at("beta").at("attempted"));
  if (twopl) {
    out.accept.alpha_accepted = ivector_from_json(acc.at("alpha").at("accepted"));
    out.accept.alpha_attempted = ivector_from_json(acc.at("alpha").at("attempted"));
  }
  out.accept.z_accepted = ivector_from_json(acc.at("z").at("accepted"));
  out.accept.z_attempted = ivector_from_json(acc.at("z").at("attempted"));
  out.accept.w_accepted = ivector_from_json(acc.at("w").at("accepted"));
  out.accept.w_attempted = ivector_from_json(acc.at("w").at("attempted"));
  out.accept.gamma_accepted = acc.at("gamma").at("accepted").get<long>();
  out.accept.gamma_attempted = acc.at("gamma").at("attempted").get<long>();

  if (out.accept.theta_accepted.size() != out.n || out.accept.beta_accepted.size() != out.p)
    throw IntegrityError("acceptance block shapes do not match manifest dimensions");

  if (aligned_out) {
    if (!m.at("reference_index").is_null() && fs::exists(base / "z_aligned.txt")) {
      aligned_out->reference_index = m.at("reference_index").get<int>();
      aligned_out->z_aligned = unflatten_draws(
          read_block(base / "z_aligned.txt", s_total, static_cast<Eigen::Index>(out.n) * out.d),
          out.n, out.d);
      aligned_out->w_aligned = unflatten_draws(
          read_block(base / "w_aligned.txt", s_total, static_cast<Eigen::Index>(out.p) * out.d),
          out.p, out.d);
    } else {
      throw IntegrityError("run directory has no aligned draws");
    }
  }
  return out;
}

std::string summary_json_string(const FitSummary& summary, const ModelSpec& spec) {
  ordered_json j;
  j["model"] = to_string(spec.item_params);
  j["family"] = to_string(spec.family);
  j["gamma_mode"] = to_string(spec.gamma_mode);
  j["missing_mode"] = to_string(spec.missing_mode);
  j["ndim"] = spec.latent_dim;
  j["beta_estimate"] = vector_json(summary.beta_estimate);
  j["theta_estimate"] = vector_json(summary.theta_estimate);
  if (spec.item_params == ItemParams::TwoPL) j["alpha_estimate"] = vector_json(summary.alpha_estimate);
  j["gamma_estimate"] = summary.gamma_estimate;
  j["sigma_theta_estimate"] = summary.sigma_theta_estimate;
  if (spec.family == ResponseFamily::Continuous) j["sigma_eps_estimate"] = summary.sigma_eps_estimate;
  j["z_estimate"] = matrix_json(summary.z_estimate);
  j["w_estimate"] = matrix_json(summary.w_estimate);
  if (summary.pi_estimate) j["pi_estimate"] = *summary.pi_estimate;
  if (spec.missing_mode == MissingMode::Mar) j["imp_estimate"] = vector_json(summary.imp_estimate);
  ordered_json acc;
  acc["theta"] = vector_json(summary.accept_theta);
  acc["beta"] = vector_json(summary.accept_beta);
  if (spec.item_params == ItemParams::TwoPL) acc["alpha"] = vector_json(summary.accept_alpha);
  acc["z"] = vector_json(summary.accept_z);
  acc["w"] = vector_json(summary.accept_w);
  acc["gamma"] = summary.accept_gamma;
  j["acceptance"] = acc;
  return j.dump(2) + "\n";
}

void write_summary_json(const FitSummary& summary, const ModelSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << summary_json_string(summary, spec);
}

void write_map_csv(const std::string& path, const Matrix& z_est, const Matrix& w_est) {
  if (z_est.cols() != w_est.cols()) throw std::invalid_argument("z and w dimension mismatch");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "kind,index";
  for (Eigen::Index j = 0; j < z_est.cols(); ++j) out << ",dim" << j + 1;
  out << '\n';
  for (Eigen::Index k = 0; k < z_est.rows(); ++k) {
    out << "respondent," << k + 1;
    for (Eigen::Index j = 0; j < z_est.cols(); ++j) out << ',' << fmt_full(z_est(k, j));
    out << '\n';
  }
  for (Eigen::Index i = 0; i < w_est.rows(); ++i) {
    out << "item," << i + 1;
    for (Eigen::Index j = 0; j < w_est.cols(); ++j) out << ',' << fmt_full(w_est(i, j));
    out << '\n';
  }
  if (!out) throw IoError("failed while writing '" + path + "'");
}

void write_truth_json(const TruthRecord& truth, const std::string& path) {
  ordered_json j;
  j["model"] = to_string(truth.spec.item_params);
  j["family"] = to_string(truth.spec.family);
  j["ndim"] = truth.spec.latent_dim;
  j["seed"] = truth.seed;
  j["gamma"] = truth.gamma;
  j["sigma_sq"] = truth.state.sigma_sq;
  j["sigma_eps_sq"] = truth.state.sigma_eps_sq;
  j["theta"] = vector_json(truth.state.theta);
  j["beta"] = vector_json(truth.state.beta);
  if (truth.spec.item_params == ItemParams::TwoPL) j["alpha"] = vector_json(truth.state.alpha);
  j["z"] = matrix_json(truth.state.z);
  j["w"] = matrix_json(truth.state.w);
  if (!truth.item_cluster.empty()) j["item_cluster"] = truth.item_cluster;
  ordered_json masked = ordered_json::array();
  for (const auto& [k, i, value] : truth.masked_cells)
    masked.push_back(ordered_json::array({k, i, value}));
  j["masked_cells"] = masked;

  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

namespace {

Vector vector_from_json(const ordered_json& arr) {
  Vector out(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return out;
}

Matrix matrix_from_json(const ordered_json& rows) {
  if (rows.empty()) return Matrix();
  Matrix out(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c].get<double>();
  return out;
}

}  // namespace

TruthRecord read_truth_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError(path + ": " + std::string(e.what()));
  }
  TruthRecord t;
  t.spec.item_params = parse_item_params(j.at("model").get<std::string>());
  t.spec.family = parse_family(j.at("family").get<std::string>());
  t.spec.latent_dim = j.at("ndim").get<int>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.gamma = j.at("gamma").get<double>();
  t.state.sigma_sq = j.at("sigma_sq").get<double>();
  t.state.sigma_eps_sq = j.at("sigma_eps_sq").get<double>();
  t.state.theta = vector_from_json(j.at("theta"));
  t.state.beta = vector_from_json(j.at("beta"));
  if (j.contains("alpha")) t.state.alpha = vector_from_json(j.at("alpha"));
  t.state.z = matrix_from_json(j.at("z"));
  t.state.w = matrix_from_json(j.at("w"));
  if (j.contains("item_cluster")) t.item_cluster = j.at("item_cluster").get<std::vector<int>>();
  if (j.contains("masked_cells"))
    for (const auto& cell : j.at("masked_cells"))
      t.masked_cells.emplace_back(cell[0].get<int>(), cell[1].get<int>(), cell[2].get<double>());
  return t;
}

}  // namespace lsirm
