// Command-line front end for the lsirm shared library. Talks to the engine
// exclusively through the C API in lsirm/lsirm.h.
//
// Exit codes: 0 success, 1 runtime or data error, 2 usage error.

#include <lsirm/lsirm.h>

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

int report_failure(lsirm_status) {
  std::fprintf(stderr, "error: %s\n", lsirm_last_error());
  return kExitRuntime;
}

void progress_to_stderr(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

std::string default_out_dir(const char* fallback) {
  const char* env = std::getenv("LSIRM_OUT_DIR");
  return env && *env ? std::string(env) : std::string(fallback);
}

int32_t model_code(const std::string& s) { return s == "2pl" ? LSIRM_MODEL_2PL : LSIRM_MODEL_1PL; }

int32_t family_code(const std::string& s) {
  return s == "normal" ? LSIRM_FAMILY_NORMAL : LSIRM_FAMILY_BINARY;
}

int32_t missing_code_of(const std::string& s) {
  if (s == "mcar") return LSIRM_MISSING_MCAR;
  if (s == "mar") return LSIRM_MISSING_MAR;
  return LSIRM_MISSING_COMPLETE;
}

struct FitArgs {
  std::string data_path;
  std::string out_dir;
  std::string model = "1pl";
  std::string family = "binary";
  std::string missing = "complete";
  std::string missing_code = "NA";
  bool header = false;
  bool fixed_gamma = false;
  bool spikenslab = false;
  bool complete_cases = false;
  int chains = 1;
  lsirm_options opts{};
};

int run_fit(const FitArgs& args) {
  if (args.fixed_gamma && args.spikenslab) {
    std::fprintf(stderr, "error: --fixed-gamma and --spikenslab cannot be used at the same time\n");
    return kExitUsage;
  }

  lsirm_matrix* raw = nullptr;
  lsirm_status st = lsirm_matrix_read_csv(args.data_path.c_str(), args.missing_code.c_str(),
                                          args.header ? 1 : 0,
                                          static_cast<lsirm_family>(family_code(args.family)), &raw);
  if (st != LSIRM_OK) return report_failure(st);

  lsirm_matrix* data = raw;
  if (args.complete_cases) {
    lsirm_matrix* filtered = nullptr;
    st = lsirm_matrix_complete_cases(raw, &filtered);
    lsirm_matrix_free(raw);
    if (st != LSIRM_OK) return report_failure(st);
    data = filtered;
  }

  lsirm_options opts = args.opts;
  opts.model = model_code(args.model);
  opts.family = family_code(args.family);
  opts.missing_mode = missing_code_of(args.missing);
  opts.gamma_mode = args.fixed_gamma ? LSIRM_GAMMA_FIXED
                                     : (args.spikenslab ? LSIRM_GAMMA_SPIKESLAB : LSIRM_GAMMA_FREE);

  const uint64_t base_seed = opts.seed;
  for (int c = 0; c < args.chains; ++c) {
    std::string dir = args.out_dir;
    if (args.chains > 1) {
      char sub[32];
      std::snprintf(sub, sizeof(sub), "chain_%02d", c + 1);
      dir = (fs::path(args.out_dir) / sub).string();
    }
    opts.seed = base_seed + static_cast<uint64_t>(c);

    lsirm_fit* fit = nullptr;
    st = lsirm_fit_run(data, &opts, progress_to_stderr, nullptr, &fit);
    if (st != LSIRM_OK) {
      lsirm_matrix_free(data);
      return report_failure(st);
    }
    st = lsirm_fit_save(fit, dir.c_str());
    lsirm_fit_free(fit);
    if (st != LSIRM_OK) {
      lsirm_matrix_free(data);
      return report_failure(st);
    }
    std::fprintf(stderr, "wrote %s\n", dir.c_str());
  }
  lsirm_matrix_free(data);
  return kExitOk;
}

int run_summarize(const std::string& run_dir, const std::string& table_dir) {
  lsirm_fit* fit = nullptr;
  lsirm_status st = lsirm_fit_load(run_dir.c_str(), &fit);
  if (st != LSIRM_OK) return report_failure(st);
  char* text = nullptr;
  st = lsirm_fit_summarize_text(fit, table_dir.empty() ? nullptr : table_dir.c_str(), &text);
  lsirm_fit_free(fit);
  if (st != LSIRM_OK) return report_failure(st);
  std::fputs(text, stdout);
  lsirm_string_free(text);
  return kExitOk;
}

int run_map(const std::string& run_dir, std::string out_csv, const std::string& rotate,
            std::string sidecar) {
  lsirm_fit* fit = nullptr;
  lsirm_status st = lsirm_fit_load(run_dir.c_str(), &fit);
  if (st != LSIRM_OK) return report_failure(st);

  const bool rotate_oblimin = rotate == "oblimin";
  int32_t ndim = 0;
  lsirm_fit_dims(fit, nullptr, nullptr, &ndim, nullptr, nullptr);
  if (rotate_oblimin && ndim < 2) {
    std::fprintf(stderr, "error: --rotate oblimin requires a latent dimension of at least 2\n");
    lsirm_fit_free(fit);
    return kExitUsage;
  }

  if (out_csv.empty()) out_csv = (fs::path(run_dir) / "map.csv").string();
  if (rotate_oblimin && sidecar.empty())
    sidecar = (fs::path(run_dir) / "map_transform.json").string();

  st = lsirm_fit_export_map(fit, out_csv.c_str(), rotate_oblimin ? 1 : 0,
                            sidecar.empty() ? nullptr : sidecar.c_str());
  lsirm_fit_free(fit);
  if (st != LSIRM_OK) return report_failure(st);
  std::fprintf(stderr, "wrote %s\n", out_csv.c_str());
  return kExitOk;
}

int run_synth(const lsirm_synth_options& opts, const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  const std::string csv = (fs::path(out_dir) / "data.csv").string();
  const std::string truth = (fs::path(out_dir) / "truth.json").string();
  const lsirm_status st = lsirm_synth_generate(&opts, csv.c_str(), truth.c_str());
  if (st != LSIRM_OK) return report_failure(st);
  std::fprintf(stderr, "wrote %s and %s\n", csv.c_str(), truth.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian latent space item response models (1PL/2PL, binary/continuous)"};
  app.require_subcommand(1);

  // fit
  FitArgs fit_args;
  lsirm_options_init(&fit_args.opts);
  auto* fit = app.add_subcommand("fit", "Fit a latent space item response model to a CSV matrix");
  fit->add_option("data", fit_args.data_path, "Response matrix CSV")->required();
  fit->add_option("--out", fit_args.out_dir, "Output run directory")
      ->default_val(default_out_dir("lsirm_run"));
  fit->add_option("--model", fit_args.model, "Item parameterization")
      ->check(CLI::IsMember({"1pl", "2pl"}))
      ->default_val("1pl");
  fit->add_option("--family", fit_args.family, "Response family")
      ->check(CLI::IsMember({"binary", "normal"}))
      ->default_val("binary");
  fit->add_flag("--fixed-gamma", fit_args.fixed_gamma, "Fix the distance weight gamma at 1");
  fit->add_flag("--spikenslab", fit_args.spikenslab, "Spike-and-slab prior on gamma");
  fit->add_option("--missing", fit_args.missing, "Missing-data handling")
      ->check(CLI::IsMember({"complete", "mcar", "mar"}))
      ->default_val("complete");
  fit->add_option("--missing-code", fit_args.missing_code, "Cell value treated as missing")
      ->default_val("NA");
  fit->add_flag("--header", fit_args.header, "Skip a header row");
  fit->add_flag("--complete-cases", fit_args.complete_cases,
                "Drop respondents with missing cells before fitting");
  fit->add_option("--ndim", fit_args.opts.ndim, "Latent space dimension")->default_val(2);
  fit->add_option("--niter", fit_args.opts.niter, "MCMC iterations")->default_val(15000);
  fit->add_option("--nburn", fit_args.opts.nburn, "Burn-in iterations")->default_val(2500);
  fit->add_option("--nthin", fit_args.opts.nthin, "Thinning stride")->default_val(5);
  fit->add_option("--nprint", fit_args.opts.nprint, "Progress cadence")->default_val(500);
  fit->add_option("--seed", fit_args.opts.seed, "RNG seed")->default_val(0);
  fit->add_option("--chains", fit_args.chains, "Independent chains")
      ->default_val(1)
      ->check(CLI::PositiveNumber);
  fit->add_option("--pr-mean-theta", fit_args.opts.pr_mean_theta)->default_val(0.0);
  fit->add_option("--pr-mean-beta", fit_args.opts.pr_mean_beta)->default_val(0.0);
  fit->add_option("--pr-sd-beta", fit_args.opts.pr_sd_beta)->default_val(1.0);
  fit->add_option("--pr-mean-alpha", fit_args.opts.pr_mean_alpha)->default_val(0.5);
  fit->add_option("--pr-sd-alpha", fit_args.opts.pr_sd_alpha)->default_val(1.0);
  fit->add_option("--pr-mean-gamma", fit_args.opts.pr_mean_gamma)->default_val(0.5);
  fit->add_option("--pr-sd-gamma", fit_args.opts.pr_sd_gamma)->default_val(1.0);
  fit->add_option("--pr-spike-mean", fit_args.opts.pr_spike_mean)->default_val(-3.0);
  fit->add_option("--pr-spike-sd", fit_args.opts.pr_spike_sd)->default_val(1.0);
  fit->add_option("--pr-a-theta", fit_args.opts.pr_a_theta)->default_val(0.001);
  fit->add_option("--pr-b-theta", fit_args.opts.pr_b_theta)->default_val(0.001);
  fit->add_option("--pr-a-eps", fit_args.opts.pr_a_eps)->default_val(0.001);
  fit->add_option("--pr-b-eps", fit_args.opts.pr_b_eps)->default_val(0.001);
  fit->add_option("--jump-theta", fit_args.opts.jump_theta)->default_val(1.0);
  fit->add_option("--jump-beta", fit_args.opts.jump_beta)->default_val(0.4);
  fit->add_option("--jump-alpha", fit_args.opts.jump_alpha)->default_val(1.0);
  fit->add_option("--jump-gamma", fit_args.opts.jump_gamma)->default_val(0.025);
  fit->add_option("--jump-z", fit_args.opts.jump_z)->default_val(0.5);
  fit->add_option("--jump-w", fit_args.opts.jump_w)->default_val(0.5);

  // summarize
  std::string sum_run, sum_tables;
  auto* summarize = app.add_subcommand("summarize", "Print and export summary tables for a run");
  summarize->add_option("run", sum_run, "Run directory")->required();
  summarize->add_option("--tables", sum_tables, "Directory for CSV tables (default <run>/summary)");

  // map
  std::string map_run, map_out, map_rotate, map_sidecar;
  auto* map = app.add_subcommand("map", "Export interaction map coordinates");
  map->add_option("run", map_run, "Run directory")->required();
  map->add_option("--out", map_out, "Output CSV (default <run>/map.csv)");
  map->add_option("--rotate", map_rotate, "Rotation method")->check(CLI::IsMember({"oblimin"}));
  map->add_option("--sidecar", map_sidecar, "Transform sidecar JSON");

  // synth
  lsirm_synth_options synth_opts;
  lsirm_synth_init(&synth_opts);
  std::string synth_out, synth_model = "1pl", synth_family = "binary", synth_layout = "prior";
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with known parameters");
  synth->add_option("--n", synth_opts.n, "Respondents")->default_val(200);
  synth->add_option("--p", synth_opts.p, "Items")->default_val(15);
  synth->add_option("--model", synth_model)->check(CLI::IsMember({"1pl", "2pl"}))->default_val("1pl");
  synth->add_option("--family", synth_family)
      ->check(CLI::IsMember({"binary", "normal"}))
      ->default_val("binary");
  synth->add_option("--ndim", synth_opts.ndim)->default_val(2);
  synth->add_option("--gamma", synth_opts.gamma, "True distance weight (0 = plain IRT)")
      ->default_val(1.0);
  synth->add_option("--sigma-sq", synth_opts.sigma_sq)->default_val(2.0);
  synth->add_option("--sigma-eps-sq", synth_opts.sigma_eps_sq)->default_val(1.0);
  synth->add_option("--missing-rate", synth_opts.missing_rate)->default_val(0.0);
  synth->add_option("--layout", synth_layout)
      ->check(CLI::IsMember({"prior", "clustered"}))
      ->default_val("prior");
  synth->add_option("--clusters", synth_opts.n_clusters)->default_val(3);
  synth->add_option("--cluster-radius", synth_opts.cluster_radius)->default_val(2.8);
  synth->add_option("--cluster-spread", synth_opts.cluster_spread)->default_val(0.3);
  synth->add_option("--seed", synth_opts.seed)->default_val(0);
  synth->add_option("--out", synth_out, "Output directory for data.csv and truth.json")
      ->default_val(default_out_dir("."));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }

  if (fit->parsed()) return run_fit(fit_args);
  if (summarize->parsed()) {
    if (sum_tables.empty()) sum_tables = (fs::path(sum_run) / "summary").string();
    return run_summarize(sum_run, sum_tables);
  }
  if (map->parsed()) return run_map(map_run, map_out, map_rotate, map_sidecar);
  if (synth->parsed()) {
    synth_opts.model = model_code(synth_model);
    synth_opts.family = family_code(synth_family);
    synth_opts.layout = synth_layout == "clustered" ? LSIRM_LAYOUT_CLUSTERED : LSIRM_LAYOUT_PRIOR;
    return run_synth(synth_opts, synth_out);
  }
  return kExitUsage;
}
