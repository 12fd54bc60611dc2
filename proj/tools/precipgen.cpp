// precipgen: stochastic daily precipitation generator driven by a hidden
// Markov model with per-location semi-continuous mixtures, fitted by
// variational Bayes (full-data or stochastic), with Viterbi decoding,
// synthetic generation, and validation statistics.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "precipgen/dataio.hpp"
#include "precipgen/errors.hpp"
#include "precipgen/generator.hpp"
#include "precipgen/kernels.hpp"
#include "precipgen/parallel.hpp"
#include "precipgen/stats.hpp"
#include "precipgen/svb.hpp"
#include "precipgen/vbem.hpp"
#include "precipgen/viterbi.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace precipgen;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDegeneracy = 3;
constexpr int kExitNotConverged = 4;

std::string iso_timestamp() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

std::uint64_t env_seed_default() {
  if (const char* env = std::getenv("PRECIPGEN_SEED")) return std::strtoull(env, nullptr, 10);
  return 0;
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::vector<std::string>& argv, std::uint64_t seed, int threads,
                    const json& inputs, const json& outputs) {
  json j{{"tool", "precipgen"},
         {"version", kVersion},
         {"command", command},
         {"argv", argv},
         {"seed", seed},
         {"threads", threads},
         {"kernels", kernels::active().name},
         {"inputs", inputs},
         {"outputs", outputs},
         {"generated_at", iso_timestamp()}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot create file: " + path);
  out << j.dump(2) << '\n';
}

struct SeasonWindow {
  int start_month, start_day, end_month, end_day;
};

SeasonWindow parse_season(const std::string& s) {
  // format MM-DD:MM-DD
  SeasonWindow w{};
  if (std::sscanf(s.c_str(), "%2d-%2d:%2d-%2d", &w.start_month, &w.start_day, &w.end_month,
                  &w.end_day) != 4)
    throw ConfigError("--season expects MM-DD:MM-DD, got '" + s + "'");
  return w;
}

// Dataset loading shared by fit/decode/stats.
struct DataArgs {
  std::string data_path;
  std::string locations_path;
  std::string format = "long";
  double dryness_threshold = 0.0;
  std::string season;
  int blocks_n = 0, blocks_d = 0;

  void attach(CLI::App* cmd, bool with_blocks = true) {
    cmd->add_option("--data", data_path, "precipitation CSV")->required();
    cmd->add_option("--locations", locations_path, "locations CSV (location_id,lat,lon)")
        ->required();
    cmd->add_option("--format", format, "CSV layout: long|wide")
        ->check(CLI::IsMember({"long", "wide"}));
    cmd->add_option("--dryness-threshold", dryness_threshold,
                    "values below this are treated as exactly 0");
    if (with_blocks) {
      cmd->add_option("--season", season,
                      "in-year season window MM-DD:MM-DD; one block per year");
      cmd->add_option("--blocks", blocks_n, "reinterpret the rows as N uniform blocks");
      cmd->add_option("--days", blocks_d, "days per block (with --blocks)");
    }
  }

  // chain=true when the rows will be treated as Markov chains (fit, decode):
  // the days inside each block must then be consecutive.
  PrecipDataset load(bool chain = true) const {
    PrecipDataset ds = format == "wide"
                           ? load_wide_csv(data_path, locations_path, dryness_threshold)
                           : load_long_csv(data_path, locations_path, dryness_threshold);
    if (!season.empty() && blocks_n > 0)
      throw ConfigError("--season and --blocks are mutually exclusive");
    if (!season.empty()) {
      const SeasonWindow w = parse_season(season);
      ds = make_blocks(ds, w.start_month, w.start_day, w.end_month, w.end_day);
    } else if (blocks_n > 0 || blocks_d > 0) {
      if (blocks_n < 1 || blocks_d < 1) throw ConfigError("--blocks and --days go together");
      ds = with_uniform_blocks(ds, blocks_n, blocks_d);
    } else if (chain) {
      require_daily_dates(ds);
    }
    return ds;
  }
};

// --- fit configuration -------------------------------------------------------

struct FitArgs {
  int K = 3, M = 2;
  double pi_concentration = 1.0;
  double row_concentration = 10.0;
  std::optional<Matrix> zeta_template, gamma_template, delta_template;
  FitConfig cfg;
};

Matrix json_template(const json& j, const char* name) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw ConfigError(std::string("config: '") + name + "' must be a 2-D array");
  Matrix m(j.size(), j[0].size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != m.cols)
      throw ConfigError(std::string("config: ragged rows in '") + name + "'");
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (!j[r][c].is_number())
        throw ConfigError(std::string("config: non-numeric entry in '") + name + "'");
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

void apply_config_file(FitArgs& fa, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  auto num = [&](const char* key, auto& slot) {
    if (j.contains(key)) {
      if (!j[key].is_number()) throw ConfigError(std::string("config: '") + key + "' must be numeric");
      slot = j[key].get<std::decay_t<decltype(slot)>>();
    }
  };
  num("K", fa.K);
  num("M", fa.M);
  num("pi_concentration", fa.pi_concentration);
  num("row_concentration", fa.row_concentration);
  num("max_iterations", fa.cfg.max_iterations);
  num("elbo_rel_tolerance", fa.cfg.elbo_rel_tolerance);
  num("init_jitter", fa.cfg.init_jitter);
  num("seed", fa.cfg.seed);
  if (j.contains("zeta_template")) fa.zeta_template = json_template(j["zeta_template"], "zeta_template");
  if (j.contains("gamma_template"))
    fa.gamma_template = json_template(j["gamma_template"], "gamma_template");
  if (j.contains("delta_template"))
    fa.delta_template = json_template(j["delta_template"], "delta_template");
  if (j.contains("svb")) {
    const json& s = j["svb"];
    auto snum = [&](const char* key, auto& slot) {
      if (s.contains(key)) {
        if (!s[key].is_number())
          throw ConfigError(std::string("config: 'svb.") + key + "' must be numeric");
        slot = s[key].get<std::decay_t<decltype(slot)>>();
      }
    };
    snum("iterations", fa.cfg.svb.iterations);
    snum("step_exponent", fa.cfg.svb.step_exponent);
    snum("polish_cavi_iterations", fa.cfg.svb.polish_cavi_iterations);
    snum("batch_size", fa.cfg.svb.batch_size);
    if (s.contains("scale_initial_update"))
      fa.cfg.svb.scale_initial_update = s["scale_initial_update"].get<bool>();
  }
}

Hyperparameters build_prior(const FitArgs& fa, const ModelDims& dims) {
  Matrix zeta, gamma, delta;
  default_prior_templates(dims.K, dims.M, zeta, gamma, delta);
  if (fa.zeta_template) zeta = *fa.zeta_template;
  if (fa.gamma_template) gamma = *fa.gamma_template;
  if (fa.delta_template) delta = *fa.delta_template;
  return default_priors(dims, fa.pi_concentration, fa.row_concentration, zeta, gamma, delta);
}

json location_stats_json(const LocationStats& s, const std::vector<Location>& locations) {
  json out = json::object();
  for (std::size_t l = 0; l < locations.size(); ++l) {
    json entry;
    entry["dry_proportion"] =
        std::isnan(s.dry_proportion[l]) ? json(nullptr) : json(s.dry_proportion[l]);
    entry["mean_intensity"] =
        std::isnan(s.mean_intensity[l]) ? json(nullptr) : json(s.mean_intensity[l]);
    out[locations[l].id] = std::move(entry);
  }
  return out;
}

std::vector<Location> synthetic_locations(int L) {
  std::vector<Location> locs(L);
  for (int l = 0; l < L; ++l)
    locs[l] = {"loc" + std::to_string(l + 1), static_cast<double>(l), 0.0};
  return locs;
}

// Dates & blocks for synthetic output: either T consecutive days from
// start_date (one unlabeled block) or N year-blocks of D days, block i
// starting on the season start in year(start_date) + i.
void synthetic_calendar(PrecipDataset& ds, long T, int N, int D, const Date& start_date) {
  if (N > 0) {
    for (int i = 0; i < N; ++i) {
      const Date block_start{start_date.y + i, start_date.m, start_date.d};
      ds.blocks.push_back({start_date.y + i, static_cast<std::size_t>(i) * D,
                           static_cast<std::size_t>(D)});
      long serial = block_start.serial();
      for (int d = 0; d < D; ++d) ds.dates.push_back(Date::from_serial(serial + d));
    }
  } else {
    long serial = start_date.serial();
    for (long t = 0; t < T; ++t) ds.dates.push_back(Date::from_serial(serial + t));
  }
}

void emit_progress(const TraceRow& row) {
  std::fprintf(stderr, "[%s %d] elbo %.6f delta %.3g\n", row.phase == 's' ? "svb" : "cavi",
               row.iteration, row.elbo, row.delta);
}

}  // namespace

// --- subcommand bodies --------------------------------------------------------

namespace {

int cmd_gen_synthetic(const std::string& preset, const std::string& params_path, long T, int N,
                      int D, std::uint64_t seed, const std::string& out_dir,
                      const std::string& start, const std::vector<std::string>& argv,
                      int threads) {
  PointParams params;
  if (!params_path.empty()) {
    const ModelFile mf = load_model(params_path);
    params = posterior_means(mf.posterior);
  } else {
    params = preset_params(preset.empty() ? "paper" : preset);
  }

  if ((T > 0) == (N > 0)) throw ConfigError("choose exactly one of --t or --blocks/--days");
  if (N > 0 && D < 1) throw ConfigError("--blocks requires --days");

  const Date start_date = Date::parse(start);
  const ChainLayout chains =
      N > 0 ? ChainLayout::uniform(N, D) : ChainLayout::single(static_cast<std::size_t>(T));

  Rng rng(seed);
  const SyntheticRun run = simulate(params, chains, rng);

  PrecipDataset ds;
  ds.values = run.data;
  ds.locations = synthetic_locations(params.L);
  synthetic_calendar(ds, T, N, D, start_date);

  fs::create_directories(out_dir);
  const std::string data_path = out_dir + "/data.csv";
  const std::string loc_path = out_dir + "/locations.csv";
  const std::string states_path = out_dir + "/truth_states.csv";
  write_long_csv(ds, data_path);
  write_locations_csv(ds.locations, loc_path);
  write_states_csv(ds, run.states, states_path);
  write_manifest(out_dir + "/manifest.json", "gen-synthetic", argv, seed, threads,
                 json{{"preset", preset}, {"params", params_path}},
                 json{{"data", data_path}, {"locations", loc_path}, {"truth_states", states_path}});
  return 0;
}

int cmd_fit(const DataArgs& da, FitArgs& fa, const std::string& method,
            const std::string& out_model, const std::string& trace_path, bool no_reorder,
            const std::vector<std::string>& argv) {
  const PrecipDataset ds = da.load();
  ModelDims dims;
  dims.K = fa.K;
  dims.L = ds.L();
  dims.M = fa.M;
  dims.T = ds.T();
  if (ds.blocked()) {
    dims.N = static_cast<int>(ds.blocks.size());
    dims.D = static_cast<int>(ds.blocks.front().length);
  }
  const Hyperparameters prior = build_prior(fa, dims);
  const ChainLayout chains = ds.chain_layout();

  const ProgressFn progress = fa.cfg.progress_every > 0 ? emit_progress : ProgressFn{};
  auto [posterior, trace] = method == "svb" ? fit_svb(ds.values, chains, prior, fa.cfg, progress)
                                            : fit_cavi(ds.values, chains, prior, fa.cfg, progress);

  ModelFile mf;
  mf.dims = dims;
  mf.prior = prior;
  mf.posterior = posterior;
  mf.trace = trace;
  mf.seed = fa.cfg.seed;
  if (!no_reorder) {
    const std::vector<int> perm = order_states_by_wetness(posterior_means(mf.posterior));
    apply_state_permutation(mf.posterior, perm);
    apply_state_permutation(mf.prior, perm);
    mf.state_ordering = "wettest_first";
  }

  save_model(mf, out_model);
  if (!trace_path.empty()) write_trace_csv(trace, trace_path);
  write_manifest(out_model + ".manifest.json", "fit", argv, fa.cfg.seed, fa.cfg.threads,
                 json{{"data", da.data_path},
                      {"locations", da.locations_path},
                      {"method", method},
                      {"K", fa.K},
                      {"M", fa.M}},
                 json{{"model", out_model}, {"trace", trace_path}});

  std::fprintf(stderr, "%s after %d iterations (final elbo %.6f)\n",
               trace.converged ? "converged" : "did not converge", trace.iterations_run,
               trace.elbo.empty() ? 0.0 : trace.elbo.back());
  return trace.converged ? 0 : kExitNotConverged;
}

int cmd_decode(const DataArgs& da, const std::string& model_path, bool use_means,
               const std::string& out_dir, int threads, const std::vector<std::string>& argv) {
  const PrecipDataset ds = da.load();
  const ModelFile mf = load_model(model_path);
  if (ds.L() != mf.dims.L)
    throw DataError("dataset has " + std::to_string(ds.L()) + " locations but the model expects " +
                    std::to_string(mf.dims.L));

  const StatePath path = decode(ds.values, ds.chain_layout(), mf.posterior, use_means, threads);

  fs::create_directories(out_dir);
  const std::string states_path = out_dir + "/states.csv";
  write_states_csv(ds, path.states, states_path);

  json per_state = json::object();
  for (int j = 1; j <= mf.dims.K; ++j) {
    const LocationStats s = location_stats(ds.values, path.states, j);
    per_state["state_" + std::to_string(j)] = location_stats_json(s, ds.locations);
  }
  const json stats_doc{{"log_score", path.log_score},
                       {"parameters", use_means ? "posterior_means" : "expected_log"},
                       {"overall", location_stats_json(location_stats(ds.values), ds.locations)},
                       {"per_state", per_state}};
  const std::string stats_path = out_dir + "/state_stats.json";
  std::ofstream stats_out(stats_path);
  if (!stats_out) throw DataError("cannot create file: " + stats_path);
  stats_out << stats_doc.dump(2) << '\n';

  write_manifest(out_dir + "/manifest.json", "decode", argv, 0, threads,
                 json{{"data", da.data_path}, {"model", model_path}},
                 json{{"states", states_path}, {"state_stats", stats_path}});
  return 0;
}

int cmd_simulate(const std::string& model_path, int replicates, long T, int N, int D,
                 std::uint64_t seed, const std::string& out_dir, const std::string& start,
                 bool write_replicates, const std::vector<std::string>& argv, int threads) {
  const ModelFile mf = load_model(model_path);
  const PointParams params = posterior_means(mf.posterior);
  if (replicates < 1) throw ConfigError("--replicates must be >= 1");
  if ((T > 0) == (N > 0)) throw ConfigError("choose exactly one of --t or --blocks/--days");
  if (N > 0 && D < 1) throw ConfigError("--blocks requires --days");
  const Date start_date = Date::parse(start);
  const ChainLayout chains =
      N > 0 ? ChainLayout::uniform(N, D) : ChainLayout::single(static_cast<std::size_t>(T));

  fs::create_directories(out_dir);
  const Rng master(seed);
  json outputs;

  auto dataset_for = [&](const SyntheticRun& run) {
    PrecipDataset ds;
    ds.values = run.data;
    ds.locations = synthetic_locations(params.L);
    synthetic_calendar(ds, T, N, D, start_date);
    return ds;
  };

  if (replicates == 1) {
    Rng rng = master.fork(0);
    const SyntheticRun run = simulate(params, chains, rng);
    PrecipDataset ds = dataset_for(run);
    write_long_csv(ds, out_dir + "/data.csv");
    write_locations_csv(ds.locations, out_dir + "/locations.csv");
    write_states_csv(ds, run.states, out_dir + "/states.csv");
    outputs = json{{"data", out_dir + "/data.csv"}, {"states", out_dir + "/states.csv"}};
  } else {
    // distribution of per-location summaries across replicates
    const int L = params.L;
    std::vector<std::vector<double>> dry(L), intensity(L);
    for (int r = 0; r < replicates; ++r) {
      Rng rng = master.fork(static_cast<std::uint64_t>(r));
      const SyntheticRun run = simulate(params, chains, rng);
      const LocationStats s = location_stats(run.data);
      for (int l = 0; l < L; ++l) {
        dry[l].push_back(s.dry_proportion[l]);
        intensity[l].push_back(s.mean_intensity[l]);
      }
      if (write_replicates) {
        PrecipDataset ds = dataset_for(run);
        char name[32];
        std::snprintf(name, sizeof(name), "rep%04d", r);
        fs::create_directories(out_dir + "/" + name);
        write_long_csv(ds, out_dir + "/" + name + "/data.csv");
      }
    }
    auto quantile = [](std::vector<double> v, double q) {
      std::sort(v.begin(), v.end());
      const double pos = q * static_cast<double>(v.size() - 1);
      const std::size_t i = static_cast<std::size_t>(pos);
      const double frac = pos - static_cast<double>(i);
      return i + 1 < v.size() ? v[i] * (1.0 - frac) + v[i + 1] * frac : v.back();
    };
    auto summarize = [&](std::vector<double>& v) {
      double mean = 0.0;
      std::size_t n = 0;
      for (double x : v)
        if (!std::isnan(x)) {
          mean += x;
          ++n;
        }
      mean = n > 0 ? mean / static_cast<double>(n) : 0.0;
      std::vector<double> clean;
      for (double x : v)
        if (!std::isnan(x)) clean.push_back(x);
      return json{{"mean", mean},
                  {"q025", quantile(clean, 0.025)},
                  {"q250", quantile(clean, 0.25)},
                  {"q500", quantile(clean, 0.5)},
                  {"q750", quantile(clean, 0.75)},
                  {"q975", quantile(clean, 0.975)}};
    };
    json per_location = json::object();
    const std::vector<Location> locs = synthetic_locations(L);
    for (int l = 0; l < L; ++l)
      per_location[locs[l].id] = json{{"dry_proportion", summarize(dry[l])},
                                      {"mean_intensity", summarize(intensity[l])}};
    const json summary{{"replicates", replicates},
                       {"steps_per_replicate", N > 0 ? static_cast<long>(N) * D : T},
                       {"per_location", per_location}};
    std::ofstream out(out_dir + "/summary.json");
    if (!out) throw DataError("cannot create file: " + out_dir + "/summary.json");
    out << summary.dump(2) << '\n';
    outputs = json{{"summary", out_dir + "/summary.json"}};
  }

  write_manifest(out_dir + "/manifest.json", "simulate", argv, seed, threads,
                 json{{"model", model_path}, {"replicates", replicates}}, outputs);
  return 0;
}

int cmd_stats(const DataArgs& da, const DataArgs& db, bool have_b,
              const std::string& states_path, int K_hint, const std::string& out_dir,
              const std::vector<std::string>& argv, int threads) {
  const PrecipDataset ds = da.load(/*chain=*/false);
  fs::create_directories(out_dir);

  json doc;
  doc["location_stats"] = location_stats_json(location_stats(ds.values), ds.locations);
  json outputs;

  if (have_b) {
    const PrecipDataset dsb = db.load(/*chain=*/false);
    if (dsb.L() != ds.L())
      throw DataError("datasets have different location counts; cannot compare");
    const LocationStats sa = location_stats(ds.values);
    const LocationStats sb = location_stats(dsb.values);
    doc["comparison"] = json{
        {"dry_proportion_rmse", rmse(sa.dry_proportion, sb.dry_proportion)},
        {"mean_intensity_rmse", rmse(sa.mean_intensity, sb.mean_intensity)}};
    const std::string scatter = out_dir + "/scatter.csv";
    std::ofstream out(scatter);
    if (!out) throw DataError("cannot create file: " + scatter);
    out << "location_id,a_dry_proportion,b_dry_proportion,a_mean_intensity,b_mean_intensity\n";
    for (int l = 0; l < ds.L(); ++l)
      out << ds.locations[l].id << ',' << format_double(sa.dry_proportion[l]) << ','
          << format_double(sb.dry_proportion[l]) << ',' << format_double(sa.mean_intensity[l])
          << ',' << format_double(sb.mean_intensity[l]) << '\n';
    outputs["scatter"] = scatter;
  }

  if (!states_path.empty()) {
    const StatesFile sf = read_states_csv(states_path);
    if (sf.states.size() != ds.values.rows)
      throw DataError("states file covers " + std::to_string(sf.states.size()) +
                      " days but the dataset has " + std::to_string(ds.T()));
    int K = K_hint;
    for (int s : sf.states) K = std::max(K, s);
    json per_state = json::object();
    for (int j = 1; j <= K; ++j)
      per_state["state_" + std::to_string(j)] =
          location_stats_json(location_stats(ds.values, sf.states, j), ds.locations);
    doc["per_state"] = std::move(per_state);

    const MonthlyStateTable table = monthly_state_distribution(sf.states, sf.dates, K);
    json monthly = json::object();
    for (std::size_t i = 0; i < table.months.size(); ++i) {
      json col = json::array();
      for (int j = 0; j < K; ++j) col.push_back(table.percent(i, j));
      monthly[std::to_string(table.months[i])] = std::move(col);
    }
    doc["monthly_state_percent"] = std::move(monthly);
  }

  const std::string stats_path = out_dir + "/stats.json";
  std::ofstream out(stats_path);
  if (!out) throw DataError("cannot create file: " + stats_path);
  out << doc.dump(2) << '\n';
  outputs["stats"] = stats_path;

  write_manifest(out_dir + "/manifest.json", "stats", argv, 0, threads,
                 json{{"data", da.data_path},
                      {"data_b", have_b ? db.data_path : ""},
                      {"states", states_path}},
                 outputs);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic precipitation generator (hidden Markov model + variational Bayes)"};
  app.require_subcommand(1);
  std::vector<std::string> raw_args(argv, argv + argc);

  int threads = default_thread_count();
  std::string kernel_override;
  app.add_option("--threads", threads, "worker threads (env PRECIPGEN_THREADS)");
  app.add_option("--kernels", kernel_override, "compute kernel variant: scalar|avx2");

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic", "simulate a dataset from known parameters");
  std::string gen_preset, gen_params, gen_out, gen_start = "2000-07-01";
  long gen_T = 0;
  int gen_N = 0, gen_D = 0;
  std::uint64_t gen_seed = env_seed_default();
  gen->add_option("--preset", gen_preset, "built-in parameter set (paper)");
  gen->add_option("--params", gen_params, "model JSON supplying posterior-mean parameters");
  gen->add_option("--t", gen_T, "steps in a single unblocked chain");
  gen->add_option("--blocks", gen_N, "number of year blocks");
  gen->add_option("--days", gen_D, "days per block");
  gen->add_option("--seed", gen_seed, "RNG seed (env PRECIPGEN_SEED)");
  gen->add_option("--start-date", gen_start, "first date (block i starts this day in year+i)");
  gen->add_option("--out", gen_out, "output directory")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "fit the model by variational Bayes");
  DataArgs fit_data;
  fit_data.attach(fit);
  FitArgs fit_args;
  std::string fit_method = "cavi", fit_config, fit_out_model, fit_trace;
  bool fit_no_reorder = false;
  fit->add_option("--method", fit_method, "cavi|svb")->check(CLI::IsMember({"cavi", "svb"}));
  fit->add_option("--config", fit_config, "JSON config (dims, priors, optimizer settings)");
  fit->add_option("--k", fit_args.K, "hidden states");
  fit->add_option("--m", fit_args.M, "wet mixture components");
  fit->add_option("--max-iterations", fit_args.cfg.max_iterations, "CAVI iteration cap");
  fit->add_option("--tolerance", fit_args.cfg.elbo_rel_tolerance, "relative ELBO tolerance");
  fit->add_option("--seed", fit_args.cfg.seed, "RNG seed (env PRECIPGEN_SEED)");
  fit->add_option("--init-jitter", fit_args.cfg.init_jitter, "lognormal sd on starting shapes");
  fit->add_option("--svb-iterations", fit_args.cfg.svb.iterations, "stochastic steps");
  fit->add_option("--step-exponent", fit_args.cfg.svb.step_exponent, "kappa in (0.5,1]");
  fit->add_option("--polish-iterations", fit_args.cfg.svb.polish_cavi_iterations,
                  "full-data iterations after the stochastic phase");
  fit->add_option("--batch-size", fit_args.cfg.svb.batch_size, "blocks per stochastic step");
  fit->add_flag("--scale-initial-update", fit_args.cfg.svb.scale_initial_update,
                "scale the initial-distribution target by the block count");
  fit->add_option("--progress", fit_args.cfg.progress_every, "progress every n iterations");
  fit->add_option("--out-model", fit_out_model, "output model JSON")->required();
  fit->add_option("--trace", fit_trace, "ELBO trace CSV");
  fit->add_flag("--no-reorder", fit_no_reorder, "keep fitted state order (skip wettest-first)");

  // decode
  auto* dec = app.add_subcommand("decode", "most likely state path for a dataset");
  DataArgs dec_data;
  dec_data.attach(dec);
  std::string dec_model, dec_out;
  bool dec_means = false;
  dec->add_option("--model", dec_model, "model JSON")->required();
  dec->add_flag("--use-posterior-means", dec_means,
                "decode under posterior-mean parameters instead of exp(E[log .])");
  dec->add_option("--out", dec_out, "output directory")->required();

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate synthetic series from a fitted model");
  std::string sim_model, sim_out, sim_start = "2000-07-01";
  int sim_reps = 1, sim_N = 0, sim_D = 0;
  long sim_T = 0;
  bool sim_write_reps = false;
  std::uint64_t sim_seed = env_seed_default();
  sim->add_option("--model", sim_model, "model JSON")->required();
  sim->add_option("--replicates", sim_reps, "independent replicates");
  sim->add_option("--t", sim_T, "steps in a single unblocked chain");
  sim->add_option("--blocks", sim_N, "number of year blocks");
  sim->add_option("--days", sim_D, "days per block");
  sim->add_option("--seed", sim_seed, "RNG seed (env PRECIPGEN_SEED)");
  sim->add_option("--start-date", sim_start, "first date");
  sim->add_flag("--write-replicates", sim_write_reps, "write every replicate's data.csv");
  sim->add_option("--out", sim_out, "output directory")->required();

  // stats
  auto* st = app.add_subcommand("stats", "summary statistics and comparisons");
  DataArgs st_data, st_data_b;
  st_data.attach(st);
  std::string st_b_path, st_b_locations, st_states, st_out;
  int st_K = 1;
  st->add_option("--data-b", st_b_path, "second dataset for side-by-side comparison");
  st->add_option("--locations-b", st_b_locations, "locations CSV for --data-b");
  st->add_option("--states", st_states, "decoded states CSV for per-state tables");
  st->add_option("--k", st_K, "state count for per-state tables");
  st->add_option("--out", st_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (!kernel_override.empty()) kernels::select(kernel_override);
    fit_args.cfg.threads = threads;
    if (const char* env = std::getenv("PRECIPGEN_SEED")) {
      const std::uint64_t env_seed = std::strtoull(env, nullptr, 10);
      if (fit->count("--seed") == 0) fit_args.cfg.seed = env_seed;
    }

    if (gen->parsed())
      return cmd_gen_synthetic(gen_preset, gen_params, gen_T, gen_N, gen_D, gen_seed, gen_out,
                               gen_start, raw_args, threads);
    if (fit->parsed()) {
      if (!fit_config.empty()) {
        // CLI flags win over the config file: reapply them after the file.
        FitArgs from_file;
        from_file.cfg.threads = threads;
        apply_config_file(from_file, fit_config);
        auto keep = [&](const char* flag, auto& file_val, auto& cli_val) {
          if (fit->count(flag) == 0) cli_val = file_val;
        };
        keep("--k", from_file.K, fit_args.K);
        keep("--m", from_file.M, fit_args.M);
        keep("--max-iterations", from_file.cfg.max_iterations, fit_args.cfg.max_iterations);
        keep("--tolerance", from_file.cfg.elbo_rel_tolerance, fit_args.cfg.elbo_rel_tolerance);
        keep("--seed", from_file.cfg.seed, fit_args.cfg.seed);
        keep("--init-jitter", from_file.cfg.init_jitter, fit_args.cfg.init_jitter);
        keep("--svb-iterations", from_file.cfg.svb.iterations, fit_args.cfg.svb.iterations);
        keep("--step-exponent", from_file.cfg.svb.step_exponent, fit_args.cfg.svb.step_exponent);
        keep("--polish-iterations", from_file.cfg.svb.polish_cavi_iterations,
             fit_args.cfg.svb.polish_cavi_iterations);
        keep("--batch-size", from_file.cfg.svb.batch_size, fit_args.cfg.svb.batch_size);
        fit_args.pi_concentration = from_file.pi_concentration;
        fit_args.row_concentration = from_file.row_concentration;
        fit_args.zeta_template = from_file.zeta_template;
        fit_args.gamma_template = from_file.gamma_template;
        fit_args.delta_template = from_file.delta_template;
        if (fit->count("--scale-initial-update") == 0)
          fit_args.cfg.svb.scale_initial_update = from_file.cfg.svb.scale_initial_update;
      }
      return cmd_fit(fit_data, fit_args, fit_method, fit_out_model, fit_trace, fit_no_reorder,
                     raw_args);
    }
    if (dec->parsed()) return cmd_decode(dec_data, dec_model, dec_means, dec_out, threads, raw_args);
    if (sim->parsed())
      return cmd_simulate(sim_model, sim_reps, sim_T, sim_N, sim_D, sim_seed, sim_out, sim_start,
                          sim_write_reps, raw_args, threads);
    if (st->parsed()) {
      const bool have_b = !st_b_path.empty();
      if (have_b) {
        st_data_b = st_data;  // inherit format/threshold
        st_data_b.data_path = st_b_path;
        if (!st_b_locations.empty()) st_data_b.locations_path = st_b_locations;
      }
      return cmd_stats(st_data, st_data_b, have_b, st_states, st_K, st_out, raw_args, threads);
    }
    return kExitUsage;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const DegeneracyError& e) {
    std::fprintf(stderr, "numerical degeneracy: %s\n", e.what());
    return kExitDegeneracy;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
}
