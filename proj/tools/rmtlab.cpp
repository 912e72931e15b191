// rmtlab: command-line front end for the random-matrix experiments.
//
// Subcommands: theory | sample | clt | support | concentration | hs | validate
// Every run reads a single JSON config, writes CSVs plus a manifest under
// <out>/<config-hash>/, and exits 0 only when all validators pass.
//
// Exit codes: 0 success, 2 configuration error, 3 sampler tuning failure,
// 4 numerical failure, 5 validation failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rmt/harness.hpp"
#include "rmt/io.hpp"
#include "rmt/theory.hpp"

namespace {

using nlohmann::json;
using namespace rmt;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitTuning = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitValidation = 5;

double get_num(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number())
    throw ConfigError("config key '" + key + "' must be a number");
  return j.at(key).get<double>();
}

std::int64_t get_int(const json& j, const std::string& key,
                     std::int64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer())
    throw ConfigError("config key '" + key + "' must be an integer");
  return j.at(key).get<std::int64_t>();
}

cplx parse_complex(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError("config key '" + key +
                      "' must be a [re, im] number pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

harness::ExperimentConfig parse_experiment(const json& j) {
  harness::ExperimentConfig cfg;
  cfg.n = static_cast<int>(get_int(j, "n", cfg.n));
  cfg.c_target = get_num(j, "c_target", cfg.c_target);
  cfg.sigma_target = get_num(j, "sigma_target", cfg.sigma_target);
  cfg.replications =
      static_cast<int>(get_int(j, "replications", cfg.replications));
  cfg.master_seed =
      static_cast<std::uint64_t>(get_int(j, "master_seed", 1));
  cfg.threads = static_cast<int>(get_int(j, "threads", 1));
  cfg.epsilon = get_num(j, "epsilon", cfg.epsilon);
  cfg.moment_replications = static_cast<int>(
      get_int(j, "moment_replications", cfg.moment_replications));
  if (j.contains("z_grid")) {
    if (!j.at("z_grid").is_array())
      throw ConfigError("config key 'z_grid' must be an array");
    for (const auto& zj : j.at("z_grid"))
      cfg.z_grid.push_back(parse_complex(zj, "z_grid"));
  }
  const std::string source = j.value("source", std::string("gaussian"));
  if (source == "gaussian") {
    cfg.source = harness::Source::kGaussian;
  } else if (source == "potential") {
    cfg.source = harness::Source::kPotential;
    if (!j.contains("potential"))
      throw ConfigError("source 'potential' requires a 'potential' object");
    cfg.potential = PotentialParams::from_json(j.at("potential"));
  } else {
    throw ConfigError("config key 'source' must be 'gaussian' or 'potential'");
  }
  if (j.contains("chain")) {
    const json& c = j.at("chain");
    cfg.chain.step_size = get_num(c, "step_size", 0.0);
    cfg.chain.burn_in = get_int(c, "burn_in", -1);
    cfg.chain.thin = static_cast<int>(get_int(c, "thin", 1));
  }
  return cfg;
}

struct RunContext {
  json config;
  harness::ExperimentConfig experiment;
  std::filesystem::path dir;
  io::RunManifest manifest;
  json report;

  void emit_csv(const std::string& name, const io::CsvTable& table) {
    const auto path = dir / name;
    io::write_text_file(path.string(), table.serialize());
    manifest.outputs.push_back(name);
  }

  void finish() {
    manifest.finished_at = io::timestamp_utc();
    manifest.outputs.push_back("report.json");
    io::write_text_file((dir / "report.json").string(), report.dump(2) + "\n");
    io::write_text_file((dir / "manifest.json").string(),
                        manifest.to_json().dump(2) + "\n");
  }
};

RunContext make_context(const std::string& subcommand,
                        const std::string& config_path,
                        const std::string& out_cli,
                        std::optional<std::uint64_t> seed_override,
                        std::optional<int> threads_override) {
  json config;
  try {
    config = json::parse(io::read_text_file(config_path));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed JSON config: ") + e.what());
  }
  if (!config.is_object()) throw ConfigError("config root must be an object");
  if (seed_override) config["master_seed"] = *seed_override;
  if (threads_override) config["threads"] = *threads_override;
  config["subcommand"] = subcommand;

  std::string out = out_cli;
  if (const char* env = std::getenv("RMT_LAB_OUT"); env && *env) out = env;

  RunContext ctx;
  ctx.config = config;
  ctx.experiment = parse_experiment(config);
  const std::string digest = io::config_hash(config);
  ctx.dir = std::filesystem::path(out) / digest;
  std::filesystem::create_directories(ctx.dir);
  ctx.manifest.config_digest = digest;
  ctx.manifest.master_seed = ctx.experiment.master_seed;
  ctx.manifest.version = io::artifact_version();
  ctx.manifest.started_at = io::timestamp_utc();
  io::write_text_file((ctx.dir / "config.json").string(),
                      io::canonical_dump(config) + "\n");
  return ctx;
}

std::vector<cplx> theory_grid(const json& config) {
  std::vector<cplx> grid;
  if (config.contains("z_grid")) {
    for (const auto& zj : config.at("z_grid"))
      grid.push_back(parse_complex(zj, "z_grid"));
    return grid;
  }
  const json g = config.value("grid", json::object());
  const double re_min = get_num(g, "re_min", -3.0);
  const double re_max = get_num(g, "re_max", 3.0);
  const int re_points = static_cast<int>(get_int(g, "re_points", 25));
  std::vector<double> ims{0.5, 1.0, 2.0, -1.0};
  if (g.contains("im_values")) {
    ims.clear();
    for (const auto& v : g.at("im_values")) ims.push_back(v.get<double>());
  }
  for (double im : ims)
    for (int i = 0; i < re_points; ++i)
      grid.emplace_back(re_min + (re_max - re_min) * i / (re_points - 1), im);
  return grid;
}

int cmd_theory(RunContext& ctx) {
  const json& config = ctx.config;
  const json t = config.value("theory", json::object());
  theory::TheoryParams p;
  p.c = get_num(t, "c", ctx.experiment.c_target);
  p.sigma = get_num(t, "sigma", ctx.experiment.sigma_target);
  p.mu = get_num(t, "mu", 3.0);
  p.kappa = get_num(t, "kappa", 2.0);
  if (p.c < 1.0) throw ConfigError("theory.c must be >= 1 (aspect ratio)");

  io::CsvTable table;
  table.header = {"re_z", "im_z", "re_s1", "im_s1", "re_s2", "im_s2",
                  "re_s", "im_s", "re_M", "im_M"};
  for (cplx z : theory_grid(config)) {
    const cplx s1 = theory::s1_closed(z, p.c);
    const cplx s2 = theory::s2_closed(z, p.c);
    const cplx s = theory::s_closed(z, p.c);
    const cplx M = theory::M_closed(z, p);
    table.add_row({format_full(z.real()), format_full(z.imag()),
                   format_full(s1.real()), format_full(s1.imag()),
                   format_full(s2.real()), format_full(s2.imag()),
                   format_full(s.real()), format_full(s.imag()),
                   format_full(M.real()), format_full(M.imag())});
  }
  ctx.emit_csv("theory.csv", table);
  ctx.report["rows"] = table.rows.size();
  ctx.report["c"] = p.c;
  return kExitOk;
}

int cmd_sample(RunContext& ctx) {
  const auto& cfg = ctx.experiment;
  cfg.validate();
  SampleBatch batch;
  if (cfg.source == harness::Source::kGaussian) {
    batch = gaussian_baseline(cfg.n, cfg.m(), cfg.master_seed);
  } else {
    ChainConfig cc = cfg.chain;
    cc.n = cfg.n;
    cc.seed = cfg.master_seed;
    batch = draw_batch(cfg.potential, cfg.n, cfg.m(), cc, cfg.threads);
  }
  io::CsvTable table;
  table.header.reserve(static_cast<std::size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) table.header.push_back("x" + std::to_string(i));
  for (const auto& v : batch.vectors) {
    std::vector<std::string> row;
    row.reserve(static_cast<std::size_t>(cfg.n));
    for (int i = 0; i < cfg.n; ++i) row.push_back(format_full(v[i]));
    table.add_row(std::move(row));
  }
  ctx.emit_csv("sample.csv", table);
  ctx.report["rescale"] = batch.rescale;
  ctx.report["acceptance_rate"] = batch.acceptance_rate;
  ctx.report["n"] = cfg.n;
  ctx.report["m"] = cfg.m();
  return kExitOk;
}

int cmd_clt(RunContext& ctx) {
  auto result = harness::run_clt_experiment(ctx.experiment);
  io::CsvTable table;
  table.header = {"re_z", "im_z", "re_M_hat", "im_M_hat",
                  "re_M_hat_limit", "im_M_hat_limit",
                  "re_M_theory", "im_M_theory", "stderr", "replications"};
  for (const auto& row : result.rows)
    table.add_row({format_full(row.z.real()), format_full(row.z.imag()),
                   format_full(row.m_hat.real()), format_full(row.m_hat.imag()),
                   format_full(row.m_hat_limit.real()),
                   format_full(row.m_hat_limit.imag()),
                   format_full(row.m_theory.real()),
                   format_full(row.m_theory.imag()),
                   format_full(row.stderr_mc),
                   std::to_string(row.replications)});
  ctx.emit_csv("clt.csv", table);
  ctx.report["mu_used"] = result.mu_used;
  ctx.report["kappa_used"] = result.kappa_used;
  ctx.report["se_mu"] = result.se_mu;
  ctx.report["se_kappa"] = result.se_kappa;
  return kExitOk;
}

int cmd_support(RunContext& ctx) {
  auto report = harness::run_support_experiment(ctx.experiment);
  io::CsvTable table;
  table.header = {"replication", "outliers"};
  for (std::size_t r = 0; r < report.outliers_per_replication.size(); ++r)
    table.add_row({std::to_string(r),
                   std::to_string(report.outliers_per_replication[r])});
  ctx.emit_csv("support.csv", table);
  ctx.report["total_outliers"] = report.total_outliers;
  ctx.report["zero_counts_exact"] = report.zero_counts_exact;
  ctx.report["max_abs_eigenvalue"] = report.max_abs_eigenvalue;
  ctx.report["min_positive_eigenvalue"] = report.min_positive_eigenvalue;
  return report.total_outliers == 0 && report.zero_counts_exact
             ? kExitOk
             : kExitValidation;
}

int cmd_concentration(RunContext& ctx) {
  auto report = harness::run_concentration_suite(ctx.experiment);
  io::CsvTable table;
  table.header = {"size", "quad_form_msq", "trace_clip_var"};
  for (std::size_t i = 0; i < report.sizes.size(); ++i)
    table.add_row({std::to_string(report.sizes[i]),
                   format_full(report.quad_form_msq[i]),
                   format_full(report.trace_clip_var[i])});
  ctx.emit_csv("concentration.csv", table);
  ctx.report["quad_form_slope"] = report.quad_form_slope;
  ctx.report["trace_var_slope"] = report.trace_var_slope;
  ctx.report["max_lambda_max"] = report.max_lambda_max;
  ctx.report["lambda_bound"] = report.lambda_bound;
  return kExitOk;
}

int cmd_hs(RunContext& ctx) {
  const json h = ctx.config.value("hs", json::object());
  const double center = get_num(h, "center", 0.5);
  const double halfwidth = get_num(h, "halfwidth", 0.35);
  const int p = static_cast<int>(get_int(h, "p", 8));
  const int K = static_cast<int>(get_int(h, "K", 5));
  theory::HsQuadSpec quad;
  quad.c0 = get_num(h, "c0", quad.c0);
  quad.y_min = get_num(h, "y_min", quad.y_min);
  theory::PolyBump bump(center, halfwidth, p);
  auto report = harness::run_hs_reconstruction(ctx.experiment, bump, K, quad);
  io::CsvTable table;
  table.header = {"mc_value", "mc_stderr", "hs_value", "f_integral_limit"};
  table.add_row({format_full(report.mc_value), format_full(report.mc_stderr),
                 format_full(report.hs_value),
                 format_full(report.f_integral_limit)});
  ctx.emit_csv("hs.csv", table);
  ctx.report["mc_value"] = report.mc_value;
  ctx.report["hs_value"] = report.hs_value;
  return kExitOk;
}

// Re-reads an existing run directory: every CSV must round-trip through the
// artifact's reader, and theory grids must satisfy the Herglotz sign check.
int cmd_validate(const std::string& config_path, const std::string& out_cli,
                 std::optional<std::uint64_t> seed_override,
                 std::optional<int> threads_override,
                 const std::string& subcommand_checked) {
  json config;
  try {
    config = json::parse(io::read_text_file(config_path));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed JSON config: ") + e.what());
  }
  if (seed_override) config["master_seed"] = *seed_override;
  if (threads_override) config["threads"] = *threads_override;
  config["subcommand"] = subcommand_checked;
  std::string out = out_cli;
  if (const char* env = std::getenv("RMT_LAB_OUT"); env && *env) out = env;
  const std::filesystem::path dir =
      std::filesystem::path(out) / io::config_hash(config);
  if (!std::filesystem::exists(dir / "manifest.json")) {
    std::cerr << "validate: no manifest under " << dir << "\n";
    return kExitValidation;
  }
  const json manifest = json::parse(io::read_text_file((dir / "manifest.json").string()));
  if (manifest.value("config_hash", std::string()) != io::config_hash(config)) {
    std::cerr << "validate: manifest hash mismatch\n";
    return kExitValidation;
  }
  bool ok = true;
  for (const auto& name : manifest.at("outputs")) {
    const std::string fname = name.get<std::string>();
    if (fname.size() < 4 || fname.substr(fname.size() - 4) != ".csv") continue;
    const std::string text = io::read_text_file((dir / fname).string());
    io::CsvTable table = io::CsvTable::parse(text);
    if (table.serialize() != text) {
      std::cerr << "validate: " << fname << " does not round-trip\n";
      ok = false;
    }
    if (fname == "theory.csv") {
      for (const auto& row : table.rows) {
        const double im_z = std::stod(row[1]);
        const double im_s1 = std::stod(row[3]);
        const double im_s2 = std::stod(row[5]);
        if (im_s1 * im_z <= 0.0 || im_s2 * im_z <= 0.0) {
          std::cerr << "validate: Herglotz sign violation in theory.csv\n";
          ok = false;
          break;
        }
      }
    }
  }
  if (ok) std::cout << "validate: all checks passed for " << dir << "\n";
  return ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random-matrix spectral-limit laboratory"};
  app.require_subcommand(1);

  std::string config_path, out = "out", checked = "theory";
  std::optional<std::uint64_t> seed_override;
  std::optional<int> threads_override;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config path")->required();
    sub->add_option("--out", out, "output root (env RMT_LAB_OUT overrides)");
    sub->add_option("--seed", seed_override, "master seed override");
    sub->add_option("--threads", threads_override, "worker pool size");
  };

  const std::vector<std::string> names = {"theory",  "sample",
                                          "clt",     "support",
                                          "concentration", "hs"};
  for (const auto& name : names) add_common(app.add_subcommand(name));
  CLI::App* validate = app.add_subcommand("validate");
  add_common(validate);
  validate->add_option("--ran", checked,
                       "subcommand whose outputs should be validated");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    if (sub == "validate")
      return cmd_validate(config_path, out, seed_override, threads_override,
                          checked);
    RunContext ctx =
        make_context(sub, config_path, out, seed_override, threads_override);
    int code = kExitOk;
    if (sub == "theory") code = cmd_theory(ctx);
    else if (sub == "sample") code = cmd_sample(ctx);
    else if (sub == "clt") code = cmd_clt(ctx);
    else if (sub == "support") code = cmd_support(ctx);
    else if (sub == "concentration") code = cmd_concentration(ctx);
    else if (sub == "hs") code = cmd_hs(ctx);
    ctx.finish();
    std::cout << sub << ": outputs under " << ctx.dir.string() << "\n";
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const TuningError& e) {
    std::cerr << "sampler tuning failure: " << e.what() << "\n";
    return kExitTuning;
  } catch (const QuadratureError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}
