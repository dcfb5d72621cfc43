// sfo: single executable exposing basis inspection, theory tables, dataset
// generation, training, evaluation, ablation drivers, and a scaling
// micro-benchmark. Numeric results go to CSV/JSON files (or stdout with
// `--out -`); human-readable progress goes to stderr. Exit codes: 0 success,
// 1 usage error, 2 runtime failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sfo/basis.hpp"
#include "sfo/data.hpp"
#include "sfo/model.hpp"
#include "sfo/theory.hpp"
#include "sfo/train.hpp"
#include "sfo/util.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string hex64(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Applies the SFO_SEED environment override (CI smoke runs).
std::uint64_t final_seed(std::uint64_t configured) {
  if (const char* e = std::getenv("SFO_SEED"))
    return std::strtoull(e, nullptr, 10);
  return configured;
}

void emit(const std::string& out, const std::string& content) {
  if (out == "-") {
    std::cout << content;
    std::cout.flush();
  } else {
    sfo::write_file_bytes(out, content);
  }
}

// Writes `<out>.manifest.json` (skipped for stdout sinks) recording the full
// resolved configuration plus FNV-1a hashes of every artifact written.
void write_manifest(const std::string& out, const std::string& command,
                    const nlohmann::json& config,
                    const std::map<std::string, std::string>& artifacts) {
  if (out == "-") return;
  nlohmann::json m;
  m["version"] = kVersion;
  m["command"] = command;
  m["config"] = config;
  m["artifacts"] = artifacts;
  sfo::write_file_bytes(out + ".manifest.json", m.dump(2) + "\n");
}

std::string hash_of(const std::string& content) {
  return hex64(sfo::fnv1a64(content));
}

std::string sidecar_path(const std::string& out, const std::string& tag) {
  const std::string suffix = ".csv";
  if (out.size() > suffix.size() &&
      out.compare(out.size() - suffix.size(), suffix.size(), suffix) == 0)
    return out.substr(0, out.size() - suffix.size()) + "." + tag + ".csv";
  return out + "." + tag + ".csv";
}

// ---------------------------------------------------------------------------

int cmd_basis(const std::string& kind_s, std::size_t n, std::size_t modes,
              std::uint64_t seed, const std::string& out) {
  const sfo::BasisKind kind = sfo::basis_kind_from_string(kind_s);
  seed = final_seed(seed);
  const sfo::SpectralBasis basis = sfo::build_basis(kind, n, modes, seed);

  std::string csv;
  for (std::size_t l = 0; l < modes; ++l)
    csv += (l ? "," : "") + ("mode_" + std::to_string(l + 1));
  csv += "\n";
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < modes; ++l)
      csv += (l ? "," : "") + fmt17(basis.filters(i, l));
    csv += "\n";
  }
  emit(out, csv);

  std::map<std::string, std::string> artifacts{{out, hash_of(csv)}};
  if (kind == sfo::BasisKind::USB && out != "-") {
    std::string side = "mode,eigenvalue\n";
    for (std::size_t l = 0; l < modes; ++l)
      side += std::to_string(l + 1) + "," + fmt17(basis.eigenvalues[l]) + "\n";
    const std::string sp = sidecar_path(out, "eigenvalues");
    emit(sp, side);
    artifacts[sp] = hash_of(side);
  }

  nlohmann::json cfg{{"kind", kind_s}, {"n", n}, {"modes", modes},
                     {"seed", seed}};
  write_manifest(out, "basis", cfg, artifacts);
  std::cerr << "basis: wrote " << n << "x" << modes << " filter bank to "
            << out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_theory_greens(double alpha, double beta, std::size_t tmax,
                      const std::string& out) {
  const sfo::StencilSpec spec = sfo::scalar_stencil(alpha, beta);
  const sfo::GreensKernel closed = sfo::greens_closed_form(spec, tmax);
  const std::size_t N = 2 * tmax + 41;
  const sfo::GreensKernel numeric = sfo::greens_numeric(spec, N, tmax);

  std::string csv = "t,closed,numeric\n";
  for (long t = -static_cast<long>(tmax); t <= static_cast<long>(tmax); ++t)
    csv += std::to_string(t) + "," + fmt17(closed.at(t)(0, 0)) + "," +
           fmt17(numeric.at(t)(0, 0)) + "\n";
  emit(out, csv);
  write_manifest(out, "theory greens",
                 {{"alpha", alpha}, {"beta", beta}, {"tmax", tmax}},
                 {{out, hash_of(csv)}});
  std::cerr << "theory greens: root " << closed.roots[0] << ", table to "
            << out << "\n";
  return 0;
}

int cmd_theory_truncation(double alpha, double beta, double rho, std::size_t n,
                          std::size_t lmax, std::uint64_t seed,
                          const std::string& out) {
  seed = final_seed(seed);
  std::vector<double> profile;
  if (rho > 0.0)
    profile = sfo::kernel_profile(1.0, rho, n);
  else
    profile = sfo::greens_kernel_profile(sfo::scalar_stencil(alpha, beta), n);

  std::vector<std::size_t> Ls;
  for (std::size_t L = 4; L <= lmax; L += 4) Ls.push_back(L);
  const std::vector<sfo::BasisKind> kinds{
      sfo::BasisKind::USB, sfo::BasisKind::Fourier, sfo::BasisKind::Chebyshev,
      sfo::BasisKind::RandomOrthogonal};
  const auto rows = sfo::truncation_study(profile, kinds, Ls, seed);

  std::string csv = "kind,L,rel_error\n";
  for (const auto& r : rows)
    csv += sfo::to_string(r.kind) + "," + std::to_string(r.L) + "," +
           fmt17(r.rel_error) + "\n";
  emit(out, csv);
  write_manifest(out, "theory truncation",
                 {{"alpha", alpha}, {"beta", beta}, {"rho", rho}, {"n", n},
                  {"lmax", lmax}, {"seed", seed}},
                 {{out, hash_of(csv)}});
  std::cerr << "theory truncation: " << rows.size() << " rows to " << out
            << "\n";
  return 0;
}

int cmd_theory_modes(double alpha, double beta, std::size_t n,
                     std::size_t lmax, std::vector<double> eps,
                     const std::string& out) {
  const sfo::StencilSpec spec = sfo::scalar_stencil(alpha, beta);
  const std::vector<double> envelope = sfo::greens_decay_profile(spec, n);
  const sfo::SpectralBasis basis =
      sfo::build_basis(sfo::BasisKind::USB, n, lmax);
  std::sort(eps.begin(), eps.end(), std::greater<double>());
  const auto rows = sfo::modes_for_accuracy(envelope, basis, eps);

  std::string csv = "eps,L,saturated\n";
  for (const auto& r : rows)
    csv += fmt17(r.eps) + "," + std::to_string(r.L) + "," +
           (r.saturated ? "1" : "0") + "\n";
  emit(out, csv);
  write_manifest(out, "theory modes",
                 {{"alpha", alpha}, {"beta", beta}, {"n", n}, {"lmax", lmax},
                  {"eps", eps}},
                 {{out, hash_of(csv)}});
  std::cerr << "theory modes: " << rows.size() << " thresholds to " << out
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_data_gen(const std::string& pde, std::size_t n, std::size_t nt,
                 std::size_t samples, std::uint64_t seed, double diffusivity,
                 const std::string& out) {
  seed = final_seed(seed);
  sfo::Dataset ds;
  if (pde == "diff-react-1d")
    ds = sfo::gen_diffusion_reaction_1d(n, nt, samples, seed);
  else if (pde == "heat-2d")
    ds = sfo::gen_heat_2d(n, nt, samples, seed, diffusivity);
  else
    throw CLI::ValidationError("--pde", "unknown pde: " + pde);
  sfo::save_dataset(ds, out);

  const std::string bytes = sfo::read_file_bytes(out);
  write_manifest(out, "data gen",
                 {{"pde", pde}, {"n", n}, {"nt", nt}, {"samples", samples},
                  {"seed", seed}, {"diffusivity", diffusivity},
                  {"regenerated", ds.regenerated}},
                 {{out, hash_of(bytes)}});
  std::cerr << "data gen: " << samples << " samples (" << ds.regenerated
            << " regenerated) to " << out << "\n";
  return 0;
}

int cmd_data_info(const std::string& file, const std::string& out) {
  const sfo::Dataset ds = sfo::load_dataset(file);
  emit(out, sfo::dataset_header_json(ds) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------

// Fills an SFOConfig from an optional user JSON (keys mirror the field
// names); grid geometry and channel counts always come from the dataset.
sfo::SFOConfig resolve_model_config(const nlohmann::json& j,
                                    const sfo::Dataset& ds) {
  sfo::SFOConfig cfg;
  cfg.L = j.value("L", cfg.L);
  cfg.d = j.value("d", cfg.d);
  cfg.T = j.value("T", cfg.T);
  if (j.contains("variant"))
    cfg.variant = sfo::variant_from_string(j["variant"].get<std::string>());
  if (j.contains("scheme"))
    cfg.scheme = sfo::index_scheme_from_string(j["scheme"].get<std::string>());
  if (j.contains("basis_kind"))
    cfg.basis_kind =
        sfo::basis_kind_from_string(j["basis_kind"].get<std::string>());
  cfg.seed = j.value("seed", cfg.seed);
  cfg.grid = ds.grid.sizes;
  cfg.in_channels = ds.c_a;
  cfg.out_channels = ds.c_u;
  return cfg;
}

int cmd_train(const std::string& data_path, const std::string& config_path,
              const std::string& out, const std::string& metrics) {
  const sfo::Dataset ds = sfo::load_dataset(data_path);
  nlohmann::json user = nlohmann::json::object();
  if (!config_path.empty())
    user = nlohmann::json::parse(sfo::read_file_bytes(config_path));

  sfo::SFOConfig cfg = resolve_model_config(user, ds);
  sfo::TrainConfig tcfg = sfo::TrainConfig::from_json(user.dump());
  cfg.seed = final_seed(cfg.seed);
  tcfg.seed = final_seed(tcfg.seed);

  std::cerr << "train: " << sfo::count_params(cfg) << " parameters, "
            << tcfg.epochs << " epochs on " << ds.N << " samples\n";
  sfo::SFOModel model = sfo::init_model(cfg);
  const sfo::TrainResult r = sfo::train(model, ds, tcfg);
  if (r.diverged) std::cerr << "train: aborted, batch loss diverged\n";

  sfo::save_checkpoint(model, out);
  std::string csv = "epoch,train_rel_l2,val_rel_l2\n";
  for (std::size_t e = 0; e < r.history.size(); ++e)
    csv += std::to_string(e + 1) + "," + fmt17(r.history[e].train_rel_l2) +
           "," + fmt17(r.history[e].val_rel_l2) + "\n";
  emit(metrics, csv);

  nlohmann::json manifest_cfg;
  manifest_cfg["model"] = nlohmann::json::parse(cfg.to_json());
  manifest_cfg["train"] = nlohmann::json::parse(tcfg.to_json());
  manifest_cfg["data"] = nlohmann::json::parse(sfo::dataset_header_json(ds));
  manifest_cfg["diverged"] = r.diverged;
  std::map<std::string, std::string> artifacts{
      {out, hash_of(sfo::read_file_bytes(out))}};
  if (metrics != "-") artifacts[metrics] = hash_of(csv);
  write_manifest(out, "train", manifest_cfg, artifacts);
  if (!r.history.empty())
    std::cerr << "train: final val rel_l2 "
              << r.history.back().val_rel_l2 << "%\n";
  return r.diverged ? 2 : 0;
}

int cmd_eval(const std::string& data_path, const std::string& ckpt,
             std::size_t stride, const std::string& out) {
  sfo::Dataset ds = sfo::load_dataset(data_path);
  sfo::SFOModel model = sfo::load_checkpoint(ckpt);
  if (stride > 1) {
    ds = sfo::subsample(ds, stride);
    model = sfo::rebuild_for_resolution(model, ds.grid.sizes[0]);
  }
  const sfo::EvalMetrics m = sfo::evaluate(model, ds);
  emit(out, m.to_json() + "\n");
  nlohmann::json cfg{{"data", data_path}, {"ckpt", ckpt}, {"stride", stride}};
  write_manifest(out, "eval", cfg, {{out, hash_of(m.to_json() + "\n")}});
  std::cerr << "eval: rel_l2 " << m.rel_l2 << "% over " << ds.N
            << " samples\n";
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_ablate(const std::string& plan_path, const std::string& out_dir,
               std::size_t jobs, bool no_timing) {
  const nlohmann::json plan =
      nlohmann::json::parse(sfo::read_file_bytes(plan_path));
  const std::string experiment = plan.at("experiment").get<std::string>();
  const sfo::Dataset ds =
      sfo::load_dataset(plan.at("data").get<std::string>());
  const nlohmann::json model_j = plan.value("model", nlohmann::json::object());
  sfo::SFOConfig base = resolve_model_config(model_j, ds);
  sfo::TrainConfig tcfg = sfo::TrainConfig::from_json(
      plan.value("train", nlohmann::json::object()).dump());

  std::vector<std::uint64_t> seeds =
      plan.value("seeds", std::vector<std::uint64_t>{0, 1, 2});
  if (std::getenv("SFO_SEED"))
    seeds = {final_seed(seeds.empty() ? 0 : seeds.front())};
  if (jobs != 1)
    std::cerr << "ablate: arms run sequentially in-process (jobs=" << jobs
              << " accepted for interface compatibility)\n";

  std::vector<sfo::ExperimentRow> rows;
  if (experiment == "basis") {
    std::vector<sfo::BasisKind> kinds;
    for (const auto& k :
         plan.value("kinds", std::vector<std::string>{"usb", "fourier",
                                                      "random"}))
      kinds.push_back(sfo::basis_kind_from_string(k));
    rows = sfo::ablate_basis(base, tcfg, ds, kinds, seeds);
  } else if (experiment == "rank") {
    rows = sfo::sweep_rank(
        base, tcfg, ds,
        plan.value("Ls", std::vector<std::size_t>{4, 8, 16}), seeds);
  } else if (experiment == "width") {
    rows = sfo::sweep_width(
        base, tcfg, ds,
        plan.value("widths", std::vector<std::size_t>{16, 32, 64}), seeds);
  } else if (experiment == "tied-vs-multi") {
    rows = sfo::tied_vs_multi(base, tcfg, ds, seeds);
  } else if (experiment == "glu-vs-mlp") {
    rows = sfo::glu_vs_mlp(base, tcfg, ds, seeds);
  } else if (experiment == "resolution") {
    base.seed = seeds.empty() ? 0 : seeds.front();
    tcfg.seed = base.seed;
    sfo::SFOModel model = sfo::init_model(base);
    sfo::train(model, ds, tcfg);
    rows = sfo::resolution_transfer(
        model, ds, tcfg,
        plan.value("strides", std::vector<std::size_t>{1, 2, 4}));
  } else {
    throw CLI::ValidationError("--plan",
                               "unknown experiment: " + experiment);
  }

  std::filesystem::create_directories(out_dir);
  const std::string csv = sfo::experiment_csv(rows, !no_timing);
  const std::string csv_path = out_dir + "/results.csv";
  emit(csv_path, csv);
  nlohmann::json manifest_cfg;
  manifest_cfg["plan"] = plan;
  manifest_cfg["include_timing"] = !no_timing;
  manifest_cfg["resolved_model"] = nlohmann::json::parse(base.to_json());
  manifest_cfg["resolved_train"] = nlohmann::json::parse(tcfg.to_json());
  write_manifest(csv_path, "ablate", manifest_cfg,
                 {{csv_path, hash_of(csv)}});
  std::cerr << "ablate " << experiment << ": " << rows.size() << " arms to "
            << csv_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_bench(const std::vector<std::size_t>& ns, std::size_t d,
              std::size_t modes, std::size_t repeats, bool direct,
              const std::string& out) {
  std::string csv = direct ? "n,seconds_per_layer,seconds_direct\n"
                           : "n,seconds_per_layer\n";
  std::vector<double> medians;
  for (std::size_t n : ns) {
    sfo::SFOConfig cfg;
    cfg.L = modes;
    cfg.d = d;
    cfg.T = 1;
    cfg.grid = {n};
    cfg.out_channels = 1;
    const sfo::SFOModel model = sfo::init_model(cfg);
    sfo::Rng rng(17);
    sfo::Tensor v = sfo::Tensor::zeros({d, n});
    for (double& x : v.v) x = rng.next_gaussian();

    auto time_median = [&](auto&& fn) {
      std::vector<double> times;
      for (std::size_t r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double>(t1 - t0).count());
      }
      std::sort(times.begin(), times.end());
      return times[times.size() / 2];
    };

    const double fft_time = time_median([&] {
      sfo::layer_forward(v, model.params.layers[0], model.modes,
                         model.dx_total(), cfg.variant);
    });
    medians.push_back(fft_time);
    csv += std::to_string(n) + "," + fmt17(fft_time);
    if (direct) {
      const double direct_time = time_median([&] {
        sfo::ref::stu_apply_direct(v, model.params.layers[0].thetas,
                                   model.modes, model.dx_total());
      });
      csv += "," + fmt17(direct_time);
      std::cerr << "bench n=" << n << ": fft layer " << fft_time
                << " s, direct reference " << direct_time << " s ("
                << direct_time / fft_time << "x)\n";
    } else {
      std::cerr << "bench n=" << n << ": fft layer " << fft_time << " s\n";
    }
    csv += "\n";
  }
  for (std::size_t i = 1; i < medians.size(); ++i)
    std::cerr << "bench scaling " << ns[i - 1] << "->" << ns[i] << ": "
              << medians[i] / medians[i - 1] << "x\n";
  emit(out, csv);
  write_manifest(out, "bench",
                 {{"n", ns}, {"d", d}, {"modes", modes},
                  {"repeats", repeats}, {"direct", direct}},
                 {{out, hash_of(csv)}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral filtering operator laboratory"};
  app.require_subcommand(1);

  // basis ------------------------------------------------------------------
  auto* basis = app.add_subcommand("basis", "write a filter bank as CSV");
  std::string b_kind = "usb", b_out = "filters.csv";
  std::size_t b_n = 256, b_modes = 20;
  std::uint64_t b_seed = 0;
  basis->add_option("--kind", b_kind, "usb|fourier|chebyshev|random");
  basis->add_option("--n", b_n, "grid size (power of two)");
  basis->add_option("--modes", b_modes, "number of filters");
  basis->add_option("--seed", b_seed, "seed for the random basis");
  basis->add_option("--out", b_out, "CSV path or -");

  // theory -----------------------------------------------------------------
  auto* theory = app.add_subcommand("theory", "stencil/kernel tables");
  theory->require_subcommand(1);
  double t_alpha = 2.5, t_beta = 1.0, t_rho = 0.0;
  std::size_t t_tmax = 20, t_n = 256, t_lmax = 24, t_modes_lmax = 64;
  std::uint64_t t_seed = 0;
  std::vector<double> t_eps{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  std::string t_out_g = "greens.csv", t_out_t = "truncation.csv",
              t_out_m = "modes_for_eps.csv";

  auto* greens = theory->add_subcommand("greens", "closed form vs numeric");
  greens->add_option("--alpha", t_alpha, "stencil diagonal");
  greens->add_option("--beta", t_beta, "stencil off-diagonal");
  greens->add_option("--tmax", t_tmax, "offset window");
  greens->add_option("--out", t_out_g, "CSV path or -");

  auto* trunc = theory->add_subcommand("truncation", "projection errors");
  trunc->add_option("--alpha", t_alpha, "stencil diagonal");
  trunc->add_option("--beta", t_beta, "stencil off-diagonal");
  trunc->add_option("--rho", t_rho,
                    "use the geometric profile rho^t instead of a stencil");
  trunc->add_option("--n", t_n, "profile length");
  trunc->add_option("--lmax", t_lmax, "largest truncation rank (step 4)");
  trunc->add_option("--seed", t_seed, "seed for the random basis");
  trunc->add_option("--out", t_out_t, "CSV path or -");

  auto* modes = theory->add_subcommand("modes", "modes needed per accuracy");
  modes->add_option("--alpha", t_alpha, "stencil diagonal");
  modes->add_option("--beta", t_beta, "stencil off-diagonal");
  modes->add_option("--n", t_n, "profile length");
  modes->add_option("--lmax", t_modes_lmax, "search bound on the rank");
  modes->add_option("--eps", t_eps, "accuracy thresholds");
  modes->add_option("--out", t_out_m, "CSV path or -");

  // data ---------------------------------------------------------------
  auto* data = app.add_subcommand("data", "dataset generation/inspection");
  data->require_subcommand(1);
  std::string d_pde = "diff-react-1d", d_out = "data.bin", d_file,
              d_info_out = "-";
  std::size_t d_n = 64, d_nt = 16, d_samples = 512;
  std::uint64_t d_seed = 0;
  double d_diff = 0.05;

  auto* gen = data->add_subcommand("gen", "generate a dataset");
  gen->add_option("--pde", d_pde, "diff-react-1d|heat-2d");
  gen->add_option("--n", d_n, "grid size per axis");
  gen->add_option("--nt", d_nt, "output snapshots");
  gen->add_option("--samples", d_samples, "sample count");
  gen->add_option("--seed", d_seed, "generator seed");
  gen->add_option("--diffusivity", d_diff, "heat-2d diffusivity");
  gen->add_option("--out", d_out, "output file");

  auto* info = data->add_subcommand("info", "print a dataset header");
  info->add_option("--file", d_file, "dataset file")->required();
  info->add_option("--out", d_info_out, "JSON path or -");

  // train / eval -------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "train a model");
  std::string tr_data, tr_config, tr_out = "model.ckpt",
              tr_metrics = "metrics.csv";
  train_cmd->add_option("--data", tr_data, "dataset file")->required();
  train_cmd->add_option("--config", tr_config,
                        "JSON with model + train keys (defaults when absent)");
  train_cmd->add_option("--out", tr_out, "checkpoint path");
  train_cmd->add_option("--metrics", tr_metrics, "epoch CSV path or -");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string ev_data, ev_ckpt, ev_out = "-";
  std::size_t ev_stride = 1;
  eval_cmd->add_option("--data", ev_data, "dataset file")->required();
  eval_cmd->add_option("--ckpt", ev_ckpt, "checkpoint file")->required();
  eval_cmd->add_option("--stride", ev_stride,
                       "evaluate on a coarsened copy at this stride");
  eval_cmd->add_option("--out", ev_out, "metrics JSON path or -");

  // ablate ---------------------------------------------------------------
  auto* ablate = app.add_subcommand("ablate", "run an experiment plan");
  std::string ab_plan, ab_out = "ablation";
  std::size_t ab_jobs = 1;
  bool ab_no_timing = false;
  ablate->add_option("--plan", ab_plan, "JSON plan file")->required();
  ablate->add_option("--out", ab_out, "output directory");
  ablate->add_option("--jobs", ab_jobs, "arm parallelism bound");
  ablate->add_flag("--no-timing", ab_no_timing,
                   "omit wall_seconds for byte-stable CSV");

  // bench ---------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "per-layer scaling benchmark");
  std::vector<std::size_t> be_n{256, 512, 1024};
  std::size_t be_d = 32, be_modes = 16, be_repeats = 5;
  bool be_direct = false;
  std::string be_out = "bench.csv";
  bench->add_option("--n", be_n, "grid sizes")->delimiter(',');
  bench->add_option("--d", be_d, "channel width");
  bench->add_option("--modes", be_modes, "rank L");
  bench->add_option("--repeats", be_repeats, "runs per size (median)");
  bench->add_flag("--direct", be_direct,
                  "also time the serial direct-sum reference");
  bench->add_option("--out", be_out, "CSV path or -");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // help text, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (basis->parsed()) return cmd_basis(b_kind, b_n, b_modes, b_seed, b_out);
    if (greens->parsed())
      return cmd_theory_greens(t_alpha, t_beta, t_tmax, t_out_g);
    if (trunc->parsed())
      return cmd_theory_truncation(t_alpha, t_beta, t_rho, t_n, t_lmax,
                                   t_seed, t_out_t);
    if (modes->parsed())
      return cmd_theory_modes(t_alpha, t_beta, t_n, t_modes_lmax, t_eps,
                              t_out_m);
    if (gen->parsed())
      return cmd_data_gen(d_pde, d_n, d_nt, d_samples, d_seed, d_diff, d_out);
    if (info->parsed()) return cmd_data_info(d_file, d_info_out);
    if (train_cmd->parsed())
      return cmd_train(tr_data, tr_config, tr_out, tr_metrics);
    if (eval_cmd->parsed()) return cmd_eval(ev_data, ev_ckpt, ev_stride, ev_out);
    if (ablate->parsed())
      return cmd_ablate(ab_plan, ab_out, ab_jobs, ab_no_timing);
    if (bench->parsed())
      return cmd_bench(be_n, be_d, be_modes, be_repeats, be_direct, be_out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
