#include "commands.hpp"

#include <cmath>
#include <fstream>

#include "mollescore/analysis.hpp"
#include "mollescore/csv.hpp"
#include "mollescore/rng.hpp"
#include "mollescore/ledkde.hpp"
#include "mollescore/svg.hpp"

namespace mollescore::cli {

namespace {

const std::set<std::string> kCommonKeys = {"command", "seed", "threads",
                                           "out"};

std::set<std::string> with_common(std::set<std::string> keys) {
  keys.insert(kCommonKeys.begin(), kCommonKeys.end());
  return keys;
}

void write_summary(const CommonOpts& opts, const json& summary) {
  std::ofstream out(opts.out / "summary.json");
  if (!out) throw io_error("cannot write summary.json");
  out << summary.dump(2) << "\n";
}

// true -> dry run, stop here
bool announce(const CommonOpts& opts, const std::string& plan) {
  if (opts.dry_run) {
    std::printf("dry-run: %s\n", plan.c_str());
    return true;
  }
  std::filesystem::create_directories(opts.out);
  log_info(plan);
  return false;
}

double resolve_dt(const json& cfg, double t_n) {
  if (cfg.contains("dt")) return num(cfg, "dt");
  return num_or(cfg, "dt_ratio", 0.1) * t_n;
}

std::string labeled_row(const std::vector<double>& values,
                        const std::string& label) {
  std::string line;
  for (double v : values) line += fmt_g17(v) + ",";
  return line + label;
}

MollifySpec mollify_from(const json& cfg, double h) {
  MollifySpec ms = MollifySpec::fixed(h);
  ms.mc_samples = int_or(cfg, "mc_samples", ms.mc_samples);
  if (cfg.contains("antithetic"))
    ms.antithetic = cfg.at("antithetic").get<bool>();
  std::string mode = str_or(cfg, "mode", "monte_carlo");
  if (mode == "time_shift")
    ms.mode = MollifySpec::Mode::time_shift;
  else if (mode != "monte_carlo")
    throw config_error("mode must be monte_carlo or time_shift");
  ms.validate();
  return ms;
}

// ---------------------------------------------------------------------------

int cmd_gen_data(const json& cfg, const CommonOpts& opts) {
  check_keys(cfg,
             with_common({"target", "n_train", "dataset", "idx", "name"}),
             "gen-data config");
  if (announce(opts, "generate dataset -> dataset.csv")) return 0;
  TargetSpec spec;
  Dataset ds = resolve_dataset(cfg, opts.seed, &spec);
  if (cfg.contains("name")) ds.name = cfg.at("name").get<std::string>();
  save_dataset(ds, opts.out / "dataset.csv");
  write_summary(opts, {{"n", ds.n()},
                       {"d", ds.dim()},
                       {"name", ds.name},
                       {"intrinsic_dim", ds.intrinsic_dim
                                             ? json(*ds.intrinsic_dim)
                                             : json(nullptr)}});
  return 0;
}

int cmd_sample(const json& cfg, const CommonOpts& opts) {
  check_keys(
      cfg,
      with_common({"target", "n_train", "dataset", "idx", "score", "sde"}),
      "sample config");
  TargetSpec spec;
  Dataset ds = resolve_dataset(cfg, opts.seed, &spec);
  auto field = parse_score_field(cfg.value("score", json::object()), ds,
                                 cfg.contains("target") ? &spec : nullptr,
                                 opts.seed);
  SdeConfig sde = parse_sde(cfg.at("sde"),
                            derive_stream(opts.seed, "cli/sde"), ds.dim());
  if (announce(opts, strf("reverse sde: %d trajectories, %zu steps, field %s",
                          sde.n_samples, time_grid(sde).size() - 1,
                          field->label().c_str())))
    return 0;

  SampleBatch batch = reverse_sde(*field, sde, opts.threads);
  save_batch(batch, opts.out / "samples.csv", opts.out / "samples.json");

  if (ds.dim() == 2) {
    double lo = std::min(ds.points.minCoeff(), batch.points.minCoeff());
    double hi = std::max(ds.points.maxCoeff(), batch.points.maxCoeff());
    SvgPlot plot(lo, hi, lo, hi, "training (blue) vs generated (orange)");
    plot.scatter(batch.points, "#e08020", 1.2, "generated");
    plot.scatter(ds.points, "#2050c0", 2.5, "training");
    plot.write(opts.out / "overlay.svg");
  }
  write_summary(opts, {{"n_generated", batch.points.rows()},
                       {"rejected", batch.rejected},
                       {"score", batch.score_label}});
  return 0;
}

// shared by kl-sweep and neff: replicate-averaged KL for one (t_n, h)
struct SweepContext {
  TargetSpec spec;
  int n_train = 0;
  double T = 0;
  int q = 0;
  int reps = 1;
  const json* cfg = nullptr;
  const CommonOpts* opts = nullptr;
};

std::pair<double, double> replicate_kl(const SweepContext& sc, double t_n,
                                       double h) {
  const double dt = resolve_dt(*sc.cfg, t_n);
  double acc = 0, acc2 = 0, se_single = 0;
  for (int r = 0; r < sc.reps; ++r) {
    Dataset ds = sample_target(
        sc.spec, sc.n_train,
        derive_stream(derive_stream(sc.opts->seed, "kl/train"), r));
    std::unique_ptr<ScoreField> field;
    if (h <= 0) {
      field = std::make_unique<EmpiricalField>(std::move(ds));
    } else {
      field = std::make_unique<MollifiedField>(
          std::move(ds), mollify_from(*sc.cfg, h),
          derive_stream(derive_stream(sc.opts->seed, "kl/mollify"), r));
    }
    KlOptions ko;
    ko.threads = sc.opts->threads;
    KlReport rep = kl_estimate(
        sc.spec, *field, t_n, sc.T, dt, sc.q,
        derive_stream(derive_stream(sc.opts->seed, "kl/q"), r), ko);
    acc += rep.kl;
    acc2 += rep.kl * rep.kl;
    se_single = rep.std_error;
  }
  double mean = acc / sc.reps;
  double se =
      sc.reps > 1
          ? std::sqrt(std::max(0.0, acc2 / sc.reps - mean * mean) /
                      (sc.reps - 1))
          : se_single;
  return {mean, se};
}

int cmd_kl_sweep(const json& cfg, const CommonOpts& opts) {
  check_keys(cfg,
             with_common({"target", "n_train", "t_n_list", "h_list", "T",
                          "dt", "dt_ratio", "Q", "replicates", "mode",
                          "mc_samples", "antithetic", "include_empirical"}),
             "kl-sweep config");
  SweepContext sc;
  sc.spec = parse_target(cfg.at("target"));
  sc.n_train = integer(cfg, "n_train");
  sc.T = num(cfg, "T");
  sc.q = integer(cfg, "Q");
  sc.reps = int_or(cfg, "replicates", 1);
  sc.cfg = &cfg;
  sc.opts = &opts;
  std::vector<double> t_ns = num_list(cfg, "t_n_list");
  std::vector<double> hs = num_list(cfg, "h_list");
  bool with_emp = cfg.contains("include_empirical")
                      ? cfg.at("include_empirical").get<bool>()
                      : true;
  if (announce(opts, strf("kl sweep: %zu t_n x %zu h values, %d replicates",
                          t_ns.size(), hs.size(), sc.reps)))
    return 0;

  CsvWriter csv(opts.out / "results.csv");
  csv.header({"t_n", "h", "kl", "stderr", "label"});
  json argmin = json::array();
  std::vector<double> emp_curve;
  std::vector<std::vector<double>> h_curves(hs.size());

  for (double t_n : t_ns) {
    double best_h = -1, best_kl = std::numeric_limits<double>::infinity();
    if (with_emp) {
      auto [kl, se] = replicate_kl(sc, t_n, 0.0);
      csv.raw_row(labeled_row({t_n, 0.0, kl, se}, "empirical"));
      emp_curve.push_back(kl);
    }
    for (size_t i = 0; i < hs.size(); ++i) {
      auto [kl, se] = replicate_kl(sc, t_n, hs[i]);
      csv.raw_row(labeled_row({t_n, hs[i], kl, se},
                              strf("mollified_h%g", hs[i])));
      h_curves[i].push_back(kl);
      if (kl < best_kl) {
        best_kl = kl;
        best_h = hs[i];
      }
    }
    argmin.push_back({{"t_n", t_n}, {"h", best_h}, {"kl", best_kl}});
  }

  // KL against t_n, one curve per bandwidth
  double y_lo = std::numeric_limits<double>::infinity(), y_hi = 0;
  auto widen = [&](const std::vector<double>& ys) {
    for (double y : ys) {
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  };
  widen(emp_curve);
  for (auto& c : h_curves) widen(c);
  if (y_hi > y_lo) {
    SvgPlot plot(*std::min_element(t_ns.begin(), t_ns.end()),
                 *std::max_element(t_ns.begin(), t_ns.end()),
                 y_lo - 0.05 * (y_hi - y_lo), y_hi + 0.05 * (y_hi - y_lo),
                 "KL vs sampling time", true, false);
    const char* palette[] = {"#2050c0", "#20a050", "#a020a0",
                             "#c0a020", "#20a0c0", "#804020"};
    if (!emp_curve.empty())
      plot.line(t_ns, emp_curve, "#c02020", "empirical");
    for (size_t i = 0; i < hs.size(); ++i)
      plot.line(t_ns, h_curves[i], palette[i % 6], strf("h=%g", hs[i]));
    plot.write(opts.out / "kl.svg");
  }
  write_summary(opts, {{"argmin_h", argmin}});
  return 0;
}

int cmd_neff(const json& cfg, const CommonOpts& opts) {
  check_keys(cfg,
             with_common({"target", "n_train", "t_n", "h", "T", "dt",
                          "dt_ratio", "Q", "replicates", "mode", "mc_samples",
                          "antithetic", "bracket_factor", "max_probes"}),
             "neff config");
  TargetSpec spec = parse_target(cfg.at("target"));
  const int n = integer(cfg, "n_train");
  const double t_n = num(cfg, "t_n");
  const double h = num(cfg, "h");
  const double T = num(cfg, "T");
  const double dt = resolve_dt(cfg, t_n);
  const int q = integer(cfg, "Q");
  const int reps = int_or(cfg, "replicates", 3);
  if (announce(opts, strf("n_eff search at t_n=%g h=%g (N=%d, %d reps)", t_n,
                          h, n, reps)))
    return 0;

  NeffOptions no;
  no.bracket_factor = int_or(cfg, "bracket_factor", 256);
  no.max_probes = int_or(cfg, "max_probes", 12);
  no.kl.threads = opts.threads;
  NeffResult res = n_eff(spec, n, t_n, mollify_from(cfg, h), T, dt, q, reps,
                         opts.seed, no);

  CsvWriter csv(opts.out / "results.csv");
  csv.header({"n_prime", "kl"});
  for (auto& [np, kl] : res.probes) csv.row({np, kl});
  if (res.probes.size() >= 2) {
    std::vector<double> xs, ys;
    for (auto& [np, kl] : res.probes) {
      xs.push_back(np);
      ys.push_back(kl);
    }
    double lo = *std::min_element(ys.begin(), ys.end());
    double hi = *std::max_element(ys.begin(), ys.end());
    lo = std::min(lo, res.kl_mollified);
    hi = std::max(hi, res.kl_mollified);
    SvgPlot plot(xs.front(), xs.back(), lo - 0.05 * (hi - lo),
                 hi + 0.05 * (hi - lo), "empirical KL vs dataset size", true,
                 false);
    plot.line(xs, ys, "#c02020", "empirical");
    plot.line({xs.front(), xs.back()},
              {res.kl_mollified, res.kl_mollified}, "#2050c0",
              "mollified target");
    plot.write(opts.out / "neff.svg");
  }
  write_summary(opts, {{"n_eff", res.n_eff},
                       {"ratio", res.n_eff / n},
                       {"crossed", res.crossed},
                       {"kl_mollified", res.kl_mollified}});
  return 0;
}

int cmd_covariance(const json& cfg, const CommonOpts& opts) {
  check_keys(cfg,
             with_common({"target", "n_train", "dataset", "idx", "t",
                          "queries", "eigenvector_images"}),
             "covariance config");
  TargetSpec spec;
  Dataset ds = resolve_dataset(cfg, opts.seed, &spec);
  const double t = num(cfg, "t");
  Matrix queries;
  if (cfg.contains("queries") && cfg.at("queries").is_array()) {
    const json& qs = cfg.at("queries");
    queries.resize(qs.size(), ds.dim());
    for (size_t i = 0; i < qs.size(); ++i)
      for (int j = 0; j < ds.dim(); ++j)
        queries(static_cast<int>(i), j) = qs[i][j].get<double>();
  } else {
    int count = 1;
    if (cfg.contains("queries"))
      count = integer(cfg.at("queries"), "count");
    count = std::min(count, ds.n());
    queries = ds.points.topRows(count);
  }
  if (announce(opts, strf("local covariance PCA at %d points, t=%g",
                          static_cast<int>(queries.rows()), t)))
    return 0;

  CsvWriter csv(opts.out / "results.csv");
  csv.header({"query", "rank", "eigenvalue", "ess"});
  bool images = cfg.contains("eigenvector_images") &&
                cfg.at("eigenvector_images").get<bool>();
  json summary = json::array();
  for (int i = 0; i < queries.rows(); ++i) {
    PcaReport pca = local_pca(ds, t, queries.row(i).transpose());
    for (int r = 0; r < pca.eigenvalues.size(); ++r)
      csv.row({double(i), double(r), pca.eigenvalues[r], pca.ess});
    summary.push_back({{"query", i},
                       {"lambda1", pca.eigenvalues[0]},
                       {"low_ess_warning", pca.low_ess_warning}});
    int side = static_cast<int>(std::lround(std::sqrt(double(ds.dim()))));
    if (images && side * side == ds.dim()) {
      // render top-5 / bottom-5 eigenvectors as images
      Grid g = Grid::make2d(0, 1, side, 0, 1, side);
      for (int r = 0; r < 5 && r < ds.dim(); ++r) {
        for (int which = 0; which < 2; ++which) {
          int col = which == 0 ? r : ds.dim() - 1 - r;
          DensityField f;
          f.grid = g;
          f.values = pca.eigenvectors.col(col).cwiseAbs();
          write_field_pgm(f, opts.out / strf("q%d_%s%d.pgm", i,
                                             which == 0 ? "top" : "bottom",
                                             r + 1));
        }
      }
    }
    if (ds.dim() == 2 && i == 0) {
      double lo = ds.points.minCoeff(), hi = ds.points.maxCoeff();
      SvgPlot plot(lo, hi, lo, hi, "local covariance eigenvectors");
      plot.scatter(ds.points, "#2050c0", 1.5, "data");
      Vector x = queries.row(i).transpose();
      for (int r = 0; r < 2; ++r) {
        double len = 0.15 * (hi - lo) * (r == 0 ? 1.0 : 0.5);
        Vector v = pca.eigenvectors.col(r);
        plot.line({x[0] - len * v[0], x[0] + len * v[0]},
                  {x[1] - len * v[1], x[1] + len * v[1]},
                  r == 0 ? "#c02020" : "#20a050", strf("eigvec %d", r + 1));
      }
      plot.write(opts.out / "covariance.svg");
    }
  }
  write_summary(opts, {{"queries", summary}});
  return 0;
}

int cmd_dim_estimate(const json& cfg, const CommonOpts& opts) {
  check_keys(cfg,
             with_common(
                 {"target", "n_train", "dataset", "idx", "t_values", "x",
                  "data_index"}),
             "dim-estimate config");
  TargetSpec spec;
  Dataset ds = resolve_dataset(cfg, opts.seed, &spec);
  std::vector<double> ts = num_list(cfg, "t_values");
  Vector x;
  if (cfg.contains("x")) {
    auto xs = num_list(cfg, "x");
    x = Eigen::Map<Vector>(xs.data(), xs.size());
  } else {
    x = ds.points.row(int_or(cfg, "data_index", 0)).transpose();
  }
  if (announce(opts, strf("intrinsic dimension from %zu values of t",
                          ts.size())))
    return 0;

  IntrinsicDimReport rep = intrinsic_dim(ds, x, ts);
  CsvWriter csv(opts.out / "results.csv");
  csv.header({"t", "lambda1"});
  for (size_t i = 0; i < ts.size(); ++i) csv.row({ts[i], rep.lambda1[i]});
  SvgPlot plot(*std::min_element(ts.begin(), ts.end()),
               *std::max_element(ts.begin(), ts.end()),
               *std::min_element(rep.lambda1.begin(), rep.lambda1.end()),
               *std::max_element(rep.lambda1.begin(), rep.lambda1.end()),
               "top local-covariance eigenvalue vs t", true, true);
  plot.line(ts, rep.lambda1, "#2050c0", "lambda1");
  plot.write(opts.out / "dim.svg");
  write_summary(opts, {{"slope", rep.slope},
                       {"k_hat", rep.k_hat},
                       {"low_ess_warning", rep.low_ess_warning}});
  return 0;
}

int cmd_biasvar(const json& cfg, const CommonOpts& opts) {
  check_keys(cfg,
             with_common({"target", "n_train", "t", "h_list", "x",
                          "replicates", "mc_samples"}),
             "biasvar config");
  TargetSpec spec = parse_target(cfg.at("target"));
  const int n = integer(cfg, "n_train");
  const double t = num(cfg, "t");
  auto xs = num_list(cfg, "x");
  Vector x = Eigen::Map<Vector>(xs.data(), xs.size());
  std::vector<double> hs = num_list(cfg, "h_list");
  const int reps = int_or(cfg, "replicates", 400);
  const int mc = int_or(cfg, "mc_samples", 4096);
  if (announce(opts, strf("bias-variance over %zu bandwidths, R=%d",
                          hs.size(), reps)))
    return 0;

  CsvWriter csv(opts.out / "results.csv");
  csv.header({"h", "v_hat", "b_hat", "b_se"});
  std::vector<double> vs;
  for (double h : hs) {
    BiasVarianceReport rep =
        bias_variance(spec, n, t, h, x, reps, mc, opts.seed);
    csv.row({h, rep.v_hat, rep.b_hat, rep.b_se});
    vs.push_back(rep.v_hat);
  }
  SvgPlot plot(*std::min_element(hs.begin(), hs.end()),
               *std::max_element(hs.begin(), hs.end()),
               *std::min_element(vs.begin(), vs.end()),
               *std::max_element(vs.begin(), vs.end()),
               "resampling variance vs bandwidth", true, true);
  plot.line(hs, vs, "#2050c0", "v_hat");
  plot.write(opts.out / "biasvar.svg");
  write_summary(opts, {{"h_list", hs}, {"v_hat", vs}});
  return 0;
}

int cmd_memorize(const json& cfg, const CommonOpts& opts) {
  check_keys(cfg,
             with_common({"target", "n_train", "dataset", "idx", "t_n",
                          "h_list", "n_samples", "threshold", "clamp", "T",
                          "dt", "mode", "mc_samples", "antithetic"}),
             "memorize config");
  TargetSpec spec;
  Dataset ds = resolve_dataset(cfg, opts.seed, &spec);
  const double t_n = num(cfg, "t_n");
  std::vector<double> hs = num_list(cfg, "h_list");
  const double threshold = num_or(cfg, "threshold", 1.0 / 3.0);
  SdeConfig sde;
  sde.T = num(cfg, "T");
  sde.dt = resolve_dt(cfg, t_n);
  sde.t_n = t_n;
  sde.n_samples = integer(cfg, "n_samples");
  sde.d = ds.dim();
  sde.seed = derive_stream(opts.seed, "memorize/sde");
  sde.validate();
  if (announce(opts, strf("memorization ratio across %zu bandwidths, %d "
                          "samples each",
                          hs.size(), sde.n_samples)))
    return 0;

  const bool clamp = cfg.contains("clamp");
  const double clamp_below = clamp ? num(cfg, "clamp") : 0.0;

  CsvWriter csv(opts.out / "results.csv");
  csv.header({"h", "ratio", "rejected"});
  std::vector<double> ratios;
  for (double h : hs) {
    std::unique_ptr<ScoreField> field;
    if (h <= 0)
      field = std::make_unique<EmpiricalField>(ds);
    else
      field = std::make_unique<MollifiedField>(
          ds, mollify_from(cfg, h), derive_stream(opts.seed, "memorize/mol"));
    SampleBatch batch = reverse_sde(*field, sde, opts.threads);
    Matrix pts = batch.points;
    if (clamp)
      pts = (pts.array() < clamp_below).select(0.0, pts);
    double ratio = memorization_ratio(pts, ds, threshold);
    csv.row({h, ratio, double(batch.rejected)});
    ratios.push_back(ratio);
    log_info(strf("memorize: h=%g ratio=%.3f", h, ratio));
  }
  double h_lo = *std::min_element(hs.begin(), hs.end());
  double h_hi = *std::max_element(hs.begin(), hs.end());
  SvgPlot plot(h_lo, h_hi + 1e-9, -0.02, 1.02, "memorization ratio vs h");
  plot.line(hs, ratios, "#c02020", "ratio");
  plot.write(opts.out / "memorize.svg");
  write_summary(opts, {{"h_list", hs}, {"ratio", ratios}});
  return 0;
}

int cmd_ledkde(const json& cfg, const CommonOpts& opts) {
  check_keys(cfg,
             with_common({"target", "n_train", "dataset", "idx", "grid", "K",
                          "L", "eps"}),
             "ledkde config");
  TargetSpec spec;
  Dataset ds = resolve_dataset(cfg, opts.seed, &spec);

  const json& g = cfg.at("grid");
  check_keys(g, {"lo", "hi", "res"}, "grid");
  auto lo = num_list(g, "lo");
  auto hi = num_list(g, "hi");
  const json& res = g.at("res");
  Grid grid;
  if (lo.size() == 1)
    grid = Grid::make1d(lo[0], hi[0], res[0].get<int>());
  else
    grid = Grid::make2d(lo[0], hi[0], res[0].get<int>(), lo[1], hi[1],
                        res[1].get<int>());

  auto kernel_of = [](const json& k, const std::string& ctx) {
    check_keys(k, {"kind", "var", "radius"}, ctx);
    std::string kind = str_or(k, "kind", "gaussian");
    if (kind == "gaussian") return GridKernel::gaussian(num(k, "var"));
    if (kind == "ball") return GridKernel::ball(num(k, "radius"));
    throw config_error(ctx + ".kind must be gaussian or ball");
  };
  GridKernel K = kernel_of(cfg.at("K"), "K");
  GridKernel L = kernel_of(cfg.at("L"), "L");
  const double eps = num_or(cfg, "eps", 1e-10);
  if (announce(opts, strf("led-kde on a %dx%d grid", grid.res[0],
                          grid.dims == 2 ? grid.res[1] : 1)))
    return 0;

  DensityField raw = kde(ds, L, grid);
  DensityField led = ledkde(ds, K, L, grid, eps);
  write_field_csv(raw, opts.out / "kde.csv");
  write_field_csv(led, opts.out / "ledkde.csv");
  write_field_pgm(raw, opts.out / "kde.pgm");
  write_field_pgm(led, opts.out / "ledkde.pgm");
  if (grid.dims == 2) {
    SvgPlot pa(grid.lo[0], grid.hi[0], grid.lo[1], grid.hi[1], "kde");
    pa.heatmap(raw);
    pa.write(opts.out / "kde.svg");
    SvgPlot pb(grid.lo[0], grid.hi[0], grid.lo[1], grid.hi[1], "led-kde");
    pb.heatmap(led);
    pb.write(opts.out / "ledkde.svg");
  }
  write_summary(opts, {{"kde_mass", raw.riemann_sum()},
                       {"ledkde_mass", led.riemann_sum()}});
  return 0;
}

int cmd_spectral_check(const json& cfg, const CommonOpts& opts) {
  check_keys(cfg,
             with_common({"target", "n_train", "dataset", "idx", "t", "h",
                          "kmax", "cube_half", "eval_points", "mc_samples"}),
             "spectral-check config");
  TargetSpec spec;
  Dataset raw = resolve_dataset(cfg, opts.seed, &spec);
  if (raw.dim() != 1)
    throw config_error("spectral-check compares densities in d=1");
  const double t = num(cfg, "t");
  const double h = num_or(cfg, "h", 0.0);
  const int kmax = int_or(cfg, "kmax", default_kmax(t));
  const int eval_points = int_or(cfg, "eval_points", 41);
  if (announce(opts, strf("spectral check: kmax=%d, t=%g, h=%g", kmax, t, h)))
    return 0;

  AffineRescale rec;
  Dataset ds = rescale_to_cube(raw, num_or(cfg, "cube_half", 0.5), &rec);
  SpectralCoeffs sc = fit_coeffs(ds, kmax);
  write_coeffs_csv(sc, opts.out / "coeffs.csv");

  auto ms = MollifySpec::fixed(std::max(h, 1e-12), int_or(cfg, "mc_samples",
                                                          100000));
  CsvWriter csv(opts.out / "results.csv");
  csv.header({"x", "spectral", "monte_carlo"});
  double nnum = 0, den = 0;
  std::vector<double> xs, spectral_vals, mc_vals;
  for (int i = 0; i < eval_points; ++i) {
    double xv = -0.5 + 1.0 * i / (eval_points - 1);
    Vector x(1);
    x << xv;
    double s_spec = spectral_score(sc, t, x, h)[0];
    double s_mc =
        score_mollified(ds, t, x, ms, derive_stream(opts.seed, "spectral"))[0];
    csv.row({xv, s_spec, s_mc});
    xs.push_back(xv);
    spectral_vals.push_back(s_spec);
    mc_vals.push_back(s_mc);
    nnum += (s_spec - s_mc) * (s_spec - s_mc);
    den += s_mc * s_mc;
  }
  double rel_l2 = std::sqrt(nnum / den);
  double lo = std::min(*std::min_element(spectral_vals.begin(),
                                         spectral_vals.end()),
                       *std::min_element(mc_vals.begin(), mc_vals.end()));
  double hi = std::max(*std::max_element(spectral_vals.begin(),
                                         spectral_vals.end()),
                       *std::max_element(mc_vals.begin(), mc_vals.end()));
  SvgPlot plot(-0.5, 0.5, lo, hi, "spectral vs monte-carlo mollified score");
  plot.line(xs, spectral_vals, "#2050c0", "spectral");
  plot.line(xs, mc_vals, "#c02020", "monte carlo");
  plot.write(opts.out / "spectral.svg");
  write_summary(opts, {{"rel_l2", rel_l2}, {"kmax", kmax}});
  return 0;
}

}  // namespace

int run_command(const std::string& name, const json& cfg,
                const CommonOpts& opts) {
  if (name == "gen-data") return cmd_gen_data(cfg, opts);
  if (name == "sample") return cmd_sample(cfg, opts);
  if (name == "kl-sweep") return cmd_kl_sweep(cfg, opts);
  if (name == "neff") return cmd_neff(cfg, opts);
  if (name == "covariance") return cmd_covariance(cfg, opts);
  if (name == "dim-estimate") return cmd_dim_estimate(cfg, opts);
  if (name == "biasvar") return cmd_biasvar(cfg, opts);
  if (name == "memorize") return cmd_memorize(cfg, opts);
  if (name == "ledkde") return cmd_ledkde(cfg, opts);
  if (name == "spectral-check") return cmd_spectral_check(cfg, opts);
  throw config_error("unknown command '" + name + "'");
}

}  // namespace mollescore::cli
