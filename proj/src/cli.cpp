#include "mrwlab/cli.hpp"

#include <chrono>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "mrwlab/cascade.hpp"
#include "mrwlab/config.hpp"
#include "mrwlab/error.hpp"
#include "mrwlab/fbm.hpp"
#include "mrwlab/io.hpp"
#include "mrwlab/log.hpp"
#include "mrwlab/mrw.hpp"
#include "mrwlab/parallel.hpp"
#include "mrwlab/stats.hpp"

namespace mrw::cli {

namespace fs = std::filesystem;
using config::RunConfig;

namespace {

// Collects the config flags of one subcommand; flags given on the command line
// are applied after the preset and the config file.
class ConfigFlags {
 public:
  explicit ConfigFlags(CLI::App* app) : app_(app) {
    app->add_option("--preset", preset_, "Named parameter set (paper, default)");
    app->add_option("--config", config_path_, "JSON config file");
    value<double>("--H", "Hurst exponent, 1/2 < H < 1", [](RunConfig& c, double v) { c.H = v; });
    value<double>("--c", "Cascade intensity", [](RunConfig& c, double v) { c.c = v; });
    value<double>("--r", "Small-scale cutoff", [](RunConfig& c, double v) { c.r = v; });
    value<double>("--a-low", "Lower bound of the Brownian strip", [](RunConfig& c, double v) { c.a_low = v; });
    value<std::string>("--mode", "disjoint or dependent",
                       [](RunConfig& c, const std::string& v) { c.mode = synthesis_mode_from_string(v); });
    value<std::size_t>("--n", "Number of steps", [](RunConfig& c, std::size_t v) { c.n = v; });
    value<double>("--T", "Horizon", [](RunConfig& c, double v) { c.T = v; });
    value<std::string>("--sign", "Correction sign: minus, plus or none",
                       [](RunConfig& c, const std::string& v) { c.sign = walk::correction_sign_from_string(v); });
    value<std::size_t>("--refine", "Field cells per step (0 = automatic)",
                       [](RunConfig& c, std::size_t v) { c.refine = v; });
    flag("--allow-violation", "Skip the c < 2H - 1 check", [](RunConfig& c) { c.allow_condition_violation = true; });
    value<std::size_t>("--tau", "Return lag in grid steps", [](RunConfig& c, std::size_t v) { c.tau = v; });
    value<std::size_t>("--kmax", "Largest estimator lag", [](RunConfig& c, std::size_t v) { c.kmax = v; });
    value<double>("--fit-lo", "Power-law fit range start", [](RunConfig& c, double v) { c.fit_lo = v; });
    value<double>("--fit-hi", "Power-law fit range end", [](RunConfig& c, double v) { c.fit_hi = v; });
    value<std::size_t>("--resamples", "Leverage bootstrap resamples",
                       [](RunConfig& c, std::size_t v) { c.resamples = v; });
    value<std::size_t>("--block", "Bootstrap block length (0 = sqrt n)",
                       [](RunConfig& c, std::size_t v) { c.block = v; });
    flag("--center", "Subtract the sample mean from returns", [](RunConfig& c) { c.center = true; });
    value<std::uint64_t>("--seed", "Master seed", [](RunConfig& c, std::uint64_t v) { c.seed = v; });
    value<std::string>("--out", "Output directory", [](RunConfig& c, const std::string& v) { c.out_dir = v; });
    value<int>("--threads", "Worker count (overrides MRW_LAB_THREADS)", [](RunConfig& c, int v) { c.threads = v; });
  }

  RunConfig build() const {
    RunConfig cfg;
    if (!preset_.empty()) config::apply_preset(cfg, preset_);
    if (!config_path_.empty()) config::apply_json(cfg, io::read_file(config_path_));
    for (const auto& a : appliers_) a(cfg);
    config::validate(cfg);
    return cfg;
  }

 private:
  template <class T, class Set>
  void value(const std::string& name, const std::string& help, Set set) {
    auto v = std::make_shared<T>();
    CLI::Option* opt = app_->add_option(name, *v, help);
    appliers_.push_back([=](RunConfig& c) {
      if (opt->count()) set(c, *v);
    });
  }
  template <class Set>
  void flag(const std::string& name, const std::string& help, Set set) {
    CLI::Option* opt = app_->add_flag(name, help);
    appliers_.push_back([=](RunConfig& c) {
      if (opt->count()) set(c);
    });
  }

  CLI::App* app_;
  std::string preset_;
  std::string config_path_;
  std::vector<std::function<void(RunConfig&)>> appliers_;
};

std::vector<std::string> header(const RunConfig& cfg, const std::string& what) {
  return {"config_hash=" + config::config_hash(cfg), "content=" + what, "config=" + config::canonical_json(cfg)};
}

Path simulate_path(const RunConfig& cfg, const std::string& kind) {
  const auto p = cfg.cascade_params();
  const core::SeedSpec seed{cfg.seed, 0};
  switch (path_kind_from_string(kind)) {
    case PathKind::fbm:
      return fbm::sample_fbm(cfg.n, cfg.T, cfg.H, seed);
    case PathKind::field:
      return cfg.mode == SynthesisMode::disjoint ? cascade::sample_field_spectral(cfg.grid(), p, seed)
                                                 : cascade::sample_field(cfg.grid(), p, seed);
    case PathKind::cascade: {
      const auto w = cfg.mode == SynthesisMode::disjoint ? cascade::sample_field_spectral(cfg.grid(), p, seed)
                                                         : cascade::sample_field(cfg.grid(), p, seed);
      return cascade::q_from_field(w, p);
    }
    case PathKind::mrw:
      return walk::synthesize(p, cfg.n, cfg.T, cfg.mode, seed, cfg.synthesis());
  }
  throw ConfigError("unknown path kind '" + kind + "'");
}

io::Table report_table(const stats::EstimatorReport& rep, std::vector<std::string> comments) {
  io::Table t;
  t.comments = std::move(comments);
  t.columns = {"k", "estimate", "stderr", "lo", "hi"};
  for (std::size_t j = 0; j < rep.k.size(); ++j)
    t.rows.push_back({rep.k[j], rep.estimate[j], rep.stderr_[j], rep.lo[j], rep.hi[j]});
  return t;
}

std::string fit_line(const stats::PowerLawFit& f) {
  std::ostringstream os;
  os << "alpha=" << io::format_double(f.alpha) << " intercept=" << io::format_double(f.intercept)
     << " mse=" << io::format_double(f.mse) << " k_lo=" << io::format_double(f.k_lo)
     << " k_hi=" << io::format_double(f.k_hi) << " used=" << f.used << " excluded=" << f.excluded;
  return os.str();
}

// Return series from a time,value file, a tick file or a fresh simulation.
struct Source {
  stats::ReturnSeries returns;
  std::string tag;
};

Source load_returns(const RunConfig& cfg, const std::string& series, const std::string& ticks,
                    std::optional<double> resample) {
  if (!series.empty() && !ticks.empty()) throw ConfigError("give at most one of --input and --ticks");
  if (!ticks.empty()) {
    const auto ts = io::ingest(ticks, resample);
    return {stats::log_returns(ts.price, cfg.tau, cfg.center, ticks), "ticks:" + fs::path(ticks).filename().string()};
  }
  if (!series.empty()) {
    auto r = stats::path_returns(io::path_from_table(io::read_table(series)), cfg.tau, cfg.center);
    r.source = series;
    return {std::move(r), "series:" + fs::path(series).filename().string()};
  }
  auto r = stats::path_returns(simulate_path(cfg, "mrw"), cfg.tau, cfg.center);
  r.source = "simulated";
  return {std::move(r), "simulated"};
}

struct EstimateSelection {
  bool acf = false, abs_acf = false, sq_acf = false, leverage = false, hurst = false;
  bool any() const { return acf || abs_acf || sq_acf || leverage || hurst; }
};

int cmd_simulate(const RunConfig& cfg, const std::string& kind, std::ostream& out) {
  const auto path = simulate_path(cfg, kind);
  const fs::path dir(cfg.out_dir);
  const fs::path file = dir / (kind + ".csv");
  io::write_table(file, io::path_table(path, header(cfg, kind + " path")));
  io::write_atomic(dir / "config.json", config::canonical_json(cfg) + "\n");
  out << "simulate: wrote " << file.string() << " (" << path.values.size() << " rows, config "
      << config::config_hash(cfg) << ")\n";
  return 0;
}

int cmd_estimate(const RunConfig& cfg, EstimateSelection sel, const std::string& series, const std::string& ticks,
                 std::optional<double> resample, std::ostream& out) {
  const bool all = !sel.any();
  if (all) sel = {true, true, true, true, true};
  const auto src = load_returns(cfg, series, ticks, resample);
  const fs::path dir(cfg.out_dir);
  auto comments = [&](const std::string& what) {
    auto c = header(cfg, what);
    c.push_back("source=" + src.tag);
    c.push_back("n=" + std::to_string(src.returns.values.size()));
    return c;
  };
  const std::pair<bool, stats::Transform> acfs[] = {
      {sel.acf, stats::Transform::identity}, {sel.abs_acf, stats::Transform::abs}, {sel.sq_acf, stats::Transform::square}};
  const char* names[] = {"acf", "abs_acf", "sq_acf"};
  for (int i = 0; i < 3; ++i) {
    if (!acfs[i].first) continue;
    auto rep = stats::acf(src.returns, cfg.kmax, acfs[i].second);
    auto c = comments(names[i]);
    try {
      rep.fit = stats::powerlaw_fit(rep, cfg.fit_lo, cfg.fit_hi);
      c.push_back("fit " + fit_line(*rep.fit));
      out << names[i] << ": " << fit_line(*rep.fit) << '\n';
    } catch (const TooFewPoints& e) {
      c.push_back(std::string("fit unavailable: ") + e.what());
      out << names[i] << ": power-law fit unavailable (" << e.what() << ")\n";
    }
    io::write_table(dir / (std::string(names[i]) + ".csv"), report_table(rep, c));
  }
  if (sel.leverage) {
    const auto rep = stats::leverage(src.returns, cfg.kmax, cfg.leverage());
    std::size_t inside = 0;
    for (std::size_t j = 0; j < rep.k.size(); ++j) inside += rep.lo[j] <= 0.0 && 0.0 <= rep.hi[j];
    io::write_table(dir / "leverage.csv", report_table(rep, comments("leverage")));
    out << "leverage: " << inside << "/" << rep.k.size() << " lags with 0 inside the bootstrap band\n";
  }
  if (sel.hurst) {
    try {
      const auto h = stats::hurst_rs(src.returns.values);
      io::Table t;
      t.comments = comments("hurst");
      t.comments.push_back("H=" + io::format_double(h.H) + " se=" + io::format_double(h.se));
      t.columns = {"window", "rs"};
      for (std::size_t j = 0; j < h.window.size(); ++j) t.rows.push_back({h.window[j], h.rs[j]});
      io::write_table(dir / "hurst.csv", t);
      out << "hurst: H=" << h.H << " se=" << h.se << '\n';
    } catch (const TooShort& e) {
      if (!all) throw;
      warn(std::string("hurst skipped: ") + e.what());
    }
  }
  return 0;
}

int cmd_compare(const RunConfig& cfg, const std::string& data_series, const std::string& data_ticks,
                std::optional<double> resample, const std::string& sim_series, std::ostream& out) {
  if (data_series.empty() && data_ticks.empty()) throw ConfigError("compare needs --data or --data-ticks");
  const auto data = load_returns(cfg, data_series, data_ticks, resample);
  const auto sim = load_returns(cfg, sim_series, "", std::nullopt);
  const fs::path dir(cfg.out_dir);
  auto paired = [&](const std::string& name, const stats::EstimatorReport& d, const stats::EstimatorReport& s) {
    io::Table t;
    t.comments = header(cfg, "compare " + name);
    t.comments.push_back("data=" + data.tag + " sim=" + sim.tag);
    t.columns = {"k", "data", "data_lo", "data_hi", "sim", "diff"};
    double mse = 0.0;
    for (std::size_t j = 0; j < d.k.size(); ++j) {
      const double diff = d.estimate[j] - s.estimate[j];
      mse += diff * diff;
      t.rows.push_back({d.k[j], d.estimate[j], d.lo[j], d.hi[j], s.estimate[j], diff});
    }
    mse /= static_cast<double>(d.k.size());
    t.comments.push_back("mse=" + io::format_double(mse));
    io::write_table(dir / ("compare_" + name + ".csv"), t);
    out << "compare " << name << ": mse=" << mse << '\n';
  };
  const std::pair<const char*, stats::Transform> acfs[] = {
      {"acf", stats::Transform::identity}, {"abs_acf", stats::Transform::abs}, {"sq_acf", stats::Transform::square}};
  for (const auto& [name, tr] : acfs)
    paired(name, stats::acf(data.returns, cfg.kmax, tr), stats::acf(sim.returns, cfg.kmax, tr));
  paired("leverage", stats::leverage(data.returns, cfg.kmax, cfg.leverage()),
         stats::leverage(sim.returns, cfg.kmax, cfg.leverage()));
  return 0;
}

std::string csv_quote(const std::string& s) {
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

int cmd_validate(const RunConfig& cfg, std::vector<std::string> checks, std::ostream& out) {
  if (checks.empty() || (checks.size() == 1 && checks[0] == "all")) {
    checks = validation::check_names();
    checks.push_back("determinism");
  }
  std::ostringstream csv;
  for (const auto& c : header(cfg, "validation verdicts")) csv << "# " << c << '\n';
  csv << "check,verdict,statistic,threshold,seconds,detail\n";
  bool all_pass = true;
  for (const auto& name : checks) {
    validation::Verdict v;
    if (name == "determinism") {
      const auto t0 = std::chrono::steady_clock::now();
      v = determinism_check(cfg.seed, fs::path(cfg.out_dir) / "determinism-scratch");
      v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } else {
      v = validation::run_check(name, {cfg.seed});
    }
    all_pass = all_pass && v.pass;
    out << (v.pass ? "PASS " : "FAIL ") << v.name << ": statistic " << v.statistic << " threshold " << v.threshold
        << " (" << v.detail << ")\n";
    csv << v.name << ',' << (v.pass ? "PASS" : "FAIL") << ',' << io::format_double(v.statistic) << ','
        << io::format_double(v.threshold) << ',' << io::format_double(v.seconds) << ',' << csv_quote(v.detail) << '\n';
  }
  io::write_atomic(fs::path(cfg.out_dir) / "validate.csv", csv.str());
  return all_pass ? 0 : static_cast<int>(ErrorClass::validation);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fractional multifractal random walk toolkit"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Write a sample path as time,value CSV");
  ConfigFlags sim_flags(sim);
  std::string kind = "mrw";
  sim->add_option("--kind", kind, "mrw, fbm, field or cascade");

  auto* est = app.add_subcommand("estimate", "Stylized-fact estimators on a series, ticks or a fresh simulation");
  ConfigFlags est_flags(est);
  std::string input, ticks;
  double resample = 0.0;
  EstimateSelection sel;
  est->add_option("--input", input, "time,value log-price series");
  est->add_option("--ticks", ticks, "timestamp,price tick file");
  auto* est_resample = est->add_option("--resample", resample, "Last-tick resampling interval in seconds");
  est->add_flag("--acf", sel.acf, "Return autocorrelation");
  est->add_flag("--abs-acf", sel.abs_acf, "Absolute-return autocorrelation");
  est->add_flag("--sq-acf", sel.sq_acf, "Squared-return autocorrelation");
  est->add_flag("--leverage", sel.leverage, "Normalized leverage function");
  est->add_flag("--hurst", sel.hurst, "R/S Hurst exponent");

  auto* val = app.add_subcommand("validate", "Run quantitative checks and write a verdict table");
  ConfigFlags val_flags(val);
  std::vector<std::string> checks;
  val->add_option("--check", checks, "Check name (repeatable; 'all' or none runs every check)");

  auto* cmp = app.add_subcommand("compare", "Paired ACF and leverage tables, data vs simulation");
  ConfigFlags cmp_flags(cmp);
  std::string data, data_ticks, sim_input;
  double cmp_resample = 0.0;
  cmp->add_option("--data", data, "time,value log-price series");
  cmp->add_option("--data-ticks", data_ticks, "timestamp,price tick file");
  auto* cmp_resample_opt = cmp->add_option("--resample", cmp_resample, "Tick resampling interval in seconds");
  cmp->add_option("--sim", sim_input, "Simulated series (default: simulate from the config)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();  // program name
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ErrorClass::config);
  }

  try {
    par::apply_thread_env();
    auto with_threads = [](const RunConfig& cfg, auto&& body) {
      std::optional<par::ThreadScope> scope;
      if (cfg.threads > 0) scope.emplace(cfg.threads);
      return body();
    };
    if (*sim) {
      const auto cfg = sim_flags.build();
      return with_threads(cfg, [&] { return cmd_simulate(cfg, kind, out); });
    }
    if (*est) {
      const auto cfg = est_flags.build();
      const auto rs = est_resample->count() ? std::optional<double>(resample) : std::nullopt;
      return with_threads(cfg, [&] { return cmd_estimate(cfg, sel, input, ticks, rs, out); });
    }
    if (*val) {
      const auto cfg = val_flags.build();
      return with_threads(cfg, [&] { return cmd_validate(cfg, checks, out); });
    }
    if (*cmp) {
      const auto cfg = cmp_flags.build();
      const auto rs = cmp_resample_opt->count() ? std::optional<double>(cmp_resample) : std::nullopt;
      return with_threads(cfg, [&] { return cmd_compare(cfg, data, data_ticks, rs, sim_input, out); });
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    err << "error: IoError: " << e.what() << '\n';
    return static_cast<int>(ErrorClass::data);
  }
  return 0;
}

int run(int argc, const char* const* argv) {
  return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

validation::Verdict determinism_check(std::uint64_t seed, const fs::path& scratch) {
  struct Case {
    std::vector<std::string> sim;
    std::vector<std::string> est;
  };
  const std::string s = std::to_string(seed);
  const std::vector<Case> cases{
      {{"--n", "16384", "--T", "32"}, {"--kmax", "50", "--resamples", "100"}},
      {{"--mode", "dependent", "--n", "2048", "--T", "4"}, {"--kmax", "20", "--resamples", "100"}},
  };
  const std::vector<std::string> threads{"1", "1", "4"};
  std::ostringstream sink;
  std::size_t compared = 0, mismatched = 0;
  std::string detail;
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    std::vector<std::map<std::string, std::string>> outputs;
    for (std::size_t ti = 0; ti < threads.size(); ++ti) {
      const fs::path dir = scratch / ("case" + std::to_string(ci)) / ("run" + std::to_string(ti));
      fs::remove_all(dir);
      std::vector<std::string> sim{"mrwlab", "simulate", "--seed", s, "--out", dir.string(), "--threads", threads[ti]};
      sim.insert(sim.end(), cases[ci].sim.begin(), cases[ci].sim.end());
      std::vector<std::string> est{"mrwlab", "estimate", "--input", (dir / "mrw.csv").string(), "--seed", s,
                                   "--out", dir.string(), "--threads", threads[ti]};
      est.insert(est.end(), cases[ci].sim.begin(), cases[ci].sim.end());
      est.insert(est.end(), cases[ci].est.begin(), cases[ci].est.end());
      if (const int rc = run(sim, sink, sink); rc != 0)
        return {"determinism", false, 1.0, 0.0, "simulate failed: " + sink.str(), 0.0};
      if (const int rc = run(est, sink, sink); rc != 0)
        return {"determinism", false, 1.0, 0.0, "estimate failed: " + sink.str(), 0.0};
      std::map<std::string, std::string> files;
      for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = io::read_file(e.path());
      outputs.push_back(std::move(files));
    }
    for (std::size_t ti = 1; ti < outputs.size(); ++ti) {
      if (outputs[ti].size() != outputs[0].size()) ++mismatched;
      for (const auto& [name, bytes] : outputs[0]) {
        ++compared;
        const auto it = outputs[ti].find(name);
        if (it == outputs[ti].end() || it->second != bytes) {
          ++mismatched;
          detail += " " + name + "@threads=" + threads[ti];
        }
      }
    }
  }
  std::ostringstream d;
  d << compared << " file comparisons across reruns and 1/4 workers (disjoint and dependent), " << mismatched
    << " differ" << (detail.empty() ? "" : ":" + detail) << "; pass if none differ";
  return {"determinism", mismatched == 0, static_cast<double>(mismatched), 0.0, d.str(), 0.0};
}

}  // namespace mrw::cli
