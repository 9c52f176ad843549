#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "gradsync/experiments.hpp"
#include "gradsync/ldp.hpp"
#include "gradsync/potential.hpp"
#include "gradsync/stopping.hpp"

#ifndef GRADSYNC_VERSION
#define GRADSYNC_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace gradsync;

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out;
  unsigned jobs = 0;
  bool plot_data = false;
};

class Output {
 public:
  Output(const cli::RunConfig& cfg, std::string dir) : cfg_(cfg), dir_(std::move(dir)) {
    fs::create_directories(dir_);
    char buf[128];
    std::snprintf(buf, sizeof buf, "# gradsync %s config_hash=%016" PRIx64 " master_seed=%" PRIu64 "\n",
                  GRADSYNC_VERSION, cfg.hash(), cfg.campaign.master_seed);
    header_ = buf;
  }

  std::ofstream open(const std::string& name) {
    std::ofstream os(fs::path(dir_) / name, std::ios::binary);
    if (!os) throw Error("cli", "cannot write " + (fs::path(dir_) / name).string());
    os << header_;
    return os;
  }

  void summary(const json& j) {
    auto os = open("summary.txt");
    os << j.dump(2) << '\n';
  }

  const cli::RunConfig& cfg() const { return cfg_; }

 private:
  const cli::RunConfig& cfg_;
  std::string dir_;
  std::string header_;
};

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

json fit_json(const std::optional<FitResult>& f) {
  if (!f) return nullptr;
  json j;
  j["slope"] = f->slope;
  j["intercept"] = f->intercept;
  j["se_slope"] = f->se_slope;
  j["se_intercept"] = f->se_intercept;
  j["r2"] = f->r2;
  return j;
}

json rows_json(const std::vector<ScalingRow>& rows) {
  json a = json::array();
  for (const auto& r : rows)
    a.push_back({{"eps", r.eps},
                 {"replicas", r.replicas},
                 {"censored", r.censored},
                 {"horizon", r.horizon},
                 {"statistic", r.statistic},
                 {"mean", r.mean},
                 {"median", r.median},
                 {"stddev", r.stddev}});
  return a;
}

void write_records(Output& out, const std::string& name, std::initializer_list<const std::vector<StoppingRecord>*> sets) {
  auto os = out.open(name);
  write_stopping_header(os);
  for (const auto* s : sets)
    for (const auto& r : *s) write_stopping_row(os, r);
}

// (x, y, err) triples: x = 1/eps or log(1/eps), y = log(statistic).
void write_plot(Output& out, const std::vector<ScalingRow>& rows, bool log_x) {
  auto os = out.open("plot_data.csv");
  os << "x,y,err\n";
  for (const auto& r : rows)
    os << num(log_x ? std::log(1.0 / r.eps) : 1.0 / r.eps) << ',' << num(std::log(r.statistic)) << ','
       << num(r.std_error) << '\n';
}

int finish(const ScalingResult& r, json& j, Output& out) {
  j["flags"] = r.flags;
  out.summary(j);
  for (const auto& f : r.flags) std::cerr << "flag: " << f << '\n';
  return r.flagged() ? 2 : 0;
}

int run_escape(const cli::RunConfig& cfg, const Options& o, Output& out) {
  auto c = cfg.campaign;
  c.jobs = o.jobs;
  const auto r = escape_scaling(c, false);
  write_records(out, "escape.csv", {&r.records});
  if (o.plot_data) write_plot(out, r.rows, false);
  json j;
  j["campaign"] = "escape";
  j["reference_V"] = r.reference;
  j["fit"] = fit_json(r.fit);
  j["rows"] = rows_json(r.rows);
  j["outer_exits"] = r.outer_exits;
  return finish(r, j, out);
}

int run_set_sync(const cli::RunConfig& cfg, const Options& o, Output& out) {
  auto c = cfg.campaign;
  c.jobs = o.jobs;
  const auto r = set_sync_scaling(c, false);
  write_records(out, "set_sync.csv", {&r.records, &r.doubled, &r.grid});
  if (o.plot_data) write_plot(out, r.rows, false);
  json j;
  j["campaign"] = "set-sync";
  j["reference_V"] = r.reference;
  j["fit"] = fit_json(r.fit);
  j["loglog_fit"] = fit_json(r.loglog);
  j["local_loglog_slopes"] = r.local_slopes;
  j["super_linear"] = r.super_linear;
  j["sandwich_checked"] = r.sandwich_checked;
  j["sandwich_violations"] = r.sandwich_violations;
  j["doubling_violations"] = r.doubling_violations;
  j["rows"] = rows_json(r.rows);
  return finish(r, j, out);
}

int run_point_sync(const cli::RunConfig& cfg, const Options& o, Output& out) {
  auto c = cfg.campaign;
  c.jobs = o.jobs;
  const auto r = point_sync_scaling(c, false);
  write_records(out, "point_sync.csv", {&r.records, &r.upper});
  if (o.plot_data) write_plot(out, r.rows, true);
  json j;
  j["campaign"] = "point-sync";
  j["fit"] = fit_json(r.fit);
  j["window_lower"] = r.window_lower;
  j["window_upper"] = r.window_upper;
  j["window_ratio"] = r.window_ratio;
  j["order_violations"] = r.order_violations;
  j["rows"] = rows_json(r.rows);
  return finish(r, j, out);
}

int run_exit_prob(const cli::RunConfig& cfg, const Options& o, Output& out) {
  auto c = cfg.campaign;
  c.jobs = o.jobs;
  const auto r = exit_probability(c, cfg.slack);
  {
    auto os = out.open("exit_prob.csv");
    os << "eps,replicas,exits,p_hat,wilson_lo,wilson_hi,eps_log_p,bound_only,within_bound\n";
    for (const auto& row : r.rows)
      os << num(row.eps) << ',' << row.replicas << ',' << row.exits << ',' << num(row.p_hat) << ','
         << num(row.wilson.lo) << ',' << num(row.wilson.hi) << ',' << num(row.eps_log_p) << ',' << row.bound_only
         << ',' << row.within_bound << '\n';
  }
  if (o.plot_data) {
    auto os = out.open("plot_data.csv");
    os << "x,y,err\n";
    for (const auto& row : r.rows) os << num(row.eps) << ',' << num(row.p_hat) << ',' << num(row.wilson.half_width()) << '\n';
  }
  json j;
  j["campaign"] = "exit-prob";
  j["V"] = r.V;
  j["slack"] = r.slack;
  j["T"] = c.T;
  j["trend_ok"] = r.trend_ok;
  bool bounds = true;
  for (const auto& row : r.rows) bounds = bounds && row.within_bound;
  j["within_bound"] = bounds;
  out.summary(j);
  return 0;
}

int run_lyapunov(const cli::RunConfig& cfg, const Options& o, Output& out) {
  const auto& c = cfg.campaign;
  const auto r = lyapunov_circle(c.T, cfg.dt, c.replicas, c.master_seed, c.noise_scale, o.jobs);
  {
    auto os = out.open("lyapunov.csv");
    os << "replica,lambda\n";
    for (std::size_t i = 0; i < r.per_replica.size(); ++i) os << i << ',' << num(r.per_replica[i]) << '\n';
  }
  if (o.plot_data) {
    auto os = out.open("plot_data.csv");
    os << "x,y,err\n" << num(c.T) << ',' << num(r.lambda) << ',' << num(r.ci_half_width) << '\n';
  }
  json j;
  j["campaign"] = "lyapunov";
  j["lambda"] = r.lambda;
  j["ci_half_width"] = r.ci_half_width;
  j["T"] = c.T;
  j["dt"] = cfg.dt;
  out.summary(j);
  return 0;
}

int run_circle_sync(const cli::RunConfig& cfg, const Options& o, Output& out) {
  const auto& c = cfg.campaign;
  const auto r = circle_sync_rate(c.separation, c.T, cfg.dt, c.replicas, c.master_seed, o.jobs);
  {
    auto os = out.open("circle_sync.csv");
    os << "replica,rate\n";
    for (std::size_t i = 0; i < r.rates.size(); ++i) os << i << ',' << num(r.rates[i]) << '\n';
  }
  if (o.plot_data) {
    auto os = out.open("plot_data.csv");
    os << "x,y,err\n";
    for (std::size_t w = 0; w < r.window_log_mean.size(); ++w)
      os << num((static_cast<double>(w) + 0.5) * c.T / 5.0) << ',' << num(r.window_log_mean[w]) << ",0\n";
  }
  json j;
  j["campaign"] = "circle-sync";
  j["median_rate"] = r.median_rate;
  j["fraction_rate_at_least_0.4"] = r.fraction_fast;
  j["window_log_mean"] = r.window_log_mean;
  j["decreasing"] = r.decreasing;
  out.summary(j);
  return 0;
}

int run_gronwall(const cli::RunConfig& cfg, const Options& o, Output& out) {
  auto c = cfg.campaign;
  c.jobs = o.jobs;
  const auto r = gronwall_comparison(c);
  {
    auto os = out.open("gronwall.csv");
    os << "eps,replicas,collapsed,median_angle_dev,median_radius_dev,radius_in_band\n";
    for (const auto& row : r.rows)
      os << num(row.eps) << ',' << row.replicas << ',' << row.collapsed << ',' << num(row.median_angle_dev) << ','
         << num(row.median_radius_dev) << ',' << num(row.radius_in_band) << '\n';
  }
  if (o.plot_data) {
    auto os = out.open("plot_data.csv");
    os << "x,y,err\n";
    for (const auto& row : r.rows) os << num(row.eps) << ',' << num(row.median_angle_dev) << ",0\n";
  }
  json j;
  j["campaign"] = "gronwall";
  j["strictly_decreasing"] = r.strictly_decreasing;
  out.summary(j);
  return 0;
}

int run_control(const cli::RunConfig& cfg, const Options&, Output& out) {
  const auto& c = cfg.campaign;
  const Ensemble grid = Ensemble::square_grid(c.grid_per_side, c.grid_half_width);
  BuildOptions build;
  build.dt = c.flow.dt;
  VerifyOptions verify;
  verify.dt = c.flow.dt;
  const auto study = control_study(c.potential, cfg.alphas, c.delta, grid, build, verify);
  {
    auto os = out.open("control.csv");
    os << "alpha,total_action,final_diameter,passed\n";
    for (const auto& row : study.rows)
      os << num(row.alpha) << ',' << num(row.report.total_action) << ',' << num(row.report.final_diameter) << ','
         << row.report.passed() << '\n';
  }
  for (const auto& row : study.rows) {
    auto os = out.open("schedule_alpha_" + num(row.alpha) + ".csv");
    write_schedule_csv(os, row.schedule);
    auto rep = out.open("report_alpha_" + num(row.alpha) + ".txt");
    write_verification_report(rep, row.schedule, row.report);
  }
  json j;
  j["campaign"] = "control-verify";
  j["V"] = study.V;
  j["diameters_ok"] = study.diameters_ok;
  j["decreasing_in_alpha"] = study.decreasing_in_alpha;
  j["within_band"] = study.within_band;
  out.summary(j);
  return 0;
}

int run_validate(const cli::RunConfig& cfg, const Options&, Output& out) {
  const auto rep = validate(cfg.campaign.potential);
  {
    auto os = out.open("validation.csv");
    os << "check,passed,witness,detail\n";
    for (const auto& ch : rep.checks)
      os << ch.name << ',' << ch.passed << ',' << (ch.witness ? num(*ch.witness) : std::string()) << ",\""
         << ch.detail << "\"\n";
  }
  json j;
  j["potential"] = cfg.campaign.potential.describe();
  j["all_passed"] = rep.all_passed();
  j["one_sided_lipschitz"] = rep.one_sided_lipschitz;
  out.summary(j);
  for (const auto& ch : rep.checks) std::cout << (ch.passed ? "ok   " : "FAIL ") << ch.name << '\n';
  return rep.all_passed() ? 0 : 2;
}

using Runner = int (*)(const cli::RunConfig&, const Options&, Output&);

cli::RunConfig load(const std::string& sub, std::optional<CampaignKind> kind, const Options& o) {
  cli::RunConfig cfg;
  if (kind) {
    cfg = cli::default_config(*kind);
  } else {
    cfg = cli::default_config(CampaignKind::EscapeScaling);
    if (sub == "control-verify") {
      cfg.campaign.delta = 0.1;
      cfg.campaign.grid_per_side = 4;
    }
  }
  if (!o.config_path.empty()) {
    std::ifstream is(o.config_path);
    if (!is) throw Error("cli", "cannot read config " + o.config_path);
    std::stringstream ss;
    ss << is.rdbuf();
    const auto raw = cli::read_config(ss.str(), kind.has_value());
    if (kind && raw.kind && *raw.kind != *kind)
      throw cli::ConfigErrors({cli::TypeError(0, std::string("campaign.kind '") + to_string(*raw.kind) +
                                                     "' does not match subcommand '" + sub + "'")});
    cli::apply(cfg, raw);
  }
  cli::apply_overrides(cfg, o.overrides);
  if (!o.out.empty()) cfg.output_dir = o.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradsync: noise-induced synchronization experiments for radial gradient SDEs"};
  app.set_version_flag("--version", GRADSYNC_VERSION);
  app.require_subcommand(1);

  Options opts;
  struct Sub {
    const char* name;
    const char* help;
    std::optional<CampaignKind> kind;
    Runner run;
  };
  const std::vector<Sub> subs = {
      {"escape", "mean exit time of S_1 from an annulus, Arrhenius fit", CampaignKind::EscapeScaling, run_escape},
      {"exit-prob", "P(exit before T) per eps with Wilson intervals", CampaignKind::ExitProbability, run_exit_prob},
      {"set-sync", "sphere and grid synchronization times, exponential fit", CampaignKind::SetSyncScaling,
       run_set_sync},
      {"point-sync", "point-to-attractor times, log-log fit", CampaignKind::PointSyncScaling, run_point_sync},
      {"lyapunov", "top Lyapunov exponent of the circle process", CampaignKind::LyapunovCircle, run_lyapunov},
      {"circle-sync", "decay rate of coupled circle processes", CampaignKind::CircleSyncRate, run_circle_sync},
      {"gronwall", "polar pair against the circle limit", CampaignKind::GronwallComparison, run_gronwall},
      {"control-verify", "build and verify the control paths g^alpha", std::nullopt, run_control},
      {"validate-potential", "check the standing assumptions on u", std::nullopt, run_validate},
  };
  for (const auto& s : subs) {
    auto* sc = app.add_subcommand(s.name, s.help);
    sc->add_option("--config", opts.config_path, "config file (key = value)");
    sc->add_option("--set", opts.overrides, "override key=value (repeatable)");
    sc->add_option("--out", opts.out, "output directory");
    sc->add_option("--jobs", opts.jobs, "worker threads (default: logical cores)");
    sc->add_flag("--emit-plot-data", opts.plot_data, "write aggregated x,y,err triples");
  }

  CLI11_PARSE(app, argc, argv);

  for (const auto& s : subs) {
    if (!app.got_subcommand(s.name)) continue;
    try {
      const auto cfg = load(s.name, s.kind, opts);
      Output out(cfg, cfg.output_dir);
      return s.run(cfg, opts, out);
    } catch (const TooCensored& e) {
      std::cerr << e.what() << '\n';
      return 2;
    } catch (const TooFewReplicas& e) {
      std::cerr << e.what() << '\n';
      return 2;
    } catch (const NoFitPossible& e) {
      std::cerr << e.what() << '\n';
      return 2;
    } catch (const std::exception& e) {
      std::cerr << e.what() << '\n';
      return 1;
    }
  }
  return 1;
}
