// Acceptance runner: `acceptance <n>` checks criterion n, `acceptance all`
// checks every criterion. One line per criterion; exit status 1 if any fails.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "gradsync/experiments.hpp"

using namespace gradsync;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const RadialPotential kQuartic = RadialPotential::quartic(0.5);

Verdict c1_quasi_potential() {
  const double far = quasi_potential(kQuartic, 0.0, 1.0, ExtendedRadius::infinity());
  const double ann = quasi_potential(kQuartic, 0.3, 1.0, 2.0);
  return {std::abs(far - 1.0) <= 1e-12 && std::abs(ann - 0.8281) <= 1e-12,
          fmt("V(0,1,inf)=%.15g V(0.3,1,2)=%.15g tol=1e-12", far, ann)};
}

Verdict c2_lyapunov() {
  const auto r = lyapunov_circle(1e4, 1e-3, 16, 1);
  return {r.lambda >= -0.55 && r.lambda <= -0.45,
          fmt("lambda=%.4f +- %.4f band=[-0.55,-0.45]", r.lambda, r.ci_half_width)};
}

Verdict c3_escape() {
  const auto r = escape_scaling(Campaign::defaults(CampaignKind::EscapeScaling));
  const double v = r.fit->slope, lo = 0.8 * r.reference, hi = 1.2 * r.reference;
  return {v >= lo && v <= hi && !r.flagged(),
          fmt("V_hat=%.4f +- %.4f band=[%.4f,%.4f] outer_exits=%zu", v, r.fit->se_slope, lo, hi, r.outer_exits)};
}

Verdict c4_set_sync() {
  const auto r = set_sync_scaling(Campaign::defaults(CampaignKind::SetSyncScaling));
  const double v = r.fit->slope;
  const bool sandwich = r.sandwich_checked > 0 && r.sandwich_violations == 0;
  return {v >= 0.75 && v <= 1.25 && sandwich && !r.flagged(),
          fmt("exponent=%.4f +- %.4f band=[0.75,1.25] sandwich=%zu/%zu held", v, r.fit->se_slope,
              r.sandwich_checked - r.sandwich_violations, r.sandwich_checked)};
}

Verdict c5_point_sync() {
  const auto r = point_sync_scaling(Campaign::defaults(CampaignKind::PointSyncScaling));
  const double s = r.fit->slope;
  return {s >= 0.8 && s <= 1.2 && !r.flagged() && r.order_violations == 0,
          fmt("slope=%.4f +- %.4f band=[0.8,1.2] window_ratio=%.3f", s, r.fit->se_slope, r.window_ratio)};
}

Verdict c6_control() {
  const auto study = control_study(kQuartic, {0.2, 0.1, 0.05}, 0.1, Ensemble::square_grid(4, 1.5));
  std::string detail;
  for (const auto& row : study.rows)
    detail += fmt("alpha=%g action=%.3f band=[1,%.1f] diam=%.4f; ", row.alpha, row.report.total_action,
                  1.0 + 40.0 * row.alpha, row.report.final_diameter);
  detail += fmt("decreasing=%d", study.decreasing_in_alpha);
  return {study.diameters_ok && study.decreasing_in_alpha && study.within_band, detail};
}

Verdict c7_action_sweep() {
  const auto r = action_inequality_sweep(kQuartic, 100, 1);
  double worst = r.checks.empty() ? 0.0 : r.checks.front().slack;
  for (const auto& c : r.checks) worst = std::min(worst, c.slack);
  return {r.checks.size() == 100 && r.failures == 0,
          fmt("failures=%zu/100 min(action-gap)=%.4g tol=%.3g", r.failures, worst, r.tolerance)};
}

Verdict c8_consistency() {
  const auto r = polar_cartesian_consistency(kQuartic, 0.1, 1.0, 1e-4, 20, 1);
  return {r.worst <= 0.05 && r.collapsed == 0, fmt("max_deviation=%.4g bound=0.05 collapsed=%zu", r.worst, r.collapsed)};
}

Verdict c9_gronwall() {
  const auto r = gronwall_comparison(Campaign::defaults(CampaignKind::GronwallComparison));
  std::string detail;
  for (const auto& row : r.rows) detail += fmt("eps=%g median=%.4f; ", row.eps, row.median_angle_dev);
  detail += fmt("strictly_decreasing=%d", r.strictly_decreasing);
  return {r.strictly_decreasing, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Verdict c10_determinism() {
  const fs::path root = fs::temp_directory_path() / "gradsync_acceptance_c10";
  fs::remove_all(root);
  const std::vector<std::string> runs = {
      "escape --set campaign.epsilons=0.5,0.4,0.3 --set campaign.replicas=40 --emit-plot-data",
      "gronwall --set campaign.replicas=40",
      "point-sync --set campaign.epsilons=0.2,0.1,0.05 --set campaign.replicas=30 --set campaign.proxy_per_side=4",
  };
  std::size_t files = 0, identical = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (const char* jobs : {"1", "2"}) {
      const fs::path out = root / std::to_string(i) / jobs;
      const std::string cmd = std::string(GRADSYNC_BIN) + " " + runs[i] + " --jobs " + jobs + " --out " +
                              out.string() + " > /dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) return {false, "run failed: " + runs[i]};
    }
    for (const auto& f : fs::directory_iterator(root / std::to_string(i) / "1")) {
      ++files;
      if (slurp(f.path()) == slurp(root / std::to_string(i) / "2" / f.path().filename())) ++identical;
    }
  }
  fs::remove_all(root);
  return {files > 0 && identical == files, fmt("%zu/%zu output files byte-identical across reruns", identical, files)};
}

const std::vector<std::function<Verdict()>> kCriteria = {
    c1_quasi_potential, c2_lyapunov, c3_escape,      c4_set_sync, c5_point_sync,
    c6_control,         c7_action_sweep, c8_consistency, c9_gronwall, c10_determinism,
};

bool check(std::size_t n) {
  Verdict v;
  try {
    v = kCriteria[n - 1]();
  } catch (const std::exception& e) {
    v = {false, std::string("error: ") + e.what()};
  }
  std::printf("criterion %zu: %s %s\n", n, v.pass ? "PASS" : "FAIL", v.detail.c_str());
  std::fflush(stdout);
  return v.pass;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <1-10|all>\n", argv[0]);
    return 1;
  }
  const std::string arg = argv[1];
  if (arg == "all") {
    bool ok = true;
    for (std::size_t n = 1; n <= kCriteria.size(); ++n) ok = check(n) && ok;
    return ok ? 0 : 1;
  }
  const long n = std::strtol(arg.c_str(), nullptr, 10);
  if (n < 1 || n > static_cast<long>(kCriteria.size())) {
    std::fprintf(stderr, "no criterion %s\n", arg.c_str());
    return 1;
  }
  return check(static_cast<std::size_t>(n)) ? 0 : 1;
}
