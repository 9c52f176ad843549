#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gradsync::cli {

namespace {

struct Bad : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_real(const std::string& v) {
  const std::string t = trim(v);
  double x = 0.0;
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, x);
  if (t.empty() || ec != std::errc() || ptr != end || !std::isfinite(x)) throw Bad("expected a real number, got '" + t + "'");
  return x;
}

std::uint64_t to_u64(const std::string& v) {
  const std::string t = trim(v);
  std::uint64_t x = 0;
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, x);
  if (t.empty() || ec != std::errc() || ptr != end) throw Bad("expected a non-negative integer, got '" + t + "'");
  return x;
}

bool to_bool(const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw Bad("expected true or false, got '" + t + "'");
}

std::vector<double> to_list(const std::string& v) {
  std::vector<double> out;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, ',')) out.push_back(to_real(item));
  if (out.empty()) throw Bad("expected a comma-separated list of reals");
  return out;
}

double positive(double x) {
  if (!(x > 0.0)) throw Bad("expected a positive value");
  return x;
}

std::string fmt(double x) {
  if (std::isinf(x)) return "inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_list(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + fmt(xs[i]);
  return out;
}

const char* horizon_name(HorizonPolicy::Kind k) {
  switch (k) {
    case HorizonPolicy::Kind::Exponential:
      return "exponential";
    case HorizonPolicy::Kind::Inverse:
      return "inverse";
    case HorizonPolicy::Kind::Fixed:
      return "fixed";
  }
  return "exponential";
}

struct KeySpec {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define REAL(k, field)                                                          \
  KeySpec {                                                                     \
    k, [](RunConfig& c, const std::string& v) { c.field = to_real(v); },        \
        [](const RunConfig& c) { return fmt(c.field); }                         \
  }
#define POS(k, field)                                                                 \
  KeySpec {                                                                           \
    k, [](RunConfig& c, const std::string& v) { c.field = positive(to_real(v)); },    \
        [](const RunConfig& c) { return fmt(c.field); }                               \
  }
#define COUNT(k, field)                                                                 \
  KeySpec {                                                                             \
    k, [](RunConfig& c, const std::string& v) { c.field = static_cast<std::size_t>(to_u64(v)); }, \
        [](const RunConfig& c) { return std::to_string(c.field); }                      \
  }
#define FLAG(k, field)                                                          \
  KeySpec {                                                                     \
    k, [](RunConfig& c, const std::string& v) { c.field = to_bool(v); },        \
        [](const RunConfig& c) { return std::string(c.field ? "true" : "false"); } \
  }

const std::vector<KeySpec>& table() {
  static const std::vector<KeySpec> t = {
      {"potential.family",
       [](RunConfig& c, const std::string& v) {
         const std::string s = trim(v);
         if (s != "quartic" && s != "shifted_quadratic" && s != "custom")
           throw Bad("family must be quartic, shifted_quadratic or custom, got '" + s + "'");
         c.potential_family = s;
       },
       [](const RunConfig& c) { return c.potential_family; }},
      POS("potential.a", potential_a),
      {"potential.coeffs", [](RunConfig& c, const std::string& v) { c.potential_coeffs = to_list(v); },
       [](const RunConfig& c) { return fmt_list(c.potential_coeffs); }},
      {"rng.master_seed", [](RunConfig& c, const std::string& v) { c.campaign.master_seed = to_u64(v); },
       [](const RunConfig& c) { return std::to_string(c.campaign.master_seed); }},
      POS("flow.dt", campaign.flow.dt),
      POS("flow.dt_accelerated", campaign.flow.dt_accelerated),
      POS("flow.guard", campaign.flow.guard),
      POS("flow.polar_floor", campaign.flow.polar_floor),
      REAL("flow.origin_exclusion", campaign.flow.origin_exclusion),
      {"campaign.kind",
       [](RunConfig& c, const std::string& v) {
         const auto k = parse_kind(trim(v));
         if (!k) throw Bad("unknown campaign kind '" + trim(v) + "'");
         c.campaign.kind = *k;
       },
       [](const RunConfig& c) { return std::string(to_string(c.campaign.kind)); }},
      {"campaign.epsilons",
       [](RunConfig& c, const std::string& v) {
         auto xs = to_list(v);
         for (double x : xs) positive(x);
         c.campaign.set_epsilons(std::move(xs));
       },
       [](const RunConfig& c) { return fmt_list(c.campaign.epsilons); }},
      COUNT("campaign.replicas", campaign.replicas),
      REAL("campaign.r_inner", campaign.r_inner),
      POS("campaign.r_start", campaign.r_start),
      {"campaign.r_outer",
       [](RunConfig& c, const std::string& v) {
         const std::string s = trim(v);
         c.campaign.r_outer = (s == "inf") ? ExtendedRadius::infinity() : ExtendedRadius(positive(to_real(s)));
       },
       [](const RunConfig& c) { return fmt(c.campaign.r_outer.value()); }},
      COUNT("campaign.sphere_points", campaign.sphere_points),
      FLAG("campaign.refine_curve", campaign.refine_curve),
      POS("campaign.max_gap", campaign.refinement.max_gap),
      POS("campaign.min_gap", campaign.refinement.min_gap),
      POS("campaign.delta", campaign.delta),
      FLAG("campaign.measure_grid", campaign.measure_grid),
      COUNT("campaign.grid_per_side", campaign.grid_per_side),
      POS("campaign.grid_half_width", campaign.grid_half_width),
      {"campaign.start_point",
       [](RunConfig& c, const std::string& v) {
         auto xs = to_list(v);
         if (xs.size() != 2) throw Bad("start_point needs two coordinates");
         c.campaign.start_point = std::move(xs);
       },
       [](const RunConfig& c) { return fmt_list(c.campaign.start_point); }},
      COUNT("campaign.proxy_per_side", proxy_per_side),
      POS("campaign.proxy_half_width", proxy_half_width),
      POS("campaign.pullback_time", campaign.proxy.pullback_time),
      REAL("campaign.pullback_factor", campaign.pullback_factor),
      {"campaign.horizon",
       [](RunConfig& c, const std::string& v) {
         const std::string s = trim(v);
         if (s == "exponential") c.campaign.horizon.kind = HorizonPolicy::Kind::Exponential;
         else if (s == "inverse") c.campaign.horizon.kind = HorizonPolicy::Kind::Inverse;
         else if (s == "fixed") c.campaign.horizon.kind = HorizonPolicy::Kind::Fixed;
         else throw Bad("horizon must be exponential, inverse or fixed, got '" + s + "'");
       },
       [](const RunConfig& c) { return std::string(horizon_name(c.campaign.horizon.kind)); }},
      POS("campaign.horizon_factor", campaign.horizon.factor),
      REAL("campaign.horizon_value", campaign.horizon.value),
      POS("campaign.T", campaign.T),
      POS("campaign.dt", dt),
      REAL("campaign.separation", campaign.separation),
      REAL("campaign.noise_scale", campaign.noise_scale),
      FLAG("campaign.radial_noise", campaign.radial_noise),
      POS("campaign.radius_band", campaign.radius_band),
      REAL("campaign.slack", slack),
      {"campaign.alphas",
       [](RunConfig& c, const std::string& v) {
         auto xs = to_list(v);
         for (double x : xs) positive(x);
         c.alphas = std::move(xs);
       },
       [](const RunConfig& c) { return fmt_list(c.alphas); }},
      {"output.dir", [](RunConfig& c, const std::string& v) { c.output_dir = trim(v); },
       [](const RunConfig& c) { return c.output_dir; }},
  };
  return t;
}

#undef REAL
#undef POS
#undef COUNT
#undef FLAG

const KeySpec* find_key(const std::string& key) {
  for (const auto& k : table())
    if (key == k.key) return &k;
  return nullptr;
}

// output.dir does not change results, so it stays out of the hash.
bool hashed(const std::string& key) { return key != "output.dir"; }

}  // namespace

ConfigErrors::ConfigErrors(std::vector<ConfigError> errors)
    : Error("cli", [&] {
        std::string msg = "invalid config";
        for (const auto& e : errors) msg += "\n  " + std::string(e.what());
        return msg;
      }()),
      errors_(std::move(errors)) {}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& k : table()) out.emplace_back(k.key);
    return out;
  }();
  return keys;
}

std::optional<CampaignKind> parse_kind(const std::string& name) {
  for (auto k : {CampaignKind::EscapeScaling, CampaignKind::SetSyncScaling, CampaignKind::PointSyncScaling,
                 CampaignKind::LyapunovCircle, CampaignKind::GronwallComparison, CampaignKind::ExitProbability,
                 CampaignKind::CircleSyncRate})
    if (name == to_string(k)) return k;
  return std::nullopt;
}

RawConfig read_config(const std::string& text, bool require_sections) {
  RawConfig raw;
  std::vector<ConfigError> errors;
  std::set<std::string> sections;
  std::string section;
  std::istringstream is(text);
  std::string line;
  int no = 0;
  while (std::getline(is, line)) {
    ++no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(TypeError(no, "unterminated section header"));
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section != "potential" && section != "rng" && section != "flow" && section != "campaign" &&
          section != "output") {
        errors.push_back(UnknownKey(no, "[" + section + "]"));
        section.clear();
        continue;
      }
      sections.insert(section);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back(TypeError(no, "expected key = value"));
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "campaign") key = "campaign.kind";
    if (key.find('.') == std::string::npos && !section.empty()) key = section + "." + key;
    const KeySpec* spec = find_key(key);
    if (!spec) {
      errors.push_back(UnknownKey(no, key));
      continue;
    }
    sections.insert(key.substr(0, key.find('.')));
    if (key == "campaign.kind") {
      raw.kind = parse_kind(value);
      if (!raw.kind) errors.push_back(TypeError(no, "campaign.kind: unknown campaign kind '" + value + "'"));
    }
    raw.entries.push_back({key, value, no});
  }
  if (require_sections)
    for (const char* s : {"potential", "rng", "campaign"})
      if (!sections.count(s)) errors.push_back(MissingSection(s));
  if (!errors.empty()) throw ConfigErrors(std::move(errors));
  return raw;
}

void apply(RunConfig& cfg, const RawConfig& raw) {
  std::vector<ConfigError> errors;
  for (const auto& e : raw.entries) {
    try {
      find_key(e.key)->set(cfg, e.value);
    } catch (const Bad& b) {
      errors.push_back(TypeError(e.line, e.key + ": " + b.what()));
    }
  }
  if (!errors.empty()) throw ConfigErrors(std::move(errors));
  cfg.sync();
}

RunConfig parse_config(const std::string& text, bool require_sections) {
  const RawConfig raw = read_config(text, require_sections);
  RunConfig cfg = default_config(raw.kind.value_or(CampaignKind::EscapeScaling));
  apply(cfg, raw);
  return cfg;
}

void apply_overrides(RunConfig& cfg, const std::vector<std::string>& assignments) {
  for (const auto& assignment : assignments) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigErrors({TypeError(0, "override '" + assignment + "' is not key=value")});
    const std::string key = trim(assignment.substr(0, eq));
    const KeySpec* spec = find_key(key);
    if (!spec) throw ConfigErrors({UnknownKey(0, key)});
    try {
      spec->set(cfg, assignment.substr(eq + 1));
    } catch (const Bad& b) {
      throw ConfigErrors({TypeError(0, key + ": " + b.what())});
    }
  }
  cfg.sync();
}

void apply_override(RunConfig& cfg, const std::string& assignment) { apply_overrides(cfg, {assignment}); }

RunConfig default_config(CampaignKind kind) {
  RunConfig cfg;
  cfg.campaign = Campaign::defaults(kind);
  cfg.sync();
  return cfg;
}

void RunConfig::sync() {
  if (potential_family == "quartic") campaign.potential = RadialPotential::quartic(potential_a);
  else if (potential_family == "shifted_quadratic") campaign.potential = RadialPotential::shifted_quadratic(potential_a);
  else campaign.potential = RadialPotential::custom(potential_coeffs);
  campaign.proxy.grid = Ensemble::square_grid(proxy_per_side, proxy_half_width);
  campaign.refinement.every = 10;
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& k : table())
    if (hashed(k.key)) out += std::string(k.key) + "=" + k.get(*this) + "\n";
  return out;
}

std::uint64_t RunConfig::hash() const { return fnv1a(canonical()); }

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace gradsync::cli
