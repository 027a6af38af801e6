#include "mrwlab/config.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "mrwlab/error.hpp"
#include "mrwlab/fbm.hpp"
#include "mrwlab/io.hpp"

namespace mrw::config {

using nlohmann::json;

cascade::CascadeParams RunConfig::cascade_params() const {
  cascade::CascadeParams p;
  p.H = H;
  p.c = c;
  p.r = r;
  p.a_low = a_low;
  p.allow_condition_violation = allow_condition_violation;
  return p;
}

cascade::GridSpec RunConfig::grid() const { return {n, T, refine}; }

walk::SynthesisOptions RunConfig::synthesis() const { return {sign, refine}; }

stats::LeverageOptions RunConfig::leverage() const { return {resamples, block, seed}; }

void validate(const RunConfig& cfg) {
  std::ostringstream os;
  auto fail = [&](auto&&... parts) {
    (os << ... << parts);
    throw ConfigError(os.str());
  };
  cfg.cascade_params().validate();
  fbm::Hurst(cfg.H).require_long_memory();
  if (cfg.n < 2) fail("n must be at least 2, got ", cfg.n);
  if (!(cfg.T > 0.0) || !std::isfinite(cfg.T)) fail("T must be positive, got ", cfg.T);
  if (cfg.T / static_cast<double>(cfg.n) > 0.5 * cfg.r) {
    os << "step T/n = " << cfg.T / static_cast<double>(cfg.n) << " exceeds r/2 = " << 0.5 * cfg.r;
    throw ResolutionTooCoarse(os.str());
  }
  if (cfg.tau < 1) fail("tau must be at least 1");
  if (cfg.kmax < 1) fail("kmax must be at least 1");
  if (!(cfg.fit_lo > 0.0 && cfg.fit_lo < cfg.fit_hi)) fail("fit range needs 0 < fit_lo < fit_hi");
  if (cfg.resamples < 2) fail("resamples must be at least 2");
  if (cfg.threads < 0) fail("threads must be nonnegative");
}

namespace {

json to_json(const RunConfig& c) {
  json j;
  j["H"] = c.H;
  j["c"] = c.c;
  j["r"] = c.r;
  j["a_low"] = c.a_low ? json(*c.a_low) : json(nullptr);
  j["mode"] = to_string(c.mode);
  j["n"] = c.n;
  j["T"] = c.T;
  j["sign"] = walk::to_string(c.sign);
  j["refine"] = c.refine;
  j["allow_condition_violation"] = c.allow_condition_violation;
  j["tau"] = c.tau;
  j["kmax"] = c.kmax;
  j["fit_lo"] = c.fit_lo;
  j["fit_hi"] = c.fit_hi;
  j["resamples"] = c.resamples;
  j["block"] = c.block;
  j["center"] = c.center;
  j["seed"] = c.seed;
  return j;
}

template <class T>
T get(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

}  // namespace

std::string canonical_json(const RunConfig& cfg) { return to_json(cfg).dump(); }

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical_json(cfg)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void apply_json(RunConfig& cfg, const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "H") cfg.H = get<double>(v, key);
    else if (key == "c") cfg.c = get<double>(v, key);
    else if (key == "r") cfg.r = get<double>(v, key);
    else if (key == "a_low") cfg.a_low = v.is_null() ? std::nullopt : std::optional<double>(get<double>(v, key));
    else if (key == "mode") cfg.mode = synthesis_mode_from_string(get<std::string>(v, key));
    else if (key == "n") cfg.n = get<std::size_t>(v, key);
    else if (key == "T") cfg.T = get<double>(v, key);
    else if (key == "sign") cfg.sign = walk::correction_sign_from_string(get<std::string>(v, key));
    else if (key == "refine") cfg.refine = get<std::size_t>(v, key);
    else if (key == "allow_condition_violation") cfg.allow_condition_violation = get<bool>(v, key);
    else if (key == "tau") cfg.tau = get<std::size_t>(v, key);
    else if (key == "kmax") cfg.kmax = get<std::size_t>(v, key);
    else if (key == "fit_lo") cfg.fit_lo = get<double>(v, key);
    else if (key == "fit_hi") cfg.fit_hi = get<double>(v, key);
    else if (key == "resamples") cfg.resamples = get<std::size_t>(v, key);
    else if (key == "block") cfg.block = get<std::size_t>(v, key);
    else if (key == "center") cfg.center = get<bool>(v, key);
    else if (key == "seed") cfg.seed = get<std::uint64_t>(v, key);
    else if (key == "out_dir") cfg.out_dir = get<std::string>(v, key);
    else if (key == "threads") cfg.threads = get<int>(v, key);
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

RunConfig load(const std::filesystem::path& path) {
  RunConfig cfg;
  apply_json(cfg, io::read_file(path));
  return cfg;
}

void apply_preset(RunConfig& cfg, const std::string& name) {
  if (name == "paper") {
    cfg.H = 0.62;
    cfg.c = 0.1;
    cfg.r = 1.0 / 256.0;
    cfg.n = std::size_t{1} << 17;
    cfg.T = 256.0;
  } else if (name == "default") {
    const RunConfig d;
    const auto out = cfg.out_dir;
    const auto threads = cfg.threads;
    cfg = d;
    cfg.out_dir = out;
    cfg.threads = threads;
  } else {
    throw ConfigError("unknown preset '" + name + "' (known: paper, default)");
  }
}

}  // namespace mrw::config
