#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>

#include "mrwlab/cli.hpp"
#include "mrwlab/config.hpp"
#include "mrwlab/error.hpp"
#include "mrwlab/io.hpp"
#include "mrwlab/rng.hpp"

using namespace mrw;
namespace fs = std::filesystem;

namespace {

fs::path fresh(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "mrwlab_test_cli" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "mrwlab");
  std::ostringstream out, err;
  const int rc = cli::run(args, out, err);
  if (out_text) *out_text = out.str() + err.str();
  return rc;
}

std::string white_noise_ticks(std::size_t n, std::uint64_t seed) {
  std::ostringstream os;
  os << "timestamp,price\n";
  core::Rng rng({seed, 0}, core::Domain::generic);
  double lp = std::log(1000.0);
  for (std::size_t i = 0; i < n; ++i) {
    os << 1330421400 + 15 * i << ',' << io::format_double(std::exp(lp)) << '\n';
    lp += 1e-3 * rng.normal();
  }
  return os.str();
}

}  // namespace

TEST_CASE("simulate --preset paper writes n + 1 rows with the config hash") {
  const auto d = fresh("paper");
  REQUIRE(run_cli({"simulate", "--preset", "paper", "--out", d.string()}) == 0);
  const auto t = io::read_table(d / "mrw.csv");
  CHECK(t.rows.size() == (std::size_t{1} << 17) + 1);
  config::RunConfig cfg;
  config::apply_preset(cfg, "paper");
  CHECK(t.comments.at(0) == "config_hash=" + config::config_hash(cfg));
  CHECK(t.columns == std::vector<std::string>{"time", "value"});
}

TEST_CASE("round trip: estimate from the CSV equals the in-memory estimate") {
  const auto d = fresh("roundtrip");
  const auto a = d / "file", b = d / "memory";
  const std::vector<std::string> model{"--n", "8192", "--T", "16", "--seed", "5", "--kmax", "40", "--resamples", "60"};
  auto with = [&](std::vector<std::string> v) {
    v.insert(v.end(), model.begin(), model.end());
    return v;
  };
  REQUIRE(run_cli(with({"simulate", "--out", a.string()})) == 0);
  REQUIRE(run_cli(with({"estimate", "--input", (a / "mrw.csv").string(), "--out", a.string()})) == 0);
  REQUIRE(run_cli(with({"estimate", "--out", b.string()})) == 0);
  for (const char* f : {"acf.csv", "abs_acf.csv", "sq_acf.csv", "leverage.csv", "hurst.csv"}) {
    CAPTURE(f);
    const auto ta = io::read_table(a / f), tb = io::read_table(b / f);
    CHECK(ta.rows == tb.rows);
    CHECK(ta.comments.at(0) == tb.comments.at(0));
  }
}

TEST_CASE("config hash changes iff a semantic field changes") {
  const config::RunConfig base;
  const auto h0 = config::config_hash(base);
  std::vector<std::function<void(config::RunConfig&)>> edits{
      [](auto& c) { c.H = 0.63; },          [](auto& c) { c.c = 0.11; },
      [](auto& c) { c.r = 0.004; },         [](auto& c) { c.a_low = 0.5; },
      [](auto& c) { c.mode = SynthesisMode::dependent; },
      [](auto& c) { c.n = 4097; },          [](auto& c) { c.T = 8.5; },
      [](auto& c) { c.sign = walk::CorrectionSign::plus; },
      [](auto& c) { c.refine = 3; },        [](auto& c) { c.allow_condition_violation = true; },
      [](auto& c) { c.tau = 2; },           [](auto& c) { c.kmax = 99; },
      [](auto& c) { c.fit_lo = 2; },        [](auto& c) { c.fit_hi = 50; },
      [](auto& c) { c.resamples = 400; },   [](auto& c) { c.block = 10; },
      [](auto& c) { c.center = true; },     [](auto& c) { c.seed = 1; },
  };
  std::set<std::string> seen{h0};
  for (const auto& e : edits) {
    auto c = base;
    e(c);
    const auto h = config::config_hash(c);
    CHECK(h != h0);
    seen.insert(h);
  }
  CHECK(seen.size() == edits.size() + 1);
  auto c = base;
  c.out_dir = "/elsewhere";
  c.threads = 7;
  CHECK(config::config_hash(c) == h0);
  // Setting a field to its current value is not a change.
  c.H = base.H;
  CHECK(config::config_hash(c) == h0);
}

TEST_CASE("config JSON round trip and key validation") {
  config::RunConfig a;
  a.a_low = 0.3;
  a.mode = SynthesisMode::dependent;
  a.seed = 123456789012345ull;
  a.r = 1.0 / 3.0;
  config::RunConfig b;
  config::apply_json(b, config::canonical_json(a));
  CHECK(config::canonical_json(b) == config::canonical_json(a));
  CHECK_THROWS_AS(config::apply_json(b, R"({"Hurst": 0.7})"), ConfigError);
  CHECK_THROWS_AS(config::apply_json(b, R"({"H": "high"})"), ConfigError);
  CHECK_THROWS_AS(config::apply_json(b, "{"), ConfigError);
  CHECK_THROWS_AS(config::apply_preset(b, "nope"), ConfigError);
}

TEST_CASE("config file, preset and flags layer in that order") {
  const auto d = fresh("layers");
  io::write_atomic(d / "cfg.json", R"({"H": 0.7, "n": 2048, "T": 4})");
  REQUIRE(run_cli({"simulate", "--config", (d / "cfg.json").string(), "--H", "0.65", "--out", d.string()}) == 0);
  config::RunConfig want;
  want.H = 0.65;
  want.n = 2048;
  want.T = 4;
  CHECK(io::read_table(d / "mrw.csv").comments.at(0) == "config_hash=" + config::config_hash(want));
  CHECK(io::read_file(d / "config.json") == config::canonical_json(want) + "\n");
}

TEST_CASE("exit codes follow the error classes") {
  const auto d = fresh("codes");
  CHECK(run_cli({"simulate", "--H", "0.3", "--out", d.string()}) == 2);
  CHECK(run_cli({"simulate", "--r", "0.001", "--out", d.string()}) == 2);
  CHECK(run_cli({"simulate", "--no-such-flag"}) == 2);
  CHECK(run_cli({}) == 2);
  CHECK(run_cli({"estimate", "--ticks", (d / "missing.csv").string(), "--out", d.string()}) == 3);
  io::write_atomic(d / "neg.csv", "time,price\n0,100\n15,-3\n30,101\n");
  std::string msg;
  CHECK(run_cli({"estimate", "--ticks", (d / "neg.csv").string(), "--out", d.string()}, &msg) == 3);
  CHECK(msg.find("row 3") != std::string::npos);
  io::write_atomic(d / "short.csv", "time,price\n0,100\n15,101\n30,102\n45,101\n60,100\n");
  CHECK(run_cli({"estimate", "--ticks", (d / "short.csv").string(), "--hurst", "--kmax", "1", "--out", d.string()}) == 3);
  CHECK(run_cli({"validate", "--check", "no-such-check", "--out", d.string()}) == 2);
  CHECK(run_cli({"validate", "--check", "kernel-identity", "--out", d.string()}) == 0);
}

TEST_CASE("estimate on a white-noise tick fixture gives flat reports") {
  const auto d = fresh("whitenoise");
  io::write_atomic(d / "ticks.csv", white_noise_ticks(20001, 11));
  REQUIRE(run_cli({"estimate", "--ticks", (d / "ticks.csv").string(), "--resample", "15", "--acf", "--leverage",
               "--kmax", "50", "--resamples", "200", "--out", d.string()}) == 0);
  CHECK_FALSE(fs::exists(d / "sq_acf.csv"));
  const auto acf = io::read_table(d / "acf.csv");
  REQUIRE(acf.rows.size() == 50);
  std::size_t inside = 0;
  for (const auto& r : acf.rows) inside += r[3] <= r[1] && r[1] <= r[4] && std::abs(r[1]) < r[4];
  CHECK(inside >= 45);
  const auto lev = io::read_table(d / "leverage.csv");
  REQUIRE(lev.rows.size() == 101);
  std::size_t covered = 0;
  for (const auto& r : lev.rows) covered += r[3] <= 0.0 && 0.0 <= r[4];
  CHECK(covered >= 91);
}

TEST_CASE("compare writes paired tables with an mse") {
  const auto d = fresh("compare");
  const std::vector<std::string> m{"--n", "4096", "--T", "8", "--kmax", "20", "--resamples", "50"};
  auto with = [&](std::vector<std::string> v) {
    v.insert(v.end(), m.begin(), m.end());
    return v;
  };
  REQUIRE(run_cli(with({"simulate", "--seed", "1", "--out", (d / "data").string()})) == 0);
  REQUIRE(run_cli(with({"compare", "--data", (d / "data" / "mrw.csv").string(), "--seed", "1", "--out", d.string()})) == 0);
  // Same seed and config: the simulated side reproduces the data exactly.
  for (const char* f : {"compare_acf.csv", "compare_abs_acf.csv", "compare_sq_acf.csv", "compare_leverage.csv"}) {
    const auto t = io::read_table(d / f);
    CHECK(t.comments.back() == "mse=0");
    for (const auto& r : t.rows) CHECK(r[5] == 0.0);
  }
  REQUIRE(run_cli(with({"compare", "--data", (d / "data" / "mrw.csv").string(), "--seed", "2", "--out", d.string()})) == 0);
  CHECK(io::read_table(d / "compare_abs_acf.csv").comments.back() != "mse=0");
}
