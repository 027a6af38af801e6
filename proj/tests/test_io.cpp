#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "mrwlab/error.hpp"
#include "mrwlab/io.hpp"
#include "mrwlab/log.hpp"

using namespace mrw;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mrwlab_test_io";
  fs::create_directories(dir);
  return dir / name;
}

std::string error_text(const std::string& text) {
  try {
    io::parse_ticks(text, "f.csv");
  } catch (const ParseError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("format_double round-trips") {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 10000; ++i) {
    const double v = u(g) * std::pow(10.0, static_cast<int>(g() % 40) - 20);
    CHECK(*io::parse_double(io::format_double(v)) == v);
  }
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(std::isnan(*io::parse_double(io::format_double(std::nan("")))));
  CHECK_FALSE(io::parse_double("1.5x"));
  CHECK_FALSE(io::parse_double(""));
}

TEST_CASE("table write/read round-trip is exact") {
  io::Table t;
  t.comments = {"config_hash=abc", "seed=1"};
  t.columns = {"k", "estimate"};
  t.rows = {{1, 0.1 + 0.2}, {2, -1e-300}, {3, 12345.678901234567}};
  const auto p = scratch("t.csv");
  io::write_table(p, t);
  const auto back = io::read_table(p);
  CHECK(back.comments == t.comments);
  CHECK(back.columns == t.columns);
  CHECK(back.rows == t.rows);
  CHECK(io::to_csv(back) == io::read_file(p));
}

TEST_CASE("path table round-trip") {
  Path p;
  p.dt = 1.0 / 256;
  for (int i = 0; i <= 300; ++i) p.values.push_back(std::sin(0.1 * i));
  const auto q = io::path_from_table(io::path_table(p));
  CHECK(q.dt == p.dt);
  CHECK(q.values == p.values);
}

TEST_CASE("ISO-8601 parsing") {
  CHECK(*io::parse_iso8601("1970-01-01T00:00:00Z") == 0.0);
  CHECK(*io::parse_iso8601("2012-02-28 09:30:15") == 1330421415.0);
  CHECK(*io::parse_iso8601("2012-02-28T09:30:15.25") == doctest::Approx(1330421415.25));
  CHECK(*io::parse_iso8601("2012-02-28T10:30:15+01:00") == 1330421415.0);
  CHECK_FALSE(io::parse_iso8601("2012-02-30T00:00:00"));
  CHECK_FALSE(io::parse_iso8601("12.5"));
}

TEST_CASE("two-row file gives a two-point series") {
  const auto ts = io::parse_ticks("time,price\n0,100\n15,101\n");
  CHECK(ts.time == std::vector<double>{0, 15});
  CHECK(ts.price == std::vector<double>{100, 101});
}

TEST_CASE("ISO and epoch files agree") {
  const auto a = io::parse_ticks("t,p\n2012-02-28T09:30:00Z,10\n2012-02-28T09:30:15Z,11\n");
  const auto b = io::parse_ticks("t,p\n1330421400,10\n1330421415,11\n");
  CHECK(a.time == b.time);
}

TEST_CASE("tick validation errors") {
  const auto msg = error_text("time,price\n0,100\n15,-1\n30,100\n");
  CHECK(msg.find("row 3") != std::string::npos);
  CHECK(msg.find("column 2") != std::string::npos);
  CHECK(error_text("time,price\n0,abc\n").find("row 2") != std::string::npos);
  CHECK(error_text("0,100\n15,101\n").find("header") != std::string::npos);
  CHECK_THROWS_AS(io::parse_ticks("time,price\n"), EmptyFile);
  CHECK_THROWS_AS(io::parse_ticks(""), EmptyFile);
  CHECK_THROWS_AS(io::parse_ticks("time,price\n0,1\n"), TooShort);
  CHECK_THROWS_AS(io::parse_ticks("time,price\n10,1\n5,1\n"), NonMonotoneTime);
  CHECK_THROWS_AS(io::read_table(scratch("missing.csv")), IoError);
}

TEST_CASE("duplicate timestamps collapse to the last price and are logged") {
  std::vector<std::string> seen;
  auto prev = set_warning_sink([&](const std::string& m) { seen.push_back(m); });
  const auto ts = io::parse_ticks("t,p\n0,1\n0,2\n15,3\n15,4\n30,5\n");
  set_warning_sink(std::move(prev));
  CHECK(ts.time == std::vector<double>{0, 15, 30});
  CHECK(ts.price == std::vector<double>{2, 4, 5});
  CHECK(ts.duplicates == 2);
  CHECK(seen.size() == 1);
}

TEST_CASE("last-tick resampling and gap count") {
  io::TickSeries ts;
  ts.time = {0, 4, 16, 17, 50};
  ts.price = {1, 2, 3, 4, 5};
  const auto r = io::resample_last_tick(ts, 10.0);
  CHECK(r.time == std::vector<double>{0, 10, 20, 30, 40, 50});
  CHECK(r.price == std::vector<double>{1, 2, 4, 4, 4, 5});
  // (20,30] and (30,40] hold no tick.
  CHECK(r.gaps == 2);
  CHECK_THROWS_AS(io::resample_last_tick(ts, 0.0), ConfigError);
}

TEST_CASE("131011 rows at 15 s ingest quickly") {
  std::ostringstream os;
  os << "timestamp,price\n";
  std::mt19937_64 g(3);
  std::normal_distribution<double> n01;
  double p = 1370.0;
  for (int i = 0; i < 131011; ++i) {
    p *= std::exp(1e-4 * n01(g));
    os << 1330421400 + 15 * i << ',' << io::format_double(p) << '\n';
  }
  const auto path = scratch("big.csv");
  io::write_atomic(path, os.str());
  const auto t0 = std::chrono::steady_clock::now();
  const auto ts = io::ingest(path, 15.0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(ts.time.size() == 131011);
  CHECK(ts.gaps == 0);
  CHECK(secs < 5.0);
}
