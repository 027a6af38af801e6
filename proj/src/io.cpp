#include "mrwlab/io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <system_error>

#include "mrwlab/error.hpp"
#include "mrwlab/log.hpp"

namespace mrw::io {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Iterate lines with 1-based numbers.
template <class F>
void for_each_line(const std::string& text, F&& f) {
  std::size_t start = 0, no = 0;
  while (start <= text.size()) {
    const auto pos = text.find('\n', start);
    ++no;
    std::string_view line(text.data() + start, (pos == std::string::npos ? text.size() : pos) - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    f(no, line);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
}

bool skippable(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

[[noreturn]] void parse_fail(const std::string& name, std::size_t row, std::size_t col, const std::string& col_name,
                             const std::string& what) {
  std::ostringstream os;
  os << name << ": row " << row << ", column " << col << " (" << col_name << "): " << what;
  throw ParseError(os.str());
}

}  // namespace

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s == "nan" || s == "NaN") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::string to_csv(const Table& t) {
  std::string out;
  for (const auto& c : t.comments) {
    out += "# ";
    out += c;
    out += '\n';
  }
  for (std::size_t j = 0; j < t.columns.size(); ++j) {
    if (j) out += ',';
    out += t.columns[j];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += format_double(row[j]);
    }
    out += '\n';
  }
  return out;
}

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::random_device rd;
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(rd()));
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot rename into " + path.string() + ": " + ec.message());
  }
}

void write_table(const fs::path& path, const Table& t) { write_atomic(path, to_csv(t)); }

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Table read_table(const fs::path& path) {
  const std::string text = read_file(path);
  const std::string name = path.string();
  Table t;
  bool have_header = false;
  for_each_line(text, [&](std::size_t no, std::string_view line) {
    const auto tl = trim(line);
    if (tl.empty()) return;
    if (tl.front() == '#') {
      auto c = tl.substr(1);
      if (!c.empty() && c.front() == ' ') c.remove_prefix(1);
      if (!have_header) t.comments.emplace_back(c);
      return;
    }
    const auto fields = split(line);
    if (!have_header) {
      for (auto f : fields) t.columns.emplace_back(f);
      have_header = true;
      return;
    }
    if (fields.size() != t.columns.size()) {
      std::ostringstream os;
      os << name << ": row " << no << " has " << fields.size() << " fields, header has " << t.columns.size();
      throw ParseError(os.str());
    }
    std::vector<double> row;
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const auto v = parse_double(fields[j]);
      if (!v) parse_fail(name, no, j + 1, t.columns[j], "not a number: '" + std::string(fields[j]) + "'");
      row.push_back(*v);
    }
    t.rows.push_back(std::move(row));
  });
  if (!have_header) throw EmptyFile(name + ": no header line");
  return t;
}

Table path_table(const Path& p, std::vector<std::string> comments) {
  Table t;
  t.comments = std::move(comments);
  t.columns = {"time", "value"};
  t.rows.reserve(p.values.size());
  for (std::size_t i = 0; i < p.values.size(); ++i) t.rows.push_back({p.time(i), p.values[i]});
  return t;
}

Path path_from_table(const Table& t) {
  if (t.columns.size() < 2 || t.columns[0] != "time" || t.columns[1] != "value")
    throw ParseError("expected a time,value table");
  if (t.rows.size() < 2) throw TooShort("series needs at least two rows");
  Path p;
  p.dt = t.rows[1][0] - t.rows[0][0];
  if (!(p.dt > 0.0)) throw NonMonotoneTime("series time column is not increasing");
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double want = t.rows[0][0] + static_cast<double>(i) * p.dt;
    if (std::abs(t.rows[i][0] - want) > 1e-9 * std::max(1.0, std::abs(want))) {
      std::ostringstream os;
      os << "series time column is not uniform at row " << i + 1;
      throw ParseError(os.str());
    }
    p.values.push_back(t.rows[i][1]);
  }
  return p;
}

std::optional<double> parse_iso8601(std::string_view s) {
  s = trim(s);
  auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    if (pos + len > s.size()) return std::nullopt;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' ||
      s[16] != ':')
    return std::nullopt;
  const auto Y = num(0, 4), M = num(5, 2), D = num(8, 2), h = num(11, 2), m = num(14, 2), sec = num(17, 2);
  if (!Y || !M || !D || !h || !m || !sec) return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{year{*Y}, month{static_cast<unsigned>(*M)}, day{static_cast<unsigned>(*D)}};
  if (!ymd.ok() || *h > 23 || *m > 59 || *sec > 60) return std::nullopt;
  double t = static_cast<double>(sys_days{ymd}.time_since_epoch().count()) * 86400.0 + *h * 3600.0 + *m * 60.0 +
             *sec;
  std::size_t pos = 19;
  if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
    std::size_t end = pos + 1;
    while (end < s.size() && s[end] >= '0' && s[end] <= '9') ++end;
    if (end == pos + 1) return std::nullopt;
    std::string frac = "0.";
    frac.append(s.substr(pos + 1, end - pos - 1));
    t += std::stod(frac);
    pos = end;
  }
  if (pos < s.size()) {
    if (s[pos] == 'Z' && pos + 1 == s.size()) return t;
    if ((s[pos] == '+' || s[pos] == '-') && (s.size() == pos + 6 || s.size() == pos + 5)) {
      const bool colon = s.size() == pos + 6;
      if (colon && s[pos + 3] != ':') return std::nullopt;
      const auto oh = num(pos + 1, 2), om = num(pos + (colon ? 4 : 3), 2);
      if (!oh || !om) return std::nullopt;
      const double off = *oh * 3600.0 + *om * 60.0;
      return s[pos] == '+' ? t - off : t + off;
    }
    return std::nullopt;
  }
  return t;
}

TickSeries parse_ticks(const std::string& text, const std::string& name) {
  TickSeries ts;
  bool have_header = false;
  std::optional<bool> iso;
  double last_t = -HUGE_VAL;
  for_each_line(text, [&](std::size_t no, std::string_view line) {
    if (skippable(line)) return;
    const auto fields = split(line);
    if (!have_header) {
      if (fields.size() < 2) parse_fail(name, no, 1, "header", "header needs timestamp and price columns");
      if (parse_double(fields[0]) || parse_iso8601(fields[0]))
        parse_fail(name, no, 1, "header", "missing header line (first row is data)");
      have_header = true;
      return;
    }
    if (fields.size() < 2) parse_fail(name, no, 2, "price", "missing price field");
    if (!iso) iso = !parse_double(fields[0]).has_value();
    const auto t = *iso ? parse_iso8601(fields[0]) : parse_double(fields[0]);
    if (!t || !std::isfinite(*t))
      parse_fail(name, no, 1, "timestamp",
                 std::string("cannot read '") + std::string(fields[0]) + (*iso ? "' as ISO-8601" : "' as epoch seconds"));
    const auto p = parse_double(fields[1]);
    if (!p) parse_fail(name, no, 2, "price", "not a number: '" + std::string(fields[1]) + "'");
    if (!(*p > 0.0) || !std::isfinite(*p))
      parse_fail(name, no, 2, "price", "price must be a positive finite decimal, got " + std::string(fields[1]));
    if (*t < last_t) {
      std::ostringstream os;
      os << name << ": row " << no << ": timestamp " << fields[0] << " precedes the previous row";
      throw NonMonotoneTime(os.str());
    }
    if (*t == last_t) {
      ts.price.back() = *p;
      ++ts.duplicates;
      return;
    }
    last_t = *t;
    ts.time.push_back(*t);
    ts.price.push_back(*p);
  });
  if (!have_header || ts.time.empty()) throw EmptyFile(name + ": no data rows");
  if (ts.time.size() < 2) throw TooShort(name + ": need at least two distinct timestamps");
  if (ts.duplicates) warn(name + ": " + std::to_string(ts.duplicates) + " duplicate timestamps collapsed to the last price");
  return ts;
}

TickSeries resample_last_tick(const TickSeries& ticks, double interval) {
  if (!(interval > 0.0)) throw ConfigError("resample interval must be positive");
  TickSeries out;
  out.duplicates = ticks.duplicates;
  out.resampled = true;
  out.interval = interval;
  const double t0 = ticks.time.front();
  const auto steps = static_cast<std::size_t>(std::floor((ticks.time.back() - t0) / interval + 1e-9));
  std::size_t j = 0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double g = t0 + static_cast<double>(k) * interval;
    const std::size_t before = j;
    while (j + 1 < ticks.time.size() && ticks.time[j + 1] <= g + 1e-9 * interval) ++j;
    // A grid interval is a gap when no tick arrived since the previous grid point.
    if (k > 0 && j == before && ticks.time[j] <= g - interval + 1e-9 * interval) ++out.gaps;
    out.time.push_back(g);
    out.price.push_back(ticks.price[j]);
  }
  if (out.time.size() < 2) throw TooShort("resampled series has fewer than two points");
  return out;
}

TickSeries ingest(const fs::path& path, std::optional<double> resample_interval) {
  auto ts = parse_ticks(read_file(path), path.string());
  if (resample_interval) {
    ts = resample_last_tick(ts, *resample_interval);
    if (ts.gaps) warn(path.string() + ": " + std::to_string(ts.gaps) + " empty resampling intervals forward-filled");
  }
  return ts;
}

}  // namespace mrw::io
