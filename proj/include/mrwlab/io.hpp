#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mrwlab/path.hpp"

namespace mrw::io {

/// Shortest decimal that round-trips to the same double; "nan" / "inf" / "-inf" otherwise.
std::string format_double(double v);
/// Strict parse of a full field; std::nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view s);

/// Comma-separated table with `#`-prefixed metadata lines above the header.
struct Table {
  std::vector<std::string> comments;  // without the leading "# "
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Serialize a table; identical tables give identical bytes.
std::string to_csv(const Table& t);
/// Write through a temporary file in the same directory, then rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);
void write_table(const std::filesystem::path& path, const Table& t);
/// Read a numeric table written by write_table (or any header + numeric rows).
Table read_table(const std::filesystem::path& path);

/// `time,value` series.
Table path_table(const Path& p, std::vector<std::string> comments = {});
/// Inverse of path_table; requires a uniform time column.
Path path_from_table(const Table& t);

/// Raw tick rows after validation.
struct TickSeries {
  std::vector<double> time;  // seconds (epoch or as given)
  std::vector<double> price;
  std::size_t duplicates = 0;  // rows collapsed onto a later row with the same timestamp
  std::size_t gaps = 0;        // resampled grid intervals with no tick, forward-filled
  bool resampled = false;
  double interval = 0.0;
};

/// Seconds since the Unix epoch for "YYYY-MM-DD[T ]hh:mm:ss[.fff][Z|+hh:mm|-hh:mm]".
std::optional<double> parse_iso8601(std::string_view s);

/// Parse tick CSV text: a mandatory header line, then `timestamp,price` rows.
/// Timestamps are epoch seconds or ISO-8601 (detected from the first row).
/// Errors: EmptyFile, ParseError naming the row and column, NonMonotoneTime.
TickSeries parse_ticks(const std::string& text, const std::string& name = "<ticks>");
/// parse_ticks on a file, then optional last-tick resampling onto a uniform grid.
TickSeries ingest(const std::filesystem::path& path, std::optional<double> resample_interval = std::nullopt);
/// Last-tick resampling: value at grid time g is the last price with time <= g.
TickSeries resample_last_tick(const TickSeries& ticks, double interval);

std::string read_file(const std::filesystem::path& path);

}  // namespace mrw::io
