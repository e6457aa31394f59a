#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "barytrack/error.hpp"

namespace barytrack {

/// Wall-clock UTC time of a best-track fix.
struct Timestamp {
  int year = 1970;
  int month = 1;
  int day = 1;
  int hour = 0;
  int minute = 0;

  bool valid() const {
    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{year}, std::chrono::month{unsigned(month)},
                             std::chrono::day{unsigned(day)}};
    return ymd.ok() && hour >= 0 && hour < 24 && minute >= 0 && minute < 60;
  }

  /// Seconds since 1970-01-01T00:00Z.
  std::int64_t epoch_seconds() const {
    using namespace std::chrono;
    const sys_days days{std::chrono::year{year} / std::chrono::month{unsigned(month)} /
                        std::chrono::day{unsigned(day)}};
    return std::int64_t(days.time_since_epoch().count()) * 86400 + hour * 3600 + minute * 60;
  }

  auto operator<=>(const Timestamp&) const = default;
};

/// Calendar year (UTC) of an instant given in seconds since the epoch.
inline int utc_year(double epoch_seconds) {
  using namespace std::chrono;
  const auto days = static_cast<long>(std::floor(epoch_seconds / 86400.0));
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  return int(ymd.year());
}

struct TrackPoint {
  Timestamp timestamp;
  std::optional<char> record_id;
  std::string status;
  double latitude = 0.0;   // degrees north
  double longitude = 0.0;  // degrees east; west is negative
  std::optional<int> max_wind;
  std::optional<int> min_pressure;
  /// Empty when the row carries no radii columns; otherwise 12 quadrant radii
  /// (34/50/64 kt) plus, in newer revisions, the radius of maximum wind.
  std::vector<std::optional<int>> wind_radii;
};

struct Storm {
  std::string basin;
  int cyclone_number = 0;
  int year = 0;
  std::string name;
  std::vector<TrackPoint> points;

  /// ATCF-style identifier, e.g. AL092011.
  std::string id() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%02d%04d", basin.c_str(), cyclone_number, year);
    return buf;
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

/// Comma-split with trimming; a single trailing empty field (from the
/// terminating comma) is dropped.
inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  if (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end) return std::nullopt;
  return value;
}

inline bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

inline bool looks_like_header(const std::vector<std::string_view>& f) {
  if (f.empty() || f[0].size() != 8) return false;
  const auto id = f[0];
  return std::isalpha(static_cast<unsigned char>(id[0])) &&
         std::isalpha(static_cast<unsigned char>(id[1])) && all_digits(id.substr(2));
}

/// Parses "28.0N" / "94.8W" style coordinates into signed degrees.
inline std::optional<double> parse_hemisphere(std::string_view s, char pos, char neg) {
  if (s.size() < 2) return std::nullopt;
  const char h = s.back();
  auto magnitude = parse_number<double>(s.substr(0, s.size() - 1));
  if (!magnitude || *magnitude < 0.0) return std::nullopt;
  if (h == pos) return *magnitude;
  if (h == neg) return -*magnitude;
  return std::nullopt;
}

inline std::optional<int> sentinel_to_optional(int value) {
  if (value == -999 || value == -99) return std::nullopt;
  return value;
}

struct Line {
  std::size_t number;
  std::string text;
};

inline Storm parse_header(const Line& line, std::size_t& declared_rows) {
  const auto f = split_fields(line.text);
  if (f.size() != 3 || !looks_like_header(f)) {
    throw ParseError(ErrorKind::MalformedHeader, line.number,
                     "expected 'BBCCYYYY, NAME, N,' but got '" + line.text + "'");
  }
  const auto rows = parse_number<long>(f[2]);
  if (!rows || *rows < 1) {
    throw ParseError(ErrorKind::MalformedHeader, line.number,
                     "row count '" + std::string(f[2]) + "' is not a positive integer");
  }
  Storm storm;
  storm.basin = std::string(f[0].substr(0, 2));
  storm.cyclone_number = *parse_number<int>(f[0].substr(2, 2));
  storm.year = *parse_number<int>(f[0].substr(4, 4));
  storm.name = std::string(f[1]);
  declared_rows = static_cast<std::size_t>(*rows);
  return storm;
}

inline TrackPoint parse_row(const Line& line) {
  const auto f = split_fields(line.text);
  if (f.size() != 8 && f.size() != 20 && f.size() != 21) {
    throw ParseError(ErrorKind::MalformedRow, line.number,
                     "expected 8, 20 or 21 fields, got " + std::to_string(f.size()));
  }
  TrackPoint p;
  if (f[0].size() != 8 || !all_digits(f[0]) || f[1].size() != 4 || !all_digits(f[1])) {
    throw ParseError(ErrorKind::MalformedRow, line.number, "bad date/time fields");
  }
  p.timestamp.year = *parse_number<int>(f[0].substr(0, 4));
  p.timestamp.month = *parse_number<int>(f[0].substr(4, 2));
  p.timestamp.day = *parse_number<int>(f[0].substr(6, 2));
  p.timestamp.hour = *parse_number<int>(f[1].substr(0, 2));
  p.timestamp.minute = *parse_number<int>(f[1].substr(2, 2));
  if (!p.timestamp.valid()) {
    throw ParseError(ErrorKind::MalformedRow, line.number, "invalid calendar date or time");
  }
  if (f[2].size() > 1) throw ParseError(ErrorKind::MalformedRow, line.number, "bad record id");
  if (!f[2].empty()) p.record_id = f[2][0];
  if (f[3].size() != 2) throw ParseError(ErrorKind::MalformedRow, line.number, "bad status");
  p.status = std::string(f[3]);

  const auto lat = parse_hemisphere(f[4], 'N', 'S');
  auto lon = parse_hemisphere(f[5], 'E', 'W');
  if (!lat || *lat < -90.0 || *lat > 90.0) {
    throw ParseError(ErrorKind::BadCoordinate, line.number, "latitude '" + std::string(f[4]) + "'");
  }
  if (lon && *lon == -180.0) lon = 180.0;
  if (!lon || *lon <= -180.0 || *lon > 180.0) {
    throw ParseError(ErrorKind::BadCoordinate, line.number, "longitude '" + std::string(f[5]) + "'");
  }
  p.latitude = *lat;
  p.longitude = *lon;

  auto int_field = [&](std::string_view s, const char* what) {
    const auto v = parse_number<int>(s);
    if (!v) throw ParseError(ErrorKind::MalformedRow, line.number, std::string("bad ") + what);
    return sentinel_to_optional(*v);
  };
  p.max_wind = int_field(f[6], "wind");
  p.min_pressure = int_field(f[7], "pressure");
  for (std::size_t i = 8; i < f.size(); ++i) p.wind_radii.push_back(int_field(f[i], "wind radius"));
  return p;
}

inline void format_row(std::ostream& out, const TrackPoint& p) {
  const auto& t = p.timestamp;
  char buf[128];
  char lat[16], lon[16];
  std::snprintf(lat, sizeof lat, "%.1f%c", std::abs(p.latitude), p.latitude < 0 ? 'S' : 'N');
  std::snprintf(lon, sizeof lon, "%.1f%c", std::abs(p.longitude), p.longitude < 0 ? 'W' : 'E');
  std::snprintf(buf, sizeof buf, "%04d%02d%02d, %02d%02d, %c, %s, %5s, %6s, %3d, %4d,", t.year,
                t.month, t.day, t.hour, t.minute, p.record_id.value_or(' '), p.status.c_str(), lat,
                lon, p.max_wind.value_or(-99), p.min_pressure.value_or(-999));
  out << buf;
  for (const auto& r : p.wind_radii) {
    std::snprintf(buf, sizeof buf, " %4d,", r.value_or(-999));
    out << buf;
  }
  out << '\n';
}

}  // namespace detail

/// Reads every storm from a HURDAT2 stream. Accepts LF or CRLF line endings
/// and arbitrary padding around fields; blank lines are ignored.
inline std::vector<Storm> parse_hurdat2(std::istream& in) {
  std::vector<detail::Line> lines;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (detail::trim(text).empty()) continue;
    lines.push_back({number, std::move(text)});
  }

  std::vector<Storm> storms;
  std::size_t i = 0;
  while (i < lines.size()) {
    std::size_t declared = 0;
    Storm storm = detail::parse_header(lines[i], declared);
    const std::size_t header_line = lines[i].number;
    ++i;
    std::size_t actual = 0;
    while (i < lines.size() && !detail::looks_like_header(detail::split_fields(lines[i].text))) {
      ++actual;
      if (actual <= declared) storm.points.push_back(detail::parse_row(lines[i]));
      ++i;
    }
    if (actual != declared) {
      throw ParseError(ErrorKind::RowCountMismatch, header_line,
                       storm.id() + " declares " + std::to_string(declared) + " rows but has " +
                           std::to_string(actual));
    }
    for (std::size_t j = 1; j < storm.points.size(); ++j) {
      if (!(storm.points[j - 1].timestamp < storm.points[j].timestamp)) {
        throw ParseError(ErrorKind::NonMonotoneTime, header_line + j + 1,
                         storm.id() + " timestamps not strictly increasing");
      }
    }
    storms.push_back(std::move(storm));
  }
  return storms;
}

inline std::vector<Storm> parse_hurdat2(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_hurdat2(in);
}

/// Writes storms in canonical fixed-width HURDAT2 form with LF line endings.
inline void serialize_hurdat2(std::ostream& out, const std::vector<Storm>& storms) {
  char buf[96];
  for (const auto& s : storms) {
    std::snprintf(buf, sizeof buf, "%s,%19s,%7zu,\n", s.id().c_str(), s.name.c_str(),
                  s.points.size());
    out << buf;
    for (const auto& p : s.points) detail::format_row(out, p);
  }
}

inline std::string serialize_hurdat2(const std::vector<Storm>& storms) {
  std::ostringstream out;
  serialize_hurdat2(out, storms);
  return out.str();
}

/// Storm counts per year over [year_from, year_to]; a storm belongs to the year
/// of its first fix. Years without storms are present with count 0.
inline std::map<int, int> count_by_year(const std::vector<Storm>& storms, int year_from,
                                        int year_to) {
  std::map<int, int> counts;
  for (int y = year_from; y <= year_to; ++y) counts[y] = 0;
  for (const auto& s : storms) {
    if (s.points.empty()) continue;
    const int y = s.points.front().timestamp.year;
    if (y >= year_from && y <= year_to) ++counts[y];
  }
  return counts;
}

}  // namespace barytrack
