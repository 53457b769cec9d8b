#pragma once

// CSV persistence for metric tables and training curves.
//
// Metrics file layout:
//   # <free-form preamble lines, typically the config echo>
//   policy,pi_upper,lambda,n_probe,seed,status,episodes,...   (kMetricsColumns)
//   learning,0.9,0.02,,7,ok,2000,...
//
// Absent values are empty fields. Reals carry 6 significant digits; counts
// and seeds are exact integers.

#include <acsense/agent.hpp>
#include <acsense/errors.hpp>
#include <acsense/metrics.hpp>

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace acsense {

struct MetricsRow {
  std::string policy;  // "learning" or "ranking"
  double pi_upper = 0.0;
  std::optional<double> lambda;
  std::optional<unsigned> n_probe;
  std::uint64_t seed = 0;
  std::string status = "ok";  // "ok" or a one-line failure reason
  MetricsSummary metrics;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct MetricsTable {
  std::vector<std::string> preamble;
  std::vector<MetricsRow> rows;

  friend bool operator==(const MetricsTable&, const MetricsTable&) = default;
};

inline constexpr std::array<std::string_view, 17> kMetricsColumns{
    "policy",          "pi_upper",          "lambda",
    "n_probe",         "seed",              "status",
    "episodes",        "stopped_episodes",  "false_alarms",
    "truncated_episodes", "delay_episodes", "false_alarm_rate",
    "mean_delay",      "mean_sensing_cost", "mean_anomalies_at_stop",
    "probes_per_unit_time", "truncation_rate"};

namespace detail {

inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

// Table cells carry 6 significant digits.
inline std::string format_metric(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 6);
  return std::string(buf.data(), end);
}

template <typename T>
std::string format_optional(const std::optional<T>& v) {
  if (!v) return {};
  if constexpr (std::is_floating_point_v<T>) {
    return format_metric(*v);
  } else {
    return std::to_string(*v);
  }
}

inline std::string sanitize_field(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

struct FieldCursor {
  std::vector<std::string_view> fields;
  std::vector<std::size_t> columns;  // 1-based start column of each field
  std::size_t line = 0;

  std::string_view text(std::size_t i) const { return fields[i]; }

  [[noreturn]] void fail(std::size_t i, const std::string& what) const {
    throw ParseError(line, columns[i], "field '" + std::string(kMetricsColumns[i]) + "': " + what);
  }

  double real(std::size_t i) const {
    double v = 0.0;
    const auto s = fields[i];
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
      fail(i, "expected a number, got '" + std::string(s) + "'");
    }
    return v;
  }

  std::optional<double> optional_real(std::size_t i) const {
    if (fields[i].empty()) return std::nullopt;
    return real(i);
  }

  template <typename T>
  T integer(std::size_t i) const {
    T v{};
    const auto s = fields[i];
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
      fail(i, "expected an integer, got '" + std::string(s) + "'");
    }
    return v;
  }

  template <typename T>
  std::optional<T> optional_integer(std::size_t i) const {
    if (fields[i].empty()) return std::nullopt;
    return integer<T>(i);
  }
};

inline FieldCursor split_csv_line(std::string_view line, std::size_t line_no) {
  FieldCursor cur;
  cur.line = line_no;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cur.fields.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    cur.columns.push_back(start + 1);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cur;
}

inline std::string header_line() {
  std::string h;
  for (std::size_t i = 0; i < kMetricsColumns.size(); ++i) {
    if (i) h += ',';
    h += kMetricsColumns[i];
  }
  return h;
}

}  // namespace detail

inline std::string format_metrics_row(const MetricsRow& row) {
  using detail::format_metric;
  using detail::format_optional;
  const auto& m = row.metrics;
  std::string out;
  auto add = [&out](const std::string& field) {
    if (!out.empty()) out += ',';
    out += field;
  };
  out = detail::sanitize_field(row.policy);
  add(format_metric(row.pi_upper));
  add(format_optional(row.lambda));
  add(format_optional(row.n_probe));
  add(std::to_string(row.seed));
  add(detail::sanitize_field(row.status));
  add(std::to_string(m.episodes));
  add(std::to_string(m.stopped_episodes));
  add(std::to_string(m.false_alarms));
  add(std::to_string(m.truncated_episodes));
  add(std::to_string(m.delay_episodes));
  add(format_optional(m.false_alarm_rate));
  add(format_optional(m.mean_delay));
  add(format_optional(m.mean_sensing_cost));
  add(format_optional(m.mean_anomalies_at_stop));
  add(format_optional(m.probes_per_unit_time));
  add(format_metric(m.truncation_rate));
  return out;
}

inline std::string format_metrics(const MetricsTable& table) {
  std::string out;
  for (const auto& line : table.preamble) out += "# " + line + "\n";
  out += detail::header_line() + "\n";
  for (const auto& row : table.rows) out += format_metrics_row(row) + "\n";
  return out;
}

inline MetricsTable parse_metrics(std::string_view text) {
  MetricsTable table;
  bool seen_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (!seen_header) {
      if (line.starts_with("#")) {
        line.remove_prefix(1);
        if (line.starts_with(" ")) line.remove_prefix(1);
        table.preamble.emplace_back(line);
        continue;
      }
      if (line != detail::header_line()) {
        throw ParseError(line_no, 1, "expected metrics header '" + detail::header_line() + "'");
      }
      seen_header = true;
      continue;
    }
    if (line.empty()) continue;

    const auto cur = detail::split_csv_line(line, line_no);
    if (cur.fields.size() != kMetricsColumns.size()) {
      throw ParseError(line_no, 1,
                       "expected " + std::to_string(kMetricsColumns.size()) + " columns, got " +
                           std::to_string(cur.fields.size()));
    }
    MetricsRow row;
    row.policy = std::string(cur.text(0));
    row.pi_upper = cur.real(1);
    row.lambda = cur.optional_real(2);
    row.n_probe = cur.optional_integer<unsigned>(3);
    row.seed = cur.integer<std::uint64_t>(4);
    row.status = std::string(cur.text(5));
    auto& m = row.metrics;
    m.episodes = cur.integer<std::size_t>(6);
    m.stopped_episodes = cur.integer<std::size_t>(7);
    m.false_alarms = cur.integer<std::size_t>(8);
    m.truncated_episodes = cur.integer<std::size_t>(9);
    m.delay_episodes = cur.integer<std::size_t>(10);
    m.false_alarm_rate = cur.optional_real(11);
    m.mean_delay = cur.optional_real(12);
    m.mean_sensing_cost = cur.optional_real(13);
    m.mean_anomalies_at_stop = cur.optional_real(14);
    m.probes_per_unit_time = cur.optional_real(15);
    m.truncation_rate = cur.real(16);
    table.rows.push_back(std::move(row));
  }
  if (!seen_header) throw ParseError(line_no + 1, 1, "missing metrics header");
  return table;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_metrics(const MetricsTable& table, const std::string& path) {
  write_text_file(path, format_metrics(table));
}

inline MetricsTable read_metrics(const std::string& path) {
  return parse_metrics(read_text_file(path));
}

// Training curve: episode,t_stop,total_probes,probes_per_step,total_reward,false_alarm,truncated
inline std::string format_training_curve(const std::vector<TrainingCurveRow>& curve) {
  std::string out = "episode,t_stop,total_probes,probes_per_step,total_reward,false_alarm,truncated\n";
  for (const auto& r : curve) {
    out += std::to_string(r.episode) + ',' + std::to_string(r.t_stop) + ',' +
           std::to_string(r.total_probes) + ',' + detail::format_metric(r.probes_per_step()) +
           ',' + detail::format_metric(r.total_reward) + ',' + (r.false_alarm ? "1" : "0") +
           ',' + (r.truncated ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace acsense
