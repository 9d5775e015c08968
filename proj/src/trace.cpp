#include "posetmc/trace.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace posetmc {

namespace {

// Shortest representation that reads back to the same double.
std::string shortest(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T>
void join(std::string& out, const std::vector<T>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(v[i]);
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

template <class T>
T parse_number(const std::string& s, const char* field) {
  T v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error(std::string("trace: bad ") + field + " '" + s + "'");
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& s, const char* field) {
  std::vector<T> out;
  if (s.empty()) return out;
  for (const auto& part : split(s, ';')) out.push_back(parse_number<T>(part, field));
  return out;
}

}  // namespace

void write_trace_header(std::ostream& out) { out << kTraceHeader << '\n'; }

std::string format_trace_row(const TraceRow& row) {
  const auto& o = row.obs;
  std::string s;
  s += std::to_string(o.sweep) + ',' + std::to_string(o.height) + ',' +
       std::to_string(o.relations) + ',' + std::to_string(o.links) + ',' +
       shortest(o.ordering_fraction) + ',' + shortest(o.linking_fraction) + ',' +
       std::to_string(o.n_min) + ',' + std::to_string(o.n_max) + ',' + to_string(o.chi) + ',';
  join(s, o.level_sizes);
  s += ',' + std::to_string(row.attempted) + ',' + std::to_string(row.accepted) + ',';
  if (o.interval_hist) join(s, *o.interval_hist);
  return s;
}

void write_trace_row(std::ostream& out, const TraceRow& row) {
  out << format_trace_row(row) << '\n';
}

TraceRow parse_trace_row(const std::string& line) {
  const auto f = split(line, ',');
  if (f.size() != 13)
    throw std::runtime_error("trace: expected 13 fields, got " + std::to_string(f.size()) +
                             " in '" + line + "'");
  TraceRow row;
  auto& o = row.obs;
  o.sweep = parse_number<std::uint64_t>(f[0], "sweep");
  o.height = parse_number<int>(f[1], "height");
  o.relations = parse_number<int>(f[2], "R");
  o.links = parse_number<int>(f[3], "L");
  o.ordering_fraction = parse_number<double>(f[4], "r");
  o.linking_fraction = parse_number<double>(f[5], "l");
  o.n_min = parse_number<int>(f[6], "N_min");
  o.n_max = parse_number<int>(f[7], "N_max");
  try {
    o.chi = parse_chi(f[8]);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("trace: ") + e.what());
  }
  o.level_sizes = parse_list<int>(f[9], "level_sizes");
  row.attempted = parse_number<std::uint64_t>(f[10], "attempted");
  row.accepted = parse_number<std::uint64_t>(f[11], "accepted");
  if (!f[12].empty()) o.interval_hist = parse_list<std::uint64_t>(f[12], "interval_hist");
  return row;
}

std::vector<TraceRow> read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace: empty file");
  if (line != kTraceHeader) throw std::runtime_error("trace: unexpected header '" + line + "'");
  std::vector<TraceRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      rows.push_back(parse_trace_row(line));
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

std::vector<TraceRow> read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace " + path);
  try {
    return read_trace(in);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::vector<ObservableRecord> observables_of(const std::vector<TraceRow>& rows) {
  std::vector<ObservableRecord> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.obs);
  return out;
}

}  // namespace posetmc
