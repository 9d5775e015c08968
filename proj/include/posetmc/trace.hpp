#pragma once

// Per-sweep trace files: one CSV row per recorded sweep.
//
//   sweep,height,R,L,r,l,N_min,N_max,chi,level_sizes,attempted,accepted,interval_hist
//
// level_sizes and interval_hist are semicolon-joined; interval_hist is empty
// unless interval recording was on. attempted/accepted count the moves of the
// sweep that ended at this row.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "posetmc/observables.hpp"

namespace posetmc {

struct TraceRow {
  ObservableRecord obs;
  std::uint64_t attempted = 0;
  std::uint64_t accepted = 0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

inline constexpr const char* kTraceHeader =
    "sweep,height,R,L,r,l,N_min,N_max,chi,level_sizes,attempted,accepted,interval_hist";

void write_trace_header(std::ostream& out);
void write_trace_row(std::ostream& out, const TraceRow& row);
std::string format_trace_row(const TraceRow& row);

// Throws std::runtime_error naming the line on a malformed row or header.
TraceRow parse_trace_row(const std::string& line);
std::vector<TraceRow> read_trace(std::istream& in);
std::vector<TraceRow> read_trace_file(const std::string& path);

std::vector<ObservableRecord> observables_of(const std::vector<TraceRow>& rows);

}  // namespace posetmc
