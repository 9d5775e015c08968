#include <gtest/gtest.h>

#include <sstream>

#include "posetmc/trace.hpp"
#include "test_support.hpp"

using namespace posetmc;

namespace {

TraceRow row_of(const Poset& p, std::uint64_t sweep, bool intervals) {
  return {record(p, sweep, RecordOptions{6, intervals}), 1000 + sweep, 400 + sweep};
}

}  // namespace

TEST(Trace, RowRoundTrip) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Poset p = fixtures::random_poset(2 + int(seed % 40), seed);
    const TraceRow row = row_of(p, seed * 17, seed % 2 == 0);
    const std::string line = format_trace_row(row);
    EXPECT_EQ(parse_trace_row(line), row) << line;
    EXPECT_EQ(line.find('\n'), std::string::npos);
  }
}

TEST(Trace, KnownRow) {
  const TraceRow row = row_of(construct_standard(StartKind::chain, 3), 5, true);
  EXPECT_EQ(format_trace_row(row), "5,3,3,2,1,1,1,1,1,1;1;1,1005,405,2;1");
  const TraceRow tall = row_of(construct_standard(StartKind::chain, 8), 1, false);
  EXPECT_EQ(format_trace_row(tall), "1,8,28,7,1,0.4375,1,1,abandoned,1;1;1;1;1;1;1;1,1001,401,");
}

TEST(Trace, StreamRoundTrip) {
  std::vector<TraceRow> rows;
  for (std::uint64_t s = 1; s <= 30; ++s) rows.push_back(row_of(fixtures::random_poset(12, s), s, false));
  std::stringstream io;
  write_trace_header(io);
  for (const auto& r : rows) write_trace_row(io, r);
  EXPECT_EQ(read_trace(io), rows);
  const auto obs = observables_of(rows);
  ASSERT_EQ(obs.size(), rows.size());
  EXPECT_EQ(obs[3], rows[3].obs);
}

TEST(Trace, RejectsMalformedRows) {
  EXPECT_THROW(parse_trace_row(""), std::runtime_error);
  EXPECT_THROW(parse_trace_row("1,2,3"), std::runtime_error);
  EXPECT_THROW(parse_trace_row("x,3,3,2,1,0.5,1,1,1,1;1;1,1005,405,"), std::runtime_error);
  EXPECT_THROW(parse_trace_row("5,3,3,2,1,0.5,1,1,7,1;1;1,1005,405,"), std::runtime_error);
  EXPECT_THROW(parse_trace_row("5,3,3,2,1,0.5,1,1,1,1;a;1,1005,405,"), std::runtime_error);
  EXPECT_THROW(parse_trace_row("5,3,3,2,1,0.5,1,1,1,1;1;1,1005,405,,extra"), std::runtime_error);
}

TEST(Trace, ErrorsNameTheLine) {
  std::stringstream io;
  io << kTraceHeader << "\n5,3,3,2,1,0.5,1,1,1,1;1;1,1005,405,\nbroken\n";
  try {
    read_trace(io);
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::stringstream bad_header("sweep,height\n");
  EXPECT_THROW(read_trace(bad_header), std::runtime_error);
  EXPECT_THROW(read_trace_file("/nonexistent/trace.csv"), std::runtime_error);
}
