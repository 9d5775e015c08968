#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "posetmc/run.hpp"

using namespace posetmc;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("posetmc_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

RunConfig small_config(const fs::path& out, int n = 6, std::uint64_t sweeps = 300) {
  RunConfig c;
  c.n = n;
  c.seed = 11;
  c.sweeps = sweeps;
  c.checkpoint_interval = 50;
  c.threads = 2;
  c.out = out;
  return c;
}

// Link move that skips the suitability check: it relates incpast(x) to
// incfut(y) for every unrelated pair. Built on the relation matrix so it does
// not share code with the real move.
MoveOutcome broken_step(Poset& p, RandomStream& rng) {
  const int n = p.size();
  const auto k = rng.uniform_index(static_cast<std::uint32_t>(2 * pair_count(n)));
  const auto [x, y] = decode_pair(k >> 1);
  if ((k & 1) == 0 || p.precedes(x, y)) {
    return (k & 1) == 0 ? relation_move(p, x, y) : link_move(p, x, y);
  }
  RelationMatrix m = p.relation();
  for (int a = 0; a <= x; ++a)
    for (int b = y; b < n; ++b)
      if ((a == x || p.precedes(a, x)) && (b == y || p.precedes(y, b))) m.set(a, b);
  p = Poset::from_relation(transitive_closure(m));
  return {MoveKind::link, x, y, MoveAction::added};
}

}  // namespace

TEST(RunConfig, ValidateListsEveryProblem) {
  RunConfig c;
  c.n = 1;
  c.sweeps = 0;
  c.chains = 0;
  c.starts = {StartKind::chain, StartKind::chain};
  try {
    c.validate();
    FAIL();
  } catch (const std::invalid_argument& e) {
    const std::string m = e.what();
    for (const char* part : {"n must be at least 2", "sweeps must be positive", "chains must be",
                             "out must name", "chain twice"})
      EXPECT_NE(m.find(part), std::string::npos) << part << " in " << m;
  }
  RunConfig ok = small_config("/tmp/x");
  EXPECT_NO_THROW(ok.validate());
}

TEST(RunConfig, DefaultsAndTextRoundTrip) {
  RunConfig c = small_config("/tmp/somewhere", 47);
  EXPECT_EQ(c.sweep_moves(), 207646u);
  EXPECT_EQ(c.effective_h0(), 6);
  EXPECT_NE(c.to_text().find("moves-per-sweep=207646"), std::string::npos);
  const RunConfig d = RunConfig::from_text(c.to_text() + "unknown-key=1\n");
  EXPECT_EQ(d.to_text(), c.to_text());
  EXPECT_EQ(d.hash(), c.hash());
  RunConfig e = c;
  e.sweeps = 999;
  e.threads = 7;
  e.out = "/elsewhere";
  EXPECT_EQ(e.hash(), c.hash());  // extending a run keeps the hash
  e.seed = 12;
  EXPECT_NE(e.hash(), c.hash());
  EXPECT_THROW(RunConfig::from_text("n=abc\n"), std::runtime_error);
  EXPECT_THROW(RunConfig::from_text("no equals sign\n"), std::runtime_error);
}

TEST(RunConfig, RngNames) {
  EXPECT_EQ(parse_rng_algorithm("taus2"), RngAlgorithm::taus2);
  EXPECT_EQ(parse_rng_algorithm(to_string(RngAlgorithm::xoshiro128pp)), RngAlgorithm::xoshiro128pp);
  EXPECT_THROW(parse_rng_algorithm("mt"), std::invalid_argument);
}

TEST(Checkpoint, RoundTrip) {
  RandomStream rng(3);
  ChainCheckpoint c;
  c.config_hash = "abc";
  c.n = 12;
  c.start = StartKind::bipartite;
  c.replica = 2;
  c.sweep = 77;
  c.poset = construct_standard(StartKind::random_kr, 12, &rng);
  c.rng_state = rng.serialize();
  c.stats.attempted = 10;
  c.stats.accepted = 4;
  c.stats.link_attempted = 6;
  c.stats.link_accepted = 3;
  const auto d = ChainCheckpoint::from_text(c.to_text());
  EXPECT_EQ(d.to_text(), c.to_text());
  EXPECT_EQ(d.poset, c.poset);
  EXPECT_EQ(d.stats, c.stats);
  EXPECT_THROW(ChainCheckpoint::from_text("n=3\n"), std::runtime_error);
  std::string bad = c.to_text();
  bad.replace(bad.find("n=12"), 4, "n=13");
  EXPECT_THROW(ChainCheckpoint::from_text(bad), std::runtime_error);
}

TEST(CmdRun, WritesTracesManifestAndCheckpoints) {
  TempDir dir;
  const auto cfg = small_config(dir.path(), 9, 200);
  const auto summaries = cmd_run(cfg);
  ASSERT_EQ(summaries.size(), 4u);
  for (const auto& s : summaries) {
    const auto rows = read_trace_file(s.trace.string());
    ASSERT_EQ(rows.size(), 200u);
    EXPECT_EQ(rows.front().obs.sweep, 1u);
    EXPECT_EQ(rows.back().obs.sweep, 200u);
    std::uint64_t att = 0;
    for (const auto& r : rows) att += r.attempted;
    EXPECT_EQ(att, 200u * 2 * 9 * 9 * 9);
    EXPECT_EQ(s.stats.attempted, att);
    const auto cp = ChainCheckpoint::from_text(read_file(checkpoint_path(dir.path(), s.start, 0)));
    EXPECT_EQ(cp.sweep, 200u);
    EXPECT_EQ(cp.stats, s.stats);
  }
  const auto kv = parse_key_values(read_file(manifest_path(dir.path())));
  EXPECT_EQ(kv.at("config_hash"), cfg.hash());
  EXPECT_EQ(kv.at("moves-per-sweep"), "1458");
  EXPECT_EQ(kv.at("chain.chain_r0.seed"),
            std::to_string(derive_seed(11, chain_stream_index(StartKind::chain, 0))));
  EXPECT_EQ(kv.at("chain.random_kr_r0.trace"), "trace_random_kr_r0.csv");
}

TEST(CmdRun, RecordInterval) {
  TempDir dir;
  auto cfg = small_config(dir.path(), 5, 100);
  cfg.record_interval = 10;
  cfg.starts = {StartKind::chain};
  cmd_run(cfg);
  const auto rows = read_trace_file(trace_path(dir.path(), StartKind::chain, 0).string());
  ASSERT_EQ(rows.size(), 10u);
  EXPECT_EQ(rows[0].obs.sweep, 10u);
  EXPECT_EQ(rows[0].attempted, 10u * 250);
  cfg.checkpoint_interval = 15;
  EXPECT_THROW(cmd_run(cfg), std::invalid_argument);
}

TEST(CmdRun, ReplicasAreIndependent) {
  TempDir dir;
  auto cfg = small_config(dir.path(), 8, 50);
  cfg.starts = {StartKind::antichain};
  cfg.chains = 2;
  cmd_run(cfg);
  EXPECT_NE(read_file(trace_path(dir.path(), StartKind::antichain, 0)),
            read_file(trace_path(dir.path(), StartKind::antichain, 1)));
}

// A chain's stream depends only on the master seed and its own identity.
TEST(CmdRun, ChainUnaffectedBySelectedStarts) {
  TempDir a, b;
  auto ca = small_config(a.path(), 7, 80);
  auto cb = small_config(b.path(), 7, 80);
  cb.starts = {StartKind::random_kr};
  cmd_run(ca);
  cmd_run(cb);
  EXPECT_EQ(read_file(trace_path(a.path(), StartKind::random_kr, 0)),
            read_file(trace_path(b.path(), StartKind::random_kr, 0)));
}

TEST(CmdRun, InterruptAndResumeMatchesUninterrupted) {
  TempDir full, cut;
  cmd_run(small_config(full.path()));

  RunOptions halt;
  halt.halt_after = 170;  // last checkpoint at 150; rows 151..170 are redone
  cmd_run(small_config(cut.path()), halt);
  const auto partial = read_trace_file(trace_path(cut.path(), StartKind::chain, 0).string());
  EXPECT_EQ(partial.size(), 170u);

  RunOptions resume;
  resume.resume = cut.path();
  cmd_run(small_config(cut.path()), resume);
  for (StartKind s : small_config("x").starts) {
    EXPECT_EQ(read_file(trace_path(full.path(), s, 0)), read_file(trace_path(cut.path(), s, 0)))
        << to_string(s);
    EXPECT_EQ(read_file(checkpoint_path(full.path(), s, 0)),
              read_file(checkpoint_path(cut.path(), s, 0)));
  }
}

TEST(CmdRun, ResumeSingleChainAndExtend) {
  TempDir full, part;
  cmd_run(small_config(full.path(), 6, 300));
  auto short_cfg = small_config(part.path(), 6, 100);
  cmd_run(short_cfg);
  RunOptions one;
  one.resume = checkpoint_path(part.path(), StartKind::bipartite, 0);
  const auto s = cmd_run(small_config(part.path(), 6, 300), one);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(read_file(trace_path(full.path(), StartKind::bipartite, 0)),
            read_file(trace_path(part.path(), StartKind::bipartite, 0)));
}

TEST(CmdRun, ResumeRejectsForeignCheckpoint) {
  TempDir dir;
  cmd_run(small_config(dir.path(), 6, 100));
  auto other = small_config(dir.path(), 6, 200);
  other.seed = 99;
  RunOptions r;
  r.resume = dir.path();
  EXPECT_THROW(cmd_run(other, r), std::runtime_error);
  TempDir empty;
  r.resume = empty.path();
  EXPECT_THROW(cmd_run(small_config(empty.path()), r), std::runtime_error);
}

TEST(CmdRun, ManifestReplayReproducesEveryFile) {
  TempDir orig, replay;
  auto cfg = small_config(orig.path(), 9, 150);
  cfg.intervals = true;
  cfg.rng = RngAlgorithm::xoshiro128pp;
  cmd_run(cfg);
  RunConfig again = RunConfig::from_text(read_file(manifest_path(orig.path())));
  again.out = replay.path();
  cmd_run(again);
  for (StartKind s : cfg.starts) {
    EXPECT_EQ(read_file(trace_path(orig.path(), s, 0)), read_file(trace_path(replay.path(), s, 0)));
    EXPECT_EQ(read_file(checkpoint_path(orig.path(), s, 0)),
              read_file(checkpoint_path(replay.path(), s, 0)));
  }
}

TEST(RunChain, MatchesCmdRunTrace) {
  TempDir dir;
  auto cfg = small_config(dir.path(), 8, 60);
  cfg.starts = {StartKind::random_kr};
  cmd_run(cfg);
  RandomStream rng(derive_seed(cfg.seed, chain_stream_index(StartKind::random_kr, 0)));
  const auto rows = run_chain(8, StartKind::random_kr, rng, 60, cfg.sweep_moves(),
                              RecordOptions{cfg.effective_h0(), false});
  EXPECT_EQ(rows, read_trace_file(trace_path(dir.path(), StartKind::random_kr, 0).string()));
}

TEST(CmdEnumerate, CsvAndBounds) {
  std::ostringstream out;
  const auto d = cmd_enumerate(3, ExactObservable::height, out);
  EXPECT_EQ(d.total, 7u);
  EXPECT_EQ(out.str(), "value,count,fraction\n1,1,0.14285714285714285\n2,5,0.7142857142857143\n"
                       "3,1,0.14285714285714285\n");
  std::ostringstream seven;
  EXPECT_EQ(cmd_enumerate(7, ExactObservable::relations, seven).total, brute_force_count(7));
  std::ostringstream big;
  EXPECT_THROW(cmd_enumerate(12, ExactObservable::height, big), std::invalid_argument);
}

TEST(CmdValidate, ThreeElementsPasses) {
  ValidateOptions o;
  o.samples = 100000;
  o.seed = 5;
  const auto rep = cmd_validate(3, o);
  EXPECT_TRUE(rep.pass);
  for (const auto& c : rep.checks) EXPECT_LT(c.worst.deviation, 3.0);
  std::ostringstream s;
  write_report(s, rep);
  EXPECT_NE(s.str().find("PASS"), std::string::npos);
}

TEST(CmdValidate, BrokenLinkMoveFails) {
  const StepFunction step = broken_step;
  ValidateOptions o;
  o.samples = 20000;
  o.seed = 5;
  o.step = &step;
  const auto rep = cmd_validate(5, o);
  EXPECT_FALSE(rep.pass);
  std::ostringstream s;
  write_report(s, rep);
  EXPECT_NE(s.str().find("FAIL"), std::string::npos);
  // The same settings with the real chain pass.
  o.step = nullptr;
  EXPECT_TRUE(cmd_validate(5, o).pass);
}

TEST(CmdValidate, Bounds) {
  EXPECT_THROW(cmd_validate(10), std::invalid_argument);
  EXPECT_THROW(cmd_validate(1), std::invalid_argument);
}

TEST(CmdAnalyze, NineElementRun) {
  TempDir run, out;
  auto cfg = small_config(run.path(), 9, 2000);
  cfg.checkpoint_interval = 1000;
  cfg.threads = 4;
  cmd_run(cfg);
  AnalyzeOptions ao;
  ao.gnuplot = true;
  std::ostringstream log;
  const auto res = cmd_analyze({run.path()}, out.path(), ao, &log);
  ASSERT_EQ(res.size(), 1u);
  const auto& a = res[0];
  EXPECT_TRUE(a.thermalization.thermalized);
  EXPECT_LE(a.discard, a.thermalization.window);  // converged from the start
  EXPECT_NEAR(a.acceptance, 0.56, 0.03);
  double total = 0;
  for (double f : a.height.f) total += f;
  EXPECT_NEAR(total, 1.0, 1e-9);
  for (const char* f : {"n9/height_hist.dat", "n9/r_hist.dat", "n9/level2_hist.dat",
                        "n9/asym_hist.dat", "n9/nmin_hist.dat", "n9/nmax_hist.dat",
                        "n9/report.txt", "heights_vs_n.dat", "mean_r_vs_n.dat",
                        "chi_fraction.dat", "therm_tau_vs_n.dat"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
}

TEST(CmdAnalyze, ReportsBrokenRuns) {
  TempDir run, out;
  EXPECT_THROW(cmd_analyze({run.path()}, out.path()), std::runtime_error);
}
