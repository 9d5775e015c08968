#pragma once

// Chain campaigns on disk: configuration, checkpoints, manifests, and the
// run / enumerate / validate / analyze commands behind the command-line tool.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "posetmc/analysis.hpp"
#include "posetmc/enumeration.hpp"
#include "posetmc/moves.hpp"
#include "posetmc/observables.hpp"
#include "posetmc/poset.hpp"
#include "posetmc/rng.hpp"
#include "posetmc/trace.hpp"

namespace posetmc {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  int n = 0;
  std::uint64_t seed = 1;
  std::vector<StartKind> starts{StartKind::chain, StartKind::antichain, StartKind::bipartite,
                                StartKind::random_kr};
  std::uint64_t sweeps = 0;
  std::uint64_t moves_per_sweep = 0;  // 0: 2n^3
  std::uint64_t record_interval = 1;
  bool intervals = false;
  int h0 = 0;  // 0: default_h0(n)
  int chains = 1;  // replicas per start
  std::uint64_t checkpoint_interval = 100;
  RngAlgorithm rng = RngAlgorithm::taus2;
  int threads = 0;  // 0: hardware concurrency
  std::filesystem::path out;

  // Throws std::invalid_argument naming every offending field.
  void validate() const;
  std::uint64_t sweep_moves() const;
  int effective_h0() const;

  // Hash over everything that shapes a trajectory; excludes sweeps, threads
  // and the output directory so a run can be extended.
  std::string hash() const;

  // key=value lines; also readable as a command-line config file.
  std::string to_text() const;
  static RunConfig from_text(const std::string& text);
};

std::string to_string(RngAlgorithm a);
RngAlgorithm parse_rng_algorithm(const std::string& s);

// Stream index of a chain; independent of which other starts are selected.
std::uint64_t chain_stream_index(StartKind start, int replica);
std::string chain_name(StartKind start, int replica);

struct ChainCheckpoint {
  std::string config_hash;
  int n = 0;
  StartKind start = StartKind::random_kr;
  int replica = 0;
  std::uint64_t sweep = 0;
  std::string rng_state;
  SweepStats stats;  // cumulative over the whole chain
  Poset poset;

  std::string to_text() const;
  // Throws std::runtime_error on malformed input.
  static ChainCheckpoint from_text(const std::string& text);
};

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

// key=value lines; blank lines and '#' comments skipped.
std::map<std::string, std::string> parse_key_values(const std::string& text);

struct ChainSummary {
  StartKind start = StartKind::random_kr;
  int replica = 0;
  std::filesystem::path trace;
  std::uint64_t sweeps = 0;
  SweepStats stats;
};

struct RunOptions {
  // Resume every chain of the output directory from its checkpoint, or a
  // single chain from one checkpoint file.
  std::optional<std::filesystem::path> resume;
  // Testing: stop every chain after this many sweeps without a final
  // checkpoint, as if the process were killed.
  std::optional<std::uint64_t> halt_after;
  std::ostream* log = nullptr;
};

std::vector<ChainSummary> cmd_run(const RunConfig& config, const RunOptions& options = {});

std::filesystem::path trace_path(const std::filesystem::path& dir, StartKind start, int replica);
std::filesystem::path checkpoint_path(const std::filesystem::path& dir, StartKind start,
                                      int replica);
std::filesystem::path manifest_path(const std::filesystem::path& dir);

// Runs one chain in memory and returns its records, one per sweep.
std::vector<TraceRow> run_chain(int n, StartKind start, RandomStream& rng, std::uint64_t sweeps,
                                std::uint64_t moves_per_sweep, const RecordOptions& rec,
                                const StepFunction* step = nullptr);

// Exact distribution CSV. Throws std::invalid_argument past the bound.
ExactDistribution cmd_enumerate(int n, ExactObservable observable, std::ostream& out,
                                const EnumerationOptions& options = {});

struct BinCheck {
  long value = 0;
  double exact = 0.0;
  double measured = 0.0;
  double error = 0.0;
  double deviation = 0.0;  // |measured - exact| / error, infinite for a zero error
};

struct ObservableCheck {
  ExactObservable observable = ExactObservable::relations;
  std::vector<BinCheck> bins;  // only bins with exact fraction >= min_fraction
  BinCheck worst;
  bool pass = false;
};

struct ValidationReport {
  int n = 0;
  std::size_t samples = 0;
  double tau = 0.0;  // sweeps; 1 when below resolution
  std::size_t stride = 1;
  double min_fraction = 0.0;
  std::vector<ObservableCheck> checks;
  bool pass = false;
};

struct ValidateOptions {
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  double sigmas = 3.0;
  // Bins below this exact fraction are not compared; 0 means 10/samples.
  double min_fraction = 0.0;
  std::uint64_t thermalization_sweeps = 100;
  std::uint64_t pilot_sweeps = 2000;
  StartKind start = StartKind::random_kr;
  // Replaces mcmc_step; used for negative controls.
  const StepFunction* step = nullptr;
  EnumerationOptions enumeration;
};

ValidationReport cmd_validate(int n, const ValidateOptions& options = {});
void write_report(std::ostream& out, const ValidationReport& report);

struct AnalyzeOptions {
  ThermalizationOptions thermalization;
  std::optional<std::size_t> discard;  // records; overrides the estimate
  std::optional<double> tau;           // records; overrides the fit
  std::vector<Indicator> tau_indicators{Indicator::n_min, Indicator::ordering_fraction};
  double r_bin = 0.01;
  bool gnuplot = false;
};

struct RunAnalysis {
  int n = 0;
  std::uint64_t sweep_moves = 0;
  std::uint64_t record_interval = 1;
  ThermalizationResult thermalization;
  std::size_t discard = 0;
  std::map<Indicator, FitResult> tau_fits;
  double tau = 0.0;  // records; the largest fitted tau, 0 below resolution
  std::size_t stride = 1;
  std::vector<ObservableRecord> samples;  // pooled, thinned, post-thermalization
  double acceptance = 0.0;
  HistogramWithErrors height;
  HistogramWithErrors r;
  HistogramWithErrors level2;
  HistogramWithErrors asym;   // N_max - N_min
  HistogramWithErrors n_min;
  HistogramWithErrors n_max;
  HistogramWithErrors chi;    // values 0, 1, -1 = abandoned
  MeanWithError mean_r;
  MeanWithError mean_height;
};

// Runs the whole post-processing chain on in-memory traces. Throws
// std::runtime_error when the traces never thermalize and no discard is
// given, or when fewer than two samples remain.
RunAnalysis analyze_traces(const TraceSet& traces, const AnalyzeOptions& options = {},
                           std::uint64_t record_interval = 1,
                           const std::vector<std::vector<TraceRow>>* rows = nullptr);

// Loads every trace of a run directory using its manifest.
TraceSet load_run(const std::filesystem::path& dir, RunConfig* config = nullptr,
                  std::vector<std::vector<TraceRow>>* rows = nullptr);

// Analyzes each run directory, writes per-n histograms under out/n<N>/ and
// the cross-n files heights_vs_n, mean_r_vs_n, chi_fraction, plus growth fits
// when three or more sizes are present.
std::vector<RunAnalysis> cmd_analyze(const std::vector<std::filesystem::path>& runs,
                                     const std::filesystem::path& out,
                                     const AnalyzeOptions& options = {},
                                     std::ostream* log = nullptr);

}  // namespace posetmc
