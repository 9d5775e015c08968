#include "posetmc/run.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace posetmc {

namespace fs = std::filesystem;

std::string to_string(RngAlgorithm a) {
  return a == RngAlgorithm::taus2 ? "taus2" : "xoshiro128pp";
}

RngAlgorithm parse_rng_algorithm(const std::string& s) {
  if (s == "taus2") return RngAlgorithm::taus2;
  if (s == "xoshiro128pp") return RngAlgorithm::xoshiro128pp;
  throw std::invalid_argument("unknown rng '" + s + "' (taus2, xoshiro128pp)");
}

void RunConfig::validate() const {
  std::vector<std::string> bad;
  if (n < 2) bad.push_back("n must be at least 2 (got " + std::to_string(n) + ")");
  if (sweeps == 0) bad.push_back("sweeps must be positive");
  if (record_interval == 0) bad.push_back("record-interval must be positive");
  if (starts.empty()) bad.push_back("starts must not be empty");
  if (chains < 1) bad.push_back("chains must be at least 1 (got " + std::to_string(chains) + ")");
  if (checkpoint_interval == 0) bad.push_back("checkpoint-interval must be positive");
  if (h0 < 0) bad.push_back("h0 must be nonnegative (got " + std::to_string(h0) + ")");
  if (threads < 0) bad.push_back("threads must be nonnegative");
  if (out.empty()) bad.push_back("out must name a directory");
  for (std::size_t i = 0; i < starts.size(); ++i)
    for (std::size_t j = i + 1; j < starts.size(); ++j)
      if (starts[i] == starts[j]) bad.push_back("starts lists " + to_string(starts[i]) + " twice");
  if (bad.empty()) return;
  std::string msg = "invalid run config:";
  for (const auto& b : bad) msg += "\n  " + b;
  throw std::invalid_argument(msg);
}

std::uint64_t RunConfig::sweep_moves() const {
  return moves_per_sweep ? moves_per_sweep : default_moves_per_sweep(n);
}

int RunConfig::effective_h0() const { return h0 ? h0 : default_h0(n); }

std::string RunConfig::hash() const {
  std::ostringstream os;
  os << n << '|' << seed << '|' << sweep_moves() << '|' << record_interval << '|' << intervals
     << '|' << effective_h0() << '|' << to_string(rng);
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : os.str()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os << "n=" << n << '\n' << "seed=" << seed << '\n' << "starts=";
  for (std::size_t i = 0; i < starts.size(); ++i) os << (i ? "," : "") << to_string(starts[i]);
  os << '\n'
     << "sweeps=" << sweeps << '\n'
     << "moves-per-sweep=" << sweep_moves() << '\n'
     << "record-interval=" << record_interval << '\n'
     << "intervals=" << (intervals ? "true" : "false") << '\n'
     << "h0=" << effective_h0() << '\n'
     << "chains=" << chains << '\n'
     << "checkpoint-interval=" << checkpoint_interval << '\n'
     << "rng=" << to_string(rng) << '\n'
     << "out=" << out.string() << '\n';
  return os.str();
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("expected key=value, got '" + line + "'");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

RunConfig RunConfig::from_text(const std::string& text) {
  const auto kv = parse_key_values(text);
  RunConfig c;
  auto get = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  try {
    if (auto v = get("n")) c.n = std::stoi(*v);
    if (auto v = get("seed")) c.seed = std::stoull(*v);
    if (auto v = get("starts")) {
      c.starts.clear();
      std::istringstream s(*v);
      for (std::string part; std::getline(s, part, ',');) c.starts.push_back(parse_start_kind(part));
    }
    if (auto v = get("sweeps")) c.sweeps = std::stoull(*v);
    if (auto v = get("moves-per-sweep")) c.moves_per_sweep = std::stoull(*v);
    if (auto v = get("record-interval")) c.record_interval = std::stoull(*v);
    if (auto v = get("intervals")) c.intervals = (*v == "true" || *v == "1");
    if (auto v = get("h0")) c.h0 = std::stoi(*v);
    if (auto v = get("chains")) c.chains = std::stoi(*v);
    if (auto v = get("checkpoint-interval")) c.checkpoint_interval = std::stoull(*v);
    if (auto v = get("rng")) c.rng = parse_rng_algorithm(*v);
    if (auto v = get("out")) c.out = *v;
  } catch (const std::logic_error& e) {
    throw std::runtime_error(std::string("config: ") + e.what());
  }
  return c;
}

std::uint64_t chain_stream_index(StartKind start, int replica) {
  return (static_cast<std::uint64_t>(start) << 32) | static_cast<std::uint32_t>(replica);
}

std::string chain_name(StartKind start, int replica) {
  return to_string(start) + "_r" + std::to_string(replica);
}

std::string ChainCheckpoint::to_text() const {
  std::ostringstream os;
  os << "config_hash=" << config_hash << '\n'
     << "n=" << n << '\n'
     << "start=" << posetmc::to_string(start) << '\n'
     << "replica=" << replica << '\n'
     << "sweep=" << sweep << '\n'
     << "rng=" << rng_state << '\n'
     << "attempted=" << stats.attempted << '\n'
     << "accepted=" << stats.accepted << '\n'
     << "relation_attempted=" << stats.relation_attempted << '\n'
     << "relation_accepted=" << stats.relation_accepted << '\n'
     << "link_attempted=" << stats.link_attempted << '\n'
     << "link_accepted=" << stats.link_accepted << '\n'
     << "poset=";
  // The poset text goes on one line, whitespace separated.
  std::istringstream ps(posetmc::to_text(poset));
  std::string tok;
  for (bool first = true; ps >> tok; first = false) os << (first ? "" : " ") << tok;
  os << '\n';
  return os.str();
}

ChainCheckpoint ChainCheckpoint::from_text(const std::string& text) {
  const auto kv = parse_key_values(text);
  auto need = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error(std::string("checkpoint: missing ") + key);
    return it->second;
  };
  ChainCheckpoint c;
  try {
    c.config_hash = need("config_hash");
    c.n = std::stoi(need("n"));
    c.start = parse_start_kind(need("start"));
    c.replica = std::stoi(need("replica"));
    c.sweep = std::stoull(need("sweep"));
    c.rng_state = need("rng");
    RandomStream::deserialize(c.rng_state);
    c.stats.attempted = std::stoull(need("attempted"));
    c.stats.accepted = std::stoull(need("accepted"));
    c.stats.relation_attempted = std::stoull(need("relation_attempted"));
    c.stats.relation_accepted = std::stoull(need("relation_accepted"));
    c.stats.link_attempted = std::stoull(need("link_attempted"));
    c.stats.link_accepted = std::stoull(need("link_accepted"));
    c.poset = poset_from_text(need("poset"));
  } catch (const std::logic_error& e) {
    throw std::runtime_error(std::string("checkpoint: ") + e.what());
  }
  if (c.poset.size() != c.n) throw std::runtime_error("checkpoint: poset size does not match n");
  return c;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path trace_path(const fs::path& dir, StartKind start, int replica) {
  return dir / ("trace_" + chain_name(start, replica) + ".csv");
}

fs::path checkpoint_path(const fs::path& dir, StartKind start, int replica) {
  return dir / ("checkpoint_" + chain_name(start, replica) + ".txt");
}

fs::path manifest_path(const fs::path& dir) { return dir / "manifest.txt"; }

namespace {

std::string manifest_text(const RunConfig& c) {
  std::ostringstream os;
  os << "# posetmc run manifest\n"
     << "version=" << kVersion << '\n'
     << "compiler=" << __VERSION__ << '\n'
     << "config_hash=" << c.hash() << '\n'
     << c.to_text();
  for (StartKind s : c.starts)
    for (int r = 0; r < c.chains; ++r) {
      os << "chain." << chain_name(s, r) << ".seed=" << derive_seed(c.seed, chain_stream_index(s, r))
         << '\n'
         << "chain." << chain_name(s, r) << ".trace=" << trace_path(c.out, s, r).filename().string()
         << '\n';
    }
  return os.str();
}

struct ChainJob {
  StartKind start;
  int replica;
  std::optional<ChainCheckpoint> checkpoint;
};

void run_one(const RunConfig& config, const RunOptions& options, ChainJob& job,
             ChainSummary& summary, std::mutex& log_mu) {
  const fs::path tpath = trace_path(config.out, job.start, job.replica);
  const fs::path cpath = checkpoint_path(config.out, job.start, job.replica);
  const RecordOptions rec{config.effective_h0(), config.intervals};
  const std::uint64_t moves = config.sweep_moves();

  Poset p;
  RandomStream rng;
  SweepStats total;
  std::uint64_t done = 0;
  std::ofstream trace;

  if (job.checkpoint) {
    const auto& cp = *job.checkpoint;
    if (cp.config_hash != config.hash())
      throw std::runtime_error(cpath.string() + ": checkpoint belongs to a different config (" +
                               cp.config_hash + " vs " + config.hash() + ")");
    p = cp.poset;
    rng = RandomStream::deserialize(cp.rng_state);
    total = cp.stats;
    done = cp.sweep;
    // Rows past the checkpoint were written by the interrupted process and
    // will be regenerated.
    std::string kept = std::string(kTraceHeader) + '\n';
    for (const auto& row : read_trace_file(tpath.string()))
      if (row.obs.sweep <= done) kept += format_trace_row(row) + '\n';
    write_file_atomic(tpath, kept);
    trace.open(tpath, std::ios::app);
  } else {
    rng = RandomStream(derive_seed(config.seed, chain_stream_index(job.start, job.replica)),
                       config.rng);
    p = construct_standard(job.start, config.n, &rng);
    trace.open(tpath, std::ios::trunc);
    write_trace_header(trace);
  }
  if (!trace) throw std::runtime_error("cannot write " + tpath.string());

  auto checkpoint = [&](std::uint64_t sweep) {
    trace.flush();
    ChainCheckpoint cp;
    cp.config_hash = config.hash();
    cp.n = config.n;
    cp.start = job.start;
    cp.replica = job.replica;
    cp.sweep = sweep;
    cp.rng_state = rng.serialize();
    cp.stats = total;
    cp.poset = p;
    write_file_atomic(cpath, cp.to_text());
  };

  // Moves since the last recorded row; empty at every checkpoint because the
  // record interval divides the checkpoint interval.
  SweepStats pending;
  for (std::uint64_t s = done + 1; s <= config.sweeps; ++s) {
    const SweepStats st = sweep(p, rng, moves);
    total += st;
    pending += st;
    if (s % config.record_interval == 0) {
      write_trace_row(trace, TraceRow{record(p, s, rec), pending.attempted, pending.accepted});
      pending = {};
    }
    if (options.halt_after && s == *options.halt_after) {
      trace.flush();
      summary = {job.start, job.replica, tpath, s, total};
      return;
    }
    if (s % config.checkpoint_interval == 0 && s != config.sweeps) checkpoint(s);
  }
  checkpoint(config.sweeps);
  summary = {job.start, job.replica, tpath, config.sweeps, total};
  if (options.log) {
    std::lock_guard lock(log_mu);
    *options.log << chain_name(job.start, job.replica) << ": " << config.sweeps
                 << " sweeps, acceptance " << total.acceptance() << '\n';
  }
}

}  // namespace

std::vector<ChainSummary> cmd_run(const RunConfig& config, const RunOptions& options) {
  config.validate();
  if (config.checkpoint_interval % config.record_interval != 0)
    throw std::invalid_argument("invalid run config:\n  checkpoint-interval must be a multiple of "
                                "record-interval");
  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec || !fs::is_directory(config.out))
    throw std::runtime_error("cannot create output directory " + config.out.string() + ": " +
                             ec.message());

  std::vector<ChainJob> jobs;
  if (options.resume && fs::is_regular_file(*options.resume)) {
    auto cp = ChainCheckpoint::from_text(read_file(*options.resume));
    jobs.push_back({cp.start, cp.replica, std::move(cp)});
  } else {
    for (StartKind s : config.starts)
      for (int r = 0; r < config.chains; ++r) {
        ChainJob job{s, r, std::nullopt};
        if (options.resume) {
          const fs::path cp = checkpoint_path(*options.resume, s, r);
          if (!fs::exists(cp)) throw std::runtime_error("no checkpoint " + cp.string());
          job.checkpoint = ChainCheckpoint::from_text(read_file(cp));
        }
        jobs.push_back(std::move(job));
      }
  }
  write_file_atomic(manifest_path(config.out), manifest_text(config));

  std::vector<ChainSummary> summaries(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::mutex log_mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) {
      try {
        run_one(config, options, jobs[i], summaries[i], log_mu);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t threads =
      std::min<std::size_t>(jobs.size(), config.threads ? config.threads : hw);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return summaries;
}

std::vector<TraceRow> run_chain(int n, StartKind start, RandomStream& rng, std::uint64_t sweeps,
                                std::uint64_t moves_per_sweep, const RecordOptions& rec,
                                const StepFunction* step) {
  Poset p = construct_standard(start, n, &rng);
  std::vector<TraceRow> rows;
  rows.reserve(sweeps);
  for (std::uint64_t s = 1; s <= sweeps; ++s) {
    const SweepStats st = step ? sweep(p, rng, moves_per_sweep, *step) : sweep(p, rng, moves_per_sweep);
    rows.push_back({record(p, s, rec), st.attempted, st.accepted});
  }
  return rows;
}

ExactDistribution cmd_enumerate(int n, ExactObservable observable, std::ostream& out,
                                const EnumerationOptions& options) {
  auto d = exact_distribution(n, observable, options);
  write_csv(out, d);
  return d;
}

namespace {

ObservableCheck compare_bins(ExactObservable obs, const ExactDistribution& exact,
                             const std::vector<double>& samples, double min_fraction,
                             double sigmas) {
  ObservableCheck check;
  check.observable = obs;
  const auto hist = histogram_with_errors(samples);
  auto add = [&](long value, double p) {
    BinCheck b;
    b.value = value;
    b.exact = p;
    b.measured = hist.frequency(double(value));
    b.error = binomial_error(b.measured, hist.samples);
    const double d = std::fabs(b.measured - b.exact);
    b.deviation = b.error > 0 ? d / b.error : (d == 0 ? 0.0 : INFINITY);
    check.bins.push_back(b);
  };
  for (const auto& [value, count] : exact.counts) {
    const double p = exact.fraction(value);
    if (p >= min_fraction) add(value, p);
  }
  // A sampled value the enumeration never produced is an outright failure.
  for (double v : hist.values)
    if (!exact.counts.count(static_cast<long>(v))) add(static_cast<long>(v), 0.0);
  check.pass = true;
  for (const auto& b : check.bins) {
    if (&b == &check.bins.front() || b.deviation > check.worst.deviation) check.worst = b;
    check.pass = check.pass && b.deviation <= sigmas;
  }
  return check;
}

}  // namespace

ValidationReport cmd_validate(int n, const ValidateOptions& options) {
  if (n < 2) throw std::invalid_argument("validate: n must be at least 2");
  if (n > options.enumeration.bound)
    throw std::invalid_argument("validate: n=" + std::to_string(n) + " exceeds the oracle bound " +
                                std::to_string(options.enumeration.bound));
  if (options.samples < 2) throw std::invalid_argument("validate: need at least two samples");

  ValidationReport rep;
  rep.n = n;
  rep.samples = options.samples;
  rep.min_fraction = options.min_fraction > 0 ? options.min_fraction : 10.0 / options.samples;

  RandomStream rng(options.seed);
  Poset p = construct_standard(options.start, n, &rng);
  const std::uint64_t moves = default_moves_per_sweep(n);
  auto advance = [&](std::uint64_t sweeps) {
    for (std::uint64_t s = 0; s < sweeps; ++s) {
      if (options.step)
        sweep(p, rng, moves, *options.step);
      else
        sweep(p, rng, moves);
    }
  };
  advance(options.thermalization_sweeps);

  // Pilot run for the thinning stride.
  std::vector<double> pr, ph;
  for (std::uint64_t s = 0; s < options.pilot_sweeps; ++s) {
    advance(1);
    pr.push_back(p.relation_count());
    ph.push_back(height(p));
  }
  rep.tau = 0.0;
  bool resolved = false;
  for (const auto* s : {&pr, &ph}) {
    try {
      const auto fit = autocorrelation_time(*s);
      if (!fit.below_resolution) {
        rep.tau = std::max(rep.tau, fit.rate);
        resolved = true;
      }
    } catch (const std::invalid_argument&) {
      // constant pilot series: nothing to resolve
    }
  }
  if (!resolved) rep.tau = 1.0;
  rep.stride = resolved ? thinning_stride(rep.tau) : 1;

  std::vector<double> rs, hs;
  for (std::size_t i = 0; i < options.samples; ++i) {
    advance(rep.stride);
    rs.push_back(p.relation_count());
    hs.push_back(height(p));
  }
  const auto exact_r = exact_distribution(n, ExactObservable::relations, options.enumeration);
  const auto exact_h = exact_distribution(n, ExactObservable::height, options.enumeration);
  rep.checks.push_back(
      compare_bins(ExactObservable::relations, exact_r, rs, rep.min_fraction, options.sigmas));
  rep.checks.push_back(
      compare_bins(ExactObservable::height, exact_h, hs, rep.min_fraction, options.sigmas));
  rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(), [](const auto& c) { return c.pass; });
  return rep;
}

void write_report(std::ostream& out, const ValidationReport& r) {
  out << "n=" << r.n << " samples=" << r.samples << " tau=" << r.tau << " stride=" << r.stride
      << " min_fraction=" << r.min_fraction << '\n';
  for (const auto& c : r.checks) {
    out << to_string(c.observable) << ": " << (c.pass ? "pass" : "FAIL") << ", " << c.bins.size()
        << " bins, worst value " << c.worst.value << " exact " << c.worst.exact << " measured "
        << c.worst.measured << " +- " << c.worst.error << " (" << std::setprecision(3)
        << c.worst.deviation << " sigma)" << std::setprecision(6) << '\n';
  }
  out << (r.pass ? "PASS" : "FAIL") << '\n';
}

RunAnalysis analyze_traces(const TraceSet& traces, const AnalyzeOptions& options,
                           std::uint64_t record_interval,
                           const std::vector<std::vector<TraceRow>>* rows) {
  RunAnalysis a;
  a.n = traces.n;
  a.sweep_moves = traces.sweep_moves;
  a.record_interval = record_interval;
  if (traces.traces.empty()) throw std::runtime_error("analyze: no traces");

  if (options.discard) {
    a.discard = *options.discard;
    a.thermalization.thermalized = true;
    a.thermalization.index = a.discard;
  } else {
    a.thermalization = thermalization_estimate(traces, options.thermalization);
    if (!a.thermalization.thermalized)
      throw std::runtime_error("n=" + std::to_string(traces.n) +
                               " not thermalized: " + a.thermalization.reason);
    a.discard = a.thermalization.index;
  }

  std::vector<std::vector<ObservableRecord>> segments;
  for (const auto& t : traces.traces)
    if (t.records.size() > a.discard)
      segments.emplace_back(t.records.begin() + a.discard, t.records.end());
  if (segments.empty()) throw std::runtime_error("analyze: nothing left after discarding");

  if (options.tau) {
    a.tau = *options.tau;
  } else {
    for (Indicator ind : options.tau_indicators) {
      std::vector<std::vector<double>> s;
      for (const auto& seg : segments) s.push_back(series(seg, ind));
      try {
        const auto fit = autocorrelation_time(s);
        a.tau_fits[ind] = fit;
        if (!fit.below_resolution) a.tau = std::max(a.tau, fit.rate);
      } catch (const std::invalid_argument&) {
        // constant or too short: leave this indicator out
      }
    }
  }
  a.stride = thinning_stride(a.tau);
  for (const auto& seg : segments) {
    auto t = thin(seg, a.stride);
    a.samples.insert(a.samples.end(), t.begin(), t.end());
  }
  if (a.samples.size() < 2)
    throw std::runtime_error("analyze: only " + std::to_string(a.samples.size()) +
                             " samples after thinning");

  if (rows) {
    std::uint64_t att = 0, acc = 0;
    for (const auto& tr : *rows)
      for (std::size_t i = std::min(a.discard, tr.size()); i < tr.size(); ++i) {
        att += tr[i].attempted;
        acc += tr[i].accepted;
      }
    a.acceptance = att ? double(acc) / double(att) : 0.0;
  }

  std::vector<double> h, r, l2, asym, nmin, nmax, chi;
  for (const auto& s : a.samples) {
    h.push_back(s.height);
    r.push_back(s.ordering_fraction);
    l2.push_back(s.level_sizes.size() > 1 ? s.level_sizes[1] : 0);
    asym.push_back(s.n_max - s.n_min);
    nmin.push_back(s.n_min);
    nmax.push_back(s.n_max);
    chi.push_back(static_cast<int>(s.chi));
  }
  a.height = histogram_with_errors(h);
  std::vector<double> edges;
  const int bins = static_cast<int>(std::lround(1.0 / options.r_bin));
  for (int i = 0; i <= bins; ++i) edges.push_back(i * (1.0 / bins));
  a.r = histogram_with_errors(r, edges);
  a.level2 = histogram_with_errors(l2);
  a.asym = histogram_with_errors(asym);
  a.n_min = histogram_with_errors(nmin);
  a.n_max = histogram_with_errors(nmax);
  a.chi = histogram_with_errors(chi);
  a.mean_r = mean_with_error(r, 0.0);
  a.mean_height = mean_with_error(h, 0.0);
  return a;
}

TraceSet load_run(const fs::path& dir, RunConfig* config,
                  std::vector<std::vector<TraceRow>>* rows) {
  const fs::path mp = manifest_path(dir);
  if (!fs::exists(mp)) throw std::runtime_error("missing manifest " + mp.string());
  RunConfig c = RunConfig::from_text(read_file(mp));
  TraceSet ts;
  ts.n = c.n;
  ts.sweep_moves = c.sweep_moves();
  for (StartKind s : c.starts)
    for (int r = 0; r < c.chains; ++r) {
      const fs::path tp = trace_path(dir, s, r);
      auto tr = read_trace_file(tp.string());
      if (tr.empty()) throw std::runtime_error(tp.string() + ": no rows");
      ts.add(s, r, observables_of(tr));
      if (rows) rows->push_back(std::move(tr));
    }
  if (config) *config = c;
  return ts;
}

namespace {

void write_hist(const fs::path& path, const HistogramWithErrors& h, const std::string& label) {
  std::ostringstream os;
  os << "# " << label << " f err  (T=" << h.samples << ")\n" << std::setprecision(10);
  for (std::size_t i = 0; i < h.values.size(); ++i)
    os << h.values[i] << ' ' << h.f[i] << ' ' << h.err[i] << '\n';
  write_file_atomic(path, os.str());
}

void write_gnuplot(const fs::path& dir, const std::string& name, const std::string& body) {
  write_file_atomic(dir / (name + ".gp"),
                    "set terminal pngcairo size 800,600\nset output '" + name + ".png'\n" + body);
}

}  // namespace

std::vector<RunAnalysis> cmd_analyze(const std::vector<fs::path>& runs, const fs::path& out,
                                     const AnalyzeOptions& options, std::ostream* log) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out))
    throw std::runtime_error("cannot create output directory " + out.string());

  std::vector<RunAnalysis> results;
  std::vector<std::string> failures;
  for (const auto& dir : runs) {
    try {
      RunConfig c;
      std::vector<std::vector<TraceRow>> rows;
      const TraceSet ts = load_run(dir, &c, &rows);
      auto a = analyze_traces(ts, options, c.record_interval, &rows);
      const fs::path nd = out / ("n" + std::to_string(a.n));
      fs::create_directories(nd);
      write_hist(nd / "height_hist.dat", a.height, "height");
      write_hist(nd / "r_hist.dat", a.r, "r_bin_left");
      write_hist(nd / "level2_hist.dat", a.level2, "level2_size");
      write_hist(nd / "asym_hist.dat", a.asym, "N_max-N_min");
      write_hist(nd / "nmin_hist.dat", a.n_min, "N_min");
      write_hist(nd / "nmax_hist.dat", a.n_max, "N_max");

      std::ostringstream rep;
      rep << "run=" << dir.string() << '\n'
          << "n=" << a.n << '\n'
          << "sweep_moves=" << a.sweep_moves << '\n'
          << "record_interval=" << a.record_interval << '\n'
          << "T_therm_sweeps=" << a.discard * a.record_interval << '\n'
          << "thermalization_window_records=" << a.thermalization.window << '\n';
      for (const auto& [ind, fit] : a.tau_fits)
        rep << "tau_" << to_string(ind) << "_sweeps="
            << (fit.below_resolution ? std::string("below_resolution")
                                     : std::to_string(fit.rate * a.record_interval) + " +- " +
                                           std::to_string(fit.rate_err * a.record_interval))
            << " window=" << fit.window_first << ".." << fit.window_last
            << " residual=" << fit.residual_norm << '\n';
      rep << "tau_sweeps=" << a.tau * a.record_interval << '\n'
          << "stride_records=" << a.stride << '\n'
          << "samples=" << a.samples.size() << '\n'
          << "acceptance=" << a.acceptance << '\n'
          << "mean_r=" << a.mean_r.mean << " +- " << a.mean_r.error << '\n'
          << "mean_height=" << a.mean_height.mean << " +- " << a.mean_height.error << '\n';
      write_file_atomic(nd / "report.txt", rep.str());
      if (log) *log << rep.str() << '\n';
      results.push_back(std::move(a));
    } catch (const std::exception& e) {
      failures.push_back(dir.string() + ": " + e.what());
      if (log) *log << "error: " << failures.back() << '\n';
    }
  }
  if (results.empty()) {
    std::string msg = "analyze: no run could be analyzed";
    for (const auto& f : failures) msg += "\n  " + f;
    throw std::runtime_error(msg);
  }
  std::sort(results.begin(), results.end(), [](const auto& x, const auto& y) { return x.n < y.n; });

  int max_h = 0;
  for (const auto& a : results)
    for (double v : a.height.values) max_h = std::max(max_h, static_cast<int>(v));
  std::ostringstream hv, mr, cf, tt;
  hv << "# n";
  for (int h = 1; h <= max_h; ++h) hv << " f" << h << " err" << h;
  hv << '\n';
  mr << "# n mean_r err\n";
  cf << "# n f_chi0 err f_chi1 err f_abandoned err\n";
  tt << "# n T_therm_sweeps tau_sweeps\n";
  for (const auto& a : results) {
    hv << a.n;
    for (int h = 1; h <= max_h; ++h)
      hv << ' ' << a.height.frequency(h) << ' '
         << binomial_error(a.height.frequency(h), a.height.samples);
    hv << '\n';
    mr << a.n << ' ' << std::setprecision(10) << a.mean_r.mean << ' ' << a.mean_r.error << '\n';
    cf << a.n;
    for (int v : {0, 1, -1})
      cf << ' ' << a.chi.frequency(v) << ' ' << binomial_error(a.chi.frequency(v), a.chi.samples);
    cf << '\n';
    tt << a.n << ' ' << a.discard * a.record_interval << ' ' << a.tau * a.record_interval << '\n';
  }
  write_file_atomic(out / "heights_vs_n.dat", hv.str());
  write_file_atomic(out / "mean_r_vs_n.dat", mr.str());
  write_file_atomic(out / "chi_fraction.dat", cf.str());
  write_file_atomic(out / "therm_tau_vs_n.dat", tt.str());

  std::vector<GrowthPoint> therm, tau;
  for (const auto& a : results) {
    if (a.discard > 0) therm.push_back({double(a.n), double(a.discard * a.record_interval), 0.0});
    if (a.tau > 0) tau.push_back({double(a.n), a.tau * a.record_interval, 0.0});
  }
  std::ostringstream fits;
  auto fit_line = [&](const char* name, const std::vector<GrowthPoint>& pts) {
    if (pts.size() < 3) {
      fits << name << ": fewer than three sizes with a positive value\n";
      return;
    }
    const auto f = growth_fit(pts);
    fits << name << ": ln a = " << f.amplitude << " +- " << f.amplitude_err << ", b = " << f.rate
         << " +- " << f.rate_err << " over n in [" << f.window_first << ", " << f.window_last
         << "]\n";
  };
  fit_line("T_therm", therm);
  fit_line("tau", tau);
  write_file_atomic(out / "growth_fits.txt", fits.str());

  if (options.gnuplot) {
    std::ostringstream hp;
    hp << "set xlabel 'n'\nset ylabel 'fraction'\nset logscale y\nplot ";
    for (int h = 1; h <= max_h; ++h)
      hp << (h > 1 ? ", " : "") << "'heights_vs_n.dat' using 1:" << 2 * h << ":" << 2 * h + 1
         << " with yerrorlines title 'h=" << h << "'";
    write_gnuplot(out, "heights_vs_n", hp.str() + "\n");
    write_gnuplot(out, "mean_r_vs_n",
                  "set xlabel 'n'\nset ylabel 'mean r'\nplot 'mean_r_vs_n.dat' using 1:2:3 with "
                  "yerrorlines title 'mean r', 1.0/3 title '1/3'\n");
    write_gnuplot(out, "chi_fraction",
                  "set xlabel 'n'\nset ylabel 'fraction'\nplot 'chi_fraction.dat' using 1:2:3 with "
                  "yerrorlines title 'chi=0', '' using 1:4:5 with yerrorlines title 'chi=1', '' "
                  "using 1:6:7 with yerrorlines title 'abandoned'\n");
    for (const auto& a : results) {
      const std::string nd = "n" + std::to_string(a.n);
      for (const char* name : {"level2_hist", "asym_hist", "r_hist"})
        write_gnuplot(out, std::string(name) + "_" + nd,
                      "plot '" + nd + "/" + name + ".dat' using 1:2:3 with yerrorbars title '" +
                          name + " n=" + std::to_string(a.n) + "'\n");
    }
  }
  return results;
}

}  // namespace posetmc
