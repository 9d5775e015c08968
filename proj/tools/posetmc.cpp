// posetmc: sample naturally labeled posets, enumerate small ones exactly,
// validate the sampler against enumeration, and analyze traces.
//
// Every run flag can also come from the environment as POSETMC_<FLAG>
// (upper case, dashes as underscores), or from a key=value file given with
// --config; command-line flags win over both.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "posetmc/run.hpp"

namespace {

std::string env_name(const std::string& flag) {
  std::string s = "POSETMC_";
  for (char c : flag) s += c == '-' ? '_' : static_cast<char>(std::toupper(c));
  return s;
}

std::vector<posetmc::StartKind> parse_starts(const std::vector<std::string>& names) {
  std::vector<posetmc::StartKind> out;
  for (const auto& name : names) {
    std::stringstream s(name);
    for (std::string part; std::getline(s, part, ',');)
      if (!part.empty()) out.push_back(posetmc::parse_start_kind(part));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace posetmc;
  CLI::App app{"Uniform Monte Carlo sampling of naturally labeled posets"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // run
  RunConfig rc;
  std::vector<std::string> start_names;
  std::string rng_name = "taus2";
  std::string resume;
  auto* run = app.add_subcommand("run", "Run chains from the standard starting posets");
  run->set_config("--config", "", "key=value file with run flags");
  run->allow_config_extras(true);
  auto opt = [&](CLI::Option* o, const std::string& flag) { return o->envname(env_name(flag)); };
  opt(run->add_option("--n", rc.n, "Number of elements")->required(), "n");
  opt(run->add_option("--seed", rc.seed, "Master seed"), "seed");
  opt(run->add_option("--sweeps", rc.sweeps, "Sweeps per chain")->required(), "sweeps");
  opt(run->add_option("--moves-per-sweep", rc.moves_per_sweep, "Attempted moves per sweep (default 2n^3)"),
      "moves-per-sweep");
  opt(run->add_option("--starts", start_names,
                      "Starting posets: chain, antichain, bipartite, random_kr (default all)")
          ->delimiter(','),
      "starts");
  opt(run->add_option("--record-interval", rc.record_interval, "Sweeps between trace rows"),
      "record-interval");
  opt(run->add_flag("--intervals", rc.intervals, "Record interval-size histograms"), "intervals");
  opt(run->add_option("--h0", rc.h0, "Level cutoff for the layeredness check (default by n)"), "h0");
  opt(run->add_option("--out", rc.out, "Output directory")->required(), "out");
  opt(run->add_option("--resume", resume, "Checkpoint file, or run directory to resume every chain"),
      "resume");
  opt(run->add_option("--chains", rc.chains, "Independent replicas per start"), "chains");
  opt(run->add_option("--checkpoint-interval", rc.checkpoint_interval, "Sweeps between checkpoints"),
      "checkpoint-interval");
  opt(run->add_option("--threads", rc.threads, "Worker threads (default: hardware)"), "threads");
  opt(run->add_option("--rng", rng_name, "taus2 or xoshiro128pp"), "rng");

  // enumerate
  int en = 0;
  std::string observable = "height";
  std::string enum_out;
  int enum_threads = 1;
  auto* enumerate = app.add_subcommand("enumerate", "Exact distribution of an observable over all n-posets");
  enumerate->add_option("--n", en, "Number of elements (at most 9)")->required();
  enumerate->add_option("--observable", observable, "height, R, N_min, N_max or chi");
  enumerate->add_option("--out", enum_out, "CSV file (default: standard output)");
  enumerate->add_option("--threads", enum_threads, "Worker threads");

  // validate
  int vn = 9;
  ValidateOptions vo;
  auto* validate = app.add_subcommand("validate", "Compare sampled histograms with exact enumeration");
  validate->add_option("--n", vn, "Number of elements (at most 9)");
  validate->add_option("--samples", vo.samples, "Thinned samples");
  validate->add_option("--seed", vo.seed, "Seed");
  validate->add_option("--sigmas", vo.sigmas, "Allowed deviation in error bars");
  validate->add_option("--min-fraction", vo.min_fraction,
                       "Skip bins with smaller exact fraction (default 10/samples)");
  validate->add_option("--threads", vo.enumeration.threads, "Enumeration threads");

  // analyze
  std::vector<std::string> runs;
  std::string analyze_out;
  AnalyzeOptions ao;
  std::size_t window = 0, discard = 0;
  double tau = -1.0;
  auto* analyze = app.add_subcommand("analyze", "Thermalization, autocorrelation and figure data");
  analyze->add_option("runs", runs, "Run directories")->required()->check(CLI::ExistingDirectory);
  analyze->add_option("--out", analyze_out, "Output directory")->required();
  analyze->add_option("--window", window, "Thermalization window in records (default 10%)");
  analyze->add_option("--k", ao.thermalization.k, "Thermalization tolerance in standard errors");
  analyze->add_option("--discard", discard, "Override: records discarded per trace");
  analyze->add_option("--tau", tau, "Override: autocorrelation time in records");
  analyze->add_option("--r-bin", ao.r_bin, "Bin width of the r histogram");
  analyze->add_flag("--gnuplot", ao.gnuplot, "Also write gnuplot scripts");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (!start_names.empty()) rc.starts = parse_starts(start_names);
      rc.rng = parse_rng_algorithm(rng_name);
      RunOptions ro;
      ro.log = &std::cerr;
      if (!resume.empty()) ro.resume = resume;
      const auto summaries = cmd_run(rc, ro);
      for (const auto& s : summaries)
        std::cout << s.trace.string() << ' ' << s.sweeps << " sweeps acceptance "
                  << s.stats.acceptance() << '\n';
      std::cout << "manifest " << manifest_path(rc.out).string() << '\n';
    } else if (*enumerate) {
      EnumerationOptions eo;
      eo.threads = enum_threads;
      const auto obs = parse_exact_observable(observable);
      if (enum_out.empty()) {
        cmd_enumerate(en, obs, std::cout, eo);
      } else {
        std::ofstream out(enum_out);
        if (!out) throw std::runtime_error("cannot write " + enum_out);
        const auto d = cmd_enumerate(en, obs, out, eo);
        std::cerr << "n=" << en << " total=" << d.total << '\n';
      }
    } else if (*validate) {
      const auto rep = cmd_validate(vn, vo);
      write_report(std::cout, rep);
      return rep.pass ? 0 : 1;
    } else if (*analyze) {
      ao.thermalization.window = window;
      if (analyze->count("--discard")) ao.discard = discard;
      if (tau >= 0) ao.tau = tau;
      std::vector<std::filesystem::path> dirs(runs.begin(), runs.end());
      cmd_analyze(dirs, analyze_out, ao, &std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
