#pragma once

// Post-processing of chain traces: thermalization, autocorrelation, thinned
// histograms and means, fits across n, and the three-layer counting estimate.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "posetmc/observables.hpp"
#include "posetmc/poset.hpp"

namespace posetmc {

struct Trace {
  StartKind start = StartKind::random_kr;
  int replica = 0;
  std::vector<ObservableRecord> records;
};

struct TraceSet {
  int n = 0;
  std::uint64_t sweep_moves = 0;
  std::vector<Trace> traces;

  // Throws std::invalid_argument if a record's level sizes do not sum to n.
  void add(StartKind start, int replica, std::vector<ObservableRecord> records);
  std::size_t shortest() const;
};

enum class Indicator { n_min, n_max, ordering_fraction, linking_fraction, height, relations, links };

std::string to_string(Indicator i);
Indicator parse_indicator(const std::string& s);
double value_of(const ObservableRecord& r, Indicator i);
std::vector<double> series(const std::vector<ObservableRecord>& records, Indicator i);

struct ThermalizationOptions {
  std::vector<Indicator> indicators{Indicator::n_min, Indicator::ordering_fraction};
  std::size_t window = 0;  // records; 0 means 10% of the shortest trace
  double k = 3.0;
};

struct ThermalizationResult {
  bool thermalized = false;
  std::size_t index = 0;  // first record of the first agreeing window
  std::size_t window = 0;
  std::string reason;     // set when not thermalized
};

// Smallest multiple t of the window such that, for every indicator and every pair of traces, the
// means over records [t, t+window) differ by at most k combined standard
// errors. The standard error of a window mean is estimated per trace from
// batch means over its second half, where the chain is assumed stationary.
// Needs two traces of at least 4 windows each.
ThermalizationResult thermalization_estimate(const TraceSet& traces,
                                             const ThermalizationOptions& options = {});
ThermalizationResult thermalization_estimate(const std::vector<std::vector<double>>& series,
                                             std::size_t window, double k);

// For autocorrelation fits: amplitude = a, rate = tau (in lags).
// For growth fits: amplitude = ln a, rate = b.
struct FitResult {
  double amplitude = 0.0;
  double amplitude_err = 0.0;
  double rate = 0.0;
  double rate_err = 0.0;
  double window_first = 0.0;
  double window_last = 0.0;
  double residual_norm = 0.0;
  // Autocorrelation only: the lag-1 correlation is already below the noise
  // floor, so tau = 1 is an upper limit on the decay and a lower bound on
  // what the data can resolve.
  bool below_resolution = false;
  // Autocorrelation only: the correlator never fell below the floor.
  bool floor_reached = true;
};

struct AutocorrelationOptions {
  double floor = 0.05;        // fraction of the variance
  std::size_t max_lag = 0;    // 0: a quarter of the shortest segment
};

// Normalized autocorrelation rho(0..max_lag) averaged over segments, each
// centered on its own mean.
std::vector<double> autocorrelation(const std::vector<std::vector<double>>& segments,
                                    std::size_t max_lag);

// Fits a*exp(-t/tau) to rho(t) for t = 1 up to the lag before the first one
// with rho below the floor, by nonlinear least squares. Throws
// std::invalid_argument when a segment is shorter than 10 samples or all
// segments are constant.
FitResult autocorrelation_time(const std::vector<double>& series,
                               const AutocorrelationOptions& options = {});
FitResult autocorrelation_time(const std::vector<std::vector<double>>& segments,
                               const AutocorrelationOptions& options = {});

// Sample spacing for a given autocorrelation time: every 5*tau/2 samples,
// every sample when tau is below one.
std::size_t thinning_stride(double tau);
std::size_t thinning_stride(const FitResult& fit);

template <class T>
std::vector<T> thin(const std::vector<T>& v, std::size_t stride, std::size_t offset = 0) {
  std::vector<T> out;
  for (std::size_t i = offset; i < v.size(); i += stride) out.push_back(v[i]);
  return out;
}

struct HistogramWithErrors {
  std::vector<double> values;  // discrete values, or left bin edges
  std::vector<double> edges;   // empty for a discrete histogram; else values.size()+1 edges
  std::vector<double> f;
  std::vector<double> err;
  std::size_t samples = 0;

  bool binned() const { return !edges.empty(); }
  // Frequency of a discrete value; 0 if it never occurred.
  double frequency(double value) const;
  double error(double value) const;
  // Index of the most frequent bin (first on ties).
  std::size_t mode() const;
  // Smallest nonzero frequency a sample of this size can show.
  double resolution() const { return samples ? 1.0 / double(samples) : 0.0; }
};

// Binomial error sqrt(f(1-f)/(T-1)).
double binomial_error(double f, std::size_t samples);

// Frequencies of already thinned samples. Throws std::invalid_argument when
// fewer than two samples are given.
HistogramWithErrors histogram_with_errors(const std::vector<double>& samples);
// Binned on [edges[i], edges[i+1]); the last bin is closed. Samples outside
// the edges are counted in T but in no bin.
HistogramWithErrors histogram_with_errors(const std::vector<double>& samples,
                                          const std::vector<double>& edges);

struct MeanWithError {
  double mean = 0.0;
  double error = 0.0;
  std::size_t samples = 0;
};

// Mean over samples thinned by thinning_stride(tau), with error s/sqrt(T).
// Throws std::invalid_argument on an empty series.
MeanWithError mean_with_error(const std::vector<double>& series, double tau);

struct GrowthPoint {
  double n = 0.0;
  double value = 0.0;
  double error = 0.0;  // 0: unweighted
};

// Least squares of ln(value) = ln a + b n, weighted by (value/error)^2 when
// every point carries an error. Throws std::invalid_argument for fewer than
// three points or a nonpositive value.
FitResult growth_fit(const std::vector<GrowthPoint>& points);

// Value at the smallest measured n0 >= n. Throws std::out_of_range if none.
double conservative_reuse(const std::map<int, double>& measured, int n);

// Three-layer counting estimate.
inline constexpr double kEta = 3.4627;

// log2 of eta^2 * n2! * 2^(n2 (n - n2)). Throws std::invalid_argument unless
// n1 + n2 + n3 = n with all parts nonnegative.
double kr_log2_estimate(int n, int n1, int n2, int n3);
// n2 maximizing n2 (n - n2) alone, i.e. floor(n/2).
int kr_exponent_peak(int n);
// n2 maximizing the whole estimate. Larger than n/2 by about log2(n)/2,
// since n2! also grows with n2.
int kr_estimate_peak(int n);
// Large-n density of r when the bottom layer size is uniform on [0, n/2]:
// 4/sqrt(3 - 8r) on [1/4, 3/8), zero elsewhere.
double kr_r_density(double r);
// r for bottom-layer fraction u = n1/n in [0, 1/2]: 1/4 + u - 2u^2.
double kr_r_of_bottom_fraction(double u);

}  // namespace posetmc
