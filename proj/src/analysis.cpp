#include "posetmc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace posetmc {

void TraceSet::add(StartKind start, int replica, std::vector<ObservableRecord> records) {
  for (const auto& r : records) {
    if (r.level_sizes.empty()) continue;
    const int total = std::accumulate(r.level_sizes.begin(), r.level_sizes.end(), 0);
    if (total != n)
      throw std::invalid_argument("trace for " + to_string(start) + " at sweep " +
                                  std::to_string(r.sweep) + " has " + std::to_string(total) +
                                  " elements, expected " + std::to_string(n));
  }
  traces.push_back({start, replica, std::move(records)});
}

std::size_t TraceSet::shortest() const {
  if (traces.empty()) return 0;
  std::size_t m = traces.front().records.size();
  for (const auto& t : traces) m = std::min(m, t.records.size());
  return m;
}

std::string to_string(Indicator i) {
  switch (i) {
    case Indicator::n_min: return "N_min";
    case Indicator::n_max: return "N_max";
    case Indicator::ordering_fraction: return "r";
    case Indicator::linking_fraction: return "l";
    case Indicator::height: return "height";
    case Indicator::relations: return "R";
    case Indicator::links: return "L";
  }
  return "?";
}

Indicator parse_indicator(const std::string& s) {
  for (auto i : {Indicator::n_min, Indicator::n_max, Indicator::ordering_fraction,
                 Indicator::linking_fraction, Indicator::height, Indicator::relations,
                 Indicator::links})
    if (s == to_string(i)) return i;
  throw std::invalid_argument("unknown indicator '" + s + "'");
}

double value_of(const ObservableRecord& r, Indicator i) {
  switch (i) {
    case Indicator::n_min: return r.n_min;
    case Indicator::n_max: return r.n_max;
    case Indicator::ordering_fraction: return r.ordering_fraction;
    case Indicator::linking_fraction: return r.linking_fraction;
    case Indicator::height: return r.height;
    case Indicator::relations: return r.relations;
    case Indicator::links: return r.links;
  }
  return 0.0;
}

std::vector<double> series(const std::vector<ObservableRecord>& records, Indicator i) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(value_of(r, i));
  return out;
}

namespace {

struct WindowedSeries {
  std::vector<double> prefix;  // prefix[i] = sum of the first i values
  double se = 0.0;             // standard error of one window mean

  double mean(std::size_t t, std::size_t w) const { return (prefix[t + w] - prefix[t]) / w; }
};

WindowedSeries windowed(const std::vector<double>& v, std::size_t w) {
  WindowedSeries s;
  s.prefix.assign(v.size() + 1, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) s.prefix[i + 1] = s.prefix[i] + v[i];
  const std::size_t half = v.size() / 2;
  const std::size_t batches = (v.size() - half) / w;
  std::vector<double> means;
  for (std::size_t b = 0; b < batches; ++b) means.push_back(s.mean(half + b * w, w));
  const double m = std::accumulate(means.begin(), means.end(), 0.0) / means.size();
  double ss = 0.0;
  for (double x : means) ss += (x - m) * (x - m);
  s.se = std::sqrt(ss / (means.size() - 1));
  return s;
}

// groups[g][s]: indicator g on trace s.
ThermalizationResult first_agreement(const std::vector<std::vector<std::vector<double>>>& groups,
                                     std::size_t window, double k) {
  ThermalizationResult res;
  res.window = window;
  if (window == 0) throw std::invalid_argument("thermalization: window must be positive");
  if (groups.empty() || groups.front().size() < 2) {
    res.reason = "need at least two traces";
    return res;
  }
  std::size_t len = groups.front().front().size();
  for (const auto& g : groups)
    for (const auto& s : g) len = std::min(len, s.size());
  if (len < 4 * window) {
    res.reason = "traces too short: " + std::to_string(len) + " records for window " +
                 std::to_string(window) + " (need 4 windows)";
    return res;
  }

  std::vector<std::vector<WindowedSeries>> ws;
  for (const auto& g : groups) {
    auto& row = ws.emplace_back();
    for (const auto& s : g) row.push_back(windowed(std::vector<double>(s.begin(), s.begin() + len), window));
  }

  // Non-overlapping windows: the estimate is resolved to one window.
  for (std::size_t t = 0; t + window <= len; t += window) {
    bool ok = true;
    for (std::size_t g = 0; g < ws.size() && ok; ++g)
      for (std::size_t i = 0; i < ws[g].size() && ok; ++i)
        for (std::size_t j = i + 1; j < ws[g].size() && ok; ++j) {
          const double d = std::fabs(ws[g][i].mean(t, window) - ws[g][j].mean(t, window));
          const double tol = k * std::hypot(ws[g][i].se, ws[g][j].se);
          const double scale = std::max({1.0, std::fabs(ws[g][i].mean(t, window))});
          ok = d <= tol + 1e-12 * scale;
        }
    if (ok) {
      res.thermalized = true;
      res.index = t;
      return res;
    }
  }
  res.reason = "traces never agree within " + std::to_string(k) + " standard errors";
  return res;
}

}  // namespace

ThermalizationResult thermalization_estimate(const TraceSet& traces,
                                             const ThermalizationOptions& options) {
  if (options.indicators.empty())
    throw std::invalid_argument("thermalization: no indicators given");
  const std::size_t window =
      options.window ? options.window : std::max<std::size_t>(1, traces.shortest() / 10);
  std::vector<std::vector<std::vector<double>>> groups;
  for (Indicator ind : options.indicators) {
    auto& g = groups.emplace_back();
    for (const auto& t : traces.traces) g.push_back(series(t.records, ind));
  }
  return first_agreement(groups, window, options.k);
}

ThermalizationResult thermalization_estimate(const std::vector<std::vector<double>>& series,
                                             std::size_t window, double k) {
  return first_agreement({series}, window, k);
}

std::vector<double> autocorrelation(const std::vector<std::vector<double>>& segments,
                                    std::size_t max_lag) {
  std::vector<std::vector<double>> centered;
  for (const auto& s : segments) {
    if (s.empty()) continue;
    const double m = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
    auto& c = centered.emplace_back(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) c[i] = s[i] - m;
  }
  std::vector<double> rho;
  double c0 = 0.0;
  for (std::size_t t = 0; t <= max_lag; ++t) {
    double sum = 0.0;
    std::size_t pairs = 0;
    for (const auto& c : centered) {
      if (c.size() <= t) continue;
      for (std::size_t i = 0; i + t < c.size(); ++i) sum += c[i] * c[i + t];
      pairs += c.size() - t;
    }
    if (pairs == 0) break;
    const double cov = sum / pairs;
    if (t == 0) {
      if (cov <= 0.0) throw std::invalid_argument("autocorrelation: series is constant");
      c0 = cov;
    }
    rho.push_back(cov / c0);
  }
  return rho;
}

namespace {

// Levenberg-Marquardt for y(t) = a exp(-t/tau).
FitResult fit_exponential(const std::vector<double>& t, const std::vector<double>& y,
                          double a0, double tau0) {
  const std::size_t m = t.size();
  double a = a0, tau = tau0;
  auto ssr = [&](double aa, double tt) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double r = y[i] - aa * std::exp(-t[i] / tt);
      s += r * r;
    }
    return s;
  };
  double cur = ssr(a, tau);
  double lambda = 1e-3;
  for (int iter = 0; iter < 200; ++iter) {
    double jtj00 = 0, jtj01 = 0, jtj11 = 0, g0 = 0, g1 = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double e = std::exp(-t[i] / tau);
      const double r = y[i] - a * e;
      const double ja = e;
      const double jt = a * e * t[i] / (tau * tau);
      jtj00 += ja * ja;
      jtj01 += ja * jt;
      jtj11 += jt * jt;
      g0 += ja * r;
      g1 += jt * r;
    }
    bool improved = false;
    while (lambda < 1e12) {
      const double d00 = jtj00 * (1 + lambda), d11 = jtj11 * (1 + lambda);
      const double det = d00 * d11 - jtj01 * jtj01;
      if (det == 0.0) break;
      const double da = (d11 * g0 - jtj01 * g1) / det;
      const double dt = (d00 * g1 - jtj01 * g0) / det;
      const double na = a + da, nt = tau + dt;
      if (nt > 0.0) {
        const double next = ssr(na, nt);
        if (next <= cur) {
          const bool converged = cur - next <= 1e-15 * std::max(cur, 1e-300) &&
                                 std::fabs(dt) <= 1e-12 * tau;
          a = na;
          tau = nt;
          cur = next;
          lambda = std::max(lambda / 10, 1e-12);
          improved = true;
          if (converged) iter = 1000;
          break;
        }
      }
      lambda *= 10;
    }
    if (!improved) break;
  }

  FitResult fit;
  fit.amplitude = a;
  fit.rate = tau;
  fit.window_first = t.front();
  fit.window_last = t.back();
  fit.residual_norm = std::sqrt(cur);
  if (m > 2) {
    double jtj00 = 0, jtj01 = 0, jtj11 = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double e = std::exp(-t[i] / tau);
      const double jt = a * e * t[i] / (tau * tau);
      jtj00 += e * e;
      jtj01 += e * jt;
      jtj11 += jt * jt;
    }
    const double det = jtj00 * jtj11 - jtj01 * jtj01;
    const double s2 = cur / double(m - 2);
    if (det > 0.0) {
      fit.amplitude_err = std::sqrt(s2 * jtj11 / det);
      fit.rate_err = std::sqrt(s2 * jtj00 / det);
    }
  }
  return fit;
}

}  // namespace

FitResult autocorrelation_time(const std::vector<double>& series,
                               const AutocorrelationOptions& options) {
  return autocorrelation_time(std::vector<std::vector<double>>{series}, options);
}

FitResult autocorrelation_time(const std::vector<std::vector<double>>& segments,
                               const AutocorrelationOptions& options) {
  if (segments.empty()) throw std::invalid_argument("autocorrelation_time: no data");
  std::size_t shortest = segments.front().size();
  for (const auto& s : segments) shortest = std::min(shortest, s.size());
  if (shortest < 10)
    throw std::invalid_argument("autocorrelation_time: need at least 10 samples per segment, got " +
                                std::to_string(shortest));
  const std::size_t max_lag = options.max_lag ? options.max_lag : shortest / 4;

  // Grow the lag range until the correlator drops below the floor.
  std::vector<double> rho;
  std::size_t last = 0;
  bool reached = false;
  for (std::size_t span = std::min<std::size_t>(64, max_lag);; span = std::min(2 * span, max_lag)) {
    rho = autocorrelation(segments, span);
    for (last = 1; last < rho.size(); ++last)
      if (rho[last] < options.floor) {
        reached = true;
        break;
      }
    if (reached || span == max_lag) break;
  }

  FitResult fit;
  if (rho.size() < 2 || rho[1] < options.floor) {
    fit.amplitude = rho.size() > 1 ? rho[1] : 0.0;
    fit.rate = 1.0;
    fit.window_first = fit.window_last = 1;
    fit.below_resolution = true;
    return fit;
  }
  // Fit lags 1 .. last-1 when the floor was crossed at `last`.
  const std::size_t end = reached ? last : rho.size();
  if (end == 2) {
    fit.amplitude = 1.0;
    fit.rate = -1.0 / std::log(rho[1]);
    fit.window_first = fit.window_last = 1;
    return fit;
  }
  std::vector<double> t, y;
  for (std::size_t i = 1; i < end; ++i) {
    t.push_back(double(i));
    y.push_back(rho[i]);
  }
  // Start from the log-linear fit through the window ends.
  const double tau0 = std::max(0.1, (t.back() - t.front()) / std::log(y.front() / y.back()));
  const double a0 = y.front() * std::exp(t.front() / tau0);
  fit = fit_exponential(t, y, std::isfinite(a0) ? a0 : 1.0, std::isfinite(tau0) ? tau0 : 1.0);
  fit.floor_reached = reached;
  return fit;
}

std::size_t thinning_stride(double tau) {
  if (!(tau >= 1.0)) return 1;
  return static_cast<std::size_t>(std::ceil(2.5 * tau));
}

std::size_t thinning_stride(const FitResult& fit) {
  return fit.below_resolution ? 1 : thinning_stride(fit.rate);
}

double binomial_error(double f, std::size_t samples) {
  if (samples < 2) throw std::invalid_argument("binomial_error: need at least two samples");
  return std::sqrt(std::max(0.0, f * (1.0 - f)) / double(samples - 1));
}

double HistogramWithErrors::frequency(double value) const {
  auto it = std::find(values.begin(), values.end(), value);
  return it == values.end() ? 0.0 : f[it - values.begin()];
}

double HistogramWithErrors::error(double value) const {
  auto it = std::find(values.begin(), values.end(), value);
  return it == values.end() ? 0.0 : err[it - values.begin()];
}

std::size_t HistogramWithErrors::mode() const {
  if (f.empty()) throw std::logic_error("mode of an empty histogram");
  return static_cast<std::size_t>(std::max_element(f.begin(), f.end()) - f.begin());
}

HistogramWithErrors histogram_with_errors(const std::vector<double>& samples) {
  if (samples.size() < 2)
    throw std::invalid_argument("histogram_with_errors: need at least two samples, got " +
                                std::to_string(samples.size()));
  std::map<double, std::size_t> counts;
  for (double v : samples) ++counts[v];
  HistogramWithErrors h;
  h.samples = samples.size();
  for (const auto& [v, c] : counts) {
    const double f = double(c) / double(h.samples);
    h.values.push_back(v);
    h.f.push_back(f);
    h.err.push_back(binomial_error(f, h.samples));
  }
  return h;
}

HistogramWithErrors histogram_with_errors(const std::vector<double>& samples,
                                          const std::vector<double>& edges) {
  if (samples.size() < 2)
    throw std::invalid_argument("histogram_with_errors: need at least two samples, got " +
                                std::to_string(samples.size()));
  if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()))
    throw std::invalid_argument("histogram_with_errors: need at least two increasing edges");
  const std::size_t bins = edges.size() - 1;
  std::vector<std::size_t> counts(bins, 0);
  for (double v : samples) {
    if (v < edges.front() || v > edges.back()) continue;
    std::size_t b = std::upper_bound(edges.begin(), edges.end(), v) - edges.begin() - 1;
    ++counts[std::min(b, bins - 1)];
  }
  HistogramWithErrors h;
  h.samples = samples.size();
  h.edges = edges;
  for (std::size_t b = 0; b < bins; ++b) {
    const double f = double(counts[b]) / double(h.samples);
    h.values.push_back(edges[b]);
    h.f.push_back(f);
    h.err.push_back(binomial_error(f, h.samples));
  }
  return h;
}

MeanWithError mean_with_error(const std::vector<double>& series, double tau) {
  if (series.empty()) throw std::invalid_argument("mean_with_error: empty series");
  const auto s = thin(series, thinning_stride(tau));
  MeanWithError r;
  r.samples = s.size();
  r.mean = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
  if (s.size() < 2) {
    r.error = std::numeric_limits<double>::infinity();
    return r;
  }
  double ss = 0.0;
  for (double v : s) ss += (v - r.mean) * (v - r.mean);
  r.error = std::sqrt(ss / (s.size() - 1)) / std::sqrt(double(s.size()));
  return r;
}

FitResult growth_fit(const std::vector<GrowthPoint>& points) {
  if (points.size() < 3)
    throw std::invalid_argument("growth_fit: need at least three points, got " +
                                std::to_string(points.size()));
  bool weighted = true;
  for (const auto& p : points) {
    if (!(p.value > 0.0))
      throw std::invalid_argument("growth_fit: nonpositive value at n=" + std::to_string(p.n));
    weighted = weighted && p.error > 0.0;
  }
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : points) {
    const double w = weighted ? std::pow(p.value / p.error, 2) : 1.0;
    const double y = std::log(p.value);
    sw += w;
    sx += w * p.n;
    sy += w * y;
    sxx += w * p.n * p.n;
    sxy += w * p.n * y;
  }
  const double det = sw * sxx - sx * sx;
  if (!(det > 0.0)) throw std::invalid_argument("growth_fit: need at least two distinct n");
  FitResult fit;
  fit.rate = (sw * sxy - sx * sy) / det;
  fit.amplitude = (sy - fit.rate * sx) / sw;

  double chi2 = 0.0;
  double lo = points.front().n, hi = points.front().n;
  for (const auto& p : points) {
    const double w = weighted ? std::pow(p.value / p.error, 2) : 1.0;
    const double r = std::log(p.value) - fit.amplitude - fit.rate * p.n;
    chi2 += w * r * r;
    lo = std::min(lo, p.n);
    hi = std::max(hi, p.n);
  }
  const double scale = weighted ? 1.0 : chi2 / double(points.size() - 2);
  fit.amplitude_err = std::sqrt(scale * sxx / det);
  fit.rate_err = std::sqrt(scale * sw / det);
  fit.residual_norm = std::sqrt(chi2);
  fit.window_first = lo;
  fit.window_last = hi;
  return fit;
}

double conservative_reuse(const std::map<int, double>& measured, int n) {
  auto it = measured.lower_bound(n);
  if (it == measured.end())
    throw std::out_of_range("no measured size at or above n=" + std::to_string(n));
  return it->second;
}

double kr_log2_estimate(int n, int n1, int n2, int n3) {
  if (n1 < 0 || n2 < 0 || n3 < 0 || n1 + n2 + n3 != n)
    throw std::invalid_argument("kr_log2_estimate: (" + std::to_string(n1) + "," +
                                std::to_string(n2) + "," + std::to_string(n3) +
                                ") is not a partition of " + std::to_string(n));
  return 2.0 * std::log2(kEta) + std::lgamma(n2 + 1.0) / std::log(2.0) +
         double(n2) * double(n - n2);
}

int kr_exponent_peak(int n) { return n / 2; }

int kr_estimate_peak(int n) {
  int best = 0;
  for (int n2 = 1; n2 <= n; ++n2)
    if (kr_log2_estimate(n, 0, n2, n - n2) > kr_log2_estimate(n, 0, best, n - best)) best = n2;
  return best;
}

double kr_r_density(double r) {
  if (r < 0.25 || r >= 0.375) return 0.0;
  return 4.0 / std::sqrt(3.0 - 8.0 * r);
}

double kr_r_of_bottom_fraction(double u) { return 0.25 + u - 2.0 * u * u; }

}  // namespace posetmc
