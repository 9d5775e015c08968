#include "posetmc/enumeration.hpp"

#include <iomanip>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "posetmc/observables.hpp"

namespace posetmc {

namespace {

// Depth-first walk over order ideals of the sub-poset on {0..k-1}: element x
// may join only once its whole past has.
template <class F>
void ideals_below(const Poset& p, int k, int x, std::vector<bits::Word>& ideal, F& f) {
  if (x == k) {
    f(bits::ConstRow(ideal));
    return;
  }
  ideals_below(p, k, x + 1, ideal, f);
  if (bits::subset(p.past(x), ideal)) {
    bits::set(ideal, x);
    ideals_below(p, k, x + 1, ideal, f);
    bits::reset(ideal, x);
  }
}

struct Walker {
  int n;
  const PosetVisitor& visit;
  std::uint64_t count = 0;

  // Elements below k are placed, elements from k on are isolated.
  void extend(Poset& p, int k) {
    if (k == n) {
      ++count;
      visit(p);
      return;
    }
    std::vector<bits::Word> ideal(bits::words_for(n), 0);
    auto place = [&](bits::ConstRow d) {
      p.attach_above(k, d);
      extend(p, k + 1);
      p.detach_above(k);
    };
    ideals_below(p, k, 0, ideal, place);
  }
};

}  // namespace

std::uint64_t enumerate(int n, const PosetVisitor& visit, const EnumerationOptions& options) {
  if (n < 1) throw std::invalid_argument("enumerate: n must be at least 1");
  if (n > options.bound)
    throw std::invalid_argument("enumerate: n=" + std::to_string(n) + " exceeds bound " +
                                std::to_string(options.bound));

  if (options.threads <= 1 || n <= 4) {
    Poset p(n);
    Walker w{n, visit};
    w.extend(p, 0);
    return w.count;
  }

  // Collect the prefixes on the first few elements, then deal them out.
  const int depth = std::min(n - 1, 5);
  std::vector<Poset> prefixes;
  {
    const PosetVisitor keep = [&](const Poset& q) { prefixes.push_back(q); };
    Poset p(n);
    Walker w{depth, keep};
    w.extend(p, 0);
  }
  const int threads = options.threads;
  std::vector<std::uint64_t> counts(threads, 0);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      Walker w{n, visit};
      for (std::size_t i = t; i < prefixes.size(); i += threads) {
        Poset p = prefixes[i];
        w.extend(p, depth);
      }
      counts[t] = w.count;
    });
  for (auto& th : pool) th.join();
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  return total;
}

void for_each_order_ideal(const Poset& p, const std::function<void(bits::ConstRow)>& f) {
  std::vector<bits::Word> ideal(bits::words_for(p.size()), 0);
  ideals_below(p, p.size(), 0, ideal, f);
}

std::uint64_t order_ideals(const Poset& p) {
  std::uint64_t c = 0;
  auto tally = [&](bits::ConstRow) { ++c; };
  std::vector<bits::Word> ideal(bits::words_for(p.size()), 0);
  ideals_below(p, p.size(), 0, ideal, tally);
  return c;
}

std::uint64_t brute_force_count(int n) {
  if (n < 1 || n > kBruteForceBound)
    throw std::invalid_argument("brute_force_count: n must be in [1, " +
                                std::to_string(kBruteForceBound) + "]");
  const int pairs = n * (n - 1) / 2;
  std::uint64_t count = 0;
  std::vector<unsigned> row(n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pairs); ++mask) {
    std::fill(row.begin(), row.end(), 0u);
    int bit = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j, ++bit)
        if ((mask >> bit) & 1u) row[i] |= 1u << j;
    bool closed = true;
    for (int i = 0; i < n && closed; ++i)
      for (int j = i + 1; j < n && closed; ++j)
        if (((row[i] >> j) & 1u) && (row[j] & ~row[i])) closed = false;
    count += closed;
  }
  return count;
}

std::string to_string(ExactObservable o) {
  switch (o) {
    case ExactObservable::height: return "height";
    case ExactObservable::relations: return "R";
    case ExactObservable::n_min: return "N_min";
    case ExactObservable::n_max: return "N_max";
    case ExactObservable::chi: return "chi";
  }
  return "?";
}

ExactObservable parse_exact_observable(const std::string& s) {
  if (s == "height") return ExactObservable::height;
  if (s == "R" || s == "relations") return ExactObservable::relations;
  if (s == "N_min" || s == "nmin") return ExactObservable::n_min;
  if (s == "N_max" || s == "nmax") return ExactObservable::n_max;
  if (s == "chi") return ExactObservable::chi;
  throw std::invalid_argument("unknown observable '" + s + "'");
}

double ExactDistribution::fraction(long value) const {
  auto it = counts.find(value);
  return (it == counts.end() || total == 0) ? 0.0 : double(it->second) / double(total);
}

ExactDistribution exact_distribution(int n, ExactObservable observable,
                                     const EnumerationOptions& options) {
  ExactDistribution d;
  d.n = n;
  d.observable = observable;
  const int h0 = default_h0(n);
  std::mutex mu;
  const PosetVisitor tally = [&](const Poset& p) {
    long v = 0;
    switch (observable) {
      case ExactObservable::height: v = height(p); break;
      case ExactObservable::relations: v = p.relation_count(); break;
      case ExactObservable::n_min: {
        for (int x = 0; x < n; ++x) v += bits::none(p.past(x));
        break;
      }
      case ExactObservable::n_max: {
        for (int x = 0; x < n; ++x) v += bits::none(p.future(x));
        break;
      }
      case ExactObservable::chi: v = static_cast<long>(chi_layered(p, h0)); break;
    }
    if (options.threads > 1) {
      std::lock_guard lock(mu);
      ++d.counts[v];
    } else {
      ++d.counts[v];
    }
  };
  d.total = enumerate(n, tally, options);
  return d;
}

void write_csv(std::ostream& out, const ExactDistribution& d) {
  out << "value,count,fraction\n";
  for (const auto& [value, count] : d.counts) {
    if (d.observable == ExactObservable::chi)
      out << to_string(static_cast<Chi>(value));
    else
      out << value;
    out << ',' << count << ',' << std::setprecision(17) << d.fraction(value) << '\n';
  }
}

}  // namespace posetmc
