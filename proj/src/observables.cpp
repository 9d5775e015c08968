#include "posetmc/observables.hpp"

#include <algorithm>
#include <stdexcept>

namespace posetmc {

std::string to_string(Chi c) {
  switch (c) {
    case Chi::zero: return "0";
    case Chi::one: return "1";
    case Chi::abandoned: return "abandoned";
  }
  return "?";
}

Chi parse_chi(const std::string& s) {
  if (s == "0") return Chi::zero;
  if (s == "1") return Chi::one;
  if (s == "abandoned") return Chi::abandoned;
  throw std::invalid_argument("bad chi value '" + s + "'");
}

int default_h0(int n) { return (n >= 13 && n <= 24) ? 7 : 6; }

int height(const Poset& p) {
  const int n = p.size();
  std::vector<int> longest(n, 1);
  int h = 0;
  for (int x = 0; x < n; ++x) {
    bits::for_each(p.past(x), [&](int z) { longest[x] = std::max(longest[x], longest[z] + 1); });
    h = std::max(h, longest[x]);
  }
  return h;
}

namespace {

// Peels minimal elements; returns one bit row per level.
std::vector<std::vector<bits::Word>> level_rows(const Poset& p) {
  const int n = p.size();
  const int w = bits::words_for(n);
  std::vector<bits::Word> remaining(w, 0);
  for (int x = 0; x < n; ++x) bits::set(remaining, x);

  std::vector<std::vector<bits::Word>> out;
  while (!bits::none(remaining)) {
    std::vector<bits::Word> level(w, 0);
    bits::for_each(remaining, [&](int x) {
      if (!bits::intersects(p.past(x), remaining)) bits::set(level, x);
    });
    for (int k = 0; k < w; ++k) remaining[k] &= ~level[k];
    out.push_back(std::move(level));
  }
  return out;
}

}  // namespace

std::vector<std::vector<int>> levels(const Poset& p) {
  std::vector<std::vector<int>> out;
  for (const auto& row : level_rows(p)) {
    auto& lv = out.emplace_back();
    bits::for_each(row, [&](int x) { lv.push_back(x); });
  }
  return out;
}

double ordering_fraction(int relations, int n) {
  if (n < 2) return 0.0;
  return double(relations) / (double(n) * double(n - 1) / 2.0);
}

double linking_fraction(int links, int n) {
  if (n < 2) return 0.0;
  const double denom = (n % 2 == 0) ? double(n) * n : double(n) * n - 1.0;
  return 4.0 * links / denom;
}

ScalarInvariants scalar_invariants(const Poset& p) {
  const int n = p.size();
  ScalarInvariants s;
  s.relations = p.relation().count();
  s.links = transitive_reduction(p).count();
  s.ordering_fraction = ordering_fraction(s.relations, n);
  s.linking_fraction = linking_fraction(s.links, n);
  for (int x = 0; x < n; ++x) {
    s.n_min += bits::none(p.past(x));
    s.n_max += bits::none(p.future(x));
  }
  return s;
}

namespace {

Chi chi_from_levels(const Poset& p, const std::vector<std::vector<bits::Word>>& lv, int h0) {
  const int h = static_cast<int>(lv.size());
  if (h > h0) return Chi::abandoned;
  const int w = bits::words_for(p.size());
  // above[i] = union of levels i, i+1, ...
  std::vector<std::vector<bits::Word>> above(h + 1, std::vector<bits::Word>(w, 0));
  for (int i = h - 1; i >= 0; --i) {
    above[i] = above[i + 1];
    bits::or_into(above[i], lv[i]);
  }
  for (int i = 0; i + 2 < h; ++i) {
    bool ok = true;
    bits::for_each(lv[i], [&](int x) { ok = ok && bits::subset(above[i + 2], p.future(x)); });
    if (!ok) return Chi::zero;
  }
  return Chi::one;
}

}  // namespace

Chi chi_layered(const Poset& p, int h0) { return chi_from_levels(p, level_rows(p), h0); }

std::vector<std::uint64_t> interval_size_histogram(const Poset& p) {
  std::vector<std::uint64_t> hist;
  for (int x = 0; x < p.size(); ++x)
    bits::for_each(p.future(x), [&](int y) {
      const auto k = static_cast<std::size_t>(bits::count_and(p.future(x), p.past(y)));
      if (hist.size() <= k) hist.resize(k + 1, 0);
      ++hist[k];
    });
  return hist;
}

ObservableRecord record(const Poset& p, std::uint64_t sweep, const RecordOptions& opts) {
  const int n = p.size();
  ObservableRecord r;
  r.sweep = sweep;
  const auto lv = level_rows(p);
  r.height = static_cast<int>(lv.size());
  for (const auto& row : lv) r.level_sizes.push_back(bits::count(row));
  r.relations = p.relation_count();
  r.links = p.link_count();
  r.ordering_fraction = ordering_fraction(r.relations, n);
  r.linking_fraction = linking_fraction(r.links, n);
  r.n_min = lv.empty() ? 0 : r.level_sizes.front();
  for (int x = 0; x < n; ++x) r.n_max += bits::none(p.future(x));
  r.chi = chi_from_levels(p, lv, opts.h0);
  if (opts.intervals) r.interval_hist = interval_size_histogram(p);
  return r;
}

}  // namespace posetmc
