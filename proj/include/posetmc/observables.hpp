#pragma once

// Order invariants measured once per sweep.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "posetmc/poset.hpp"

namespace posetmc {

// Layeredness of the level partition: every pair of elements in non-adjacent
// levels must be related. The check is skipped (abandoned) for tall posets.
enum class Chi : std::int8_t { zero = 0, one = 1, abandoned = -1 };

std::string to_string(Chi c);
Chi parse_chi(const std::string& s);

struct ScalarInvariants {
  int relations = 0;   // R
  int links = 0;       // L
  double ordering_fraction = 0.0;  // r = R / C(n,2)
  double linking_fraction = 0.0;   // l = 4L/n^2 (n even), 4L/(n^2-1) (n odd)
  int n_min = 0;
  int n_max = 0;
};

struct ObservableRecord {
  std::uint64_t sweep = 0;
  int height = 0;
  int relations = 0;
  int links = 0;
  double ordering_fraction = 0.0;
  double linking_fraction = 0.0;
  int n_min = 0;
  int n_max = 0;
  std::vector<int> level_sizes;
  Chi chi = Chi::one;
  std::optional<std::vector<std::uint64_t>> interval_hist;

  friend bool operator==(const ObservableRecord&, const ObservableRecord&) = default;
};

struct RecordOptions {
  int h0 = 6;
  bool intervals = false;
};

// Level cutoff above which the chi check is abandoned: 7 for 13 <= n <= 24,
// 6 otherwise.
int default_h0(int n);

// Longest chain, by dynamic programming over the natural labeling.
int height(const Poset& p);

// Level partition: level 1 holds the minimal elements, level m the elements
// whose longest chain from below has m elements.
std::vector<std::vector<int>> levels(const Poset& p);

ScalarInvariants scalar_invariants(const Poset& p);

double ordering_fraction(int relations, int n);
double linking_fraction(int links, int n);

Chi chi_layered(const Poset& p, int h0);

// hist[k] = number of related pairs x < y with |I(x, y)| = k. Empty for an
// antichain.
std::vector<std::uint64_t> interval_size_histogram(const Poset& p);

ObservableRecord record(const Poset& p, std::uint64_t sweep, const RecordOptions& opts);
inline ObservableRecord record(const Poset& p, std::uint64_t sweep) {
  return record(p, sweep, RecordOptions{default_h0(p.size()), false});
}

}  // namespace posetmc
