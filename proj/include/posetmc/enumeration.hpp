#pragma once

// Exhaustive generation of naturally labeled posets for small n.
//
// Every poset on {0..n-1} arises exactly once from a poset on {0..n-2} by
// choosing an order ideal of it as the past of element n-1, so enumeration is
// a depth-first walk over order ideals.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>

#include "posetmc/poset.hpp"

namespace posetmc {

inline constexpr int kDefaultEnumerationBound = 9;
inline constexpr int kBruteForceBound = 7;

using PosetVisitor = std::function<void(const Poset&)>;

struct EnumerationOptions {
  int bound = kDefaultEnumerationBound;
  // > 1 splits the walk over prefixes across threads; the visitor must then
  // tolerate concurrent calls.
  int threads = 1;
};

// Visits every poset in Omega_n once; returns |Omega_n|. Throws
// std::invalid_argument when n < 1 or n > options.bound.
std::uint64_t enumerate(int n, const PosetVisitor& visit, const EnumerationOptions& options = {});

// Calls f with the bit row of every down-closed subset, including empty and full.
void for_each_order_ideal(const Poset& p, const std::function<void(bits::ConstRow)>& f);
std::uint64_t order_ideals(const Poset& p);

// Counts transitively closed strictly-upper-triangular 0/1 matrices by
// exhausting all 2^C(n,2) of them. Independent of enumerate(). n <= 7.
std::uint64_t brute_force_count(int n);

enum class ExactObservable { height, relations, n_min, n_max, chi };

std::string to_string(ExactObservable o);
ExactObservable parse_exact_observable(const std::string& s);

struct ExactDistribution {
  int n = 0;
  ExactObservable observable = ExactObservable::height;
  std::map<long, std::uint64_t> counts;  // chi: 0, 1, -1 = abandoned
  std::uint64_t total = 0;

  double fraction(long value) const;
};

ExactDistribution exact_distribution(int n, ExactObservable observable,
                                     const EnumerationOptions& options = {});

// CSV with header "value,count,fraction".
void write_csv(std::ostream& out, const ExactDistribution& d);

}  // namespace posetmc
