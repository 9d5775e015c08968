#pragma once

// The relation move, the link move, the fair-coin mixture of the two and the
// sweep driver. Both moves pick a pair x < y uniformly and either toggle it or
// leave the poset alone, so each is its own inverse with equal proposal
// probability; the stationary distribution is uniform over naturally labeled
// posets.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "posetmc/poset.hpp"
#include "posetmc/rng.hpp"

namespace posetmc {

enum class MoveKind : std::uint8_t { relation, link };
enum class MoveAction : std::uint8_t { noop, removed, added };

struct MoveOutcome {
  MoveKind kind = MoveKind::relation;
  int x = 0;
  int y = 0;
  MoveAction action = MoveAction::noop;

  bool changed() const { return action != MoveAction::noop; }
  friend bool operator==(const MoveOutcome&, const MoveOutcome&) = default;
};

struct SweepStats {
  std::uint64_t attempted = 0;
  std::uint64_t accepted = 0;
  std::uint64_t relation_attempted = 0;
  std::uint64_t relation_accepted = 0;
  std::uint64_t link_attempted = 0;
  std::uint64_t link_accepted = 0;

  void record(const MoveOutcome& o);
  SweepStats& operator+=(const SweepStats& o);
  double acceptance() const { return attempted ? double(accepted) / double(attempted) : 0.0; }
  friend bool operator==(const SweepStats&, const SweepStats&) = default;
};

// Both throw std::invalid_argument unless x < y < n.
MoveOutcome relation_move(Poset& p, int x, int y);
MoveOutcome link_move(Poset& p, int x, int y);

// Literal form of the link move on the relation matrix: delete every relation
// from incpast(x) to incfut(y), then restore what transitivity implies.
// Reference implementation for tests; link_move toggles the Hasse edge instead.
MoveOutcome link_move_stepwise(Poset& p, int x, int y);

inline std::uint64_t pair_count(int n) { return std::uint64_t(n) * std::uint64_t(n - 1) / 2; }

// Index k in [0, n(n-1)/2) -> (x, y) with x < y, ordered by y then x.
std::pair<int, int> decode_pair(std::uint64_t k);
inline std::uint64_t encode_pair(int x, int y) { return std::uint64_t(y) * (y - 1) / 2 + x; }

// One step of the mixed chain: a fair coin picks the move kind and a pair is
// drawn uniformly. Throws std::invalid_argument when n < 2.
MoveOutcome mcmc_step(Poset& p, RandomStream& rng);

using StepFunction = std::function<MoveOutcome(Poset&, RandomStream&)>;

inline std::uint64_t default_moves_per_sweep(int n) { return 2ull * n * n * n; }

SweepStats sweep(Poset& p, RandomStream& rng, std::uint64_t moves);
SweepStats sweep(Poset& p, RandomStream& rng, std::uint64_t moves, const StepFunction& step);

// Exact transition matrix of mcmc_step over every naturally labeled n-poset.
struct ExactKernel {
  int n = 0;
  std::vector<Poset> states;               // enumeration order
  std::vector<std::vector<double>> matrix;  // matrix[a][b] = Pr(a -> b)

  std::size_t size() const { return states.size(); }
  std::size_t index_of(const Poset& p) const;
  double max_asymmetry() const;
  bool strongly_connected() const;
  bool has_self_loop() const;
};

ExactKernel exact_kernel(int n, std::size_t max_states = 10000);

std::string to_string(MoveKind k);
std::string to_string(MoveAction a);

}  // namespace posetmc
