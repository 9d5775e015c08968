#include "posetmc/moves.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "posetmc/enumeration.hpp"

namespace posetmc {

namespace {

void require_pair(const Poset& p, int x, int y, const char* what) {
  if (x < 0 || y >= p.size() || x >= y)
    throw std::invalid_argument(std::string(what) + ": need 0 <= x < y < n, got (" +
                                std::to_string(x) + "," + std::to_string(y) + ") with n=" +
                                std::to_string(p.size()));
}

bool is_critical(const Poset& p, int x, int y) {
  return bits::subset(p.past(x), p.past(y)) && bits::subset(p.future(y), p.future(x));
}

// No link from incpast(x) into incfut(y). Assumes x and y unrelated.
bool is_suitable(const Poset& p, int x, int y) {
  auto fut_y = p.future(y);
  auto reaches = [&](int z) {
    return bits::test(p.link_row(z), y) || bits::intersects(p.link_row(z), fut_y);
  };
  if (reaches(x)) return false;
  bool ok = true;
  bits::for_each(p.past(x), [&](int z) { ok = ok && !reaches(z); });
  return ok;
}

MoveOutcome relation_move_unchecked(Poset& p, int x, int y) {
  MoveOutcome o{MoveKind::relation, x, y, MoveAction::noop};
  if (p.linked(x, y)) {
    p.remove_link_relation(x, y);
    o.action = MoveAction::removed;
  } else if (!p.precedes(x, y) && is_critical(p, x, y)) {
    p.add_critical_relation(x, y);
    o.action = MoveAction::added;
  }
  return o;
}

MoveOutcome link_move_unchecked(Poset& p, int x, int y) {
  MoveOutcome o{MoveKind::link, x, y, MoveAction::noop};
  if (p.linked(x, y)) {
    p.remove_hasse_edge(x, y);
    o.action = MoveAction::removed;
  } else if (!p.precedes(x, y) && is_suitable(p, x, y)) {
    p.add_hasse_edge(x, y);
    o.action = MoveAction::added;
  }
  return o;
}

}  // namespace

void SweepStats::record(const MoveOutcome& o) {
  ++attempted;
  const bool acc = o.changed();
  accepted += acc;
  if (o.kind == MoveKind::relation) {
    ++relation_attempted;
    relation_accepted += acc;
  } else {
    ++link_attempted;
    link_accepted += acc;
  }
}

SweepStats& SweepStats::operator+=(const SweepStats& o) {
  attempted += o.attempted;
  accepted += o.accepted;
  relation_attempted += o.relation_attempted;
  relation_accepted += o.relation_accepted;
  link_attempted += o.link_attempted;
  link_accepted += o.link_accepted;
  return *this;
}

MoveOutcome relation_move(Poset& p, int x, int y) {
  require_pair(p, x, y, "relation_move");
  return relation_move_unchecked(p, x, y);
}

MoveOutcome link_move(Poset& p, int x, int y) {
  require_pair(p, x, y, "link_move");
  return link_move_unchecked(p, x, y);
}

MoveOutcome link_move_stepwise(Poset& p, int x, int y) {
  require_pair(p, x, y, "link_move_stepwise");
  MoveOutcome o{MoveKind::link, x, y, MoveAction::noop};
  const PairClass c = classify_pair(p, x, y);
  const auto lower = cone(p, x, Direction::past, true);
  const auto upper = cone(p, y, Direction::future, true);
  RelationMatrix rel = p.relation();
  if (c.link) {
    for (int a : lower)
      for (int b : upper) rel.set(a, b, false);
    rel = transitive_closure(rel);
    o.action = MoveAction::removed;
  } else if (c.suitable) {
    for (int a : lower)
      for (int b : upper) rel.set(a, b, true);
    o.action = MoveAction::added;
  } else {
    return o;
  }
  p = Poset::from_relation(rel);
  return o;
}

std::pair<int, int> decode_pair(std::uint64_t k) {
  auto y = static_cast<std::uint64_t>((1.0 + std::sqrt(1.0 + 8.0 * double(k))) / 2.0);
  while (y * (y - 1) / 2 > k) --y;
  while ((y + 1) * y / 2 <= k) ++y;
  return {static_cast<int>(k - y * (y - 1) / 2), static_cast<int>(y)};
}

namespace {

// decode_pair tabulated for the current n; one table per thread.
const std::vector<std::pair<int, int>>& pair_table(int n) {
  thread_local std::vector<std::pair<int, int>> table;
  thread_local int table_n = -1;
  if (table_n != n) {
    table.clear();
    for (int y = 1; y < n; ++y)
      for (int x = 0; x < y; ++x) table.emplace_back(x, y);
    table_n = n;
  }
  return table;
}

// One draw covers both the coin (low bit) and the pair.
inline MoveOutcome step_with(Poset& p, RandomStream& rng,
                             const std::vector<std::pair<int, int>>& pairs) {
  const std::uint32_t draw = rng.uniform_index(static_cast<std::uint32_t>(2 * pairs.size()));
  const auto [x, y] = pairs[draw >> 1];
  return (draw & 1u) ? link_move_unchecked(p, x, y) : relation_move_unchecked(p, x, y);
}

}  // namespace

MoveOutcome mcmc_step(Poset& p, RandomStream& rng) {
  const int n = p.size();
  if (n < 2) throw std::invalid_argument("mcmc_step: need at least two elements");
  return step_with(p, rng, pair_table(n));
}

SweepStats sweep(Poset& p, RandomStream& rng, std::uint64_t moves) {
  if (moves == 0) throw std::invalid_argument("sweep: moves must be positive");
  if (p.size() < 2) throw std::invalid_argument("sweep: need at least two elements");
  const auto& pairs = pair_table(p.size());
  SweepStats s;
  for (std::uint64_t i = 0; i < moves; ++i) s.record(step_with(p, rng, pairs));
  return s;
}

SweepStats sweep(Poset& p, RandomStream& rng, std::uint64_t moves, const StepFunction& step) {
  if (moves == 0) throw std::invalid_argument("sweep: moves must be positive");
  SweepStats s;
  for (std::uint64_t i = 0; i < moves; ++i) s.record(step(p, rng));
  return s;
}

std::string to_string(MoveKind k) { return k == MoveKind::relation ? "relation" : "link"; }

std::string to_string(MoveAction a) {
  switch (a) {
    case MoveAction::noop: return "noop";
    case MoveAction::removed: return "removed";
    case MoveAction::added: return "added";
  }
  return "?";
}

// ---------------------------------------------------------------------------

namespace {

// Upper-triangle bits of a poset with n <= 11 packed into one word.
std::uint64_t state_key(const Poset& p) {
  std::uint64_t key = 0;
  const int n = p.size();
  for (int y = 1; y < n; ++y)
    for (int x = 0; x < y; ++x)
      if (p.precedes(x, y)) key |= std::uint64_t{1} << encode_pair(x, y);
  return key;
}

}  // namespace

std::size_t ExactKernel::index_of(const Poset& p) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i] == p) return i;
  throw std::out_of_range("ExactKernel: poset not in state space");
}

double ExactKernel::max_asymmetry() const {
  double worst = 0.0;
  for (std::size_t a = 0; a < size(); ++a)
    for (std::size_t b = a + 1; b < size(); ++b)
      worst = std::max(worst, std::fabs(matrix[a][b] - matrix[b][a]));
  return worst;
}

bool ExactKernel::strongly_connected() const {
  const std::size_t m = size();
  if (m == 0) return false;
  auto reach_all = [&](bool forward) {
    std::vector<char> seen(m, 0);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = 1;
    std::size_t count = 1;
    while (!q.empty()) {
      const std::size_t a = q.front();
      q.pop();
      for (std::size_t b = 0; b < m; ++b) {
        const double w = forward ? matrix[a][b] : matrix[b][a];
        if (b != a && w > 0.0 && !seen[b]) {
          seen[b] = 1;
          ++count;
          q.push(b);
        }
      }
    }
    return count == m;
  };
  return reach_all(true) && reach_all(false);
}

bool ExactKernel::has_self_loop() const {
  for (std::size_t a = 0; a < size(); ++a)
    if (matrix[a][a] > 0.0) return true;
  return false;
}

ExactKernel exact_kernel(int n, std::size_t max_states) {
  if (n < 2) throw std::invalid_argument("exact_kernel: need n >= 2");
  if (n > 11) throw std::invalid_argument("exact_kernel: n too large to key states");

  ExactKernel k;
  k.n = n;
  std::unordered_map<std::uint64_t, std::size_t> index;
  enumerate(n, [&](const Poset& p) {
    if (k.states.size() >= max_states)
      throw std::invalid_argument("exact_kernel: state space exceeds " + std::to_string(max_states));
    index.emplace(state_key(p), k.states.size());
    k.states.push_back(p);
  });

  const std::size_t m = k.states.size();
  k.matrix.assign(m, std::vector<double>(m, 0.0));
  const double weight = 1.0 / (2.0 * double(pair_count(n)));
  for (std::size_t a = 0; a < m; ++a) {
    for (int y = 1; y < n; ++y)
      for (int x = 0; x < y; ++x)
        for (MoveKind kind : {MoveKind::relation, MoveKind::link}) {
          Poset q = k.states[a];
          if (kind == MoveKind::relation)
            relation_move(q, x, y);
          else
            link_move(q, x, y);
          k.matrix[a][index.at(state_key(q))] += weight;
        }
  }
  return k;
}

}  // namespace posetmc
