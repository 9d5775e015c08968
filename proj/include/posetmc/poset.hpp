#pragma once

// Naturally labeled posets on {0, ..., n-1}.
//
// A Poset is an irreflexive, transitively closed relation whose matrix is
// strictly upper triangular (x precedes y implies x < y). Rows are packed bit
// sets; the future rows, past rows (transpose) and the link (Hasse) rows are
// all kept in sync so that cone queries and pair classification are row-level
// bit operations.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "posetmc/bits.hpp"

namespace posetmc {

class RandomStream;

// Dense n x n boolean matrix with packed rows; entry (x, y) means x precedes y.
// Holds arbitrary contents, so it is also the input type of validate().
class RelationMatrix {
 public:
  RelationMatrix() = default;
  explicit RelationMatrix(int n);

  int size() const { return n_; }
  int words() const { return words_; }

  bool get(int x, int y) const { return bits::test(row(x), y); }
  void set(int x, int y, bool value = true) {
    if (value)
      bits::set(row(x), y);
    else
      bits::reset(row(x), y);
  }

  bits::ConstRow row(int x) const {
    return {data_.data() + static_cast<std::size_t>(x) * words_, static_cast<std::size_t>(words_)};
  }
  bits::Row row(int x) {
    return {data_.data() + static_cast<std::size_t>(x) * words_, static_cast<std::size_t>(words_)};
  }

  // Number of true entries.
  int count() const;

  friend bool operator==(const RelationMatrix& a, const RelationMatrix& b) {
    return a.n_ == b.n_ && a.data_ == b.data_;
  }

 private:
  int n_ = 0;
  int words_ = 0;
  std::vector<bits::Word> data_;
};

enum class StartKind { chain, antichain, bipartite, random_kr };
enum class Direction { past, future };

std::string to_string(StartKind k);
StartKind parse_start_kind(const std::string& s);

// Classification of an ordered pair x < y.
struct PairClass {
  bool related = false;
  bool link = false;
  bool critical = false;
  bool suitable = false;
};

struct Violation {
  enum class Kind { reflexive, label_order, missing_transitive };
  Kind kind;
  int x;
  int y;
  int via = -1;  // interpolating element for missing_transitive

  std::string describe() const;
  friend bool operator==(const Violation&, const Violation&) = default;
};

class Poset {
 public:
  // The antichain on n elements.
  explicit Poset(int n = 0);

  // Throws std::invalid_argument listing the first violation when rel is not a
  // naturally labeled, transitively closed, irreflexive relation.
  static Poset from_relation(const RelationMatrix& rel);

  int size() const { return fut_.size(); }

  bool precedes(int x, int y) const { return fut_.get(x, y); }
  bool linked(int x, int y) const { return links_.get(x, y); }

  bits::ConstRow future(int x) const { return fut_.row(x); }
  bits::ConstRow past(int x) const { return past_.row(x); }
  bits::ConstRow link_row(int x) const { return links_.row(x); }

  const RelationMatrix& relation() const { return fut_; }
  // Cached covering relation, maintained incrementally by the edits below.
  const RelationMatrix& link_matrix() const { return links_; }

  int relation_count() const { return fut_.count(); }
  int link_count() const { return links_.count(); }

  // Edits used by the Monte Carlo moves. Each requires the stated pair class;
  // callers classify first.

  // (x, y) is a link: drop the single relation x < y.
  void remove_link_relation(int x, int y);
  // (x, y) is critical: adjoin the single relation x < y.
  void add_critical_relation(int x, int y);
  // (x, y) is a link: delete the Hasse edge and re-close.
  void remove_hasse_edge(int x, int y);
  // (x, y) is suitable: insert the Hasse edge, relating incpast(x) to incfut(y).
  void add_hasse_edge(int x, int y);

  // Enumeration support. Element k must be unrelated to everything and ideal
  // a down-closed subset of {0, ..., k-1}; k becomes the successor of exactly
  // the ideal. detach_above undoes it for an element with empty future.
  void attach_above(int k, bits::ConstRow ideal);
  void detach_above(int k);

  friend bool operator==(const Poset& a, const Poset& b) { return a.fut_ == b.fut_; }

 private:
  void rebuild_from_future();
  void refresh_link(int a, int b);

  RelationMatrix fut_;
  RelationMatrix past_;
  RelationMatrix links_;
  std::vector<bits::Word> scratch_;
};

// The four starting posets. rng is required for random_kr only.
Poset construct_standard(StartKind kind, int n, RandomStream* rng = nullptr);

std::vector<Violation> validate(const RelationMatrix& rel);

std::vector<int> cone(const Poset& p, int x, Direction dir, bool inclusive);

// Requires x < y < n.
PairClass classify_pair(const Poset& p, int x, int y);

// Smallest transitive superset of an irreflexive upper-triangular relation.
RelationMatrix transitive_closure(const RelationMatrix& rel);

// Covering relation computed from scratch (independent of the link cache).
RelationMatrix transitive_reduction(const Poset& p);

// Dual order relabeled by x -> n-1-x so that it stays naturally labeled.
Poset time_reverse(const Poset& p);

// Text form: "n" then one "x y" line per relation, ascending.
std::string to_text(const Poset& p);
Poset poset_from_text(const std::string& text);
void write_text(std::ostream& out, const Poset& p);
Poset read_text(std::istream& in);

}  // namespace posetmc
