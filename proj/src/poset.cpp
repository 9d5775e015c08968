#include "posetmc/poset.hpp"

#include <algorithm>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "posetmc/rng.hpp"

namespace posetmc {

RelationMatrix::RelationMatrix(int n)
    : n_(n), words_(bits::words_for(n)), data_(static_cast<std::size_t>(n) * bits::words_for(n), 0) {
  if (n < 0) throw std::invalid_argument("RelationMatrix: negative size");
}

int RelationMatrix::count() const {
  int c = 0;
  for (bits::Word w : data_) c += std::popcount(w);
  return c;
}

std::string to_string(StartKind k) {
  switch (k) {
    case StartKind::chain: return "chain";
    case StartKind::antichain: return "antichain";
    case StartKind::bipartite: return "bipartite";
    case StartKind::random_kr: return "random_kr";
  }
  return "?";
}

StartKind parse_start_kind(const std::string& s) {
  if (s == "chain") return StartKind::chain;
  if (s == "antichain") return StartKind::antichain;
  if (s == "bipartite") return StartKind::bipartite;
  if (s == "random_kr" || s == "kr") return StartKind::random_kr;
  throw std::invalid_argument("unknown start kind '" + s + "'");
}

std::string Violation::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::reflexive: os << "reflexive entry at (" << x << "," << x << ")"; break;
    case Kind::label_order: os << "label-order violation at (" << x << "," << y << ")"; break;
    case Kind::missing_transitive:
      os << "missing " << x << "<" << y << " implied via " << via;
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------

Poset::Poset(int n)
    : fut_(n), past_(n), links_(n), scratch_(3 * static_cast<std::size_t>(bits::words_for(n))) {
  if (n < 0) throw std::invalid_argument("Poset: negative size");
}

Poset Poset::from_relation(const RelationMatrix& rel) {
  auto violations = validate(rel);
  if (!violations.empty())
    throw std::invalid_argument("not a naturally labeled poset: " + violations.front().describe() +
                                (violations.size() > 1
                                     ? " (+" + std::to_string(violations.size() - 1) + " more)"
                                     : ""));
  Poset p(rel.size());
  p.fut_ = rel;
  p.rebuild_from_future();
  return p;
}

void Poset::rebuild_from_future() {
  const int n = size();
  past_ = RelationMatrix(n);
  for (int x = 0; x < n; ++x)
    bits::for_each(fut_.row(x), [&](int y) { past_.set(y, x); });
  links_ = transitive_reduction(*this);
}

void Poset::refresh_link(int a, int b) {
  links_.set(a, b, fut_.get(a, b) && !bits::intersects(fut_.row(a), past_.row(b)));
}

void Poset::remove_link_relation(int x, int y) {
  fut_.set(x, y, false);
  past_.set(y, x, false);
  links_.set(x, y, false);
  // Only intervals I(x, b) for b after y and I(a, y) for a before x lost a
  // member, so only those pairs can have become links.
  bits::for_each(fut_.row(y), [&](int b) { refresh_link(x, b); });
  bits::for_each(past_.row(x), [&](int a) { refresh_link(a, y); });
}

void Poset::add_critical_relation(int x, int y) {
  fut_.set(x, y);
  past_.set(y, x);
  links_.set(x, y);
  bits::for_each(fut_.row(y), [&](int b) { links_.set(x, b, false); });
  bits::for_each(past_.row(x), [&](int a) { links_.set(a, y, false); });
}

void Poset::remove_hasse_edge(int x, int y) {
  const int w = fut_.words();
  links_.set(x, y, false);

  bits::Row lower{scratch_.data(), static_cast<std::size_t>(w)};
  bits::Row reach{scratch_.data() + w, static_cast<std::size_t>(w)};
  bits::Row fresh{scratch_.data() + 2 * w, static_cast<std::size_t>(w)};
  bits::copy(lower, past_.row(x));
  bits::set(lower, x);

  // Only futures of incpast(x) can route through the deleted edge. An element
  // that still reaches y keeps all of incfut(y) and so its whole future. reach
  // holds the elements known to reach y (or be y); outside incpast(x) that is
  // unchanged by the deletion.
  bits::copy(reach, past_.row(y));
  bits::set(reach, y);
  for (int k = 0; k < w; ++k) reach[k] &= ~lower[k];

  // Descending order: every link target c > a is final when a is visited.
  bits::for_each_reverse(lower, [&](int a) {
    if (bits::intersects(links_.row(a), reach)) {
      bits::set(reach, a);
      return;
    }
    bits::clear(fresh);
    bits::for_each(links_.row(a), [&](int c) {
      bits::set(fresh, c);
      bits::or_into(fresh, fut_.row(c));
    });
    auto old = fut_.row(a);
    for (int k = 0; k < w; ++k) {
      bits::Word dropped = old[k] & ~fresh[k];
      while (dropped) {
        past_.set(k * bits::kWordBits + std::countr_zero(dropped), a, false);
        dropped &= dropped - 1;
      }
      old[k] = fresh[k];
    }
  });
}

void Poset::add_hasse_edge(int x, int y) {
  const int w = fut_.words();
  bits::Row lower{scratch_.data(), static_cast<std::size_t>(w)};
  bits::Row upper{scratch_.data() + w, static_cast<std::size_t>(w)};
  bits::copy(lower, past_.row(x));
  bits::set(lower, x);
  bits::copy(upper, fut_.row(y));
  bits::set(upper, y);

  bits::for_each(lower, [&](int a) { bits::or_into(fut_.row(a), upper); });
  bits::for_each(upper, [&](int b) { bits::or_into(past_.row(b), lower); });
  links_.set(x, y);
}

void Poset::attach_above(int k, bits::ConstRow ideal) {
  bits::copy(past_.row(k), ideal);
  bits::for_each(ideal, [&](int d) {
    fut_.set(d, k);
    if (!bits::intersects(fut_.row(d), ideal)) links_.set(d, k);
  });
}

void Poset::detach_above(int k) {
  bits::for_each(past_.row(k), [&](int d) {
    fut_.set(d, k, false);
    links_.set(d, k, false);
  });
  bits::clear(past_.row(k));
}

// ---------------------------------------------------------------------------

Poset construct_standard(StartKind kind, int n, RandomStream* rng) {
  if (n < 1) throw std::invalid_argument("construct_standard: n must be at least 1");
  RelationMatrix rel(n);
  switch (kind) {
    case StartKind::chain:
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) rel.set(i, j);
      break;
    case StartKind::antichain:
      break;
    case StartKind::bipartite: {
      const int half = n / 2;
      for (int i = 0; i < half; ++i)
        for (int j = half; j < n; ++j) rel.set(i, j);
      break;
    }
    case StartKind::random_kr: {
      if (rng == nullptr)
        throw std::invalid_argument("construct_standard: random_kr needs a random stream");
      const int middle = n / 2;
      const int drawn = static_cast<int>(rng->poisson(static_cast<double>(n / 4)));
      const int bottom = std::min(drawn, n - middle);
      const int top_begin = bottom + middle;
      for (int i = 0; i < bottom; ++i)
        for (int j = bottom; j < top_begin; ++j)
          if (rng->uniform_index(2)) rel.set(i, j);
      for (int i = bottom; i < top_begin; ++i)
        for (int j = top_begin; j < n; ++j)
          if (rng->uniform_index(2)) rel.set(i, j);
      for (int i = 0; i < bottom; ++i)
        for (int j = top_begin; j < n; ++j) rel.set(i, j);
      rel = transitive_closure(rel);
      break;
    }
  }
  return Poset::from_relation(rel);
}

std::vector<Violation> validate(const RelationMatrix& rel) {
  std::vector<Violation> out;
  const int n = rel.size();
  for (int x = 0; x < n; ++x) {
    if (rel.get(x, x)) out.push_back({Violation::Kind::reflexive, x, x});
    for (int y = 0; y < x; ++y)
      if (rel.get(x, y)) out.push_back({Violation::Kind::label_order, x, y});
  }
  std::vector<bits::Word> implied(rel.words());
  for (int x = 0; x < n; ++x) {
    std::fill(implied.begin(), implied.end(), 0);
    bits::for_each(rel.row(x), [&](int y) { bits::or_into(implied, rel.row(y)); });
    for (int k = 0; k < rel.words(); ++k) implied[k] &= ~rel.row(x)[k];
    bits::for_each(implied, [&](int z) {
      int via = -1;
      bits::for_each(rel.row(x), [&](int y) {
        if (via < 0 && rel.get(y, z)) via = y;
      });
      out.push_back({Violation::Kind::missing_transitive, x, z, via});
    });
  }
  return out;
}

namespace {

void check_element(const Poset& p, int x, const char* what) {
  if (x < 0 || x >= p.size())
    throw std::out_of_range(std::string(what) + ": element " + std::to_string(x) +
                            " out of range for n=" + std::to_string(p.size()));
}

void check_pair(const Poset& p, int x, int y, const char* what) {
  check_element(p, x, what);
  check_element(p, y, what);
  if (x >= y)
    throw std::invalid_argument(std::string(what) + ": pair requires x < y, got (" +
                                std::to_string(x) + "," + std::to_string(y) + ")");
}

}  // namespace

std::vector<int> cone(const Poset& p, int x, Direction dir, bool inclusive) {
  check_element(p, x, "cone");
  std::vector<int> out;
  auto row = dir == Direction::past ? p.past(x) : p.future(x);
  bits::for_each(row, [&](int z) { out.push_back(z); });
  if (inclusive) out.insert(std::lower_bound(out.begin(), out.end(), x), x);
  return out;
}

PairClass classify_pair(const Poset& p, int x, int y) {
  check_pair(p, x, y, "classify_pair");
  const int n = p.size();
  auto is_link = [&](int a, int b) {
    if (!p.precedes(a, b)) return false;
    for (int z = a + 1; z < b; ++z)
      if (p.precedes(a, z) && p.precedes(z, b)) return false;
    return true;
  };

  PairClass c;
  c.related = p.precedes(x, y);
  c.link = is_link(x, y);
  if (c.related) return c;

  c.critical = bits::subset(p.past(x), p.past(y)) && bits::subset(p.future(y), p.future(x));

  c.suitable = true;
  for (int z = 0; z <= x && c.suitable; ++z) {
    if (z != x && !p.precedes(z, x)) continue;
    for (int w = y; w < n; ++w) {
      if (w != y && !p.precedes(y, w)) continue;
      if (is_link(z, w)) {
        c.suitable = false;
        break;
      }
    }
  }
  return c;
}

RelationMatrix transitive_closure(const RelationMatrix& rel) {
  const int n = rel.size();
  for (int x = 0; x < n; ++x)
    for (int y = 0; y <= x; ++y)
      if (rel.get(x, y))
        throw std::invalid_argument("transitive_closure: input not irreflexive upper-triangular at (" +
                                    std::to_string(x) + "," + std::to_string(y) + ")");
  RelationMatrix out = rel;
  // Rows above x are already closed when x is processed.
  for (int x = n - 1; x >= 0; --x) {
    auto row = out.row(x);
    bits::for_each(rel.row(x), [&](int y) { bits::or_into(row, out.row(y)); });
  }
  return out;
}

RelationMatrix transitive_reduction(const Poset& p) {
  const int n = p.size();
  RelationMatrix links(n);
  for (int x = 0; x < n; ++x)
    bits::for_each(p.future(x), [&](int y) {
      if (!bits::intersects(p.future(x), p.past(y))) links.set(x, y);
    });
  return links;
}

Poset time_reverse(const Poset& p) {
  const int n = p.size();
  RelationMatrix rev(n);
  for (int x = 0; x < n; ++x)
    bits::for_each(p.future(x), [&](int y) { rev.set(n - 1 - y, n - 1 - x); });
  return Poset::from_relation(rev);
}

void write_text(std::ostream& out, const Poset& p) {
  out << p.size() << '\n';
  for (int x = 0; x < p.size(); ++x)
    bits::for_each(p.future(x), [&](int y) { out << x << ' ' << y << '\n'; });
}

std::string to_text(const Poset& p) {
  std::ostringstream os;
  write_text(os, p);
  return os.str();
}

Poset read_text(std::istream& in) {
  long n = -1;
  if (!(in >> n) || n < 0 || n > 1 << 16)
    throw std::invalid_argument("poset text: bad element count");
  RelationMatrix rel(static_cast<int>(n));
  long x = 0;
  long y = 0;
  while (in >> x) {
    if (!(in >> y)) throw std::invalid_argument("poset text: dangling element");
    if (x < 0 || y < 0 || x >= n || y >= n || x >= y)
      throw std::invalid_argument("poset text: bad relation " + std::to_string(x) + " " +
                                  std::to_string(y));
    rel.set(static_cast<int>(x), static_cast<int>(y));
  }
  if (!in.eof()) throw std::invalid_argument("poset text: trailing garbage");
  return Poset::from_relation(rel);
}

Poset poset_from_text(const std::string& text) {
  std::istringstream is(text);
  return read_text(is);
}

}  // namespace posetmc
