#pragma once

// Word-level helpers over packed bit rows. A row of an n-element matrix is
// ceil(n/64) little-endian 64-bit words; bit i of the row lives in word i/64.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>

namespace posetmc::bits {

using Word = std::uint64_t;
using Row = std::span<Word>;
using ConstRow = std::span<const Word>;

constexpr int kWordBits = 64;

constexpr int words_for(int n) { return (n + kWordBits - 1) / kWordBits; }

inline bool test(ConstRow r, int i) { return (r[i >> 6] >> (i & 63)) & 1u; }
inline void set(Row r, int i) { r[i >> 6] |= Word{1} << (i & 63); }
inline void reset(Row r, int i) { r[i >> 6] &= ~(Word{1} << (i & 63)); }

inline void clear(Row r) {
  for (auto& w : r) w = 0;
}

inline bool none(ConstRow r) {
  for (Word w : r)
    if (w) return false;
  return true;
}

inline int count(ConstRow r) {
  int c = 0;
  for (Word w : r) c += std::popcount(w);
  return c;
}

inline bool intersects(ConstRow a, ConstRow b) {
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k] & b[k]) return true;
  return false;
}

inline int count_and(ConstRow a, ConstRow b) {
  int c = 0;
  for (std::size_t k = 0; k < a.size(); ++k) c += std::popcount(a[k] & b[k]);
  return c;
}

// a ⊆ b
inline bool subset(ConstRow a, ConstRow b) {
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k] & ~b[k]) return false;
  return true;
}

inline bool equal(ConstRow a, ConstRow b) {
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k] != b[k]) return false;
  return true;
}

inline void or_into(Row dst, ConstRow src) {
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] |= src[k];
}

inline void copy(Row dst, ConstRow src) {
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = src[k];
}

// Calls f(i) for every set bit i, ascending.
template <class F>
inline void for_each(ConstRow r, F&& f) {
  for (std::size_t k = 0; k < r.size(); ++k) {
    Word w = r[k];
    while (w) {
      f(static_cast<int>(k * kWordBits) + std::countr_zero(w));
      w &= w - 1;
    }
  }
}

// Calls f(i) for every set bit i, descending.
template <class F>
inline void for_each_reverse(ConstRow r, F&& f) {
  for (std::size_t k = r.size(); k-- > 0;) {
    Word w = r[k];
    while (w) {
      int hi = kWordBits - 1 - std::countl_zero(w);
      f(static_cast<int>(k * kWordBits) + hi);
      w &= ~(Word{1} << hi);
    }
  }
}

}  // namespace posetmc::bits
