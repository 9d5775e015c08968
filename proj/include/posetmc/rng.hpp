#pragma once

// Seedable, serializable random streams.
//
// The default engine is L'Ecuyer's maximally equidistributed combined
// Tausworthe generator ("taus2"), seeded exactly as the GNU Scientific Library
// seeds gsl_rng_taus2 so that the two produce the same sequence for any seed
// below 2^32. xoshiro128++ is provided as an alternative engine behind the same
// interface.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

namespace posetmc {

class Taus2Engine {
 public:
  static constexpr std::string_view kName = "taus2";
  static constexpr int kStateWords = 3;

  explicit Taus2Engine(std::uint32_t seed = 0);

  std::uint32_t next() {
    s_[0] = step(s_[0], 13, 19, 4294967294u, 12);
    s_[1] = step(s_[1], 2, 25, 4294967288u, 4);
    s_[2] = step(s_[2], 3, 11, 4294967280u, 17);
    return s_[0] ^ s_[1] ^ s_[2];
  }

  std::array<std::uint32_t, kStateWords> state() const { return s_; }
  void set_state(const std::array<std::uint32_t, kStateWords>& s) { s_ = s; }

 private:
  static std::uint32_t step(std::uint32_t s, int a, int b, std::uint32_t c, int d) {
    return ((s & c) << d) ^ (((s << a) ^ s) >> b);
  }
  std::array<std::uint32_t, kStateWords> s_{};
};

class Xoshiro128ppEngine {
 public:
  static constexpr std::string_view kName = "xoshiro128pp";
  static constexpr int kStateWords = 4;

  explicit Xoshiro128ppEngine(std::uint64_t seed = 0);

  std::uint32_t next() {
    const std::uint32_t result = rotl(s_[0] + s_[3], 7) + s_[0];
    const std::uint32_t t = s_[1] << 9;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 11);
    return result;
  }

  std::array<std::uint32_t, kStateWords> state() const { return s_; }
  void set_state(const std::array<std::uint32_t, kStateWords>& s) { s_ = s; }

 private:
  static std::uint32_t rotl(std::uint32_t x, int k) { return (x << k) | (x >> (32 - k)); }
  std::array<std::uint32_t, kStateWords> s_{};
};

enum class RngAlgorithm { taus2, xoshiro128pp };

// 64-bit finalizer from SplitMix64; a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t z);

// Seed of the chain_index-th independent stream under a master seed.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t chain_index);

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0, RngAlgorithm algo = RngAlgorithm::taus2);

  static RandomStream create(std::uint64_t seed, RngAlgorithm algo = RngAlgorithm::taus2) {
    return RandomStream(seed, algo);
  }
  // Independent stream for one chain of a multi-chain run.
  static RandomStream split(std::uint64_t master_seed, std::uint64_t chain_index,
                            RngAlgorithm algo = RngAlgorithm::taus2) {
    return RandomStream(derive_seed(master_seed, chain_index), algo);
  }

  std::uint32_t next_u32() {
    ++draws_;
    if (auto* t = std::get_if<Taus2Engine>(&engine_)) return t->next();
    return std::get<Xoshiro128ppEngine>(engine_).next();
  }

  // Uniform on [0, 1) with 32 bits of resolution.
  double uniform() { return next_u32() * (1.0 / 4294967296.0); }

  // Exactly uniform on [0, k); throws std::invalid_argument when k == 0.
  std::uint32_t uniform_index(std::uint32_t k) {
    if (k == 0) throw_empty_range();
    // Lemire's multiply-shift, rejecting the biased low region.
    std::uint64_t m = std::uint64_t{next_u32()} * k;
    auto low = static_cast<std::uint32_t>(m);
    if (low < k) {
      const std::uint32_t threshold = (0u - k) % k;
      while (low < threshold) {
        m = std::uint64_t{next_u32()} * k;
        low = static_cast<std::uint32_t>(m);
      }
    }
    return static_cast<std::uint32_t>(m >> 32);
  }

  // Poisson-distributed count; throws std::invalid_argument for a negative or
  // non-finite mean.
  std::uint32_t poisson(double mean);

  RngAlgorithm algorithm() const;
  std::string_view algorithm_name() const;
  std::uint64_t draws() const { return draws_; }

  // "<algorithm> <hex word> ... <draw counter>", one line, no trailing newline.
  std::string serialize() const;
  static RandomStream deserialize(std::string_view text);

  friend bool operator==(const RandomStream& a, const RandomStream& b) {
    return a.serialize() == b.serialize();
  }

 private:
  [[noreturn]] static void throw_empty_range();

  std::variant<Taus2Engine, Xoshiro128ppEngine> engine_;
  std::uint64_t draws_ = 0;
};

}  // namespace posetmc
