#include "posetmc/rng.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace posetmc {

Taus2Engine::Taus2Engine(std::uint32_t seed) {
  // Seeding and warm-up follow gsl_rng_taus2.
  std::uint64_t s = seed == 0 ? 1 : seed;
  auto lcg = [](std::uint64_t v) { return (69069u * v) & 0xffffffffu; };
  std::uint64_t s1 = lcg(s);
  if (s1 < 2) s1 += 2;
  std::uint64_t s2 = lcg(s1);
  if (s2 < 8) s2 += 8;
  std::uint64_t s3 = lcg(s2);
  if (s3 < 16) s3 += 16;
  s_ = {static_cast<std::uint32_t>(s1), static_cast<std::uint32_t>(s2),
        static_cast<std::uint32_t>(s3)};
  for (int i = 0; i < 6; ++i) next();
}

Xoshiro128ppEngine::Xoshiro128ppEngine(std::uint64_t seed) {
  std::uint64_t z = seed;
  for (int i = 0; i < kStateWords; i += 2) {
    z += 0x9e3779b97f4a7c15ull;
    std::uint64_t v = mix64(z);
    s_[i] = static_cast<std::uint32_t>(v);
    s_[i + 1] = static_cast<std::uint32_t>(v >> 32);
  }
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t chain_index) {
  return mix64(master_seed ^ mix64(chain_index + 0x9e3779b97f4a7c15ull));
}

namespace {

// Seeds at or above 2^32 are folded onto the 32-bit seed space of taus2;
// smaller seeds pass through unchanged.
std::uint32_t fold_seed(std::uint64_t seed) {
  return static_cast<std::uint32_t>(seed ^ (seed >> 32));
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, RngAlgorithm algo) {
  if (algo == RngAlgorithm::taus2)
    engine_ = Taus2Engine(fold_seed(seed));
  else
    engine_ = Xoshiro128ppEngine(seed);
}

void RandomStream::throw_empty_range() {
  throw std::invalid_argument("uniform_index: empty range");
}

std::uint32_t RandomStream::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean))
    throw std::invalid_argument("poisson: mean must be finite and non-negative");
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    // Inversion by sequential search.
    const double u = uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint32_t k = 0;
    while (u >= cdf && p > 0.0) {
      ++k;
      p *= mean / k;
      cdf += p;
    }
    return k;
  }
  // Hörmann's transformed rejection with squeeze (PTRS).
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint32_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1.0))
      return static_cast<std::uint32_t>(k);
  }
}

RngAlgorithm RandomStream::algorithm() const {
  return std::holds_alternative<Taus2Engine>(engine_) ? RngAlgorithm::taus2
                                                      : RngAlgorithm::xoshiro128pp;
}

std::string_view RandomStream::algorithm_name() const {
  return std::visit([](const auto& e) { return std::decay_t<decltype(e)>::kName; }, engine_);
}

std::string RandomStream::serialize() const {
  std::string out(algorithm_name());
  std::visit(
      [&](const auto& e) {
        char buf[16];
        for (std::uint32_t w : e.state()) {
          std::snprintf(buf, sizeof buf, " %08x", w);
          out += buf;
        }
      },
      engine_);
  out += ' ';
  out += std::to_string(draws_);
  return out;
}

RandomStream RandomStream::deserialize(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string name;
  in >> name;
  std::vector<std::string> fields;
  for (std::string f; in >> f;) fields.push_back(f);
  if (fields.empty()) throw std::invalid_argument("rng state: missing fields");

  auto parse_words = [&](auto& engine) {
    using E = std::decay_t<decltype(engine)>;
    if (fields.size() != E::kStateWords + 1)
      throw std::invalid_argument("rng state: expected " + std::to_string(E::kStateWords) +
                                  " state words for " + name);
    std::array<std::uint32_t, E::kStateWords> s{};
    for (int i = 0; i < E::kStateWords; ++i) {
      std::size_t used = 0;
      unsigned long v = std::stoul(fields[i], &used, 16);
      if (used != fields[i].size() || v > 0xffffffffUL)
        throw std::invalid_argument("rng state: bad hex word '" + fields[i] + "'");
      s[i] = static_cast<std::uint32_t>(v);
    }
    engine.set_state(s);
  };

  RandomStream rs;
  if (name == Taus2Engine::kName) {
    Taus2Engine e;
    parse_words(e);
    rs.engine_ = e;
  } else if (name == Xoshiro128ppEngine::kName) {
    Xoshiro128ppEngine e;
    parse_words(e);
    rs.engine_ = e;
  } else {
    throw std::invalid_argument("rng state: unknown algorithm '" + name + "'");
  }
  rs.draws_ = std::stoull(fields.back());
  return rs;
}

}  // namespace posetmc
