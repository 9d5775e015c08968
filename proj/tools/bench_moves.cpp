#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "posetmc/moves.hpp"
#include "posetmc/observables.hpp"

int main(int argc, char** argv) {
  using namespace posetmc;
  const int n = argc > 1 ? std::atoi(argv[1]) : 58;
  const int sweeps = argc > 2 ? std::atoi(argv[2]) : 20;
  RandomStream rng(1);
  Poset p = construct_standard(StartKind::random_kr, n, &rng);
  const auto moves = default_moves_per_sweep(n);
  auto t0 = std::chrono::steady_clock::now();
  SweepStats total;
  for (int s = 0; s < sweeps; ++s) {
    total += sweep(p, rng, moves);
    auto rec = record(p, s);
    std::printf("%d h=%d r=%.3f nmin=%d nmax=%d acc=%.3f\n", s, rec.height, rec.ordering_fraction,
                rec.n_min, rec.n_max, total.acceptance());
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("n=%d ns/move=%.1f\n", n, secs * 1e9 / double(total.attempted));
}
