// How often the signed equation m_a - m_b + m_c = 0 is solvable as n grows.

#include <cstdio>

#include "lacunary/diophantine.hpp"

int main() {
  using namespace lacunary;
  const auto seq = LacunarySequence::interleaved(64);
  std::printf("n,zero_count,max_count,bound\n");
  for (std::size_t n : {8u, 16u, 24u, 32u, 48u, 64u}) {
    const auto rep = count_signed_solutions(seq, n, 3, 1);
    double bound = 0.0;
    for (const auto& c : rep.classes) bound = std::max(bound, c.bound);
    std::printf("%zu,%llu,%llu,%.4g\n", n, static_cast<unsigned long long>(rep.count(0)),
                static_cast<unsigned long long>(rep.max_count()), bound);
  }
}
