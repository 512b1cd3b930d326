// Distribution of sum_{k<=n} ({2^k x} - 1/2) against the normal law.

#include <cmath>
#include <cstdio>

#include "lacunary/limits.hpp"

int main() {
  using namespace lacunary;
  std::printf("n,A_n,kolmogorov,tail_ratio_y1\n");
  for (std::size_t n : {16u, 64u, 256u, 1024u, 4096u}) {
    const BernoulliSumLaw law(n);
    const double A = std::sqrt(law.variance());
    std::printf("%zu,%.6f,%.6e,%.6f\n", n, A, kolmogorov_distance(law, A), tail_ratio_extended_clt(law, A, 1.0));
  }
}
