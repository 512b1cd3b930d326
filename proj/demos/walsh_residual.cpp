// Mod-Gaussian residual of a flat Walsh sum against exp(-z^4/12).

#include <cstdio>

#include "lacunary/charfn.hpp"

int main() {
  using namespace lacunary;
  const auto seq = LacunarySequence::power(2, 1 << 16);
  const auto coeffs = CoefficientTriangle::flat(0.25, NormalizerConvention::walsh);
  const auto psi = LimitingFunction::walsh(1.0);
  std::printf("n,z,residual,limit\n");
  for (std::size_t n : {64u, 1024u, 16384u}) {
    const double t_n = coeffs.power_sum(n, 2);
    for (double z = 0.0; z <= 2.0001; z += 0.25) {
      const complex r = residual_from_log(log_mgf_walsh_exact(seq, coeffs, n, z), t_n, z);
      std::printf("%zu,%.2f,%.10f,%.10f\n", n, z, r.real(), psi(z).real());
    }
  }
}
