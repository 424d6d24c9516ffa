#include "otsu_oracle.hpp"

#include <boost/multiprecision/cpp_int.hpp>

namespace lesion::testing {

using boost::multiprecision::cpp_rational;

int brute_force_otsu(const seg::Histogram& h) {
  cpp_rational total = 0, weighted = 0;
  for (int i = 0; i < 256; ++i) {
    total += h[i];
    weighted += cpp_rational(h[i]) * i;
  }
  cpp_rational best = 0;
  int best_t = -1;
  cpp_rational n0 = 0, s0 = 0;
  for (int t = 0; t < 256; ++t) {
    n0 += h[t];
    s0 += cpp_rational(h[t]) * t;
    const cpp_rational n1 = total - n0;
    if (n0 == 0 || n1 == 0) continue;
    const cpp_rational mu0 = s0 / n0, mu1 = (weighted - s0) / n1;
    const cpp_rational var = (n0 / total) * (n1 / total) * (mu0 - mu1) * (mu0 - mu1);
    if (var > best) {
      best = var;
      best_t = t;
    }
  }
  return best_t;
}

}  // namespace lesion::testing
