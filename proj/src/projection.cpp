#include "sdpsa/projection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdpsa {

ParameterDomain::ParameterDomain(int upper) : upper_(upper) {
  if (upper < 2) throw std::invalid_argument("parameter domain needs L >= 2");
}

int random_project(double n, const ParameterDomain& domain, Rng& rng) {
  if (std::isnan(n)) throw std::invalid_argument("cannot project NaN");
  if (n < 1.0) return 1;
  if (n >= static_cast<double>(domain.upper())) return domain.upper();
  const double k = std::floor(n);
  const double up = n - k;
  const int lower = static_cast<int>(k);
  return uniform01(rng) < up ? lower + 1 : lower;
}

double clip_project(double n, const ParameterDomain& domain) {
  if (std::isnan(n)) throw std::invalid_argument("cannot project NaN");
  return std::min(static_cast<double>(domain.upper()), std::max(n, 1.0));
}

}  // namespace sdpsa
