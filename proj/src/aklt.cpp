#include <cmath>

#include "gge/errors.hpp"
#include "gge/solvers.hpp"

namespace gge {

MatrixProductState aklt_exact_mps(std::size_t n) {
  if (n < 2) throw InvalidParameter("aklt_exact_mps: n must be at least 2");
  const double a = std::sqrt(2.0 / 3.0);
  const double b = 1.0 / std::sqrt(3.0);

  DenseTensor bulk({2, 3, 2});
  bulk({0, 0, 1}) = a;   // |+1>: sqrt(2/3) sigma+
  bulk({0, 1, 0}) = b;   // |0>: sigma^z / sqrt(3)
  bulk({1, 1, 1}) = -b;
  bulk({1, 2, 0}) = -a;  // |-1>: -sqrt(2/3) sigma-

  DenseTensor left({1, 2, 2});
  left({0, 0, 1}) = 1.0;
  left({0, 1, 0}) = 1.0;
  DenseTensor right({2, 2, 1});
  right({0, 0, 0}) = 1.0;
  right({1, 1, 0}) = -1.0;

  std::vector<SiteTensor> sites;
  sites.emplace_back(left);
  for (std::size_t k = 1; k + 1 < n; ++k) sites.emplace_back(bulk);
  sites.emplace_back(right);
  return canonicalize(normalize(MatrixProductState(std::move(sites), 2)), 0);
}

}  // namespace gge
