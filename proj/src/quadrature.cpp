#include "relaystop/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>

#include "relaystop/errors.hpp"

namespace relaystop {

const GaussLegendre<double>& gauss_legendre(int n) {
  require(n >= 1, ErrorKind::InvalidParameter, "quad_points: must be >= 1");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussLegendre<double>>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussLegendre<double>>(n);
  return *slot;
}

}  // namespace relaystop
