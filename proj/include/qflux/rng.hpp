#pragma once

#include <cmath>
#include <random>

#include "qflux/linops.hpp"

namespace qflux {

/// Deterministic N(0,1) draws from a seeded engine. Box-Muller is spelled out
/// so results do not depend on the standard library's distribution internals.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : eng_(seed) {}

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  double uniform() {  // (0,1]
    return (static_cast<double>(eng_()) + 1.0) / (static_cast<double>(eng_.max()) + 2.0);
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Haar-distributed unitary via QR of a Ginibre matrix.
inline Mat haar_unitary(int d, GaussianRng& rng) {
  Mat g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = cplx(rng.normal(), rng.normal());
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) {
    cplx rj = r(j, j);
    cplx phase = std::abs(rj) > 0 ? rj / std::abs(rj) : cplx(1.0, 0.0);
    q.col(j) *= phase;
  }
  return q;
}

/// Random density matrix (Ginibre construction) for property tests.
inline DensityMatrix random_density(const std::vector<int>& dims, GaussianRng& rng) {
  int d = product_dim(dims);
  Mat g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = cplx(rng.normal(), rng.normal());
  Mat rho = g * g.adjoint();
  rho /= rho.trace();
  return DensityMatrix::checked(dims, 0.5 * (rho + rho.adjoint()));
}

}  // namespace qflux
