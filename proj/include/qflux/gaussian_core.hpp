#pragma once

#include <string>
#include <vector>

#include "qflux/linops.hpp"

namespace qflux {

/// Covariance matrix of a zero-mean Gaussian state, xpxp ordering,
/// vacuum variance 1/2.
struct GaussianCM {
  int n_modes = 0;
  RMat V;

  /// Validates symmetry and the bona fide condition V + i Omega/2 >= 0.
  static GaussianCM checked(int n_modes, RMat V);
  static GaussianCM unchecked(int n_modes, RMat V);
};

/// Standard symplectic form, direct sum of [[0,1],[-1,0]].
RMat omega_matrix(int n_modes);

/// Two-mode squeezed vacuum with variance mu >= 1/2 (q-correlated,
/// p-anticorrelated, c = sqrt(mu^2 - 1/4)).
GaussianCM tmsv_cm(double mu);

/// Williamson spectrum: n values nu_i >= 1/2, ascending.
std::vector<double> symplectic_eigenvalues(const GaussianCM& cm);

/// sum_i h(nu_i - 1/2) in bits; 0 for pure states.
double gaussian_entropy(const GaussianCM& cm);

/// -Tr(rho1 log2 rho2) from the Gibbs quadratic form of rho2
/// (matrix arccoth of 2 V2 i Omega).
double gaussian_cross_entropy(const GaussianCM& v1, const GaussianCM& v2);

/// S(rho1 || rho2) in bits; +infinity when rho2 is pure and differs from rho1.
double gaussian_relative_entropy(const GaussianCM& v1, const GaussianCM& v2);

/// Minimum symplectic eigenvalue after momentum sign flip on mode B
/// (two-mode CMs only). Separable iff >= 1/2 - tolerance.
double pt_min_symplectic(const GaussianCM& cm);

/// Truncated-Fock-space state used as an independent numeric oracle.
struct FockState {
  std::vector<int> cutoffs;  // per-mode truncation
  Mat rho;
  double deficit = 0.0;  // 1 - trace lost to truncation

  int n_modes() const { return static_cast<int>(cutoffs.size()); }
  double entropy() const;  // eigenvalue sum, cached after the first call
  /// Second moments with truncated quadrature operators (zero-mean assumed).
  RMat covariance() const;

 private:
  mutable double entropy_cache_ = -1.0;
};

enum class FockKind { Tmsv, LossOutput, AmplifierOutput, AdditiveOutput };

struct FockParams {
  double g = 1.0;    // transmissivity / gain
  double nbar = 0.0; // only nbar = 0 supported for loss/amplifier
  double xi = 0.0;   // additive-noise variance
};

/// Builds (I (x) E)(Phi_mu) in a truncated Fock basis. Channel action on mode B
/// uses analytic ladder Kraus forms (loss/amplifier) or 64-node Gauss-Hermite
/// displacement quadrature (additive). Throws if the truncation deficit
/// exceeds 1e-6.
FockState fock_oracle(FockKind kind, const FockParams& params, double mu, int cutoff);

/// S(rho_fock || gaussian sigma) through sigma's Gibbs quadratic form; exact in
/// rho up to truncation since the cross term depends only on second moments.
double relative_entropy_fock_vs_gaussian(const FockState& state, const GaussianCM& sigma);

}  // namespace qflux
