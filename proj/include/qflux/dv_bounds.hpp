#pragma once

#include <optional>
#include <string>

#include "qflux/dv_channels.hpp"

namespace qflux {

/// Capacity bounds for one channel, in bits per use.
struct BoundReport {
  std::string channel_id;
  double lower = 0.0;
  double upper = 0.0;  // may be +infinity
  std::optional<double> exact;
  bool eb = false;
  std::string method;
};

/// Classical-quantum separable candidate sum_u |u><u| (x) E(|u><u|) / d_in,
/// diagonal-block by construction and PPT for every channel.
DensityMatrix sigma_tilde(const KrausChannel& channel);

/// max(0, 1 + H2(p1+p2) - H(p)) for a 4-outcome Pauli distribution.
double pauli_flux_bound(const ProbDist& p);

/// f(p) = 1 + H2(p/2) - H2(3p/4) - (3p/4) log2 3 (depolarizing closed form).
double depolarizing_f(double p);

/// Convexity-improved depolarizing bound: min over eps in [0, p] of
/// (1 - alpha) f(eps) with alpha = (p - eps)/(2/3 - eps); zero for p >= 2/3.
/// Grid scan plus golden-section refinement.
double depolarizing_flux_bound(double p);

BoundReport erasure_bounds(double p);

BoundReport dephasing_d_capacity(int d, double p);

/// Relative entropy of the Choi state against an explicit separable candidate.
/// Verifies the candidate is PPT before evaluating; this is the numeric oracle
/// behind every closed-form bound in this module.
double flux_numeric(const KrausChannel& channel, const DensityMatrix& sigma);

}  // namespace qflux
