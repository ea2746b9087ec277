#include "qflux/dv_bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace qflux {

DensityMatrix sigma_tilde(const KrausChannel& channel) {
  const int din = channel.in_dim, dout = channel.out_dim;
  Mat out = Mat::Zero(din * dout, din * dout);
  for (int u = 0; u < din; ++u) {
    DensityMatrix basis = DensityMatrix::unchecked({din}, projector(basis_state(din, u)));
    DensityMatrix mapped = apply_channel(channel, basis);
    out.block(u * dout, u * dout, dout, dout) = mapped.mat / static_cast<double>(din);
  }
  return DensityMatrix::checked({din, dout}, 0.5 * (out + out.adjoint()));
}

double pauli_flux_bound(const ProbDist& p) {
  if (p.p.size() != 4) throw std::invalid_argument("pauli_flux_bound: need 4 probabilities");
  double raw = 1.0 + binary_entropy(p.p[1] + p.p[2]) - shannon_entropy(p);
  return std::max(0.0, raw);
}

double depolarizing_f(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("depolarizing_f: p outside [0,1]");
  return 1.0 + binary_entropy(0.5 * p) - binary_entropy(0.75 * p) - 0.75 * p * std::log2(3.0);
}

namespace {

double depol_improved_objective(double p, double eps) {
  double alpha = (p - eps) / (2.0 / 3.0 - eps);
  return (1.0 - alpha) * depolarizing_f(eps);
}

}  // namespace

double depolarizing_flux_bound(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("depolarizing_flux_bound: p outside [0,1]");
  if (p >= 2.0 / 3.0) return 0.0;
  if (p == 0.0) return depolarizing_f(0.0);

  const int n = 1000;
  double best = depol_improved_objective(p, p);
  int best_i = n;
  for (int i = 0; i <= n; ++i) {
    double eps = p * i / n;
    double v = depol_improved_objective(p, eps);
    if (v < best) {
      best = v;
      best_i = i;
    }
  }
  // golden-section refinement inside the bracketing grid cells
  double lo = p * std::max(0, best_i - 1) / n;
  double hi = p * std::min(n, best_i + 1) / n;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = depol_improved_objective(p, c), fd = depol_improved_objective(p, d);
  while (b - a > 1e-8) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = depol_improved_objective(p, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = depol_improved_objective(p, d);
    }
  }
  best = std::min({best, fc, fd});
  return std::max(0.0, best);
}

BoundReport erasure_bounds(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("erasure_bounds: p outside [0,1]");
  BoundReport r;
  r.channel_id = "erasure(p=" + std::to_string(p) + ")";
  r.lower = 1.0 - p;
  r.upper = 1.0 - p;
  r.exact = 1.0 - p;
  r.eb = (p == 1.0);
  r.method = "K = 1-p from flux against sigma~ meeting the known Q2 = 1-p; Q2 exact separately";
  return r;
}

BoundReport dephasing_d_capacity(int d, double p) {
  auto w = dephasing_d_weights(d, p);
  double cap = std::log2(static_cast<double>(d)) - shannon_entropy(ProbDist::checked(w));
  cap = std::max(0.0, cap);
  BoundReport r;
  r.channel_id = "dephasing-d(d=" + std::to_string(d) + ",p=" + std::to_string(p) + ")";
  r.lower = cap;
  r.upper = cap;
  r.exact = cap;
  r.eb = cap == 0.0 && is_entanglement_breaking_dv(make_dephasing_d(d, p)).breaking;
  r.method = "log2 d - H(P) with binomial weights; coherent info coincides (unital)";
  return r;
}

double flux_numeric(const KrausChannel& channel, const DensityMatrix& sigma) {
  DensityMatrix rho = choi(channel);
  if (sigma.dims != rho.dims)
    throw std::invalid_argument("flux_numeric: candidate dimensions mismatch");
  if (partial_transpose_min_eig(sigma, 1) < -kPsdTol)
    throw std::invalid_argument("flux_numeric: candidate state violates PPT");
  return relative_entropy(rho, sigma);
}

}  // namespace qflux
