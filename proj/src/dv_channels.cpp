#include "qflux/dv_channels.hpp"

#include <cmath>
#include <stdexcept>

namespace qflux {

KrausChannel KrausChannel::checked(int in_dim, int out_dim, std::vector<Mat> kraus) {
  if (in_dim < 1 || out_dim < 1) throw std::invalid_argument("channel dimensions must be >= 1");
  if (kraus.empty()) throw std::invalid_argument("channel needs at least one Kraus operator");
  Mat acc = Mat::Zero(in_dim, in_dim);
  for (const Mat& k : kraus) {
    if (k.rows() != out_dim || k.cols() != in_dim)
      throw std::invalid_argument("Kraus operator shape mismatch");
    acc += k.adjoint() * k;
  }
  double dev = (acc - Mat::Identity(in_dim, in_dim)).cwiseAbs().maxCoeff();
  if (dev > kHermTol)
    throw std::invalid_argument("channel not trace preserving (deviation " + std::to_string(dev) +
                                ")");
  return KrausChannel{in_dim, out_dim, std::move(kraus)};
}

Mat weyl_operator(int d, int a, int b) {
  if (d < 2) throw std::invalid_argument("weyl_operator: dimension must be >= 2");
  a = ((a % d) + d) % d;
  b = ((b % d) + d) % d;
  Mat m = Mat::Zero(d, d);
  const double w = 2.0 * M_PI / d;
  for (int j = 0; j < d; ++j) m((j + a) % d, j) = std::polar(1.0, w * j * b);
  return m;
}

Mat WeylUnitary::matrix() const { return weyl_operator(d, a, b); }

std::vector<WeylUnitary> weyl_set(int d) {
  std::vector<WeylUnitary> set;
  set.reserve(d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) set.push_back(WeylUnitary{d, a, b});
  return set;
}

Vec epr_vector(int d) {
  if (d < 2) throw std::invalid_argument("epr_state: dimension must be >= 2");
  Vec v = Vec::Zero(d * d);
  for (int i = 0; i < d; ++i) v(i * d + i) = 1.0 / std::sqrt(static_cast<double>(d));
  return v;
}

DensityMatrix epr_state(int d) {
  Vec v = epr_vector(d);
  return DensityMatrix::checked({d, d}, projector(v));
}

Mat bell_povm_element(int d, int a, int b) {
  Mat bra = bell_bra(d, a, b);
  return bra.adjoint() * bra;
}

Mat bell_bra(int d, int a, int b) {
  // <phi_k| = <Phi| (T_k (x) I)
  Mat t = kron(weyl_operator(d, a, b), Mat::Identity(d, d));
  return epr_vector(d).adjoint() * t;
}

DensityMatrix choi(const KrausChannel& channel) {
  DensityMatrix phi = epr_state(channel.in_dim);
  DensityMatrix out =
      apply_kraus_on_subsystems(phi, {1}, channel.kraus, {channel.out_dim});
  return DensityMatrix::checked(out.dims, 0.5 * (out.mat + out.mat.adjoint()));
}

DensityMatrix apply_channel(const KrausChannel& channel, const DensityMatrix& rho) {
  if (rho.dim() != channel.in_dim) throw std::invalid_argument("apply_channel: dimension mismatch");
  Mat out = Mat::Zero(channel.out_dim, channel.out_dim);
  for (const Mat& k : channel.kraus) out += k * rho.mat * k.adjoint();
  return DensityMatrix::unchecked({channel.out_dim}, std::move(out));
}

KrausChannel make_pauli(const ProbDist& p) {
  if (p.p.size() != 4) throw std::invalid_argument("pauli channel needs 4 probabilities");
  const Mat I = Mat::Identity(2, 2);
  Mat X = weyl_operator(2, 1, 0);
  Mat Z = weyl_operator(2, 0, 1);
  Mat Y = (Mat(2, 2) << cplx(0, 0), cplx(0, -1), cplx(0, 1), cplx(0, 0)).finished();
  std::vector<Mat> ops = {I, X, Y, Z};
  std::vector<Mat> kraus;
  for (int k = 0; k < 4; ++k)
    if (p.p[k] > 0.0) kraus.push_back(std::sqrt(p.p[k]) * ops[k]);
  return KrausChannel::checked(2, 2, std::move(kraus));
}

KrausChannel make_depolarizing(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("depolarizing: p outside [0,1]");
  return make_pauli(ProbDist::checked({1.0 - 0.75 * p, 0.25 * p, 0.25 * p, 0.25 * p}));
}

KrausChannel make_dephasing(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("dephasing: p outside [0,1]");
  return make_pauli(ProbDist::checked({1.0 - p, 0.0, 0.0, p}));
}

std::vector<double> dephasing_d_weights(int d, double p) {
  if (d < 2) throw std::invalid_argument("dephasing_d: dimension must be >= 2");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("dephasing_d: p outside [0,1]");
  std::vector<double> w(d);
  for (int m = 0; m < d; ++m) {
    double logc = std::lgamma(d) - std::lgamma(m + 1) - std::lgamma(d - m);
    w[m] = std::exp(logc) * std::pow(p, m) * std::pow(1.0 - p, d - 1 - m);
  }
  return w;
}

KrausChannel make_dephasing_d(int d, double p) {
  auto w = dephasing_d_weights(d, p);
  std::vector<Mat> kraus;
  for (int m = 0; m < d; ++m)
    if (w[m] > 0.0) kraus.push_back(std::sqrt(w[m]) * weyl_operator(d, 0, m));
  return KrausChannel::checked(d, d, std::move(kraus));
}

KrausChannel make_erasure(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("erasure: p outside [0,1]");
  Mat embed = Mat::Zero(3, 2);
  embed(0, 0) = 1.0;
  embed(1, 1) = 1.0;
  std::vector<Mat> kraus;
  if (p < 1.0) kraus.push_back(std::sqrt(1.0 - p) * embed);
  if (p > 0.0) {
    Mat e0 = Mat::Zero(3, 2), e1 = Mat::Zero(3, 2);
    e0(2, 0) = std::sqrt(p);
    e1(2, 1) = std::sqrt(p);
    kraus.push_back(e0);
    kraus.push_back(e1);
  }
  return KrausChannel::checked(2, 3, std::move(kraus));
}

KrausChannel make_amplitude_damping(double gamma) {
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("amplitude_damping: gamma outside [0,1]");
  Mat k0 = Mat::Zero(2, 2), k1 = Mat::Zero(2, 2);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - gamma);
  k1(0, 1) = std::sqrt(gamma);
  std::vector<Mat> kraus = {k0};
  if (gamma > 0.0) kraus.push_back(k1);
  return KrausChannel::checked(2, 2, std::move(kraus));
}

KrausChannel make_identity(int d) {
  return KrausChannel::checked(d, d, {Mat::Identity(d, d)});
}

double coherent_info(const KrausChannel& channel) {
  DensityMatrix rho = choi(channel);
  double s_b = von_neumann_entropy(partial_trace(rho, {1}));
  return s_b - von_neumann_entropy(rho);
}

double reverse_coherent_info(const KrausChannel& channel) {
  DensityMatrix rho = choi(channel);
  double s_a = von_neumann_entropy(partial_trace(rho, {0}));
  return s_a - von_neumann_entropy(rho);
}

EbVerdict is_entanglement_breaking_dv(const KrausChannel& channel) {
  DensityMatrix rho = choi(channel);
  EbVerdict v;
  v.min_pt_eig = partial_transpose_min_eig(rho, 1);
  v.breaking = v.min_pt_eig >= -kPsdTol;
  int lo = std::min(channel.in_dim, channel.out_dim);
  int hi = std::max(channel.in_dim, channel.out_dim);
  v.exact = (lo == 2 && (hi == 2 || hi == 3));
  return v;
}

}  // namespace qflux
