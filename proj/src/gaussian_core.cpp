#include "qflux/gaussian_core.hpp"

#include <cmath>
#include <stdexcept>

namespace qflux {

namespace {

constexpr double kSymTol = 1e-12;
constexpr double kPureTol = 1e-9;
constexpr double kMaxDeficit = 1e-6;

Eigen::SelfAdjointEigenSolver<RMat> sym_eigs(const RMat& m, const char* what) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymTol * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw std::invalid_argument(std::string(what) + ": matrix not symmetric");
  Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success) throw std::runtime_error(std::string(what) + ": eigensolver failed");
  return es;
}

// V^{1/2} and V^{-1/2} from one eigendecomposition.
void sqrt_pair(const RMat& v, RMat& half, RMat& inv_half) {
  auto es = sym_eigs(v, "cm sqrt");
  Eigen::VectorXd w = es.eigenvalues();
  for (int i = 0; i < w.size(); ++i) {
    if (w(i) <= 0.0) throw std::invalid_argument("covariance matrix not positive definite");
    w(i) = std::sqrt(w(i));
  }
  half = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
  inv_half = es.eigenvectors() * w.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

std::vector<double> symplectic_spectrum(const RMat& v) {
  const int n = static_cast<int>(v.rows()) / 2;
  RMat half, inv_half;
  sqrt_pair(v, half, inv_half);
  Mat k = cplx(0.0, 1.0) * (half * omega_matrix(n) * half).cast<cplx>();
  Eigen::SelfAdjointEigenSolver<Mat> es(k);
  Eigen::VectorXd abs_ev = es.eigenvalues().cwiseAbs();
  std::sort(abs_ev.data(), abs_ev.data() + abs_ev.size());
  std::vector<double> nus(n);
  for (int i = 0; i < n; ++i) nus[i] = 0.5 * (abs_ev(2 * i) + abs_ev(2 * i + 1));
  return nus;
}

}  // namespace

RMat omega_matrix(int n_modes) {
  RMat w = RMat::Zero(2 * n_modes, 2 * n_modes);
  for (int k = 0; k < n_modes; ++k) {
    w(2 * k, 2 * k + 1) = 1.0;
    w(2 * k + 1, 2 * k) = -1.0;
  }
  return w;
}

GaussianCM GaussianCM::unchecked(int n_modes, RMat V) {
  if (n_modes < 1 || V.rows() != 2 * n_modes || V.cols() != 2 * n_modes)
    throw std::invalid_argument("covariance matrix size mismatch");
  return GaussianCM{n_modes, std::move(V)};
}

GaussianCM GaussianCM::checked(int n_modes, RMat V) {
  GaussianCM cm = unchecked(n_modes, std::move(V));
  double scale = std::max(1.0, cm.V.cwiseAbs().maxCoeff());
  if ((cm.V - cm.V.transpose()).cwiseAbs().maxCoeff() > kSymTol * scale)
    throw std::invalid_argument("covariance matrix not symmetric");
  Mat bona = cm.V.cast<cplx>() + cplx(0.0, 0.5) * omega_matrix(n_modes).cast<cplx>();
  Eigen::SelfAdjointEigenSolver<Mat> es(bona);
  if (es.eigenvalues().minCoeff() < -kPsdTol * scale)
    throw std::invalid_argument("covariance matrix violates the uncertainty bound");
  return cm;
}

GaussianCM tmsv_cm(double mu) {
  if (mu < 0.5) throw std::invalid_argument("tmsv_cm: variance must be >= 1/2");
  double c = std::sqrt(mu * mu - 0.25);
  RMat v = RMat::Zero(4, 4);
  v(0, 0) = v(1, 1) = v(2, 2) = v(3, 3) = mu;
  v(0, 2) = v(2, 0) = c;
  v(1, 3) = v(3, 1) = -c;
  return GaussianCM::unchecked(2, std::move(v));
}

std::vector<double> symplectic_eigenvalues(const GaussianCM& cm) {
  return symplectic_spectrum(cm.V);
}

double gaussian_entropy(const GaussianCM& cm) {
  double s = 0.0;
  for (double nu : symplectic_eigenvalues(cm)) s += bosonic_h(std::max(0.0, nu - 0.5));
  return s;
}

double gaussian_cross_entropy(const GaussianCM& v1, const GaussianCM& v2) {
  if (v1.n_modes != v2.n_modes)
    throw std::invalid_argument("gaussian_cross_entropy: mode count mismatch");
  const int n = v2.n_modes;
  RMat half, inv_half;
  sqrt_pair(v2.V, half, inv_half);
  const Mat om = omega_matrix(n).cast<cplx>();
  Mat k = 2.0 * cplx(0.0, 1.0) * (half * omega_matrix(n) * half).cast<cplx>();
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (k + k.adjoint()));
  Eigen::VectorXcd ac(es.eigenvalues().size());
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    double x = es.eigenvalues()(i);
    if (std::abs(x) <= 1.0 + 1e-12)
      throw std::invalid_argument("gaussian_cross_entropy: sigma has a pure mode");
    ac(i) = 0.5 * std::log((x + 1.0) / (x - 1.0));  // arccoth
  }
  Mat arccoth_m = half.cast<cplx>() * es.eigenvectors() * ac.asDiagonal() *
                  es.eigenvectors().adjoint() * inv_half.cast<cplx>();
  Mat gibbs_c = 2.0 * cplx(0.0, 1.0) * om * arccoth_m;
  RMat gibbs = 0.5 * (gibbs_c.real() + gibbs_c.real().transpose());

  // ln Z = (1/2) ln det(V + i Omega / 2)
  Mat bona = v2.V.cast<cplx>() + cplx(0.0, 0.5) * om;
  Eigen::SelfAdjointEigenSolver<Mat> bs(bona);
  double ln_z = 0.0;
  for (int i = 0; i < bs.eigenvalues().size(); ++i) {
    double lam = bs.eigenvalues()(i);
    if (lam <= 0.0) throw std::invalid_argument("gaussian_cross_entropy: sigma not full rank");
    ln_z += 0.5 * std::log(lam);
  }
  return (0.5 * (gibbs.cwiseProduct(v1.V)).sum() + ln_z) / M_LN2;
}

double gaussian_relative_entropy(const GaussianCM& v1, const GaussianCM& v2) {
  if (v1.n_modes != v2.n_modes)
    throw std::invalid_argument("gaussian_relative_entropy: mode count mismatch");
  auto nus2 = symplectic_eigenvalues(v2);
  double min_nu = *std::min_element(nus2.begin(), nus2.end());
  if (min_nu <= 0.5 + kPureTol) {
    // sigma has (numerically) pure modes: finite only when the states coincide
    double dev = (v1.V - v2.V).cwiseAbs().maxCoeff();
    return dev <= 1e-8 ? 0.0 : infinity();
  }
  double val = gaussian_cross_entropy(v1, v2) - gaussian_entropy(v1);
  if (val < 0.0 && val > -1e-9) val = 0.0;
  return val;
}

double pt_min_symplectic(const GaussianCM& cm) {
  if (cm.n_modes != 2) throw std::invalid_argument("pt_min_symplectic: need a two-mode CM");
  RMat p = RMat::Identity(4, 4);
  p(3, 3) = -1.0;
  RMat vt = p * cm.V * p;
  auto nus = symplectic_spectrum(vt);
  return *std::min_element(nus.begin(), nus.end());
}

// --- truncated Fock machinery ---

namespace {

double log_factorial(int n) { return std::lgamma(n + 1.0); }

// Exact truncated matrix elements of exp(alpha a^dag) (lower triangular in m >= n).
Mat exp_raise(cplx alpha, int n) {
  Mat m = Mat::Zero(n, n);
  for (int row = 0; row < n; ++row)
    for (int col = 0; col <= row; ++col) {
      int k = row - col;
      double mag = std::exp(0.5 * log_factorial(row) - 0.5 * log_factorial(col) - log_factorial(k));
      m(row, col) = std::pow(alpha, k) * mag;
    }
  return m;
}

// <m| D(alpha) |n> for the truncated space; exact corner of the infinite
// operator since lowering acts first.
Mat displacement(cplx alpha, int n) {
  Mat lower = exp_raise(-std::conj(alpha), n).transpose();
  Mat raise = exp_raise(alpha, n);
  return std::exp(-0.5 * std::norm(alpha)) * (raise * lower);
}

std::vector<Mat> loss_kraus_fock(double g, int n) {
  std::vector<Mat> ks;
  for (int k = 0; k < n; ++k) {
    if (k > 0 && g >= 1.0) break;  // perfect transmission keeps only the identity
    Mat m = Mat::Zero(n, n);
    bool nonzero = false;
    for (int in = k; in < n; ++in) {
      if (in > k && g <= 0.0) break;  // zero transmissivity keeps nothing above vacuum
      double lv = 0.5 * (log_factorial(in) - log_factorial(k) - log_factorial(in - k));
      if (in > k) lv += 0.5 * (in - k) * std::log(g);
      if (k > 0) lv += 0.5 * k * std::log1p(-g);
      m(in - k, in) = std::exp(lv);
      nonzero = true;
    }
    if (nonzero) ks.push_back(std::move(m));
  }
  return ks;
}

std::vector<Mat> amplifier_kraus_fock(double g, int n) {
  std::vector<Mat> ks;
  const double x = 1.0 - 1.0 / g;  // in (0,1) since g > 1
  for (int k = 0; k < n; ++k) {
    Mat m = Mat::Zero(n, n);
    for (int in = 0; in + k < n; ++in) {
      double lv = 0.5 * (log_factorial(in + k) - log_factorial(k) - log_factorial(in) +
                         (in + 1) * std::log(1.0 / g) + k * std::log(x));
      m(in + k, in) = std::exp(lv);
    }
    ks.push_back(std::move(m));
  }
  return ks;
}

// Physicists' Gauss-Hermite nodes/weights via Golub-Welsch.
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  RMat j = RMat::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    double off = std::sqrt(k / 2.0);
    j(k - 1, k) = off;
    j(k, k - 1) = off;
  }
  Eigen::SelfAdjointEigenSolver<RMat> es(j);
  nodes.resize(n);
  weights.resize(n);
  const double sqrt_pi = std::sqrt(M_PI);
  for (int i = 0; i < n; ++i) {
    nodes[i] = es.eigenvalues()(i);
    double v0 = es.eigenvectors()(0, i);
    weights[i] = sqrt_pi * v0 * v0;
  }
}

// rho' = sum_m w_m (I (x) K_m) rho (I (x) K_m)^dag on mode B, through the
// one-mode superoperator matrix S = sum_m w_m K_m (x) conj(K_m): a single
// (nb^2 x nb^2) x (nb^2 x na^2) product instead of many thin ones.
Mat apply_mode_b(const Mat& rho, int na, int nb, const std::vector<Mat>& kraus,
                 const std::vector<double>& pre = {}) {
  Mat s = Mat::Zero(nb * nb, nb * nb);
  for (size_t m = 0; m < kraus.size(); ++m) {
    const Mat& k = kraus[m];
    const double w = pre.empty() ? 1.0 : pre[m];
    for (int c = 0; c < nb; ++c)
      for (int cp = 0; cp < nb; ++cp) {
        auto col = s.col(c * nb + cp);
        Vec conj_cp = w * k.col(cp).conjugate();
        for (int b = 0; b < nb; ++b) {
          cplx kv = k(b, c);
          if (kv == cplx(0.0, 0.0)) continue;
          col.segment(b * nb, nb) += kv * conj_cp;
        }
      }
  }
  Mat r(nb * nb, na * na);
  for (int a = 0; a < na; ++a)
    for (int ap = 0; ap < na; ++ap)
      for (int c = 0; c < nb; ++c)
        for (int cp = 0; cp < nb; ++cp)
          r(c * nb + cp, a * na + ap) = rho(a * nb + c, ap * nb + cp);
  Mat rp = s * r;
  Mat out(na * nb, na * nb);
  for (int a = 0; a < na; ++a)
    for (int ap = 0; ap < na; ++ap)
      for (int b = 0; b < nb; ++b)
        for (int bp = 0; bp < nb; ++bp)
          out(a * nb + b, ap * nb + bp) = rp(b * nb + bp, a * na + ap);
  return out;
}

Mat truncated_annihilator(int n) {
  Mat a = Mat::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

}  // namespace

FockState fock_oracle(FockKind kind, const FockParams& params, double mu, int cutoff) {
  if (mu < 0.5) throw std::invalid_argument("fock_oracle: variance must be >= 1/2");
  if (cutoff < 2 || cutoff > 60) throw std::invalid_argument("fock_oracle: cutoff outside [2, 60]");
  if ((kind == FockKind::LossOutput || kind == FockKind::AmplifierOutput) && params.nbar != 0.0)
    throw std::invalid_argument("fock_oracle: only quantum-limited (nbar = 0) loss/amplifier supported");
  if (kind == FockKind::LossOutput && (params.g < 0.0 || params.g > 1.0))
    throw std::invalid_argument("fock_oracle: loss transmissivity outside [0,1]");
  if (kind == FockKind::AmplifierOutput && params.g <= 1.0)
    throw std::invalid_argument("fock_oracle: amplifier gain must exceed 1");
  if (kind == FockKind::AdditiveOutput && params.xi < 0.0)
    throw std::invalid_argument("fock_oracle: additive-noise variance must be >= 0");

  const int n = cutoff;
  double lam2 = (mu - 0.5) / (mu + 0.5);
  Vec psi = Vec::Zero(n * n);
  double amp2 = 1.0 - lam2;
  for (int k = 0; k < n; ++k) {
    psi(k * n + k) = std::sqrt(amp2 * std::pow(lam2, k));
  }
  Mat rho = psi * psi.adjoint();

  switch (kind) {
    case FockKind::Tmsv:
      break;
    case FockKind::LossOutput:
      rho = apply_mode_b(rho, n, n, loss_kraus_fock(params.g, n));
      break;
    case FockKind::AmplifierOutput:
      rho = apply_mode_b(rho, n, n, amplifier_kraus_fock(params.g, n));
      break;
    case FockKind::AdditiveOutput: {
      std::vector<double> nodes, weights;
      gauss_hermite(64, nodes, weights);
      const double scale = std::sqrt(params.xi);
      const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);
      std::vector<Mat> dx, dp;
      std::vector<double> w;
      for (size_t i = 0; i < nodes.size(); ++i) {
        dx.push_back(displacement(scale * nodes[i], n));
        dp.push_back(displacement(cplx(0.0, scale * nodes[i]), n));
        w.push_back(weights[i] * inv_sqrt_pi);
      }
      rho = apply_mode_b(rho, n, n, dx, w);
      rho = apply_mode_b(rho, n, n, dp, w);
      break;
    }
  }

  FockState st;
  st.cutoffs = {n, n};
  st.rho = 0.5 * (rho + rho.adjoint());
  st.deficit = 1.0 - std::real(rho.trace());
  if (st.deficit > kMaxDeficit)
    throw std::runtime_error("fock_oracle: truncation deficit " + std::to_string(st.deficit) +
                             " exceeds 1e-6; increase the cutoff");
  return st;
}

double FockState::entropy() const {
  if (entropy_cache_ >= 0.0) return entropy_cache_;
  Eigen::SelfAdjointEigenSolver<Mat> es(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    double lam = es.eigenvalues()(i);
    if (lam > kLogCutoff) s -= lam * std::log2(lam);
  }
  entropy_cache_ = std::max(0.0, s);
  return entropy_cache_;
}

RMat FockState::covariance() const {
  if (n_modes() != 2) throw std::invalid_argument("FockState::covariance: two modes expected");
  const int na = cutoffs[0], nb = cutoffs[1];
  Mat aa = truncated_annihilator(na), ab = truncated_annihilator(nb);
  const double s2 = std::sqrt(2.0);
  std::vector<Mat> qa = {(aa + aa.adjoint()) / s2, cplx(0.0, 1.0) * (aa.adjoint() - aa) / s2};
  std::vector<Mat> qb = {(ab + ab.adjoint()) / s2, cplx(0.0, 1.0) * (ab.adjoint() - ab) / s2};

  // reduced states and the cross sesquilinear pairings, all O(D^2)
  Mat ra = Mat::Zero(na, na), rb = Mat::Zero(nb, nb);
  for (int a = 0; a < na; ++a)
    for (int ap = 0; ap < na; ++ap)
      for (int b = 0; b < nb; ++b) {
        ra(a, ap) += rho(a * nb + b, ap * nb + b);
        if (a == ap) rb.col(b) += rho.block(a * nb, a * nb + b, nb, 1);
      }

  auto cross = [&](const Mat& pa, const Mat& pb) {
    // Tr(rho (P_A (x) P_B))
    cplx acc = 0.0;
    for (int a = 0; a < na; ++a)
      for (int ap = 0; ap < na; ++ap) {
        if (pa(ap, a) == cplx(0.0, 0.0)) continue;
        cplx inner = (pb.transpose().cwiseProduct(rho.block(a * nb, ap * nb, nb, nb))).sum();
        acc += pa(ap, a) * inner;
      }
    return acc;
  };

  RMat v(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Mat sym_a = 0.5 * (qa[i] * qa[j] + qa[j] * qa[i]);
      Mat sym_b = 0.5 * (qb[i] * qb[j] + qb[j] * qb[i]);
      v(i, j) = std::real((ra * sym_a).trace());
      v(2 + i, 2 + j) = std::real((rb * sym_b).trace());
      v(i, 2 + j) = std::real(cross(qa[i], qb[j]));
      v(2 + j, i) = v(i, 2 + j);
    }
  return 0.5 * (v + v.transpose());
}

double relative_entropy_fock_vs_gaussian(const FockState& state, const GaussianCM& sigma) {
  if (state.n_modes() != sigma.n_modes)
    throw std::invalid_argument("relative_entropy_fock_vs_gaussian: mode count mismatch");
  GaussianCM moments = GaussianCM::unchecked(state.n_modes(), state.covariance());
  return gaussian_cross_entropy(moments, sigma) - state.entropy();
}

}  // namespace qflux
