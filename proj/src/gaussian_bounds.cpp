#include "qflux/gaussian_bounds.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace qflux {

namespace {

constexpr double kClassifyTol = 1e-9;

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

RMat reflection() {
  RMat z = RMat::Identity(2, 2);
  z(1, 1) = -1.0;
  return z;
}

}  // namespace

CanonicalForm CanonicalForm::loss(double g, double nbar) {
  if (g < 0.0 || g > 1.0) throw std::invalid_argument("loss: transmissivity outside [0,1]");
  if (nbar < 0.0) throw std::invalid_argument("loss: nbar must be >= 0");
  return CanonicalForm{FormKind::Loss, g, nbar, 0.0};
}

CanonicalForm CanonicalForm::amplifier(double g, double nbar) {
  if (g <= 1.0) throw std::invalid_argument("amplifier: gain must exceed 1");
  if (nbar < 0.0) throw std::invalid_argument("amplifier: nbar must be >= 0");
  return CanonicalForm{FormKind::Amplifier, g, nbar, 0.0};
}

CanonicalForm CanonicalForm::conj_amplifier(double g, double nbar) {
  if (g >= 0.0) throw std::invalid_argument("conj_amplifier: parameter must be negative");
  if (nbar < 0.0) throw std::invalid_argument("conj_amplifier: nbar must be >= 0");
  return CanonicalForm{FormKind::ConjAmplifier, g, nbar, 0.0};
}

CanonicalForm CanonicalForm::additive(double xi) {
  if (xi < 0.0) throw std::invalid_argument("additive: noise variance must be >= 0");
  return CanonicalForm{FormKind::Additive, 1.0, 0.0, xi};
}

CanonicalForm CanonicalForm::a2(double nbar) {
  if (nbar < 0.0) throw std::invalid_argument("a2: nbar must be >= 0");
  return CanonicalForm{FormKind::A2, 0.0, nbar, 0.0};
}

CanonicalForm CanonicalForm::b1() { return CanonicalForm{FormKind::B1, 1.0, 0.0, 0.0}; }
CanonicalForm CanonicalForm::identity() { return CanonicalForm{FormKind::Identity, 1.0, 0.0, 0.0}; }

std::string CanonicalForm::id() const {
  switch (kind) {
    case FormKind::Loss: return "loss(g=" + fmt(g) + ",nbar=" + fmt(nbar) + ")";
    case FormKind::Amplifier: return "amp(g=" + fmt(g) + ",nbar=" + fmt(nbar) + ")";
    case FormKind::ConjAmplifier: return "conj-amp(g=" + fmt(g) + ",nbar=" + fmt(nbar) + ")";
    case FormKind::Additive: return "additive(xi=" + fmt(xi) + ")";
    case FormKind::A2: return "a2(nbar=" + fmt(nbar) + ")";
    case FormKind::B1: return "b1";
    case FormKind::Identity: return "identity";
  }
  return "?";
}

std::pair<RMat, RMat> cm_action(const CanonicalForm& form) {
  const RMat id = RMat::Identity(2, 2);
  const double omega = form.nbar + 0.5;
  switch (form.kind) {
    case FormKind::Loss:
      return {std::sqrt(form.g) * id, (1.0 - form.g) * omega * id};
    case FormKind::Amplifier:
      return {std::sqrt(form.g) * id, (form.g - 1.0) * omega * id};
    case FormKind::ConjAmplifier:
      return {std::sqrt(-form.g) * reflection(), (1.0 - form.g) * omega * id};
    case FormKind::Additive:
      return {id, form.xi * id};
    case FormKind::A2: {
      RMat g = RMat::Zero(2, 2);
      g(0, 0) = 1.0;
      return {g, omega * id};
    }
    case FormKind::B1: {
      RMat n = RMat::Zero(2, 2);
      n(1, 1) = 0.5;
      return {id, n};
    }
    case FormKind::Identity:
      return {id, RMat::Zero(2, 2)};
  }
  throw std::logic_error("cm_action: unknown form");
}

GaussianCM output_cm(const CanonicalForm& form, double mu) {
  if (mu < 0.5) throw std::invalid_argument("output_cm: variance must be >= 1/2");
  if (form.kind == FormKind::B1)
    throw std::invalid_argument("output_cm: B1 form has no finite-CM treatment");
  auto [g, n] = cm_action(form);
  const double c = std::sqrt(mu * mu - 0.25);
  RMat cz = c * reflection();
  RMat v = RMat::Zero(4, 4);
  v.topLeftCorner(2, 2) = mu * RMat::Identity(2, 2);
  v.bottomRightCorner(2, 2) = g * (mu * RMat::Identity(2, 2)) * g.transpose() + n;
  v.topRightCorner(2, 2) = cz * g.transpose();
  v.bottomLeftCorner(2, 2) = v.topRightCorner(2, 2).transpose();
  return GaussianCM::checked(2, v);
}

bool is_entanglement_breaking(const CanonicalForm& form) {
  switch (form.kind) {
    case FormKind::Loss:
      return form.g < 1.0 && form.nbar >= form.g / (1.0 - form.g);
    case FormKind::Amplifier:
      return form.nbar >= 1.0 / (form.g - 1.0);
    case FormKind::ConjAmplifier:
      return true;
    case FormKind::Additive:
      return form.xi >= 1.0;
    case FormKind::A2:
      return true;
    case FormKind::B1:
    case FormKind::Identity:
      return false;
  }
  throw std::logic_error("is_entanglement_breaking: unknown form");
}

double flux_upper(const CanonicalForm& form) {
  switch (form.kind) {
    case FormKind::Loss: {
      if (form.g >= 1.0) return infinity();
      if (is_entanglement_breaking(form)) return 0.0;
      return -std::log2((1.0 - form.g) * std::pow(form.g, form.nbar)) - bosonic_h(form.nbar);
    }
    case FormKind::Amplifier: {
      if (is_entanglement_breaking(form)) return 0.0;
      return std::log2(std::pow(form.g, form.nbar + 1.0) / (form.g - 1.0)) - bosonic_h(form.nbar);
    }
    case FormKind::ConjAmplifier:
    case FormKind::A2:
      return 0.0;
    case FormKind::Additive: {
      if (form.xi == 0.0) return infinity();
      if (form.xi >= 1.0) return 0.0;
      return (form.xi - 1.0) / M_LN2 - std::log2(form.xi);
    }
    case FormKind::B1:
    case FormKind::Identity:
      return infinity();
  }
  throw std::logic_error("flux_upper: unknown form");
}

double lower_bound(const CanonicalForm& form) {
  switch (form.kind) {
    case FormKind::Loss: {
      if (form.g >= 1.0) return infinity();
      if (form.g == 0.0) return 0.0;
      if (form.nbar == 0.0) return std::max(0.0, -std::log2(1.0 - form.g));
      // reverse coherent information on the finite-mu Choi sequence
      GaussianCM out = output_cm(form, kLossLowerMu);
      double s_a = bosonic_h(kLossLowerMu - 0.5);
      return std::max(0.0, s_a - gaussian_entropy(out));
    }
    case FormKind::Amplifier:
      return std::max(0.0, std::log2(form.g / (form.g - 1.0)) - bosonic_h(form.nbar));
    case FormKind::Additive: {
      if (form.xi == 0.0) return infinity();
      return std::max(0.0, -1.0 / M_LN2 - std::log2(form.xi));
    }
    case FormKind::ConjAmplifier:
    case FormKind::A2:
    case FormKind::B1:
      return 0.0;
    case FormKind::Identity:
      return infinity();
  }
  throw std::logic_error("lower_bound: unknown form");
}

GaussianCM sigma_tilde_cm(const CanonicalForm& form, double mu) {
  GaussianCM out = output_cm(form, mu);
  double a = out.V(0, 0), b = out.V(2, 2);
  double cp = std::sqrt((a - 0.5) * (b - 0.5));
  RMat v = out.V;
  v(0, 2) = v(2, 0) = cp;
  v(1, 3) = v(3, 1) = -cp;
  return GaussianCM::checked(2, std::move(v));
}

double finite_mu_bound(const CanonicalForm& form, double mu) {
  if (form.kind == FormKind::B1)
    throw std::invalid_argument("finite_mu_bound: B1 form has no finite-CM treatment");
  if (is_entanglement_breaking(form)) return 0.0;
  GaussianCM out = output_cm(form, mu);
  GaussianCM sigma = sigma_tilde_cm(form, mu);
  if (pt_min_symplectic(sigma) < 0.5 - kPsdTol)
    throw std::runtime_error("finite_mu_bound: comparison state is not separable");
  return gaussian_relative_entropy(out, sigma);
}

double finite_mu_extrapolated(const CanonicalForm& form, const std::vector<double>& mus) {
  if (mus.size() < 2) throw std::invalid_argument("finite_mu_extrapolated: need >= 2 mu values");
  double exponent = form.kind == FormKind::Additive ? 0.5 : 1.0;
  // one Richardson step on the two largest mu values: v(mu) = v_inf + C mu^-q
  std::vector<double> sorted(mus);
  std::sort(sorted.begin(), sorted.end());
  double mu1 = sorted[sorted.size() - 2], mu2 = sorted.back();
  double v1 = finite_mu_bound(form, mu1), v2 = finite_mu_bound(form, mu2);
  double h1 = std::pow(mu1, -exponent), h2 = std::pow(mu2, -exponent);
  return v2 + (v2 - v1) * h2 / (h1 - h2);
}

double ensemble_flux_bound(const std::vector<std::pair<double, CanonicalForm>>& ensemble) {
  if (ensemble.empty()) throw std::invalid_argument("ensemble_flux_bound: empty ensemble");
  std::vector<double> probs;
  for (const auto& [p, form] : ensemble) probs.push_back(p);
  ProbDist::checked(probs);
  double acc = 0.0;
  for (const auto& [p, form] : ensemble) {
    if (p == 0.0) continue;
    double phi = flux_upper(form);
    if (std::isinf(phi)) return infinity();
    acc += p * phi;
  }
  return acc;
}

ComposeResult compose(const CanonicalForm& first, const CanonicalForm& second) {
  auto [g1, n1] = cm_action(first);
  auto [g2, n2] = cm_action(second);
  RMat g = g2 * g1;
  RMat n = g2 * n1 * g2.transpose() + n2;

  auto is_diag = [](const RMat& m) {
    return std::abs(m(0, 1)) <= kClassifyTol && std::abs(m(1, 0)) <= kClassifyTol;
  };
  UnclassifiedComposite raw{g, n};
  if (!is_diag(g) || !is_diag(n)) return raw;

  const double g00 = g(0, 0), g11 = g(1, 1);
  const double n00 = n(0, 0), n11 = n(1, 1);
  const bool n_scalar = std::abs(n00 - n11) <= kClassifyTol;
  auto snap = [](double x) { return std::abs(x) <= kClassifyTol ? 0.0 : x; };

  if (std::abs(g00 - 1.0) <= kClassifyTol && std::abs(g11 - 1.0) <= kClassifyTol) {
    if (std::abs(n00) <= kClassifyTol && std::abs(n11) <= kClassifyTol)
      return CanonicalForm::identity();
    if (n_scalar) return CanonicalForm::additive(std::max(0.0, 0.5 * (n00 + n11)));
    if (std::abs(n00) <= kClassifyTol && std::abs(n11 - 0.5) <= kClassifyTol)
      return CanonicalForm::b1();
    return raw;
  }
  if (std::abs(g00 - g11) <= kClassifyTol && g00 > 0.0 && n_scalar) {
    double gain = g00 * g00;
    double nval = 0.5 * (n00 + n11);
    if (gain < 1.0) {
      double nbar = snap(nval / (1.0 - gain) - 0.5);
      if (nbar >= 0.0) return CanonicalForm::loss(gain, nbar);
      return raw;
    }
    double nbar = snap(nval / (gain - 1.0) - 0.5);
    if (nbar >= 0.0) return CanonicalForm::amplifier(gain, nbar);
    return raw;
  }
  if (std::abs(g00 + g11) <= kClassifyTol && g00 > 0.0 && n_scalar) {
    double gain = -g00 * g00;
    double nbar = snap(0.5 * (n00 + n11) / (1.0 - gain) - 0.5);
    if (nbar >= 0.0) return CanonicalForm::conj_amplifier(gain, nbar);
    return raw;
  }
  if (std::abs(g00 - 1.0) <= kClassifyTol && std::abs(g11) <= kClassifyTol && n_scalar) {
    double nbar = snap(0.5 * (n00 + n11) - 0.5);
    if (nbar >= 0.0) return CanonicalForm::a2(nbar);
    return raw;
  }
  return raw;
}

}  // namespace qflux
