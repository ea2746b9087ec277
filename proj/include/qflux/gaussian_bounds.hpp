#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qflux/gaussian_core.hpp"

namespace qflux {

enum class FormKind { Loss, Amplifier, ConjAmplifier, Additive, A2, B1, Identity };

/// Canonical single-mode Gaussian channel: x -> G x + H x_E(nbar) + classical
/// noise of variance xi per quadrature.
struct CanonicalForm {
  FormKind kind = FormKind::Identity;
  double g = 1.0;     // transmissivity (Loss, 0..1), gain (Amplifier, >1),
                      // negative parameter (ConjAmplifier, <0)
  double nbar = 0.0;  // environment mean photon number
  double xi = 0.0;    // additive classical noise variance (Additive only)

  static CanonicalForm loss(double g, double nbar);
  static CanonicalForm amplifier(double g, double nbar);
  static CanonicalForm conj_amplifier(double g, double nbar);
  static CanonicalForm additive(double xi);
  static CanonicalForm a2(double nbar);
  static CanonicalForm b1();
  static CanonicalForm identity();

  std::string id() const;
};

/// CM-level action (G, N): V_B -> G V_B G^T + N.
std::pair<RMat, RMat> cm_action(const CanonicalForm& form);

/// CM of (I (x) E)(Phi_mu). B1 has no finite-CM treatment here and throws.
GaussianCM output_cm(const CanonicalForm& form, double mu);

/// Closed-form entanglement-breaking predicate.
bool is_entanglement_breaking(const CanonicalForm& form);

/// Closed-form flux upper bound in bits; 0 beyond the EB threshold,
/// +infinity for Identity and the B1 form.
double flux_upper(const CanonicalForm& form);

/// Achievable-rate lower bound ((reverse) coherent information), clamped at 0.
/// Thermal loss is evaluated numerically on the finite-mu Choi sequence.
double lower_bound(const CanonicalForm& form);
inline constexpr double kLossLowerMu = 1e6;

/// Separable comparison state: output CM with the cross block replaced by
/// +-sqrt((a - 1/2)(b - 1/2)).
GaussianCM sigma_tilde_cm(const CanonicalForm& form, double mu);

/// Relative entropy S(rho_mu || sigma~_mu); 0 (with the EB flag set by the
/// caller) for entanglement-breaking parameters.
double finite_mu_bound(const CanonicalForm& form, double mu);

/// Richardson-style limit estimate from a mu schedule, using the residual
/// order of each form (1/mu for loss/amplifier, 1/sqrt(mu) for additive).
double finite_mu_extrapolated(const CanonicalForm& form, const std::vector<double>& mus);

/// Convexity bound for a channel ensemble: sum p_i flux_upper(form_i).
double ensemble_flux_bound(const std::vector<std::pair<double, CanonicalForm>>& ensemble);

struct UnclassifiedComposite {
  RMat G;
  RMat N;
};

using ComposeResult = std::variant<CanonicalForm, UnclassifiedComposite>;

/// Applies `first`, then `second`, composing at the (G, N) level and matching
/// the result against the canonical templates (tolerance 1e-9).
ComposeResult compose(const CanonicalForm& first, const CanonicalForm& second);

}  // namespace qflux
