#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qflux/linops.hpp"

namespace qflux {

/// Completely positive trace-preserving map given by a finite Kraus list.
struct KrausChannel {
  int in_dim = 0;
  int out_dim = 0;
  std::vector<Mat> kraus;

  /// Checks sum_m K_m^dag K_m = I within kHermTol.
  static KrausChannel checked(int in_dim, int out_dim, std::vector<Mat> kraus);
};

/// Generalized Pauli X^a Z^b on a qudit (a, b mod d).
struct WeylUnitary {
  int d = 2;
  int a = 0;
  int b = 0;
  Mat matrix() const;
};

/// X^a Z^b with X|j> = |j+1 mod d>, Z|j> = w^j |j>, w = exp(i 2 pi / d).
Mat weyl_operator(int d, int a, int b);

/// The d^2 teleportation unitaries in a fixed enumeration ((a,b) lexicographic).
std::vector<WeylUnitary> weyl_set(int d);

/// Maximally entangled state sum_i |ii>/sqrt(d) on dims {d, d}.
DensityMatrix epr_state(int d);
Vec epr_vector(int d);

/// Bell POVM element (T_k (x) I)^dag |Phi><Phi| (T_k (x) I) for k = (a,b).
Mat bell_povm_element(int d, int a, int b);
/// Bra <phi_k| as a 1 x d^2 matrix; projecting with it implements a Bell branch.
Mat bell_bra(int d, int a, int b);

/// Choi state (I (x) E)(Phi) on dims {in_dim, out_dim}.
DensityMatrix choi(const KrausChannel& channel);

DensityMatrix apply_channel(const KrausChannel& channel, const DensityMatrix& rho);

// --- constructors ---

KrausChannel make_pauli(const ProbDist& p);
KrausChannel make_depolarizing(double p);
/// Qubit dephasing with flip probability p: weights {1-p, 0, 0, p} on {I,X,Y,Z}.
/// 1 - H2(p) is symmetric under p <-> 1-p, so either labeling yields the same
/// capacity.
KrausChannel make_dephasing(double p);
/// d-dimensional dephasing: Kraus sqrt(P_m) Z^m with binomial weights
/// P_m = C(d-1,m) p^m (1-p)^(d-1-m).
KrausChannel make_dephasing_d(int d, double p);
/// Qubit erasure into a qutrit output; |2> is the erasure flag.
KrausChannel make_erasure(double p);
KrausChannel make_amplitude_damping(double gamma);
KrausChannel make_identity(int d);

std::vector<double> dephasing_d_weights(int d, double p);

// --- entropic functionals on the Choi state ---

double coherent_info(const KrausChannel& channel);
double reverse_coherent_info(const KrausChannel& channel);

struct EbVerdict {
  bool breaking = false;  // PPT Choi
  bool exact = false;     // true when Choi dims are 2x2 or 2x3 (PPT = separable)
  double min_pt_eig = 0.0;
};

EbVerdict is_entanglement_breaking_dv(const KrausChannel& channel);

}  // namespace qflux
