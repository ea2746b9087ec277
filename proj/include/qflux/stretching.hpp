#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qflux/dv_channels.hpp"

namespace qflux {

enum class Side { Alice, Bob };

/// Gate reference resolved against the target dimensions at execution time.
/// Names: I, X, Z, F (Fourier), CX, CZ, SWAP (two equal-dimension targets),
/// RAND:<seed> (Haar unitary on the joint target space).
struct GateSpec {
  std::string name;
};

struct Move {
  enum class Kind { Unitary, Measure, CondUnitary };
  Kind kind = Kind::Unitary;
  Side side = Side::Alice;
  std::vector<std::string> targets;
  GateSpec gate;                 // Unitary
  std::vector<GateSpec> gates;   // CondUnitary: selected by outcome % size
  int outcome_index = -1;        // CondUnitary: index into the broadcast record
};

/// Adaptive protocol: rounds+1 LOCC steps with one transmission after each of
/// the first `rounds` steps. Registers are named T1..Tn (systems to send),
/// A1.., B1.. (local ancillas) and R1..Rn (received systems).
struct AdaptiveProtocol {
  int d = 2;
  int rounds = 1;
  int alice_ancillas = 2;
  int bob_ancillas = 2;
  std::vector<std::vector<Move>> loccs;

  /// Static checks: register existence and sides phase by phase, conditional
  /// outcome references, and the total-dimension guard (<= 4096 including the
  /// resource pair attached during stretching).
  void validate(int out_dim) const;
};

AdaptiveProtocol parse_protocol(const std::string& text);
AdaptiveProtocol load_protocol(const std::string& path);
std::string format_protocol(const AdaptiveProtocol& protocol);

/// Seeded generator of genuinely adaptive protocols: local unitaries on both
/// sides, broadcast measurements, and outcome-conditioned unitaries.
AdaptiveProtocol random_protocol(int d, int rounds, std::uint64_t seed, int alice_ancillas = 2,
                                 int bob_ancillas = 2);

/// Result of the covariance search E(T_k rho T_k^dag) = U_k E(rho) U_k^dag
/// over the teleportation set.
struct StretchCertificate {
  int d = 2;
  bool stretchable = false;
  bool indeterminate = false;          // spectra match but no Weyl fit
  std::vector<Mat> corrections;        // U_k per Weyl index when stretchable
  std::vector<double> residuals;       // per-k Choi deviation
  double max_residual = 0.0;
  std::string witness;                 // failing T_k description when spectra differ
};

/// Searches U_k over the Weyl set (T_k tried first; for the erasure channel the
/// qubit Weyl operators act on the qubit block and fix the flag state). A Choi
/// spectrum mismatch for some T_k is a proof of non-stretchability and is
/// returned as a witness; a spectral match without a Weyl fit is reported as
/// indeterminate.
StretchCertificate check_stretchable(const KrausChannel& channel, int d);

/// Exact density-matrix evolution of the adaptive protocol; broadcast outcomes
/// are enumerated as explicit branches. Output registers are ordered
/// A1.., B1.., R1..Rn.
DensityMatrix simulate_adaptive(const AdaptiveProtocol& protocol, const KrausChannel& channel);

struct StretchOutcome {
  DensityMatrix state;
  double bell_prob_dev = 0.0;  // max deviation of outcome probabilities from sum 1
  double k_spread = 0.0;       // max pairwise distance of per-outcome conditional states
};

/// Replaces each transmission by a resource Choi pair consumed by a Bell
/// projection plus the certified output correction, composing the protocol's
/// LOCCs into the single final map acting on the Choi states.
StretchOutcome stretch_protocol(const AdaptiveProtocol& protocol, const KrausChannel& channel,
                                const StretchCertificate& cert);

struct VerifyReport {
  double trace_distance = 0.0;
  bool pass = false;
  double bell_prob_dev = 0.0;
  double k_spread = 0.0;
};

/// Trace distance between the direct simulation and the stretched protocol;
/// pass iff <= 1e-10.
VerifyReport verify_stretching(const AdaptiveProtocol& protocol, const KrausChannel& channel);

}  // namespace qflux
