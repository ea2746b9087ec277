#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "qflux/dv_bounds.hpp"
#include "qflux/gaussian_bounds.hpp"

namespace qflux {

/// Thrown on malformed channel specifications (maps to CLI exit code 2).
struct SpecParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when parameters fall outside a family's domain (CLI exit code 3).
struct SpecDomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DvFamily { Pauli, Depolarizing, Dephasing, DephasingD, Erasure, AmplitudeDamping };

struct DvSpec {
  DvFamily family;
  double p = 0.0;
  double gamma = 0.0;
  int d = 2;
  std::vector<double> probs;  // pauli

  KrausChannel channel() const;
  std::string id() const;
};

using ChannelSpec = std::variant<DvSpec, CanonicalForm>;

/// Grammar: `<family> --<param> <value> ...` with families
/// loss, amp, conj-amp, additive, a2, b1, pauli, depol, dephasing,
/// dephasing-d, erasure, amp-damp.
ChannelSpec parse_channel_spec(const std::vector<std::string>& tokens);
ChannelSpec parse_channel_spec(const std::string& text);

std::string spec_id(const ChannelSpec& spec);
bool is_gaussian(const ChannelSpec& spec);

/// Assembles the capacity-bound report for any supported channel.
BoundReport bound_report(const ChannelSpec& spec);

/// Deterministic 12-significant-digit float formatting shared by all output.
std::string format_number(double x);

/// JSON rendering of a report; +infinity becomes the string "inf".
std::string report_to_json(const BoundReport& report);

struct SweepSpec {
  std::string family;
  std::string param;
  double start = 0.0;
  double stop = 0.0;
  int steps = 2;
  bool log_grid = false;
  std::map<std::string, double> fixed;
  std::vector<double> finite_mus;
  int jobs = 1;
};

/// CSV with header `param,lower,upper,exact,eb` plus one `fmu_<mu>` column per
/// requested mu. Deterministic row order regardless of the worker count.
std::string run_sweep(const SweepSpec& spec);

}  // namespace qflux
