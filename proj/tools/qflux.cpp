// qflux: capacity bounds for discrete-variable and single-mode Gaussian
// channels, teleportation-reduction verification, and channel composition.
//
// Exit codes: 0 success / verification passed; 2 parse or usage error;
// 3 parameter outside the family domain; 4 stretching verification failed;
// 5 channel not stretchable (witness printed); 6 unclassifiable composite.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qflux/channel_spec.hpp"
#include "qflux/stretching.hpp"

namespace {

using namespace qflux;

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitDomain = 3;
constexpr int kExitVerifyFail = 4;
constexpr int kExitNotStretchable = 5;
constexpr int kExitUnclassified = 6;

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

int cmd_bound(const std::vector<std::string>& tokens) {
  ChannelSpec spec = parse_channel_spec(tokens);
  std::cout << report_to_json(bound_report(spec)) << "\n";
  return kExitOk;
}

int cmd_compose(const std::string& first_text, const std::string& second_text) {
  ChannelSpec s1 = parse_channel_spec(first_text);
  ChannelSpec s2 = parse_channel_spec(second_text);
  if (!is_gaussian(s1) || !is_gaussian(s2))
    throw SpecParseError("compose expects two Gaussian canonical forms");
  const auto& f1 = std::get<CanonicalForm>(s1);
  const auto& f2 = std::get<CanonicalForm>(s2);
  ComposeResult result = compose(f1, f2);
  if (auto* raw = std::get_if<UnclassifiedComposite>(&result)) {
    std::ostringstream out;
    out << "{\"composite\":\"unclassified\",\"G\":[";
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        out << format_number(raw->G(i, j)) << (i * 2 + j < 3 ? "," : "");
    out << "],\"N\":[";
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        out << format_number(raw->N(i, j)) << (i * 2 + j < 3 ? "," : "");
    out << "]}";
    std::cout << out.str() << "\n";
    return kExitUnclassified;
  }
  const auto& form = std::get<CanonicalForm>(result);
  BoundReport report = bound_report(ChannelSpec{form});
  std::cout << "{\"composite\":\"" << json_escape(form.id())
            << "\",\"report\":" << report_to_json(report) << "}\n";
  return kExitOk;
}

int cmd_stretch_verify(const std::string& channel_text, const std::string& protocol_path,
                       int random_count, int rounds, std::uint64_t seed) {
  ChannelSpec spec = parse_channel_spec(channel_text);
  if (is_gaussian(spec))
    throw SpecParseError("stretch-verify operates on discrete-variable channels");
  const auto& dv = std::get<DvSpec>(spec);
  KrausChannel channel = dv.channel();

  StretchCertificate cert = check_stretchable(channel, channel.in_dim);
  if (!cert.stretchable) {
    std::cout << "{\"channel\":\"" << json_escape(dv.id()) << "\",\"stretchable\":false,"
              << "\"indeterminate\":" << (cert.indeterminate ? "true" : "false")
              << ",\"witness\":\"" << json_escape(cert.witness) << "\"}\n";
    return kExitNotStretchable;
  }

  std::vector<AdaptiveProtocol> protocols;
  std::vector<std::string> labels;
  if (!protocol_path.empty()) {
    try {
      protocols.push_back(load_protocol(protocol_path));
      protocols.back().validate(channel.out_dim);
    } catch (const std::invalid_argument& e) {
      throw SpecParseError(e.what());
    }
    labels.push_back(protocol_path);
  } else {
    if (random_count < 1) throw SpecParseError("--random needs a positive protocol count");
    for (int i = 0; i < random_count; ++i) {
      protocols.push_back(random_protocol(channel.in_dim, rounds, seed + i));
      labels.push_back("seed=" + std::to_string(seed + i));
    }
  }

  bool all_pass = true;
  std::ostringstream runs;
  runs << "[";
  for (size_t i = 0; i < protocols.size(); ++i) {
    VerifyReport rep = verify_stretching(protocols[i], channel);
    all_pass = all_pass && rep.pass;
    runs << (i ? "," : "") << "{\"protocol\":\"" << json_escape(labels[i])
         << "\",\"trace_distance\":" << format_number(rep.trace_distance)
         << ",\"pass\":" << (rep.pass ? "true" : "false")
         << ",\"bell_prob_dev\":" << format_number(rep.bell_prob_dev)
         << ",\"k_spread\":" << format_number(rep.k_spread) << "}";
  }
  runs << "]";
  std::cout << "{\"channel\":\"" << json_escape(dv.id()) << "\",\"stretchable\":true,"
            << "\"max_certificate_residual\":" << format_number(cert.max_residual)
            << ",\"runs\":" << runs.str() << ",\"all_pass\":" << (all_pass ? "true" : "false")
            << "}\n";
  return all_pass ? kExitOk : kExitVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-way assisted capacity bounds for qubit and bosonic channels"};
  app.require_subcommand(1);

  auto* bound = app.add_subcommand("bound", "Bound report for one channel spec");
  bound->allow_extras();

  auto* sweep = app.add_subcommand("sweep", "Parameter sweep emitting CSV");
  SweepSpec sw;
  std::vector<std::string> fixed_kv;
  std::string mus_text;
  sweep->add_option("--family", sw.family, "channel family")->required();
  sweep->add_option("--param", sw.param, "swept parameter name")->required();
  sweep->add_option("--start", sw.start, "grid start")->required();
  sweep->add_option("--stop", sw.stop, "grid stop")->required();
  sweep->add_option("--steps", sw.steps, "grid points (>= 2)")->required();
  sweep->add_flag("--log", sw.log_grid, "logarithmic grid");
  sweep->add_option("--fixed", fixed_kv, "fixed parameter as key=value (repeatable)");
  sweep->add_option("--finite-mu", mus_text, "comma-separated mu list for finite-mu columns");
  sweep->add_option("--jobs", sw.jobs, "worker threads (output order is unaffected)");

  auto* stretch = app.add_subcommand("stretch-verify", "Verify the teleportation reduction");
  std::string channel_text, protocol_path;
  int random_count = 20, rounds = 2;
  std::uint64_t seed = 1;
  stretch->add_option("--channel", channel_text, "channel spec, e.g. \"dephasing --p 0.3\"")
      ->required();
  stretch->add_option("--protocol", protocol_path, "protocol file to verify");
  stretch->add_option("--random", random_count, "number of random protocols (default 20)");
  stretch->add_option("--rounds", rounds, "transmissions per random protocol (1 or 2)");
  stretch->add_option("--seed", seed, "base seed for random protocols");

  auto* comp = app.add_subcommand("compose", "Compose two Gaussian canonical forms");
  std::string first_text, second_text;
  comp->add_option("first", first_text, "first channel spec (quoted)")->required();
  comp->add_option("second", second_text, "second channel spec (quoted)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitParse;
  }

  try {
    if (bound->parsed()) return cmd_bound(bound->remaining());
    if (sweep->parsed()) {
      for (const auto& kv : fixed_kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw SpecParseError("--fixed expects key=value");
        try {
          sw.fixed[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
        } catch (const std::exception&) {
          throw SpecParseError("bad numeric value in --fixed " + kv);
        }
      }
      if (!mus_text.empty()) {
        std::istringstream ms(mus_text);
        std::string item;
        while (std::getline(ms, item, ',')) sw.finite_mus.push_back(std::stod(item));
      }
      std::cout << run_sweep(sw);
      return kExitOk;
    }
    if (stretch->parsed())
      return cmd_stretch_verify(channel_text, protocol_path, random_count, rounds, seed);
    if (comp->parsed()) return cmd_compose(first_text, second_text);
  } catch (const SpecParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const SpecDomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
  return kExitParse;
}
