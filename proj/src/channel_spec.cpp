#include "qflux/channel_spec.hpp"

#include <atomic>
#include <mutex>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <thread>

namespace qflux {

namespace {

std::map<std::string, double> parse_params(const std::vector<std::string>& tokens, size_t begin,
                                           const std::string& family) {
  std::map<std::string, double> params;
  for (size_t i = begin; i < tokens.size(); i += 2) {
    const std::string& key = tokens[i];
    if (key.rfind("--", 0) != 0)
      throw SpecParseError("expected --<param> in channel spec, got '" + key + "'");
    if (i + 1 >= tokens.size()) throw SpecParseError("missing value for " + key + " in " + family);
    params[key.substr(2)] = 0.0;  // placeholder; value parsed below
    try {
      if (key == "--probs") continue;  // handled by caller
      params[key.substr(2)] = std::stod(tokens[i + 1]);
    } catch (const std::exception&) {
      throw SpecParseError("bad numeric value '" + tokens[i + 1] + "' for " + key);
    }
  }
  return params;
}

double take(std::map<std::string, double>& params, const std::string& key, const std::string& family,
            bool required, double fallback = 0.0) {
  auto it = params.find(key);
  if (it == params.end()) {
    if (required) throw SpecParseError(family + " requires --" + key);
    return fallback;
  }
  double v = it->second;
  params.erase(it);
  return v;
}

void expect_empty(const std::map<std::string, double>& params, const std::string& family) {
  if (!params.empty())
    throw SpecParseError("unknown parameter --" + params.begin()->first + " for " + family);
}

[[noreturn]] void domain(const std::string& msg) { throw SpecDomainError(msg); }

double checked_unit(double p, const std::string& what) {
  if (p < 0.0 || p > 1.0) domain(what + " must lie in [0,1]");
  return p;
}

}  // namespace

std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

KrausChannel DvSpec::channel() const {
  switch (family) {
    case DvFamily::Pauli: return make_pauli(ProbDist::checked(probs));
    case DvFamily::Depolarizing: return make_depolarizing(p);
    case DvFamily::Dephasing: return make_dephasing(p);
    case DvFamily::DephasingD: return make_dephasing_d(d, p);
    case DvFamily::Erasure: return make_erasure(p);
    case DvFamily::AmplitudeDamping: return make_amplitude_damping(gamma);
  }
  throw std::logic_error("DvSpec::channel: unknown family");
}

std::string DvSpec::id() const {
  switch (family) {
    case DvFamily::Pauli: {
      std::string s = "pauli(";
      for (size_t i = 0; i < probs.size(); ++i) s += (i ? "," : "") + format_number(probs[i]);
      return s + ")";
    }
    case DvFamily::Depolarizing: return "depol(p=" + format_number(p) + ")";
    case DvFamily::Dephasing: return "dephasing(p=" + format_number(p) + ")";
    case DvFamily::DephasingD:
      return "dephasing-d(d=" + std::to_string(d) + ",p=" + format_number(p) + ")";
    case DvFamily::Erasure: return "erasure(p=" + format_number(p) + ")";
    case DvFamily::AmplitudeDamping: return "amp-damp(gamma=" + format_number(gamma) + ")";
  }
  return "?";
}

ChannelSpec parse_channel_spec(const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw SpecParseError("empty channel spec");
  const std::string family = tokens[0];

  std::vector<double> probs;
  for (size_t i = 1; i + 1 < tokens.size(); i += 2) {
    if (tokens[i] == "--probs") {
      std::istringstream ps(tokens[i + 1]);
      std::string item;
      while (std::getline(ps, item, ',')) {
        try {
          probs.push_back(std::stod(item));
        } catch (const std::exception&) {
          throw SpecParseError("bad probability '" + item + "' in --probs");
        }
      }
    }
  }
  auto params = parse_params(tokens, 1, family);
  params.erase("probs");

  if (family == "loss") {
    double g = take(params, "g", family, true);
    double nbar = take(params, "nbar", family, false, 0.0);
    expect_empty(params, family);
    if (g < 0.0 || g > 1.0) domain("loss transmissivity must lie in [0,1]");
    if (nbar < 0.0) domain("loss nbar must be >= 0");
    return CanonicalForm::loss(g, nbar);
  }
  if (family == "amp") {
    double g = take(params, "g", family, true);
    double nbar = take(params, "nbar", family, false, 0.0);
    expect_empty(params, family);
    if (g <= 1.0) domain("amplifier gain must exceed 1");
    if (nbar < 0.0) domain("amplifier nbar must be >= 0");
    return CanonicalForm::amplifier(g, nbar);
  }
  if (family == "conj-amp") {
    double g = take(params, "g", family, true);
    double nbar = take(params, "nbar", family, false, 0.0);
    expect_empty(params, family);
    if (g >= 0.0) domain("conj-amp parameter must be negative");
    if (nbar < 0.0) domain("conj-amp nbar must be >= 0");
    return CanonicalForm::conj_amplifier(g, nbar);
  }
  if (family == "additive") {
    double xi = take(params, "xi", family, true);
    expect_empty(params, family);
    if (xi < 0.0) domain("additive noise variance must be >= 0");
    return CanonicalForm::additive(xi);
  }
  if (family == "a2") {
    double nbar = take(params, "nbar", family, false, 0.0);
    expect_empty(params, family);
    if (nbar < 0.0) domain("a2 nbar must be >= 0");
    return CanonicalForm::a2(nbar);
  }
  if (family == "b1") {
    expect_empty(params, family);
    return CanonicalForm::b1();
  }

  DvSpec dv;
  if (family == "pauli") {
    if (probs.size() != 4) throw SpecParseError("pauli requires --probs p0,p1,p2,p3");
    double sum = 0.0;
    for (double q : probs) {
      if (q < 0.0) domain("pauli probabilities must be >= 0");
      sum += q;
    }
    if (std::abs(sum - 1.0) > 1e-9) domain("pauli probabilities must sum to 1");
    dv.family = DvFamily::Pauli;
    dv.probs = probs;
    // renormalize the tiny residual so library invariants hold exactly
    for (double& q : dv.probs) q /= sum;
    expect_empty(params, family);
    return dv;
  }
  if (family == "depol") {
    dv.family = DvFamily::Depolarizing;
    dv.p = checked_unit(take(params, "p", family, true), "depol p");
    expect_empty(params, family);
    return dv;
  }
  if (family == "dephasing") {
    dv.family = DvFamily::Dephasing;
    dv.p = checked_unit(take(params, "p", family, true), "dephasing p");
    expect_empty(params, family);
    return dv;
  }
  if (family == "dephasing-d") {
    dv.family = DvFamily::DephasingD;
    double d_val = take(params, "d", family, true);
    dv.d = static_cast<int>(d_val);
    if (dv.d != d_val || dv.d < 2) domain("dephasing-d dimension must be an integer >= 2");
    dv.p = checked_unit(take(params, "p", family, true), "dephasing-d p");
    expect_empty(params, family);
    return dv;
  }
  if (family == "erasure") {
    dv.family = DvFamily::Erasure;
    dv.p = checked_unit(take(params, "p", family, true), "erasure p");
    expect_empty(params, family);
    return dv;
  }
  if (family == "amp-damp") {
    dv.family = DvFamily::AmplitudeDamping;
    dv.gamma = checked_unit(take(params, "gamma", family, true), "amp-damp gamma");
    expect_empty(params, family);
    return dv;
  }
  throw SpecParseError("unknown channel family '" + family + "'");
}

ChannelSpec parse_channel_spec(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> tokens;
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return parse_channel_spec(tokens);
}

std::string spec_id(const ChannelSpec& spec) {
  if (auto* dv = std::get_if<DvSpec>(&spec)) return dv->id();
  return std::get<CanonicalForm>(spec).id();
}

bool is_gaussian(const ChannelSpec& spec) { return std::holds_alternative<CanonicalForm>(spec); }

namespace {

BoundReport dv_report(const DvSpec& spec) {
  BoundReport r;
  r.channel_id = spec.id();
  switch (spec.family) {
    case DvFamily::Erasure: {
      r = erasure_bounds(spec.p);
      r.channel_id = spec.id();
      return r;
    }
    case DvFamily::DephasingD: {
      r = dephasing_d_capacity(spec.d, spec.p);
      r.channel_id = spec.id();
      return r;
    }
    case DvFamily::Pauli:
    case DvFamily::Depolarizing:
    case DvFamily::Dephasing: {
      std::vector<double> probs;
      if (spec.family == DvFamily::Pauli) probs = spec.probs;
      if (spec.family == DvFamily::Depolarizing)
        probs = {1.0 - 0.75 * spec.p, 0.25 * spec.p, 0.25 * spec.p, 0.25 * spec.p};
      if (spec.family == DvFamily::Dephasing) probs = {1.0 - spec.p, 0.0, 0.0, spec.p};
      ProbDist dist = ProbDist::checked(probs);
      KrausChannel ch = spec.channel();
      EbVerdict eb = is_entanglement_breaking_dv(ch);
      r.lower = std::max(0.0, 1.0 - shannon_entropy(dist));
      double raw_upper = spec.family == DvFamily::Depolarizing ? depolarizing_flux_bound(spec.p)
                                                               : pauli_flux_bound(dist);
      r.eb = eb.breaking;
      r.upper = r.eb ? 0.0 : raw_upper;
      r.method = spec.family == DvFamily::Depolarizing
                     ? "convexity-improved closed form; hashing lower bound"
                     : "Bell-diagonal closed form vs sigma~; hashing lower bound";
      if (r.eb) {
        r.method += "; PPT Choi (exact 2x2 criterion) forces zero capacity";
        r.lower = 0.0;
        r.exact = 0.0;
      } else if (std::abs(r.upper - r.lower) <= 1e-9) {
        r.exact = 0.5 * (r.upper + r.lower);
      }
      return r;
    }
    case DvFamily::AmplitudeDamping: {
      KrausChannel ch = spec.channel();
      EbVerdict eb = is_entanglement_breaking_dv(ch);
      r.lower = std::max({0.0, coherent_info(ch), reverse_coherent_info(ch)});
      r.eb = eb.breaking;
      if (r.eb) {
        r.lower = 0.0;
        r.upper = 0.0;
        r.exact = 0.0;
        r.method = "PPT Choi (exact 2x2 criterion) forces zero capacity";
      } else {
        r.upper = infinity();
        r.method = "not teleportation-covariant: no flux upper bound; best of I_C/I_RC below";
      }
      return r;
    }
  }
  throw std::logic_error("dv_report: unknown family");
}

BoundReport gaussian_report(const CanonicalForm& form) {
  BoundReport r;
  r.channel_id = form.id();
  r.lower = lower_bound(form);
  r.upper = flux_upper(form);
  r.eb = is_entanglement_breaking(form);
  switch (form.kind) {
    case FormKind::Loss:
      r.method = form.nbar == 0.0
                     ? "pure-loss closed form; reverse coherent information matches"
                     : "thermal-loss closed form; numeric reverse coherent information at mu=1e6";
      break;
    case FormKind::Amplifier:
      r.method = "amplifier closed form; coherent-information lower bound";
      break;
    case FormKind::Additive:
      r.method = "additive-noise closed form; coherent-information lower bound";
      break;
    case FormKind::ConjAmplifier:
    case FormKind::A2:
      r.method = "always entanglement-breaking: zero flux";
      break;
    case FormKind::B1:
      r.method = "unbounded flux for this form";
      break;
    case FormKind::Identity:
      r.method = "identity channel: unbounded flux";
      break;
  }
  if (r.eb) {
    r.exact = 0.0;
  } else if (std::isinf(r.upper) && std::isinf(r.lower)) {
    r.exact = infinity();
  } else if (std::abs(r.upper - r.lower) <= 1e-9) {
    r.exact = 0.5 * (r.upper + r.lower);
  }
  return r;
}

}  // namespace

BoundReport bound_report(const ChannelSpec& spec) {
  if (auto* dv = std::get_if<DvSpec>(&spec)) return dv_report(*dv);
  return gaussian_report(std::get<CanonicalForm>(spec));
}

std::string report_to_json(const BoundReport& report) {
  auto num = [](double x) -> std::string {
    if (std::isinf(x)) return "\"inf\"";
    return format_number(x);
  };
  std::ostringstream out;
  out << "{\"channel\":\"" << report.channel_id << "\",\"lower\":" << num(report.lower)
      << ",\"upper\":" << num(report.upper) << ",\"exact\":"
      << (report.exact ? num(*report.exact) : "null") << ",\"eb\":" << (report.eb ? "true" : "false")
      << ",\"method\":\"" << report.method << "\"}";
  return out.str();
}

namespace {

ChannelSpec grid_point_spec(const SweepSpec& spec, double value) {
  std::vector<std::string> tokens = {spec.family};
  auto add = [&](const std::string& key, double v) {
    tokens.push_back("--" + key);
    tokens.push_back(format_number(v));
  };
  for (const auto& [key, v] : spec.fixed)
    if (key != spec.param) add(key, v);
  add(spec.param, value);
  return parse_channel_spec(tokens);
}

}  // namespace

std::string run_sweep(const SweepSpec& spec) {
  if (spec.steps < 2) throw SpecParseError("sweep needs steps >= 2");
  if (spec.log_grid && (spec.start <= 0.0 || spec.stop <= 0.0))
    throw SpecParseError("log grid requires positive endpoints");

  std::vector<double> grid(spec.steps);
  for (int i = 0; i < spec.steps; ++i) {
    double t = static_cast<double>(i) / (spec.steps - 1);
    grid[i] = spec.log_grid ? std::exp(std::log(spec.start) + t * (std::log(spec.stop) - std::log(spec.start)))
                            : spec.start + t * (spec.stop - spec.start);
  }

  if (!spec.finite_mus.empty()) {
    ChannelSpec probe = grid_point_spec(spec, grid[0]);
    if (!is_gaussian(probe))
      throw SpecParseError("--finite-mu applies only to Gaussian channel families");
  }

  std::vector<std::string> rows(spec.steps);
  auto work = [&](int i) {
    ChannelSpec point = grid_point_spec(spec, grid[i]);
    BoundReport r = bound_report(point);
    std::ostringstream row;
    auto csv_num = [](double x) { return std::isinf(x) ? std::string("inf") : format_number(x); };
    row << format_number(grid[i]) << "," << csv_num(r.lower) << "," << csv_num(r.upper) << ","
        << (r.exact ? csv_num(*r.exact) : "") << "," << (r.eb ? 1 : 0);
    for (double mu : spec.finite_mus) {
      const auto& form = std::get<CanonicalForm>(point);
      row << "," << csv_num(finite_mu_bound(form, mu));
    }
    rows[i] = row.str();
  };

  int jobs = spec.jobs;
  if (const char* cap = std::getenv("QFLUX_MAX_THREADS")) {
    int limit = std::atoi(cap);
    if (limit > 0) jobs = std::min(jobs, limit);
  }
  jobs = std::max(1, std::min<int>(jobs, spec.steps));

  if (jobs == 1) {
    for (int i = 0; i < spec.steps; ++i) work(i);
  } else {
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&]() {
        try {
          for (int i = next.fetch_add(1); i < spec.steps; i = next.fetch_add(1)) work(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  std::ostringstream out;
  out << "param,lower,upper,exact,eb";
  for (double mu : spec.finite_mus) out << ",fmu_" << format_number(mu);
  out << "\n";
  for (const auto& row : rows) out << row << "\n";
  return out.str();
}

}  // namespace qflux
