#include "qsdw/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "qsdw/io.hpp"

namespace qsdw {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::islower(static_cast<unsigned char>(c)) ||
          std::isdigit(static_cast<unsigned char>(c)) || c == '_' || c == '.'))
      return false;
  return true;
}

double parse_double_token(const std::string& tok, const std::string& key) {
  double out = 0.0;
  const char* begin = tok.data();
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("config key '" + key + "': '" + tok + "' is not a number");
  return out;
}

// Length values additionally accept 'pi' and '<float>pi'.
double parse_length_token(const std::string& tok, const std::string& key) {
  if (tok == "pi") return kPi;
  if (tok.size() > 2 && tok.substr(tok.size() - 2) == "pi")
    return kPi * parse_double_token(tok.substr(0, tok.size() - 2), key);
  return parse_double_token(tok, key);
}

long long parse_int_token(const std::string& tok, const std::string& key) {
  long long out = 0;
  const char* begin = tok.data();
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("config key '" + key + "': '" + tok + "' is not an integer");
  return out;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(value);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  if (!value.empty() && value.back() == ',') out.push_back("");
  return out;
}

class Reader {
public:
  explicit Reader(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
      ++lineno;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (!valid_key(key))
        throw ConfigError("config line " + std::to_string(lineno) + ": bad key '" + key + "'");
      if (value.empty())
        throw ConfigError("config line " + std::to_string(lineno) + ": key '" + key +
                          "' has no value");
      if (raw_.count(key))
        throw ConfigError("duplicate config key '" + key + "'");
      raw_[key] = value;
    }
  }

  bool has(const std::string& key) const { return raw_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& def) {
    consumed_.insert(key);
    auto it = raw_.find(key);
    return it == raw_.end() ? def : it->second;
  }

  double get_double(const std::string& key, double def) {
    consumed_.insert(key);
    auto it = raw_.find(key);
    return it == raw_.end() ? def : parse_double_token(it->second, key);
  }

  long long get_int(const std::string& key, long long def) {
    consumed_.insert(key);
    auto it = raw_.find(key);
    return it == raw_.end() ? def : parse_int_token(it->second, key);
  }

  bool get_bool(const std::string& key, bool def) {
    consumed_.insert(key);
    auto it = raw_.find(key);
    if (it == raw_.end()) return def;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError("config key '" + key + "': expected true or false");
  }

  // 'none' denotes an explicitly empty list (the canonical form of one).
  std::vector<double> get_double_list(const std::string& key, std::vector<double> def) {
    consumed_.insert(key);
    auto it = raw_.find(key);
    if (it == raw_.end()) return def;
    if (it->second == "none") return {};
    std::vector<double> out;
    for (const auto& tok : split_list(it->second)) out.push_back(parse_double_token(tok, key));
    return out;
  }

  std::vector<double> get_length_list(const std::string& key, std::vector<double> def) {
    consumed_.insert(key);
    auto it = raw_.find(key);
    if (it == raw_.end()) return def;
    if (it->second == "none") return {};
    std::vector<double> out;
    for (const auto& tok : split_list(it->second)) out.push_back(parse_length_token(tok, key));
    return out;
  }

  std::vector<long long> get_int_list(const std::string& key, std::vector<long long> def) {
    consumed_.insert(key);
    auto it = raw_.find(key);
    if (it == raw_.end()) return def;
    if (it->second == "none") return {};
    std::vector<long long> out;
    for (const auto& tok : split_list(it->second)) out.push_back(parse_int_token(tok, key));
    return out;
  }

  void check_all_consumed() const {
    for (const auto& [key, value] : raw_)
      if (!consumed_.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }

private:
  std::map<std::string, std::string> raw_;
  std::set<std::string> consumed_;
};

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
  Reader r(text);
  ExperimentConfig cfg;

  if (!r.has("experiment")) throw ConfigError("config is missing the 'experiment' key");
  cfg.experiment = r.get_string("experiment", "");

  cfg.eq.family = family_from_name(r.get_string("equation.family", "main"));
  cfg.eq.gamma = r.get_double("equation.gamma", 1.0);
  cfg.eq.alpha = r.get_double("equation.alpha", 1.0);
  cfg.eq.kirchhoff_m = r.get_double("equation.kirchhoff_m", 1.0);
  cfg.eq.limit_case_p5 = r.get_bool("equation.limit_case_p5", false);
  cfg.eq.p = r.get_double("equation.p", 1.0);
  cfg.eq.q = r.get_double("equation.q", 1.0);
  cfg.eq.C_f = r.get_double("equation.c_f", 0.0);
  {
    const std::string phi = r.get_string("equation.phi_kind", "power");
    if (phi == "power")
      cfg.eq.phi_kind = PhiKind::power;
    else if (phi == "zero")
      cfg.eq.phi_kind = PhiKind::zero;
    else
      throw ConfigError("equation.phi_kind must be power or zero");
    const std::string f = r.get_string("equation.f_kind", "power");
    if (f == "power")
      cfg.eq.f_kind = FKind::power;
    else if (f == "zero")
      cfg.eq.f_kind = FKind::zero;
    else
      throw ConfigError("equation.f_kind must be power or zero");
  }

  {
    const std::string kind = r.get_string("forcing.kind", "zero");
    if (kind == "zero")
      cfg.forcing.kind = ForcingSpec::Kind::zero;
    else if (kind == "mode")
      cfg.forcing.kind = ForcingSpec::Kind::mode;
    else
      throw ConfigError("forcing.kind must be zero or mode");
    auto ks = r.get_int_list("forcing.k", {1, 1});
    if (ks.empty() || ks.size() > 2)
      throw ConfigError("forcing.k must have one or two entries");
    cfg.forcing.k[0] = static_cast<int>(ks[0]);
    cfg.forcing.k[1] = ks.size() > 1 ? static_cast<int>(ks[1]) : 1;
    cfg.forcing.amplitude = r.get_double("forcing.amplitude", 0.0);
  }

  cfg.grid.dim = static_cast<int>(r.get_int("grid.dim", 1));
  cfg.grid.N = static_cast<int>(r.get_int("grid.n", 64));
  cfg.grid.M = static_cast<int>(r.get_int("grid.m", -1));
  cfg.grid.lengths = r.get_length_list("grid.lengths", {});

  cfg.time.dt = r.get_double("time.dt", 1e-3);
  cfg.time.T = r.get_double("time.t_final", 1.0);
  cfg.time.cadence = static_cast<int>(r.get_int("time.cadence", 1));
  cfg.time.scheme = scheme_from_name(r.get_string("time.scheme", "midpoint"));
  cfg.time.tol = r.get_double("time.tol", 1e-12);
  cfg.time.max_iter = static_cast<int>(r.get_int("time.max_iter", 50));

  cfg.initial.preset = initial_preset_from_name(r.get_string("initial.preset", "smooth"));
  cfg.initial.amplitudes = r.get_double_list("initial.amplitudes", {1.0});
  cfg.initial.magnitude = r.get_double("initial.magnitude", 1.0);
  {
    const long long seed = r.get_int("initial.seed", 1);
    if (seed < 0) throw ConfigError("initial.seed must be >= 0");
    cfg.initial.seed = static_cast<std::uint64_t>(seed);
  }
  cfg.initial.sigma = r.get_double("initial.sigma", 2.0);
  cfg.initial.normalize_at_N = static_cast<int>(r.get_int("initial.normalize_at_n", -1));

  cfg.magnitudes = r.get_double_list("dissipativity.magnitudes", {0.1, 1.0, 10.0});
  cfg.passage_threshold = r.get_double("dissipativity.passage_threshold", 1e-4);
  cfg.epsilons = r.get_double_list("lipschitz.epsilons", {1e-2, 1e-3, 1e-4});
  cfg.probe_times = r.get_double_list("smoothing.probe_times", {0.01, 0.05, 0.1, 0.5, 1.0});
  cfg.refined_N = static_cast<int>(r.get_int("smoothing.refined_n", -1));
  cfg.fit_window = r.get_double("smoothing.fit_window", 0.1);
  {
    const std::string shift = r.get_string("splitting.l_shift", "auto");
    if (shift == "auto")
      cfg.L_shift = -1.0;
    else {
      cfg.L_shift = parse_double_token(shift, "splitting.l_shift");
      if (cfg.L_shift < 0.0) throw ConfigError("splitting.l_shift must be >= 0 or auto");
    }
  }
  cfg.consistency_tol = r.get_double("splitting.consistency_tol", 1e-6);
  cfg.limit_diag = r.get_bool("strong_norm.limit_diag", false);
  cfg.conv_dts = r.get_double_list("convergence.dts", {});
  {
    auto ns = r.get_int_list("convergence.ns", {});
    cfg.conv_Ns.clear();
    for (long long n : ns) cfg.conv_Ns.push_back(static_cast<int>(n));
  }
  cfg.reference_N = static_cast<int>(r.get_int("convergence.reference_n", -1));

  r.check_all_consumed();
  cfg.resolve();
  refresh_config_identity(cfg);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

namespace {

// Empty lists serialize as the literal 'none' so the canonical text stays a
// fixed point of the parser (keys are never written without a value).
std::string join_doubles(const std::vector<double>& xs) {
  if (xs.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += format_double(xs[i]);
  }
  return out;
}

std::string join_ints(const std::vector<int>& xs) {
  if (xs.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(xs[i]);
  }
  return out;
}

}  // namespace

std::string canonical_config_text(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> kv;
  auto put = [&](const std::string& k, const std::string& v) { kv.emplace_back(k, v); };

  put("experiment", cfg.experiment);
  put("equation.family", family_name(cfg.eq.family));
  put("equation.gamma", format_double(cfg.eq.gamma));
  put("equation.alpha", format_double(cfg.eq.alpha));
  put("equation.kirchhoff_m", format_double(cfg.eq.kirchhoff_m));
  put("equation.limit_case_p5", cfg.eq.limit_case_p5 ? "true" : "false");
  put("equation.p", format_double(cfg.eq.p));
  put("equation.q", format_double(cfg.eq.q));
  put("equation.c_f", format_double(cfg.eq.C_f));
  put("equation.phi_kind", cfg.eq.phi_kind == PhiKind::power ? "power" : "zero");
  put("equation.f_kind", cfg.eq.f_kind == FKind::power ? "power" : "zero");
  put("forcing.kind", cfg.forcing.kind == ForcingSpec::Kind::zero ? "zero" : "mode");
  put("forcing.k", join_ints({cfg.forcing.k[0], cfg.forcing.k[1]}));
  put("forcing.amplitude", format_double(cfg.forcing.amplitude));
  put("grid.dim", std::to_string(cfg.grid.dim));
  put("grid.n", std::to_string(cfg.grid.N));
  put("grid.m", std::to_string(cfg.grid.M));
  {
    std::vector<double> lengths = cfg.grid.lengths;
    if (lengths.empty()) lengths.assign(static_cast<std::size_t>(cfg.grid.dim), kPi);
    put("grid.lengths", join_doubles(lengths));
  }
  put("time.dt", format_double(cfg.time.dt));
  put("time.t_final", format_double(cfg.time.T));
  put("time.cadence", std::to_string(cfg.time.cadence));
  put("time.scheme", scheme_name(cfg.time.scheme));
  put("time.tol", format_double(cfg.time.tol));
  put("time.max_iter", std::to_string(cfg.time.max_iter));
  put("initial.preset", initial_preset_name(cfg.initial.preset));
  put("initial.amplitudes", join_doubles(cfg.initial.amplitudes));
  put("initial.magnitude", format_double(cfg.initial.magnitude));
  put("initial.seed", std::to_string(cfg.initial.seed));
  put("initial.sigma", format_double(cfg.initial.sigma));
  put("initial.normalize_at_n", std::to_string(cfg.initial.normalize_at_N));
  put("dissipativity.magnitudes", join_doubles(cfg.magnitudes));
  put("dissipativity.passage_threshold", format_double(cfg.passage_threshold));
  put("lipschitz.epsilons", join_doubles(cfg.epsilons));
  put("smoothing.probe_times", join_doubles(cfg.probe_times));
  put("smoothing.refined_n", std::to_string(cfg.refined_N));
  put("smoothing.fit_window", format_double(cfg.fit_window));
  put("splitting.l_shift", cfg.L_shift < 0.0 ? "auto" : format_double(cfg.L_shift));
  put("splitting.consistency_tol", format_double(cfg.consistency_tol));
  put("strong_norm.limit_diag", cfg.limit_diag ? "true" : "false");
  put("convergence.dts", join_doubles(cfg.conv_dts));
  put("convergence.ns", join_ints(cfg.conv_Ns));
  put("convergence.reference_n", std::to_string(cfg.reference_N));

  std::sort(kv.begin(), kv.end());
  std::string out;
  for (const auto& [k, v] : kv) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

void refresh_config_identity(ExperimentConfig& cfg) {
  cfg.resolved_text = canonical_config_text(cfg);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(cfg.resolved_text)));
  cfg.config_hash = buf;
}

}  // namespace qsdw
