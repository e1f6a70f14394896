#include "pdc/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace pdc {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

// Splits "5.5 GHz" / "5.5GHz" into number and unit and applies the unit table.
double parse_with_units(std::string_view token, const std::map<std::string, double>& units, const char* kind) {
  token = trim(token);
  if (token.empty()) throw std::invalid_argument(std::string("empty ") + kind);
  double value = 0.0;
  const char* begin = token.data();
  const char* end = token.data() + token.size();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr == begin) {
    throw std::invalid_argument("malformed number '" + std::string(token) + "'");
  }
  const std::string unit = lower(trim(std::string_view(ptr, static_cast<std::size_t>(end - ptr))));
  if (unit.empty()) return value;
  const auto it = units.find(unit);
  if (it == units.end()) {
    throw std::invalid_argument("unknown " + std::string(kind) + " unit '" + unit + "' in '" + std::string(token) + "'");
  }
  return value * it->second;
}

const std::map<std::string, double>& frequency_units() {
  static const std::map<std::string, double> u{{"hz", 1.0}, {"khz", 1e3}, {"mhz", 1e6}, {"ghz", 1e9}};
  return u;
}

const std::map<std::string, double>& time_units() {
  static const std::map<std::string, double> u{{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}};
  return u;
}

const std::map<std::string, double>& no_units() {
  static const std::map<std::string, double> u;
  return u;
}

std::vector<std::string_view> split_list(std::string_view v) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = v.find(',');
    out.push_back(trim(v.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

Index parse_index(std::string_view v) {
  v = trim(v);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw std::invalid_argument("malformed integer '" + std::string(v) + "'");
  }
  if (out < 0) throw std::invalid_argument("expected a non-negative integer, got '" + std::string(v) + "'");
  return static_cast<Index>(out);
}

bool parse_bool(std::string_view v) {
  const std::string s = lower(trim(v));
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("malformed boolean '" + s + "'");
}

}  // namespace

double parse_frequency(std::string_view token) { return parse_with_units(token, frequency_units(), "frequency"); }
double parse_time(std::string_view token) { return parse_with_units(token, time_units(), "time"); }

Scenario parse_scenario(std::string_view name) {
  if (name == "params") return Scenario::params;
  if (name == "dynamics") return Scenario::dynamics;
  if (name == "scan") return Scenario::scan;
  if (name == "validate") return Scenario::validate;
  throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");
}

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::params: return "params";
    case Scenario::dynamics: return "dynamics";
    case Scenario::scan: return "scan";
    case Scenario::validate: return "validate";
  }
  return "?";
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  double g_d = 0.0, g_gr = 0.0, g_er = 0.0;
  double ph_d = 0.0, ph_gr = 0.0, ph_er = 0.0;
  std::optional<Index> lind_a, lind_b;

  using Setter = std::function<void(std::string_view)>;
  auto freq = [](double& dst) -> Setter { return [&dst](std::string_view v) { dst = parse_frequency(v); }; };
  auto plain = [](double& dst) -> Setter {
    return [&dst](std::string_view v) { dst = parse_with_units(v, no_units(), "value"); };
  };
  SystemParams& p = cfg.params;
  const std::map<std::string, Setter, std::less<>> setters{
      {"nu_a", freq(p.nu_a)},
      {"nu_b", freq(p.nu_b)},
      {"delta", freq(p.delta)},
      {"delta_r", freq(p.delta_r)},
      {"g_d", freq(g_d)},
      {"g_gr", freq(g_gr)},
      {"g_er", freq(g_er)},
      {"g_d_phase", plain(ph_d)},
      {"g_gr_phase", plain(ph_gr)},
      {"g_er_phase", plain(ph_er)},
      {"gamma_a", freq(p.gamma_a)},
      {"gamma_b", freq(p.gamma_b)},
      {"epsilon", freq(p.epsilon)},
      {"phi", plain(p.phi)},
      {"factor", plain(cfg.factor)},
      {"seed", [&](std::string_view v) { cfg.seed = static_cast<std::uint64_t>(parse_index(v)); }},
      {"scenario", [&](std::string_view v) { cfg.scenario = parse_scenario(trim(v)); }},
      {"output", [&](std::string_view v) { cfg.output = std::string(trim(v)); }},
      {"cutoff_a", [&](std::string_view v) { cfg.cutoffs.cutoff_a = parse_index(v); }},
      {"cutoff_b", [&](std::string_view v) { cfg.cutoffs.cutoff_b = parse_index(v); }},
      {"t_end", [&](std::string_view v) { cfg.t_end = parse_time(v); }},
      {"n_samples", [&](std::string_view v) { cfg.n_samples = parse_index(v); }},
      {"dynamics_method",
       [&](std::string_view v) {
         const std::string m = lower(trim(v));
         if (m == "sector") cfg.dynamics_method = DynamicsMethod::sector;
         else if (m == "krylov") cfg.dynamics_method = DynamicsMethod::krylov;
         else throw std::invalid_argument("dynamics_method must be sector or krylov");
       }},
      {"eps",
       [&](std::string_view v) {
         for (auto item : split_list(v)) cfg.eps.push_back(parse_frequency(item));
       }},
      {"eps_over_ec",
       [&](std::string_view v) {
         for (auto item : split_list(v)) cfg.eps_over_ec.push_back(parse_with_units(item, no_units(), "value"));
       }},
      {"methods",
       [&](std::string_view v) {
         cfg.methods.clear();
         if (trim(v).empty()) return;
         for (auto item : split_list(v)) cfg.methods.push_back(parse_method(std::string(item)));
       }},
      {"n_traj", [&](std::string_view v) { cfg.n_traj = parse_index(v); }},
      {"sde_t_max", [&](std::string_view v) { cfg.sde_t_max = parse_time(v); }},
      {"sde_dt", [&](std::string_view v) { cfg.sde_dt = parse_time(v); }},
      {"sde_refine", [&](std::string_view v) { cfg.sde_refine = parse_bool(v); }},
      {"lindblad_cutoff_a", [&](std::string_view v) { lind_a = parse_index(v); }},
      {"lindblad_cutoff_b", [&](std::string_view v) { lind_b = parse_index(v); }},
  };

  std::set<std::string, std::less<>> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(line_no, "unknown key '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second) throw ConfigError(line_no, "duplicate key '" + std::string(key) + "'");
    try {
      it->second(value);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(line_no, std::string(key) + ": " + ex.what());
    }
  }

  for (const char* required : {"nu_a", "nu_b", "delta", "delta_r", "g_d", "g_gr", "g_er"}) {
    if (!seen.contains(std::string_view(required))) {
      throw ConfigError(0, "missing required key '" + std::string(required) + "'");
    }
  }
  p.g_d = std::polar(g_d, ph_d);
  p.g_gr = std::polar(g_gr, ph_gr);
  p.g_er = std::polar(g_er, ph_er);

  if (lind_a || lind_b) {
    if (!(lind_a && lind_b)) throw ConfigError(0, "lindblad_cutoff_a and lindblad_cutoff_b must be given together");
    cfg.lindblad_cutoffs = HilbertSpec{*lind_a, *lind_b};
  }

  auto check = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(0, msg);
  };
  check(p.gamma_a >= 0.0 && p.gamma_b >= 0.0, "decay rates must be nonnegative");
  check(cfg.factor >= 1.0, "factor must be >= 1");
  check(cfg.n_samples >= 2, "n_samples must be >= 2");
  check(cfg.n_traj >= 1, "n_traj must be positive");
  try {
    cfg.cutoffs.validate();
    if (cfg.lindblad_cutoffs) cfg.lindblad_cutoffs->validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(0, ex.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace pdc
