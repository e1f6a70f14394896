#include "pdc/scenarios.hpp"

#include "pdc/elimination.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

namespace pdc {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string csv_safe(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ' ';
  return s;
}

void emit(const std::string& body, const RunContext& ctx) {
  if (!ctx.out_path) {
    ctx.out << body;
    return;
  }
  namespace fs = std::filesystem;
  const fs::path target(*ctx.out_path);
  fs::path tmp = target;
  tmp += ".partial";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open output file '" + tmp.string() + "'");
    f << body;
    f.flush();
    if (!f) {
      f.close();
      fs::remove(tmp);
      throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
  }
  fs::rename(tmp, target);
}

void print_regime(const std::vector<Diagnostic>& d, std::ostream& os) {
  if (d.empty()) {
    os << "regime: ok\n";
    return;
  }
  for (const auto& w : d) os << "warning[" << w.code << "]: " << w.message << "\n";
}

int run_params(const RunConfig& cfg, const RunContext& ctx) {
  const SystemParams& p = cfg.params;
  const EffectiveParams e = effective_params(p);
  std::ostream& os = ctx.out;
  os << "chi_Hz = " << format_number(e.chi) << "\n";
  os << "shift_a_Hz = " << format_number(e.shift_a) << "\n";
  os << "shift_b_Hz = " << format_number(e.shift_b) << "\n";
  os << "nu_eff_Hz = " << format_number(e.nu_eff) << "\n";
  os << "epsilon_c_Hz = " << format_number(e.epsilon_c) << "\n";
  os << "phi_eff_rad = " << format_number(e.phi_eff) << "\n";
  os << "matching_residual_Hz = " << format_number(e.matching_residual) << "\n";
  if (e.chi != 0.0) os << "transfer_time_s = " << format_number(transfer_time(p)) << "\n";
  print_regime(validate_regime(p, cfg.factor), os);
  return kExitOk;
}

int run_dynamics(const RunConfig& cfg, const RunContext& ctx) {
  const SystemParams& p = cfg.params;
  TimeGrid grid = default_rabi_grid(p);
  grid.n_samples = cfg.n_samples;
  if (cfg.t_end) grid.t_end = *cfg.t_end;
  grid.validate();
  const FullVsEffective run = run_full_vs_effective(p, cfg.cutoffs, grid, cfg.dynamics_method);
  emit(dynamics_csv(run), ctx);

  std::ostream& os = ctx.log;
  print_regime(run.regime, os);
  const DeviationSummary& s = run.summary;
  os << "min_P_g = " << format_number(s.min_p_g) << "\n";
  os << "max_dev_n_a = " << format_number(s.max_dev_n_a) << "\n";
  os << "max_dev_n_b = " << format_number(s.max_dev_n_b) << "\n";
  os << "transfer_time_full_s = " << format_number(s.transfer_time_full) << "\n";
  os << "transfer_time_eff_s = " << format_number(s.transfer_time_eff) << "\n";
  os << "norm_drift = " << format_number(s.norm_drift) << "\n";
  os << "excitation_drift = " << format_number(s.excitation_drift) << "\n";
  return kExitOk;
}

int run_scan(const RunConfig& cfg, const RunContext& ctx) {
  const PdcRates r = pdc_rates(cfg.params);
  ScanOptions opts;
  opts.lindblad_spec = cfg.lindblad_cutoffs;
  opts.threads = ctx.threads;
  opts.sde.n_traj = cfg.n_traj;
  opts.sde.t_max = cfg.sde_t_max;
  opts.sde.dt = cfg.sde_dt;
  opts.sde.seed = cfg.seed;
  opts.sde.threads = ctx.threads;
  opts.sde.refine_step = cfg.sde_refine;
  const std::vector<ScanRow> rows = threshold_scan(r, scan_epsilons(cfg), cfg.methods, opts);
  emit(scan_csv(rows, r.epsilon_c()), ctx);
  std::size_t failed = 0;
  for (const auto& row : rows)
    if (row.flags.find("error:") != std::string::npos) ++failed;
  if (failed) ctx.log << failed << " of " << rows.size() << " scan rows failed; see the flags column\n";
  return kExitOk;
}

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::vector<Check> validation_suite(const RunConfig& cfg) {
  const SystemParams& p = cfg.params;
  std::vector<Check> out;
  auto guarded = [&](const std::string& name, const std::function<Check()>& fn) {
    try {
      out.push_back(fn());
    } catch (const std::exception& ex) {
      out.push_back({name, false, ex.what()});
    }
  };

  guarded("regime", [&] {
    const auto d = validate_regime(p, cfg.factor);
    std::string msg = d.empty() ? "all detuning and matching conditions hold" : "";
    for (const auto& w : d) msg += (msg.empty() ? "" : "; ") + w.code;
    return Check{"regime", d.empty(), msg};
  });

  guarded("hermitian", [&] {
    const HilbertSpec s{2, 4};
    const bool ok = build_H0(p, s).is_hermitian() && build_HI(p, s).is_hermitian() &&
                    build_H_eff(p, s).is_hermitian() && build_H_rotating(p, s).is_hermitian();
    return Check{"hermitian", ok, "H0, HI, H_eff, H_rotating at cutoffs (2,4)"};
  });

  guarded("excitation_conserved", [&] {
    const HilbertSpec s{2, 4};
    const Operator h = build_H0(p, s) + build_HI(p, s);
    const double c = commutator(h, excitation_operator(s)).frobenius_norm() / h.frobenius_norm();
    return Check{"excitation_conserved", c <= 1e-12, "||[H, K]|| / ||H|| = " + sci(c)};
  });

  guarded("generator", [&] {
    double worst = 0.0;
    for (const HilbertSpec s : {HilbertSpec{2, 4}, HilbertSpec{3, 6}}) {
      const Operator hi = build_HI(p, s);
      const Operator S = build_generator(p, s).op;
      worst = std::max(worst, (commutator(build_H0(p, s), S) + hi).frobenius_norm() / hi.frobenius_norm());
    }
    return Check{"generator", worst <= 1e-12, "||[H0,S] + HI|| / ||HI|| = " + sci(worst)};
  });

  guarded("extraction", [&] {
    const EliminationReport rep = project_effective(p, HilbertSpec{2, 4}).report;
    const EffectiveParams e = effective_params(p);
    const double shift = std::max(std::abs(rep.extracted_shift_a - e.shift_a), std::abs(rep.extracted_shift_b - e.shift_b));
    const double scale = std::max({std::abs(e.shift_a), std::abs(e.shift_b), 1.0});
    const bool ok = rep.relative_deviation <= 1e-10 && shift <= 1e-10 * scale;
    return Check{"extraction", ok,
                 "chi/2 relative deviation " + sci(rep.relative_deviation) + ", shift deviation " + sci(shift) + " Hz"};
  });

  guarded("effective_dynamics", [&] {
    if (effective_params(p).chi == 0.0) return Check{"effective_dynamics", false, "chi vanishes"};
    const FullVsEffective run = run_full_vs_effective(p, HilbertSpec{1, 2}, default_rabi_grid(p));
    const DeviationSummary& s = run.summary;
    const bool ok = s.min_p_g >= 0.99 && s.max_dev_n_b <= 0.1 && s.norm_drift <= 1e-9 && s.excitation_drift <= 1e-8;
    return Check{"effective_dynamics", ok,
                 "min P_g " + sci(s.min_p_g) + ", max |dn_b| " + sci(s.max_dev_n_b) + ", norm drift " +
                     sci(s.norm_drift) + ", K drift " + sci(s.excitation_drift)};
  });

  if (p.gamma_a > 0.0 && p.gamma_b > 0.0 && effective_params(p).chi != 0.0) {
    const PdcRates r = pdc_rates(p);
    const double ec = r.epsilon_c();
    guarded("squeezing_identity", [&] {
      double worst = 0.0;
      for (int k = 0; k < 50; ++k) {
        const double x = 0.98 * k / 49.0;
        const Variances v = linearized_variances(r, x * ec);
        worst = std::max(worst, std::abs(v.var_x * v.var_y * (1.0 - x * x) - 1.0));
      }
      return Check{"squeezing_identity", worst <= 1e-12, "max |var_x var_y (1 - x^2) - 1| = " + sci(worst)};
    });
    guarded("mean_field_branches", [&] {
      const MeanField lo = mean_field(r, ec * (1.0 - 1e-14));
      const MeanField hi = mean_field(r, ec);
      const double gap = std::abs(lo.alpha - hi.alpha) / std::abs(hi.alpha);
      return Check{"mean_field_branches", gap <= 1e-12, "relative alpha gap at threshold " + sci(gap)};
    });
  }
  return out;
}

int run_validate(const RunConfig& cfg, const RunContext& ctx) {
  bool all = true;
  for (const Check& c : validation_suite(cfg)) {
    ctx.out << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    all = all && c.pass;
  }
  return all ? kExitOk : kExitValidationFailed;
}

}  // namespace

std::vector<double> scan_epsilons(const RunConfig& cfg) {
  if (!cfg.eps.empty()) return cfg.eps;
  const double ec = pdc_rates(cfg.params).epsilon_c();
  std::vector<double> ratios = cfg.eps_over_ec;
  if (ratios.empty())
    for (int k = 0; k <= 20; ++k) ratios.push_back(0.1 * k);
  if (!std::isfinite(ec)) throw std::invalid_argument("eps_over_ec needs a finite threshold (chi != 0)");
  std::vector<double> out;
  for (double x : ratios) out.push_back(x * ec);
  return out;
}

std::string dynamics_csv(const FullVsEffective& run) {
  std::ostringstream os;
  os << "t_s,P_g,n_a_full,n_b_full,n_a_eff,n_b_eff,K\n";
  const auto& pg = run.full.channel("P_g");
  const auto& na = run.full.channel("n_a");
  const auto& nb = run.full.channel("n_b");
  const auto& k = run.full.channel("K");
  const auto& ea = run.eff.channel("n_a");
  const auto& eb = run.eff.channel("n_b");
  for (Index i = 0; i < run.full.grid.n_samples; ++i) {
    const auto j = static_cast<std::size_t>(i);
    os << format_number(run.full.grid.time(i)) << ',' << format_number(pg[j]) << ',' << format_number(na[j]) << ','
       << format_number(nb[j]) << ',' << format_number(ea[j]) << ',' << format_number(eb[j]) << ','
       << format_number(k[j]) << '\n';
  }
  return os.str();
}

std::string scan_csv(const std::vector<ScanRow>& rows, double epsilon_c) {
  std::ostringstream os;
  os << "eps_Hz,eps_over_ec,method,var_x,var_y,n_b,g2,anomalous_re,anomalous_im,stderr,flags\n";
  for (const ScanRow& row : rows) {
    const FluctuationReport& r = row.report;
    const double ratio = std::isfinite(epsilon_c) ? row.eps / epsilon_c : 0.0;
    os << format_number(row.eps) << ',' << format_number(ratio) << ',' << method_name(row.method) << ','
       << format_number(r.var_x) << ',' << format_number(r.var_y) << ',' << format_number(r.n_b) << ','
       << format_number(r.g2) << ',' << format_number(r.anomalous.real()) << ',' << format_number(r.anomalous.imag())
       << ',' << format_number(r.statistical_error) << ',' << csv_safe(row.flags) << '\n';
  }
  return os.str();
}

int run_scenario(Scenario scenario, const RunConfig& cfg, const RunContext& ctx) {
  try {
    switch (scenario) {
      case Scenario::params: return run_params(cfg, ctx);
      case Scenario::dynamics: return run_dynamics(cfg, ctx);
      case Scenario::scan: return run_scan(cfg, ctx);
      case Scenario::validate: return run_validate(cfg, ctx);
    }
  } catch (const IntegrationFailure& ex) {
    ctx.log << "numerical failure: " << ex.what() << "\n";
    return kExitNumericalFailure;
  } catch (const NumericalFailure& ex) {
    ctx.log << "numerical failure: " << ex.what() << "\n";
    return kExitNumericalFailure;
  } catch (const TruncationTooSmall& ex) {
    ctx.log << "numerical failure: " << ex.what() << "\n";
    return kExitNumericalFailure;
  } catch (const std::invalid_argument& ex) {
    ctx.log << "config error: " << ex.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& ex) {
    ctx.log << "error: " << ex.what() << "\n";
    return kExitNumericalFailure;
  }
  return kExitConfigError;
}

}  // namespace pdc
