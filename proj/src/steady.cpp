#include "pdc/steady.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace pdc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_decays(const PdcRates& r, const char* where) {
  if (!(r.gamma_a > 0.0) || !(r.gamma_b > 0.0)) {
    throw std::invalid_argument(std::string(where) + ": gamma_a and gamma_b must be positive");
  }
}

void require_pump_phase(const PdcRates& r, const char* where) {
  if (std::abs(r.phi + std::numbers::pi / 2.0) > 1e-12) {
    throw std::invalid_argument(std::string(where) + ": closed-form results assume phi = -pi/2");
  }
}

bool near_threshold(const PdcRates& r, double eps) {
  const double ec = r.epsilon_c();
  return std::isfinite(ec) && std::abs(eps - ec) <= kThresholdWindow * ec;
}

}  // namespace

double PdcRates::epsilon_c() const { return chi > 0.0 ? gamma_a * gamma_b / chi : kInf; }

PdcRates pdc_rates(const SystemParams& p) {
  const EffectiveParams e = effective_params(p);
  return {e.chi, p.gamma_a, p.gamma_b, p.phi};
}

SystemParams params_with_chi(double chi_hz, double gamma_a_hz, double gamma_b_hz) {
  SystemParams p = SystemParams::reference();
  const double g = std::cbrt(0.5 * chi_hz * p.delta * p.delta_r);
  p.g_d = g;
  p.g_gr = g;
  p.g_er = g;
  p.gamma_a = gamma_a_hz;
  p.gamma_b = gamma_b_hz;
  return p;
}

MeanField mean_field(const PdcRates& r, double eps) {
  require_decays(r, "mean_field");
  require_pump_phase(r, "mean_field");
  MeanField mf;
  mf.chi_zero = !(r.chi > 0.0);
  const double ec = r.epsilon_c();
  mf.epsilon_over_threshold = mf.chi_zero ? 0.0 : eps / ec;
  if (mf.chi_zero || eps <= ec) {
    mf.alpha = eps / r.gamma_a;
    mf.beta = 0.0;
    mf.branch = Branch::below;
  } else {
    mf.alpha = r.gamma_b / r.chi;
    mf.beta = std::sqrt(2.0 * (eps - ec) / r.chi);
    mf.branch = Branch::above_positive;
  }
  return mf;
}

MeanField mean_field(const SystemParams& p, double eps) { return mean_field(pdc_rates(p), eps); }

const char* method_name(Method m) {
  switch (m) {
    case Method::linearized: return "linearized";
    case Method::lindblad: return "lindblad";
    case Method::sde: return "sde";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "linearized") return Method::linearized;
  if (name == "lindblad") return Method::lindblad;
  if (name == "sde") return Method::sde;
  throw std::invalid_argument("unknown method '" + name + "' (expected linearized, lindblad or sde)");
}

Variances linearized_variances(const PdcRates& r, double eps) {
  require_decays(r, "linearized_variances");
  require_pump_phase(r, "linearized_variances");
  if (eps < 0.0) throw std::invalid_argument("linearized_variances: drive must be nonnegative");
  Variances v;
  v.near_threshold = near_threshold(r, eps);
  const double ga = r.gamma_a, gb = r.gamma_b;
  const double gg = ga * gb;
  const double ec = eps * r.chi;
  if (!(r.chi > 0.0) || eps <= r.epsilon_c()) {
    v.var_x = ec == gg ? kInf : gg / (gg - ec);
    v.var_y = gg / (gg + ec);
  } else {
    v.var_x = 1.0 + gb / ga - gg / (2.0 * (gg - ec));
    v.var_y = 1.0 - ga * ga * gb / ((ga + 2.0 * gb) * ec);
  }
  return v;
}

Variances linearized_variances(const SystemParams& p, double eps) {
  return linearized_variances(pdc_rates(p), eps);
}

Eigen::Matrix4d linearized_covariance(const PdcRates& r, double eps) {
  const MeanField mf = mean_field(r, eps);
  const double ga = r.gamma_a, gb = r.gamma_b;
  const double k = r.chi * mf.beta.real();
  const double ca = r.chi * mf.alpha.real();

  // Drift of (x_a, y_a, x_b, y_b).
  Eigen::Matrix4d a;
  a << -ga, 0.0, -k, 0.0,
       0.0, -ga, 0.0, -k,
       k, 0.0, ca - gb, 0.0,
       0.0, k, 0.0, -ca - gb;
  Eigen::Matrix4d d = Eigen::Vector4d(2.0 * ga, 2.0 * ga, 2.0 * gb, 2.0 * gb).asDiagonal();

  // vec(A C + C A^T) = (I ⊗ A + A ⊗ I) vec(C)
  const Eigen::Matrix4d id = Eigen::Matrix4d::Identity();
  Eigen::Matrix<double, 16, 16> lyap;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) lyap.block<4, 4>(4 * i, 4 * j) = id(i, j) * a + a(i, j) * id;
  Eigen::FullPivLU<Eigen::Matrix<double, 16, 16>> lu(lyap);
  if (!lu.isInvertible()) return Eigen::Matrix4d::Constant(kInf);
  const Eigen::Matrix<double, 16, 1> c = lu.solve(-Eigen::Map<const Eigen::Matrix<double, 16, 1>>(d.data()));
  Eigen::Matrix4d cov = Eigen::Map<const Eigen::Matrix4d>(c.data());
  return 0.5 * (cov + cov.transpose());
}

FluctuationReport linearized_g2(const PdcRates& r, double eps) {
  if (eps < 0.0) throw std::invalid_argument("linearized_g2: drive must be nonnegative");
  const MeanField mf = mean_field(r, eps);
  const Eigen::Matrix4d cov = linearized_covariance(r, eps);

  FluctuationReport rep;
  rep.method = Method::linearized;
  rep.near_threshold = near_threshold(r, eps);
  rep.mean_b = mf.beta;
  rep.var_x = cov(2, 2);
  rep.var_y = cov(3, 3);

  const double fluct_n = (rep.var_x + rep.var_y - 2.0) / 4.0;
  rep.anomalous = Complex((rep.var_x - rep.var_y) / 4.0, cov(2, 3) / 2.0);
  const double beta_sq = std::norm(mf.beta);
  rep.n_b = beta_sq + fluct_n;

  // Gaussian factorization of <b†b†bb> with b = beta + δb.
  const double fourth = beta_sq * beta_sq + 4.0 * beta_sq * fluct_n +
                        2.0 * std::real(std::conj(mf.beta) * std::conj(mf.beta) * rep.anomalous) +
                        2.0 * fluct_n * fluct_n + std::norm(rep.anomalous);
  rep.g2 = rep.n_b > 0.0 ? fourth / (rep.n_b * rep.n_b) : kNaN;
  return rep;
}

FluctuationReport linearized_g2(const SystemParams& p, double eps) { return linearized_g2(pdc_rates(p), eps); }

namespace {

ScanRow scan_one(const PdcRates& r, double eps, Method method, const ScanOptions& opts, unsigned sde_threads) {
  ScanRow row;
  row.eps = eps;
  row.eps_over_ec = std::isfinite(r.epsilon_c()) ? eps / r.epsilon_c() : 0.0;
  row.method = method;
  row.report.method = method;
  std::vector<std::string> flags;
  try {
    switch (method) {
      case Method::linearized: {
        row.report = linearized_g2(r, eps);
        const Variances v = linearized_variances(r, eps);
        row.report.var_x = v.var_x;
        row.report.var_y = v.var_y;
        break;
      }
      case Method::lindblad:
        row.report = opts.lindblad_spec ? lindblad_steady_state(r, eps, *opts.lindblad_spec).report
                                        : lindblad_steady_state_auto(r, eps).report;
        break;
      case Method::sde: {
        SdeOptions so = opts.sde;
        so.threads = sde_threads;
        row.report = sde_trajectories(r, eps, so).report;
        break;
      }
    }
    if (near_threshold(r, eps)) flags.push_back("near_threshold");
    if (std::isnan(row.report.g2)) flags.push_back("g2_undefined");
  } catch (const std::exception& ex) {
    row.report = FluctuationReport{row.method, kNaN, kNaN, kNaN, kNaN, Complex(kNaN, kNaN), Complex(kNaN, kNaN), kNaN, false};
    flags.push_back(std::string("error:") + ex.what());
  }
  for (std::size_t i = 0; i < flags.size(); ++i) row.flags += (i ? ";" : "") + flags[i];
  return row;
}

}  // namespace

std::vector<ScanRow> threshold_scan(const PdcRates& r, const std::vector<double>& eps_values,
                                    const std::vector<Method>& methods, const ScanOptions& opts) {
  if (!std::is_sorted(eps_values.begin(), eps_values.end())) {
    throw std::invalid_argument("threshold_scan: drive values must be sorted");
  }
  if (!eps_values.empty() && eps_values.front() < 0.0) {
    throw std::invalid_argument("threshold_scan: drive values must be nonnegative");
  }

  std::vector<std::pair<double, Method>> tasks;
  for (double eps : eps_values)
    for (Method m : methods) tasks.emplace_back(eps, m);
  std::vector<ScanRow> rows(tasks.size());

  unsigned workers = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(tasks.size(), 1)));
  const unsigned sde_threads = workers > 1 ? 1u : opts.threads;

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      rows[i] = scan_one(r, tasks[i].first, tasks[i].second, opts, sde_threads);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return rows;
}

std::vector<ScanRow> threshold_scan(const SystemParams& p, const std::vector<double>& eps_values,
                                    const std::vector<Method>& methods, const ScanOptions& opts) {
  return threshold_scan(pdc_rates(p), eps_values, methods, opts);
}

}  // namespace pdc
