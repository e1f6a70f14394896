#include "pdc/steady.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <thread>

namespace pdc {

namespace {

struct Fields {
  Complex alpha;
  Complex beta;
};

// Independent stream per trajectory, keyed by (seed, index); results do not
// depend on how trajectories are distributed over threads.
std::mt19937_64 trajectory_engine(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

Fields integrate(const PdcRates& r, double eps, double dt, Index steps, double bound, std::uint64_t seed,
                 std::uint64_t index) {
  std::mt19937_64 engine = trajectory_engine(seed, index);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gauss = [&] { return Complex(normal(engine), normal(engine)); };

  const double ga = angular(r.gamma_a), gb = angular(r.gamma_b), ch = angular(r.chi), drive = angular(eps);
  // Coupling phases: -i e^{i phi} on a, -i e^{-i phi} on b (both -1, +1 at phi = -pi/2).
  const Complex phase_a = Complex(0.0, -1.0) * std::polar(1.0, r.phi);
  const Complex phase_b = Complex(0.0, -1.0) * std::polar(1.0, -r.phi);
  const double kick_a = std::sqrt(ga * dt / 2.0);
  const double kick_b = std::sqrt(gb * dt / 2.0);

  // Vacuum Wigner sample: <|z|^2> = 1/2.
  Fields f{0.5 * gauss(), 0.5 * gauss()};
  for (Index k = 0; k < steps; ++k) {
    const Complex da = drive + 0.5 * ch * phase_a * f.beta * f.beta - ga * f.alpha;
    const Complex db = ch * phase_b * f.alpha * std::conj(f.beta) - gb * f.beta;
    f.alpha += da * dt + kick_a * gauss();
    f.beta += db * dt + kick_b * gauss();
  }
  if (!std::isfinite(std::abs(f.alpha)) || !std::isfinite(std::abs(f.beta)) || std::abs(f.alpha) > bound ||
      std::abs(f.beta) > bound) {
    throw NumericalFailure("sde_trajectories: field norm exceeded bound; reduce the step size");
  }
  return f;
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
  double se = 0.0;  // of the variance
};

Moments variance_with_error(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d = x - m.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m.var = m2 / (n - 1.0);
  const double pop2 = m2 / n;
  m.se = std::sqrt(std::max(0.0, m4 / n - pop2 * pop2) / n);
  return m;
}

struct PhotonStats {
  double n_b;
  double g2;
};

PhotonStats photon_stats(const std::vector<Fields>& f, std::size_t begin, std::size_t end) {
  double s2 = 0.0, s4 = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double w = std::norm(f[i].beta);
    s2 += w;
    s4 += w * w;
  }
  const double n = static_cast<double>(end - begin);
  s2 /= n;
  s4 /= n;
  // Symmetric-ordered moments to normal order.
  const double n_b = s2 - 0.5;
  const double fourth = s4 - 2.0 * s2 + 0.5;
  return {n_b, n_b != 0.0 ? fourth / (n_b * n_b) : std::numeric_limits<double>::quiet_NaN()};
}

SdeResult run_ensemble(const PdcRates& r, double eps, const SdeOptions& opts, double dt, double t_max) {
  const Index steps = static_cast<Index>(std::ceil(t_max / dt));
  const MeanField mf = mean_field(PdcRates{r.chi, r.gamma_a, r.gamma_b, -std::numbers::pi / 2.0}, eps);
  const double bound = 1e3 * (std::abs(mf.alpha) + std::abs(mf.beta) + 10.0);
  const bool above = std::isfinite(r.epsilon_c()) && eps > r.epsilon_c();

  std::vector<Fields> out(static_cast<std::size_t>(opts.n_traj));
  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(opts.n_traj));
  std::vector<std::exception_ptr> errors(threads);
  auto worker = [&](unsigned w) {
    try {
      for (Index i = w; i < opts.n_traj; i += threads) {
        out[static_cast<std::size_t>(i)] = integrate(r, eps, dt, steps, bound, opts.seed, static_cast<std::uint64_t>(i));
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (threads <= 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  if (above) {
    for (Fields& f : out)
      if (f.beta.real() < 0.0) f.beta = -f.beta;
  }

  std::vector<double> xs, ys;
  xs.reserve(out.size());
  ys.reserve(out.size());
  for (const Fields& f : out) {
    xs.push_back(2.0 * f.beta.real());
    ys.push_back(2.0 * f.beta.imag());
  }
  const Moments mx = variance_with_error(xs);
  const Moments my = variance_with_error(ys);
  double cov_xy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) cov_xy += (xs[i] - mx.mean) * (ys[i] - my.mean);
  cov_xy /= static_cast<double>(xs.size()) - 1.0;

  SdeResult res;
  FluctuationReport& rep = res.report;
  rep.method = Method::sde;
  rep.var_x = mx.var;
  rep.var_y = my.var;
  rep.mean_b = Complex(mx.mean / 2.0, my.mean / 2.0);
  rep.anomalous = Complex((mx.var - my.var) / 4.0, cov_xy / 2.0);
  const PhotonStats all = photon_stats(out, 0, out.size());
  rep.n_b = all.n_b;
  rep.g2 = all.g2;
  rep.statistical_error = my.se;
  const double ec = r.epsilon_c();
  rep.near_threshold = std::isfinite(ec) && std::abs(eps - ec) <= kThresholdWindow * ec;

  // Batch means for the nonlinear estimators.
  constexpr std::size_t kBatches = 20;
  const std::size_t per = out.size() / kBatches;
  std::vector<double> nb_batch, g2_batch;
  for (std::size_t k = 0; k < kBatches; ++k) {
    const PhotonStats s = photon_stats(out, k * per, (k + 1) * per);
    nb_batch.push_back(s.n_b);
    g2_batch.push_back(s.g2);
  }
  auto batch_se = [](const std::vector<double>& v) {
    const Moments m = variance_with_error(v);
    return std::sqrt(m.var / static_cast<double>(v.size()));
  };

  SdeStatistics& st = res.stats;
  st.var_x_se = mx.se;
  st.var_y_se = my.se;
  st.n_b_se = batch_se(nb_batch);
  st.g2_se = batch_se(g2_batch);
  st.mean_beta = rep.mean_b;
  st.mean_beta_se = 0.5 * std::sqrt((mx.var + my.var) / static_cast<double>(xs.size()));
  st.dt = dt;
  st.t_max = t_max;
  return res;
}

}  // namespace

SdeResult sde_trajectories(const PdcRates& r, double eps, const SdeOptions& opts) {
  if (!(r.gamma_a > 0.0) || !(r.gamma_b > 0.0)) {
    throw std::invalid_argument("sde_trajectories: gamma_a and gamma_b must be positive");
  }
  if (opts.n_traj < 100) throw std::invalid_argument("sde_trajectories: need at least 100 trajectories");
  const double ga = angular(r.gamma_a);
  const double dt = opts.dt > 0.0 ? opts.dt : 0.01 / ga;
  const double t_max = opts.t_max > 0.0 ? opts.t_max : 40.0 / angular(r.gamma_b);
  if (dt > 0.05 / ga * (1.0 + 1e-12)) {
    throw std::invalid_argument("sde_trajectories: dt must resolve gamma_a (dt <= 0.05 / (2 pi gamma_a))");
  }
  if (!(t_max > dt)) throw std::invalid_argument("sde_trajectories: t_max must exceed dt");

  SdeResult res = run_ensemble(r, eps, opts, dt, t_max);
  if (!opts.refine_step) return res;
  // Halve dt until the squeezed-quadrature variance stops moving.
  for (int k = 0; k < opts.max_refinements; ++k) {
    SdeResult finer = run_ensemble(r, eps, opts, res.stats.dt / 2.0, t_max);
    const double change = std::abs(finer.report.var_y - res.report.var_y);
    res = std::move(finer);
    if (change <= res.stats.var_y_se) break;
  }
  return res;
}

SdeResult sde_trajectories(const SystemParams& p, double eps, const SdeOptions& opts) {
  return sde_trajectories(pdc_rates(p), eps, opts);
}

}  // namespace pdc
