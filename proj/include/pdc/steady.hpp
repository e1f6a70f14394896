#pragma once

// Driven-dissipative steady state of the rotating-frame PDC model:
//   da/dt = eps - (chi/2) b^2 - gamma_a a + sqrt(2 gamma_a) a_in
//   db/dt = chi a b†        - gamma_b b + sqrt(2 gamma_b) b_in
// (coupling phase phi = -pi/2). Quadratures are x = b + b†, y = -i(b - b†)
// with vacuum variance 1.

#include "pdc/fock.hpp"
#include "pdc/model.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdc {

class TruncationTooSmall : public std::runtime_error {
 public:
  TruncationTooSmall(const std::string& what, HilbertSpec required)
      : std::runtime_error(what), required_(required) {}
  /// Cutoffs suggested for a retry.
  const HilbertSpec& required() const { return required_; }

 private:
  HilbertSpec required_;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rates entering the driven model, all in Hz.
struct PdcRates {
  double chi = 0.0;
  double gamma_a = 0.0;
  double gamma_b = 0.0;
  double phi = -std::numbers::pi / 2.0;

  double epsilon_c() const;
};

PdcRates pdc_rates(const SystemParams& p);

/// SystemParams whose closed-form chi equals `chi_hz`, built on the reference
/// detunings with equal couplings; for desk-scale steady-state studies.
SystemParams params_with_chi(double chi_hz, double gamma_a_hz, double gamma_b_hz);

enum class Branch { below, above_positive };

struct MeanField {
  Complex alpha;
  Complex beta;
  Branch branch = Branch::below;
  double epsilon_over_threshold = 0.0;
  bool chi_zero = false;
};

MeanField mean_field(const PdcRates& r, double eps);
MeanField mean_field(const SystemParams& p, double eps);

enum class Method { linearized, lindblad, sde };
const char* method_name(Method m);
Method parse_method(const std::string& name);

/// Relative half-width of the window around eps_c where linearized results
/// are flagged as invalid.
inline constexpr double kThresholdWindow = 0.02;

struct FluctuationReport {
  Method method = Method::linearized;
  double var_x = 1.0;
  double var_y = 1.0;
  double n_b = 0.0;
  double g2 = 0.0;  ///< NaN when undefined (n_b == 0)
  Complex anomalous = 0.0;  ///< <δb δb>
  Complex mean_b = 0.0;
  double statistical_error = 0.0;  ///< standard error of var_y (sde only)
  bool near_threshold = false;
};

struct Variances {
  double var_x = 1.0;
  double var_y = 1.0;
  bool near_threshold = false;
};

/// Closed-form quadrature variances, below and above threshold.
Variances linearized_variances(const PdcRates& r, double eps);
Variances linearized_variances(const SystemParams& p, double eps);

/// Symmetric stationary covariance of (x_a, y_a, x_b, y_b) for the linearized
/// fluctuations around the mean field; solves A C + C A^T + D = 0.
Eigen::Matrix4d linearized_covariance(const PdcRates& r, double eps);

/// Gaussian-closure moments around the mean field, including g2(0).
FluctuationReport linearized_g2(const PdcRates& r, double eps);
FluctuationReport linearized_g2(const SystemParams& p, double eps);

struct LindbladResult {
  DensityMatrix rho;  ///< mode a in the displaced frame, see below
  double displacement_a = 0.0;  ///< alpha used for that frame
  FluctuationReport report;
  double residual = 0.0;        ///< ||L rho||_F / ||rho||_F with rates scaled to max(gamma) = 1
  double top_population_a = 0.0;  ///< population of the two highest Fock levels of a
  double top_population_b = 0.0;
};

/// Maximum population allowed in the two highest Fock levels of each mode.
inline constexpr double kTruncationTolerance = 1e-6;

/// Largest (cutoff_a + 1)(cutoff_b + 1) accepted by the steady-state solver.
inline constexpr Index kMaxLindbladModeDim = 1100;

/// Exact steady state of the two-mode master equation with loss rates
/// 2 gamma_a and 2 gamma_b, solved in the frame where a is displaced by its
/// mean field (cutoff_a counts fluctuation quanta). Throws TruncationTooSmall
/// or NumericalFailure.
LindbladResult lindblad_steady_state(const PdcRates& r, double eps, const HilbertSpec& s);
LindbladResult lindblad_steady_state(const SystemParams& p, const HilbertSpec& s);

/// Cutoffs estimated from the mean field, enlarged until the truncation check
/// passes.
LindbladResult lindblad_steady_state_auto(const PdcRates& r, double eps, int max_attempts = 16);
HilbertSpec suggest_lindblad_cutoffs(const PdcRates& r, double eps);

struct SdeOptions {
  Index n_traj = 10000;
  double t_max = 0.0;  ///< seconds; 0 selects 40 / (2 pi gamma_b)
  double dt = 0.0;     ///< seconds; 0 selects 0.01 / (2 pi gamma_a)
  std::uint64_t seed = 42;
  unsigned threads = 0;  ///< 0 = hardware concurrency
  bool refine_step = false;  ///< halve dt until var_y moves by less than its standard error
  int max_refinements = 4;
};

struct SdeStatistics {
  double var_x_se = 0.0;
  double var_y_se = 0.0;
  double n_b_se = 0.0;
  double g2_se = 0.0;
  Complex mean_beta = 0.0;
  double mean_beta_se = 0.0;
  double dt = 0.0;
  double t_max = 0.0;
};

struct SdeResult {
  FluctuationReport report;
  SdeStatistics stats;
};

/// Truncated-Wigner ensemble of the Langevin equations (Euler-Maruyama).
/// Above threshold each trajectory is mapped onto the positive branch using
/// the b -> -b symmetry.
SdeResult sde_trajectories(const PdcRates& r, double eps, const SdeOptions& opts);
SdeResult sde_trajectories(const SystemParams& p, double eps, const SdeOptions& opts);

struct ScanOptions {
  std::optional<HilbertSpec> lindblad_spec;  ///< unset: automatic cutoffs
  SdeOptions sde;
  unsigned threads = 0;
};

struct ScanRow {
  double eps = 0.0;
  double eps_over_ec = 0.0;
  Method method = Method::linearized;
  FluctuationReport report;
  std::string flags;  ///< ';'-joined: near_threshold, g2_undefined, error:<msg>
};

std::vector<ScanRow> threshold_scan(const PdcRates& r, const std::vector<double>& eps_values,
                                    const std::vector<Method>& methods, const ScanOptions& opts = {});
std::vector<ScanRow> threshold_scan(const SystemParams& p, const std::vector<double>& eps_values,
                                    const std::vector<Method>& methods, const ScanOptions& opts = {});

}  // namespace pdc
