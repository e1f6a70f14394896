#pragma once

// Closed-system Schrödinger evolution for the full and effective models.

#include "pdc/fock.hpp"
#include "pdc/model.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdc {

class IntegrationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TimeGrid {
  double t_start = 0.0;  ///< seconds
  double t_end = 1.0;
  Index n_samples = 2;

  void validate() const;
  double step() const { return (t_end - t_start) / static_cast<double>(n_samples - 1); }
  double time(Index k) const { return t_start + step() * static_cast<double>(k); }
};

struct TimeSeries {
  TimeGrid grid;
  std::map<std::string, std::vector<double>> channels;

  const std::vector<double>& channel(const std::string& name) const;
};

struct EvolveOptions {
  double tol = 1e-10;       ///< local error per step, relative to the state norm
  Index krylov_dim = 30;    ///< Lanczos basis size
  int max_halvings = 40;    ///< step subdivisions before IntegrationFailure
};

/// One Lanczos approximation of exp(-i H h) v with m basis vectors. Returns
/// the propagated vector and the a posteriori error estimate.
struct KrylovStep {
  Vector state;
  double error_estimate;
};
KrylovStep lanczos_step(const SparseMatrix& h, const Vector& v, double dt, Index m);

/// Adaptive Krylov propagation of psi0 under a time-independent Hermitian H
/// (angular units). Returns the state at every grid point.
std::vector<StateVector> evolve(const Operator& H, const StateVector& psi0, const TimeGrid& grid,
                                const EvolveOptions& opts = {});

/// Exact propagation by dense diagonalization; for small spaces and sectors.
std::vector<StateVector> evolve_exact(const Operator& H, const StateVector& psi0, const TimeGrid& grid);

/// Basis indices of the full space carrying excitation number K.
std::vector<Index> excitation_sector(const HilbertSpec& s, Index K);

/// Propagates a state confined to one K sector of H0 + HI exactly inside that
/// sector. Throws invalid-argument when psi0 has weight outside the sector.
std::vector<StateVector> evolve_in_sector(const Operator& H, const StateVector& psi0, const HilbertSpec& s,
                                          Index K, const TimeGrid& grid);

enum class DynamicsMethod { sector, krylov };

struct DeviationSummary {
  double max_dev_n_a = 0.0;
  double max_dev_n_b = 0.0;
  double min_p_g = 1.0;
  double transfer_time_full = 0.0;  ///< first maximum of n_b, seconds
  double transfer_time_eff = 0.0;
  double norm_drift = 0.0;
  double excitation_drift = 0.0;
};

struct FullVsEffective {
  TimeSeries full;
  TimeSeries eff;
  DeviationSummary summary;
  std::vector<Diagnostic> regime;
};

/// Evolves |g;1;0> under H0 + HI and |1,0> under the effective Hamiltonian,
/// recording P_g, n_a, n_b, norm and K.
FullVsEffective run_full_vs_effective(const SystemParams& p, const HilbertSpec& s, const TimeGrid& grid,
                                      DynamicsMethod method = DynamicsMethod::sector,
                                      const EvolveOptions& opts = {});

/// pi / (sqrt(2) * 2pi chi): time of complete |1,0> -> |0,2> transfer.
double transfer_time(const SystemParams& p);

/// 2001 samples over two full Rabi cycles (four transfer times).
TimeGrid default_rabi_grid(const SystemParams& p);

/// max_t |<K>(t) - <K>(0)|; requires a "K" channel.
double conserved_excitation(const TimeSeries& series);

/// First local maximum of a sampled channel, refined by a parabola through
/// the neighbouring samples. Returns the time in seconds.
double first_maximum_time(const TimeGrid& grid, const std::vector<double>& values);

}  // namespace pdc
