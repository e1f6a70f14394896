#include "pdc/elimination.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

namespace pdc {

GeneratorS build_generator(const SystemParams& p, const HilbertSpec& s) {
  s.validate();
  if (p.delta == 0.0) throw std::invalid_argument("build_generator: degenerate denominator delta = 0");
  if (p.delta_r == 0.0) throw std::invalid_argument("build_generator: degenerate denominator delta_r = 0");
  if (p.delta == p.delta_r) {
    throw std::invalid_argument("build_generator: degenerate denominator (delta - delta_r) = 0");
  }

  // Coefficients carry the conjugated couplings so that [H0, S] = -HI holds
  // for complex g as well; for real couplings they reduce to g / detuning.
  const Complex c_ge = std::conj(p.g_d) / p.delta;
  const Complex c_re = std::conj(p.g_er) / (p.delta - p.delta_r);
  const Complex c_gr = std::conj(p.g_gr) / p.delta_r;

  const Operator ad = embed(creation(s.cutoff_a), Slot::mode_a, s);
  const Operator bd = embed(creation(s.cutoff_b), Slot::mode_b, s);
  const Operator ge = embed(qubit_transition(Level::g, Level::e), Slot::qubit, s);
  const Operator re = embed(qubit_transition(Level::r, Level::e), Slot::qubit, s);
  const Operator gr = embed(qubit_transition(Level::g, Level::r), Slot::qubit, s);

  const Operator x = c_ge * (ad * ge) + c_re * (bd * re) + c_gr * (bd * gr);
  return {x - x.adjoint(), c_ge, c_re, c_gr};
}

namespace {

constexpr Index kPad = 3;  // deepest ladder product in the third-order series

std::string ladder_pattern(Index d_a, Index d_b) {
  auto part = [](Index d, const char* name) -> std::string {
    if (d == 0) return "";
    const std::string op = d > 0 ? std::string(name) + "†" : std::string(name);
    const Index k = std::abs(d);
    return k == 1 ? op : "(" + op + ")^" + std::to_string(k);
  };
  if (d_a == 0 && d_b == 0) return "diagonal (number-dependent beyond linear)";
  std::string out = part(d_a, "a");
  const std::string pb = part(d_b, "b");
  if (!out.empty() && !pb.empty()) out += " ";
  return out + pb;
}

}  // namespace

ProjectedModel project_effective(const SystemParams& p, const HilbertSpec& s) {
  s.validate();
  // Evaluate on a padded space so truncation edges never reach the block we keep.
  const HilbertSpec padded{s.cutoff_a + kPad, s.cutoff_b + kPad};
  const Operator hi = build_HI(p, padded);
  const GeneratorS gen = build_generator(p, padded);

  const Operator first = commutator(hi, gen.op);
  const Operator second = commutator(first, gen.op);
  const DenseMatrix correction = (0.5 * first + Complex(1.0 / 3.0) * second).dense();

  const Index n = s.mode_dim();
  DenseMatrix block(n, n);
  for (Index ia = 0; ia <= s.cutoff_a; ++ia) {
    for (Index ib = 0; ib <= s.cutoff_b; ++ib) {
      for (Index ja = 0; ja <= s.cutoff_a; ++ja) {
        for (Index jb = 0; jb <= s.cutoff_b; ++jb) {
          block(s.mode_index(ia, ib), s.mode_index(ja, jb)) =
              correction(padded.index(Level::g, ia, ib), padded.index(Level::g, ja, jb));
        }
      }
    }
  }
  const DenseMatrix block_hz = block / kTwoPi;

  EliminationReport rep;
  const Index i00 = s.mode_index(0, 0);
  const Index i10 = s.mode_index(1, 0);
  const Index i01 = s.mode_index(0, 1);
  const Index i02 = s.mode_index(0, 2);
  rep.extracted_chi_half = block_hz(i10, i02) / std::sqrt(2.0);
  rep.extracted_shift_a = -(block_hz(i10, i10) - block_hz(i00, i00)).real();
  rep.extracted_shift_b = -(block_hz(i01, i01) - block_hz(i00, i00)).real();

  const EffectiveParams e = effective_params(p);
  rep.closed_form_chi_half = 0.5 * e.chi * std::polar(1.0, e.phi_eff);
  const double closed = std::abs(rep.closed_form_chi_half);
  const double diff = std::abs(rep.extracted_chi_half - rep.closed_form_chi_half);
  rep.relative_deviation = closed > 0.0 ? diff / closed : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());

  // Residual after removing the retained terms: constant, a†a, b†b, a†b² + h.c.
  DenseMatrix fitted = DenseMatrix::Zero(n, n);
  for (Index na = 0; na <= s.cutoff_a; ++na) {
    for (Index nb = 0; nb <= s.cutoff_b; ++nb) {
      const Index k = s.mode_index(na, nb);
      fitted(k, k) = block_hz(i00, i00) - rep.extracted_shift_a * static_cast<double>(na) -
                     rep.extracted_shift_b * static_cast<double>(nb);
      if (na + 1 <= s.cutoff_a && nb >= 2) {
        const Index up = s.mode_index(na + 1, nb - 2);
        const double ladder = std::sqrt(static_cast<double>((na + 1) * nb * (nb - 1)));
        fitted(up, k) = rep.extracted_chi_half * ladder;
        fitted(k, up) = std::conj(rep.extracted_chi_half) * ladder;
      }
    }
  }
  const DenseMatrix residual = block_hz - fitted;
  const double floor = 1e-12 * std::max(1.0, block_hz.norm());

  std::map<std::pair<Index, Index>, double> blocks;
  for (Index ia = 0; ia <= s.cutoff_a; ++ia) {
    for (Index ib = 0; ib <= s.cutoff_b; ++ib) {
      for (Index ja = 0; ja <= s.cutoff_a; ++ja) {
        for (Index jb = 0; jb <= s.cutoff_b; ++jb) {
          const double v = std::norm(residual(s.mode_index(ia, ib), s.mode_index(ja, jb)));
          if (v > 0.0) blocks[{ia - ja, ib - jb}] += v;
        }
      }
    }
  }
  for (const auto& [key, sq] : blocks) {
    const double mag = std::sqrt(sq);
    if (mag > floor) rep.dropped_terms.push_back({ladder_pattern(key.first, key.second), mag});
  }
  std::sort(rep.dropped_terms.begin(), rep.dropped_terms.end(),
            [](const DroppedTerm& l, const DroppedTerm& r) { return l.magnitude > r.magnitude; });

  // Add back the free part of the ground block.
  for (Index na = 0; na <= s.cutoff_a; ++na) {
    for (Index nb = 0; nb <= s.cutoff_b; ++nb) {
      block(s.mode_index(na, nb), s.mode_index(na, nb)) +=
          angular(p.nu_a) * static_cast<double>(na) + angular(p.nu_b) * static_cast<double>(nb);
    }
  }
  return {Operator(s.mode_shape(), block), std::move(rep)};
}

std::vector<SpectralPair> spectral_check(const SystemParams& p, const HilbertSpec& s, Index k) {
  s.validate();
  const DenseMatrix full = (build_H0(p, s) + build_HI(p, s)).dense() / kTwoPi;
  const DenseMatrix eff = project_effective(p, s).h_eff.dense() / kTwoPi;

  // A sector is complete when every state carrying that K fits inside the cutoffs.
  const Index k_max = std::min(s.cutoff_b, 2 * s.cutoff_a + 1);
  std::vector<SpectralPair> pairs;
  for (Index K = 0; K <= k_max; ++K) {
    std::vector<Index> full_idx;
    std::vector<bool> is_ground;
    for (Level q : {Level::g, Level::r, Level::e}) {
      for (Index na = 0; na <= s.cutoff_a; ++na) {
        for (Index nb = 0; nb <= s.cutoff_b; ++nb) {
          if (excitation_number(q, na, nb) == K) {
            full_idx.push_back(s.index(q, na, nb));
            is_ground.push_back(q == Level::g);
          }
        }
      }
    }
    std::vector<Index> eff_idx;
    for (Index na = 0; na <= s.cutoff_a; ++na) {
      for (Index nb = 0; nb <= s.cutoff_b; ++nb) {
        if (2 * na + nb == K) eff_idx.push_back(s.mode_index(na, nb));
      }
    }
    const Index nf = static_cast<Index>(full_idx.size());
    const Index ne = static_cast<Index>(eff_idx.size());
    if (ne == 0) continue;

    DenseMatrix hf(nf, nf);
    for (Index i = 0; i < nf; ++i)
      for (Index j = 0; j < nf; ++j) hf(i, j) = full(full_idx[i], full_idx[j]);
    DenseMatrix he(ne, ne);
    for (Index i = 0; i < ne; ++i)
      for (Index j = 0; j < ne; ++j) he(i, j) = eff(eff_idx[i], eff_idx[j]);

    // Energies inside a sector share a large common offset; remove it before diagonalizing.
    const double offset = hf.diagonal().real().minCoeff();
    hf.diagonal().array() -= offset;
    he.diagonal().array() -= offset;
    Eigen::SelfAdjointEigenSolver<DenseMatrix> sf(hf);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> se(he, Eigen::EigenvaluesOnly);

    std::vector<std::pair<double, double>> by_weight;  // (ground weight, eigenvalue)
    for (Index c = 0; c < nf; ++c) {
      double w = 0.0;
      for (Index i = 0; i < nf; ++i)
        if (is_ground[i]) w += std::norm(sf.eigenvectors()(i, c));
      by_weight.emplace_back(w, sf.eigenvalues()(c));
    }
    std::sort(by_weight.begin(), by_weight.end(), [](auto& l, auto& r) { return l.first > r.first; });
    std::vector<double> exact;
    for (Index c = 0; c < ne; ++c) exact.push_back(by_weight[c].second);
    std::sort(exact.begin(), exact.end());

    for (Index c = 0; c < ne; ++c) {
      const double x = exact[c] + offset;
      const double y = se.eigenvalues()(c) + offset;
      pairs.push_back({K, x, y, exact[c] - se.eigenvalues()(c)});
    }
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const SpectralPair& l, const SpectralPair& r) { return l.exact_hz < r.exact_hz; });
  if (static_cast<Index>(pairs.size()) > k) pairs.resize(static_cast<std::size_t>(std::max<Index>(k, 0)));
  return pairs;
}

}  // namespace pdc
