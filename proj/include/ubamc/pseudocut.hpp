#ifndef UBAMC_PSEUDOCUT_HPP
#define UBAMC_PSEUDOCUT_HPP

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ubamc/config.hpp"
#include "ubamc/cutfinder.hpp"
#include "ubamc/error.hpp"
#include "ubamc/numerics.hpp"
#include "ubamc/product.hpp"

namespace ubamc {

/// The 0/1 operators Δ(t) and Δ'(t) on R^D, applied as vector transforms.
///
/// Δ(t) has an entry at (<q,s>,<q',t>) iff M(s,t) > 0 and q' ∈ δ(q,s): its
/// graph is the part of B_DD ending in Q x {t}. Δ'(t) keeps the components
/// over t and zeroes the rest.
class DeltaFamily {
public:
  DeltaFamily(const ProductSystem& p, const Component& d)
      : transitions_(p, d), chain_(&p.chain()), fibre_of_(d.size()), fibres_(p.chain().num_states()) {
    for (std::size_t k = 0; k < d.size(); ++k) {
      fibre_of_[k] = p.chain_state(d.member(k));
      fibres_[fibre_of_[k]].push_back(k);
    }
  }

  std::size_t dimension() const { return fibre_of_.size(); }
  std::size_t num_letters() const { return fibres_.size(); }
  ChainState fibre_of(std::size_t local) const { return fibre_of_[local]; }
  /// Local positions of Q_{D,t} = (Q x {t}) ∩ D.
  std::span<const std::size_t> fibre(ChainState t) const { return fibres_[t]; }
  const MarkovChain& chain() const { return *chain_; }

  Eigen::VectorXd apply(ChainState t, const Eigen::VectorXd& u) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(u.size());
    for (std::size_t i = 0; i < dimension(); ++i) out(idx(i)) = row_sum(i, t, u);
    return out;
  }

  Eigen::VectorXd restrict(ChainState s, const Eigen::VectorXd& u) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(u.size());
    for (std::size_t i : fibres_[s]) out(idx(i)) = u(idx(i));
    return out;
  }

  /// Δ'(s) Δ(t) u, touching only the rows over s.
  Eigen::VectorXd apply_restricted(ChainState s, ChainState t, const Eigen::VectorXd& u) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(u.size());
    for (std::size_t i : fibres_[s]) out(idx(i)) = row_sum(i, t, u);
    return out;
  }

  /// Δ(w) u = Δ(w_1) ... Δ(w_n) u.
  Eigen::VectorXd apply_word(std::span<const ChainState> w, const Eigen::VectorXd& u) const {
    Eigen::VectorXd out = u;
    for (auto it = w.rbegin(); it != w.rend(); ++it) out = apply(*it, out);
    return out;
  }

  /// Row form v^T Δ(t); for a fibre vector this is the fibre step.
  Eigen::VectorXd apply_transposed(ChainState t, const Eigen::VectorXd& v) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
    for (std::size_t i = 0; i < dimension(); ++i) {
      if (v(idx(i)) == 0.0) continue;
      for (std::size_t j : transitions_.successors(i, t)) out(idx(j)) += v(idx(i));
    }
    return out;
  }

  bool enabled(std::span<const ChainState> w) const {
    for (std::size_t i = 1; i < w.size(); ++i) {
      if (!chain_->has_edge(w[i - 1], w[i])) return false;
    }
    return true;
  }

private:
  static Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }
  double row_sum(std::size_t i, ChainState t, const Eigen::VectorXd& u) const {
    double acc = 0.0;
    for (std::size_t j : transitions_.successors(i, t)) acc += u(idx(j));
    return acc;
  }

  ComponentTransitions transitions_;
  const MarkovChain* chain_;
  std::vector<ChainState> fibre_of_;
  std::vector<std::vector<std::size_t>> fibres_;
};

inline DeltaFamily build_delta(const ProductSystem& p, const Component& d) { return DeltaFamily(p, d); }

struct BasisVector {
  Word word;             // s w with s w enabled
  Eigen::VectorXd value; // Δ'(s) Δ(w) y
};

struct BasisTraceEntry {
  Word word;
  bool accepted = false;
};

/// R(s) for every chain state s, with orthonormal shadows R(s)⊥ spanning the
/// same spaces.
struct BasisFamily {
  std::vector<std::vector<BasisVector>> vectors;
  std::vector<std::vector<Eigen::VectorXd>> orthogonal;
  std::vector<BasisTraceEntry> trace;

  std::size_t total_size() const {
    std::size_t n = 0;
    for (const auto& r : vectors) n += r.size();
    return n;
  }
};

namespace detail {

// Key realising the order ≪_S: shorter words first, then words compared
// letter by letter from the right.
struct WordOrderKey {
  std::size_t length;
  Word reversed;
  friend auto operator<=>(const WordOrderKey&, const WordOrderKey&) = default;
};

inline WordOrderKey order_key(const Word& w) {
  return WordOrderKey{w.size(), Word(w.rbegin(), w.rend())};
}

}  // namespace detail

/// Worklist computation of bases R(s) of V(s) = span{Δ'(s) Δ(w) y}.
///
/// Candidates (t w, Δ'(t) Δ(w) y) are processed in ≪_S order. A candidate
/// independent of R(t)⊥ is accepted, after which (s t w, Δ'(s) Δ(t) u) is
/// queued for every chain edge (s, t).
inline BasisFamily compute_basis(const DeltaFamily& delta, const Eigen::VectorXd& y,
                                 const Tolerances& tol = {}, bool record_trace = false) {
  const std::size_t ns = delta.num_letters();
  BasisFamily out;
  out.vectors.resize(ns);
  out.orthogonal.resize(ns);
  std::map<detail::WordOrderKey, std::pair<Word, Eigen::VectorXd>> worklist;

  auto enqueue_predecessors = [&](const Word& tw, const Eigen::VectorXd& u) {
    const ChainState t = tw.front();
    for (ChainState s : delta.chain().predecessors(t)) {
      if (delta.fibre(s).empty()) continue;
      Word stw;
      stw.reserve(tw.size() + 1);
      stw.push_back(s);
      stw.insert(stw.end(), tw.begin(), tw.end());
      Eigen::VectorXd next = delta.apply_restricted(s, t, u);
      auto key = detail::order_key(stw);
      worklist.emplace(std::move(key), std::make_pair(std::move(stw), std::move(next)));
    }
  };

  for (ChainState s = 0; s < ns; ++s) {
    if (delta.fibre(s).empty()) continue;
    Eigen::VectorXd u = delta.restrict(s, y);
    out.vectors[s].push_back(BasisVector{Word{s}, u});
    out.orthogonal[s].push_back(u.normalized());
    if (record_trace) out.trace.push_back(BasisTraceEntry{Word{s}, true});
  }
  for (ChainState s = 0; s < ns; ++s) {
    if (!out.vectors[s].empty()) enqueue_predecessors(out.vectors[s].front().word, out.vectors[s].front().value);
  }

  while (!worklist.empty()) {
    auto node = worklist.extract(worklist.begin());
    Word tw = std::move(node.mapped().first);
    Eigen::VectorXd u = std::move(node.mapped().second);
    const ChainState t = tw.front();
    auto orth = numerics::orthogonalise(u, out.orthogonal[t], tol.independence);
    if (record_trace) out.trace.push_back(BasisTraceEntry{tw, orth.independent});
    if (!orth.independent) continue;
    out.orthogonal[t].push_back(orth.vector.normalized());
    enqueue_predecessors(tw, u);
    out.vectors[t].push_back(BasisVector{std::move(tw), std::move(u)});
  }
  return out;
}

struct AffineCoefficients {
  Eigen::VectorXd gamma;
  double sum = 0.0;
  double residual = 0.0;
};

/// Coefficients of v in the basis R(s) (least squares), with their sum.
inline AffineCoefficients affine_coefficients(const BasisFamily& basis, ChainState s,
                                              const Eigen::VectorXd& v) {
  const auto& r = basis.vectors.at(s);
  Eigen::MatrixXd m(v.size(), static_cast<Eigen::Index>(r.size()));
  for (std::size_t k = 0; k < r.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = r[k].value;
  auto sol = numerics::solve_least_squares(m, v);
  return AffineCoefficients{sol.x, sol.x.sum(), sol.residual};
}

struct PseudoCutResult {
  Eigen::VectorXd mu;     // over D's local order, mu_d = 1
  double residual = 0.0;  // max_r |mu^T r - mu^T y|
};

/// A Co(d)-pseudo-cut normalised to mu_d = 1.
///
/// Solves mu^T r = mu^T y for all r ∈ R(s) over the free components
/// Co(d) \ {d}, with mu_d fixed to 1 and mu zero outside Co(d). Such a mu is
/// directly a D-normaliser.
inline PseudoCutResult pseudo_cut(const ProductSystem& p, const Component& d, const CoReach& co,
                                  const BasisFamily& basis, const Eigen::VectorXd& y,
                                  const Tolerances& tol = {}) {
  const ChainState s = p.chain_state(co.base);
  const auto& r = basis.vectors.at(s);
  const Eigen::Index base = static_cast<Eigen::Index>(d.local(co.base));
  std::vector<Eigen::Index> free;
  for (ProductIndex e : co.members) {
    if (e != co.base) free.push_back(static_cast<Eigen::Index>(d.local(e)));
  }
  const auto rows = static_cast<Eigen::Index>(r.size());
  const auto cols = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd a(rows, cols);
  Eigen::VectorXd b(rows);
  double scale = 1.0;
  for (Eigen::Index k = 0; k < rows; ++k) {
    const Eigen::VectorXd& rk = r[static_cast<std::size_t>(k)].value;
    scale = std::max(scale, numerics::inf_norm(rk));
    for (Eigen::Index c = 0; c < cols; ++c) a(k, c) = rk(free[c]) - y(free[c]);
    b(k) = -(rk(base) - y(base));
  }
  auto sol = numerics::solve_least_squares(a, b);

  PseudoCutResult out;
  out.mu = Eigen::VectorXd::Zero(y.size());
  out.mu(base) = 1.0;
  for (Eigen::Index c = 0; c < cols; ++c) out.mu(free[c]) = sol.x(c);
  const double target = out.mu.dot(y);
  for (const auto& rk : r) out.residual = std::max(out.residual, std::abs(out.mu.dot(rk.value) - target));
  if (out.residual > tol.residual * scale) {
    std::ostringstream msg;
    msg << "pseudo-cut constraints for " << p.label(co.base) << " violated by " << out.residual;
    throw NumericalFailure(msg.str());
  }
  return out;
}

}  // namespace ubamc

#endif  // UBAMC_PSEUDOCUT_HPP
