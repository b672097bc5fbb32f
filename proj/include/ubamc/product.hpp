#ifndef UBAMC_PRODUCT_HPP
#define UBAMC_PRODUCT_HPP

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ubamc/automaton.hpp"
#include "ubamc/config.hpp"
#include "ubamc/error.hpp"
#include "ubamc/graph.hpp"
#include "ubamc/markov.hpp"
#include "ubamc/numerics.hpp"

namespace ubamc {

using ProductIndex = std::size_t;

/// The matrix B over Q x S with B(<q,s>,<q',s'>) = M(s,s') when q' ∈ δ(q,s).
///
/// Product states are numbered lexicographically by (automaton index, chain
/// index). B is kept in compressed row form together with its transpose
/// pattern for backward traversals.
class ProductSystem {
public:
  ProductSystem(BuchiAutomaton automaton, MarkovChain chain)
      : automaton_(std::move(automaton)), chain_(std::move(chain)) {
    if (automaton_.alphabet() != chain_.state_names()) {
      throw InvalidInput("automaton alphabet does not match the chain state list");
    }
    const std::size_t nq = automaton_.num_states();
    const std::size_t ns = chain_.num_states();
    const std::size_t n = nq * ns;
    row_ptr_.assign(n + 1, 0);
    for (StateIndex q = 0; q < nq; ++q) {
      for (ChainState s = 0; s < ns; ++s) {
        const ProductIndex i = index(q, s);
        // Column order within a row is ascending: q' outer, s' inner.
        for (StateIndex q2 : automaton_.successors(q, s)) {
          for (ChainState s2 : chain_.successors(s)) {
            cols_.push_back(index(q2, s2));
            values_.push_back(chain_.probability(s, s2));
          }
        }
        row_ptr_[i + 1] = cols_.size();
      }
    }
    col_ptr_.assign(n + 1, 0);
    for (ProductIndex c : cols_) ++col_ptr_[c + 1];
    for (std::size_t c = 0; c < n; ++c) col_ptr_[c + 1] += col_ptr_[c];
    rows_.resize(cols_.size());
    std::vector<std::size_t> fill(col_ptr_.begin(), col_ptr_.end() - 1);
    for (ProductIndex r = 0; r < n; ++r) {
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) rows_[fill[cols_[k]]++] = r;
    }
  }

  const BuchiAutomaton& automaton() const { return automaton_; }
  const MarkovChain& chain() const { return chain_; }
  std::size_t size() const { return automaton_.num_states() * chain_.num_states(); }
  std::size_t nonzeros() const { return cols_.size(); }

  ProductIndex index(StateIndex q, ChainState s) const { return q * chain_.num_states() + s; }
  StateIndex automaton_state(ProductIndex i) const { return i / chain_.num_states(); }
  ChainState chain_state(ProductIndex i) const { return i % chain_.num_states(); }

  std::span<const ProductIndex> row_columns(ProductIndex i) const {
    return {cols_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  std::span<const double> row_values(ProductIndex i) const {
    return {values_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  std::span<const ProductIndex> column_rows(ProductIndex j) const {
    return {rows_.data() + col_ptr_[j], col_ptr_[j + 1] - col_ptr_[j]};
  }

  double entry(ProductIndex i, ProductIndex j) const {
    auto cols = row_columns(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (cols[k] == j) return row_values(i)[k];
    }
    return 0.0;
  }

  std::string label(ProductIndex i) const {
    return "(" + automaton_.state_name(automaton_state(i)) + "," +
           chain_.state_name(chain_state(i)) + ")";
  }

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
    for (ProductIndex i = 0; i < size(); ++i) {
      auto cols = row_columns(i);
      auto vals = row_values(i);
      double acc = 0.0;
      for (std::size_t k = 0; k < cols.size(); ++k) acc += vals[k] * x(static_cast<Eigen::Index>(cols[k]));
      y(static_cast<Eigen::Index>(i)) = acc;
    }
    return y;
  }

private:
  BuchiAutomaton automaton_;
  MarkovChain chain_;
  std::vector<std::size_t> row_ptr_;
  std::vector<ProductIndex> cols_;
  std::vector<double> values_;
  std::vector<std::size_t> col_ptr_;
  std::vector<ProductIndex> rows_;
};

inline ProductSystem build_product(const BuchiAutomaton& a, const MarkovChain& m) {
  return ProductSystem(a, m);
}

/// SCCs of B in reverse topological order.
inline graph::SccDecomposition compute_sccs(const ProductSystem& p) {
  return graph::tarjan_scc(p.size(), [&](std::size_t v) { return p.row_columns(v); });
}

/// An SCC together with the position of each product state inside it.
/// Local positions follow the ascending product index order.
class Component {
public:
  Component(const ProductSystem& p, std::vector<ProductIndex> members)
      : members_(std::move(members)), local_(p.size(), graph::kNone) {
    std::sort(members_.begin(), members_.end());
    for (std::size_t k = 0; k < members_.size(); ++k) local_[members_[k]] = k;
  }

  std::size_t size() const { return members_.size(); }
  const std::vector<ProductIndex>& members() const { return members_; }
  ProductIndex member(std::size_t local) const { return members_[local]; }
  bool contains(ProductIndex i) const { return local_[i] != graph::kNone; }
  std::size_t local(ProductIndex i) const { return local_[i]; }

private:
  std::vector<ProductIndex> members_;
  std::vector<std::size_t> local_;
};

inline Eigen::MatrixXd restrict_matrix(const ProductSystem& p, const Component& d) {
  const auto n = static_cast<Eigen::Index>(d.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t r = 0; r < d.size(); ++r) {
    const ProductIndex i = d.member(r);
    auto cols = p.row_columns(i);
    auto vals = p.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (d.contains(cols[k])) {
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d.local(cols[k]))) = vals[k];
      }
    }
  }
  return out;
}

struct SccFlags {
  bool recurrent = false;
  bool accepting = false;
};

/// Result of the single factorisation of I - B_DD shared by the recurrence
/// test and the eigenvector extraction.
struct SpectralAnalysis {
  bool recurrent = false;
  numerics::RankDecision decision;
};

inline SpectralAnalysis analyse_spectrum(const ProductSystem& p, const Component& d,
                                         const Tolerances& tol = {}) {
  const Eigen::MatrixXd bdd = restrict_matrix(p, d);
  const auto n = bdd.rows();
  const Eigen::MatrixXd shifted = Eigen::MatrixXd::Identity(n, n) - bdd;
  SpectralAnalysis out;
  out.decision = numerics::rank_and_nullspace(shifted, numerics::rank_threshold(bdd, tol.rank));
  out.recurrent = out.decision.rank < static_cast<std::size_t>(n);
  return out;
}

inline bool is_accepting(const ProductSystem& p, const Component& d) {
  for (ProductIndex i : d.members()) {
    if (p.automaton().is_accepting(p.automaton_state(i))) return true;
  }
  return false;
}

/// Recurrent iff I - B_DD is singular; accepting iff D meets F x S.
inline SccFlags classify_scc(const ProductSystem& p, const Component& d, const Tolerances& tol = {}) {
  return SccFlags{analyse_spectrum(p, d, tol).recurrent, is_accepting(p, d)};
}

/// Strictly positive y with B_DD y = y, scaled to ||y||_inf = 1, from a
/// previously computed spectral analysis.
inline Eigen::VectorXd dominant_eigenvector(const ProductSystem& p, const Component& d,
                                            const SpectralAnalysis& spectrum,
                                            const Tolerances& tol = {}) {
  const auto& ns = spectrum.decision.nullspace;
  if (ns.cols() != 1) {
    std::ostringstream msg;
    msg << "eigenspace of SCC containing " << p.label(d.member(0)) << " has dimension " << ns.cols()
        << ", expected 1";
    throw NumericalFailure(msg.str());
  }
  Eigen::VectorXd y = ns.col(0);
  if (y(0) < 0.0) y = -y;
  y /= numerics::inf_norm(y);
  if (y.minCoeff() <= tol.positive) {
    throw NumericalFailure("dominant eigenvector of SCC containing " + p.label(d.member(0)) +
                           " is not strictly positive");
  }
  const Eigen::VectorXd residual = restrict_matrix(p, d) * y - y;
  if (numerics::inf_norm(residual) > tol.residual) {
    std::ostringstream msg;
    msg << "eigenvector residual " << numerics::inf_norm(residual) << " exceeds " << tol.residual;
    throw NumericalFailure(msg.str());
  }
  return y;
}

inline Eigen::VectorXd dominant_eigenvector(const ProductSystem& p, const Component& d,
                                            const Tolerances& tol = {}) {
  const SpectralAnalysis spectrum = analyse_spectrum(p, d, tol);
  if (!spectrum.recurrent) {
    throw NumericalFailure("dominant_eigenvector: SCC containing " + p.label(d.member(0)) +
                           " is not recurrent");
  }
  return dominant_eigenvector(p, d, spectrum, tol);
}

/// Successor lists of B_DD grouped by the chain component of the target:
/// `successors(i, t)` holds the local positions of <q',t> ∈ D reached from
/// local state i. Empty whenever M(s,t) = 0.
class ComponentTransitions {
public:
  ComponentTransitions(const ProductSystem& p, const Component& d)
      : num_letters_(p.chain().num_states()), lists_(d.size() * num_letters_) {
    for (std::size_t r = 0; r < d.size(); ++r) {
      for (ProductIndex c : p.row_columns(d.member(r))) {
        if (d.contains(c)) lists_[r * num_letters_ + p.chain_state(c)].push_back(d.local(c));
      }
    }
  }
  std::span<const std::size_t> successors(std::size_t local, ChainState t) const {
    return lists_[local * num_letters_ + t];
  }
  std::size_t num_letters() const { return num_letters_; }

private:
  std::size_t num_letters_;
  std::vector<std::vector<std::size_t>> lists_;
};

/// Debug export of B and its SCCs. Not a stable format.
inline std::string product_to_dot(const ProductSystem& p, const graph::SccDecomposition& sccs) {
  std::ostringstream out;
  out << "digraph B {\n";
  for (std::size_t c = 0; c < sccs.components.size(); ++c) {
    out << "  subgraph cluster_" << c << " {\n";
    for (ProductIndex i : sccs.components[c]) out << "    n" << i << " [label=\"" << p.label(i) << "\"];\n";
    out << "  }\n";
  }
  for (ProductIndex i = 0; i < p.size(); ++i) {
    auto cols = p.row_columns(i);
    auto vals = p.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      out << "  n" << i << " -> n" << cols[k] << " [label=\"" << vals[k] << "\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace ubamc

#endif  // UBAMC_PRODUCT_HPP
