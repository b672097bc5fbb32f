#ifndef UBAMC_SOLVER_HPP
#define UBAMC_SOLVER_HPP

#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ubamc/automaton.hpp"
#include "ubamc/config.hpp"
#include "ubamc/cutfinder.hpp"
#include "ubamc/error.hpp"
#include "ubamc/markov.hpp"
#include "ubamc/normalise.hpp"
#include "ubamc/numerics.hpp"
#include "ubamc/product.hpp"
#include "ubamc/pseudocut.hpp"

namespace ubamc {

enum class Method { Cut, Pseudo, Both };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::Cut: return "cut";
    case Method::Pseudo: return "pseudo";
    case Method::Both: return "both";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  if (s == "cut") return Method::Cut;
  if (s == "pseudo") return Method::Pseudo;
  if (s == "both") return Method::Both;
  throw InvalidInput("unknown method '" + std::string(s) + "'");
}

namespace detail {

class Stopwatch {
public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// A recurrent SCC with the data the normaliser stage needs.
struct RecurrentComponent {
  std::size_t scc_id = 0;
  Component component;
  bool accepting = false;
  Eigen::VectorXd y;  // dominant eigenvector, filled for accepting components
};

/// Everything up to (not including) the normaliser stage.
struct PreparedModel {
  ProductSystem product;
  graph::SccDecomposition sccs;
  std::vector<bool> recurrent;  // per SCC
  std::vector<bool> accepting;  // per SCC
  std::vector<RecurrentComponent> recurrent_components;
  std::map<std::string, double> timings_ms;
};

/// Builds B for an already normalised automaton, decomposes it and classifies
/// every SCC.
inline PreparedModel prepare_model(const BuchiAutomaton& normalised, const MarkovChain& chain,
                                   const Tolerances& tol = {}) {
  detail::Stopwatch product_clock;
  PreparedModel out{ProductSystem(normalised, chain), {}, {}, {}, {}, {}};
  out.timings_ms["product"] = product_clock.elapsed_ms();

  detail::Stopwatch scc_clock;
  out.sccs = compute_sccs(out.product);
  out.timings_ms["sccs"] = scc_clock.elapsed_ms();

  detail::Stopwatch classify_clock;
  const std::size_t count = out.sccs.components.size();
  out.recurrent.assign(count, false);
  out.accepting.assign(count, false);
  for (std::size_t c = 0; c < count; ++c) {
    const auto& members = out.sccs.components[c];
    bool accepting = false;
    for (ProductIndex i : members) {
      accepting = accepting || out.product.automaton().is_accepting(out.product.automaton_state(i));
    }
    out.accepting[c] = accepting;
    // A singleton without self-loop has B_DD = [0]; skip the factorisation.
    if (members.size() == 1 && out.product.entry(members[0], members[0]) == 0.0) continue;
    Component comp(out.product, members);
    const SpectralAnalysis spectrum = analyse_spectrum(out.product, comp, tol);
    if (!spectrum.recurrent) continue;
    out.recurrent[c] = true;
    RecurrentComponent rc{c, std::move(comp), accepting, {}};
    if (accepting) rc.y = dominant_eigenvector(out.product, rc.component, spectrum, tol);
    out.recurrent_components.push_back(std::move(rc));
  }
  out.timings_ms["classify"] = classify_clock.elapsed_ms();
  return out;
}

struct Normaliser {
  Method method = Method::Pseudo;
  Eigen::VectorXd mu;  // over the component's local order
  std::vector<ProductIndex> support_hint;  // cut members or Co(d)
};

/// D-normaliser for an accepting recurrent component, by the given method
/// (Cut or Pseudo). The base point is the smallest member of D.
inline Normaliser compute_normaliser(const ProductSystem& p, const RecurrentComponent& rc, Method method,
                                     const Tolerances& tol = {}) {
  const ProductIndex base = rc.component.member(0);
  if (method == Method::Cut) {
    CutResult cut = compute_cut(p, rc.component, base);
    return Normaliser{Method::Cut, cut_normaliser(p, rc.component, cut.cut), fibre_members(p, cut.cut)};
  }
  if (method == Method::Pseudo) {
    CoReach co = co_reachability(p, rc.component, base, false);
    const DeltaFamily delta(p, rc.component);
    const BasisFamily basis = compute_basis(delta, rc.y, tol);
    PseudoCutResult pc = pseudo_cut(p, rc.component, co, basis, rc.y, tol);
    return Normaliser{Method::Pseudo, std::move(pc.mu), std::move(co.members)};
  }
  throw std::invalid_argument("compute_normaliser: pick cut or pseudo");
}

struct NormaliserRow {
  const Component* component = nullptr;
  Eigen::VectorXd mu;
};

struct LinearSolution {
  Eigen::VectorXd z;
  double residual = 0.0;  // ||z - B z||_inf
  std::size_t clamped = 0;
};

/// Solves z = B z, mu(D)^T z_D = 1 for D ∈ D+, z_D = 0 for D ∈ D0 by least
/// squares and checks the residual of every block.
inline LinearSolution assemble_and_solve(const ProductSystem& p, std::span<const NormaliserRow> normalisers,
                                         std::span<const std::vector<ProductIndex>> zero_components,
                                         const Tolerances& tol = {}) {
  const auto n = static_cast<Eigen::Index>(p.size());
  Eigen::Index zero_rows = 0;
  for (const auto& c : zero_components) zero_rows += static_cast<Eigen::Index>(c.size());
  const Eigen::Index rows = n + static_cast<Eigen::Index>(normalisers.size()) + zero_rows;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
  for (ProductIndex i = 0; i < p.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    a(r, r) += 1.0;
    auto cols = p.row_columns(i);
    auto vals = p.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) a(r, static_cast<Eigen::Index>(cols[k])) -= vals[k];
  }
  Eigen::Index row = n;
  for (const auto& nr : normalisers) {
    for (std::size_t k = 0; k < nr.component->size(); ++k) {
      a(row, static_cast<Eigen::Index>(nr.component->member(k))) = nr.mu(static_cast<Eigen::Index>(k));
    }
    b(row++) = 1.0;
  }
  for (const auto& c : zero_components) {
    for (ProductIndex i : c) a(row++, static_cast<Eigen::Index>(i)) = 1.0;
  }

  LinearSolution out;
  out.z = numerics::solve_least_squares(a, b).x;
  const Eigen::VectorXd block = a * out.z - b;
  out.residual = numerics::inf_norm(p.multiply(out.z) - out.z);
  const double worst = numerics::inf_norm(block);
  if (worst > tol.residual) {
    std::ostringstream msg;
    msg << "linear system residual " << worst << " exceeds " << tol.residual;
    throw NumericalFailure(msg.str());
  }
  for (Eigen::Index i = 0; i < out.z.size(); ++i) {
    if (out.z(i) < 0.0 && out.z(i) >= -tol.residual) {
      out.z(i) = 0.0;
      ++out.clamped;
    }
  }
  return out;
}

struct SccReport {
  std::vector<ProductIndex> members;
  bool recurrent = false;
  bool accepting = false;
  std::optional<Method> method;      // set for accepting recurrent SCCs
  Eigen::VectorXd normaliser;        // over members, in order
  double normaliser_residual = 0.0;  // |mu^T z_D - 1|
};

struct ModelCheckResult {
  double probability = 0.0;
  Method method = Method::Pseudo;
  Eigen::VectorXd z;
  std::vector<std::string> labels;  // product state names, indexed like z
  std::vector<SccReport> sccs;
  double residual = 0.0;
  std::size_t clamped = 0;
  double agreement = 0.0;  // ||z_cut - z_pseudo||_inf in Both mode
  std::map<std::string, double> timings_ms;
};

namespace detail {

inline LinearSolution solve_with(const PreparedModel& m, Method method, const Tolerances& tol,
                                 std::vector<Normaliser>& normalisers, double& normaliser_ms) {
  Stopwatch clock;
  normalisers.clear();
  std::vector<NormaliserRow> rows;
  std::vector<std::vector<ProductIndex>> zeros;
  for (const auto& rc : m.recurrent_components) {
    if (!rc.accepting) {
      zeros.push_back(rc.component.members());
      continue;
    }
    normalisers.push_back(compute_normaliser(m.product, rc, method, tol));
  }
  normaliser_ms += clock.elapsed_ms();
  std::size_t k = 0;
  for (const auto& rc : m.recurrent_components) {
    if (rc.accepting) rows.push_back(NormaliserRow{&rc.component, normalisers[k++].mu});
  }
  return assemble_and_solve(m.product, rows, zeros, tol);
}

}  // namespace detail

/// Probability that the chain started in ι emits a word accepted by A.
///
/// Pipeline: ambiguity check, normalisation, product, SCCs, classification,
/// one normaliser per accepting recurrent SCC, final linear solve.
inline ModelCheckResult model_check(const BuchiAutomaton& a, const MarkovChain& chain,
                                    const InitialDistribution& iota, Method method,
                                    const Tolerances& tol = {}) {
  detail::Stopwatch total;
  ModelCheckResult out;
  out.method = method;
  if (a.alphabet() != chain.state_names()) {
    throw InvalidInput("automaton alphabet does not match the chain state list");
  }
  if (iota.size() != chain.num_states()) throw InvalidInput("initial distribution has wrong length");

  detail::Stopwatch verify_clock;
  const UnambiguityVerdict verdict = verify_unambiguous(a);
  out.timings_ms["verify"] = verify_clock.elapsed_ms();
  if (!verdict.unambiguous) throw AmbiguousAutomaton("automaton is ambiguous");

  detail::Stopwatch normalise_clock;
  const BuchiAutomaton normalised = normalise(a);
  out.timings_ms["normalise"] = normalise_clock.elapsed_ms();

  PreparedModel prepared = prepare_model(normalised, chain, tol);
  for (const auto& [k, v] : prepared.timings_ms) out.timings_ms[k] = v;

  double normaliser_ms = 0.0;
  std::vector<Normaliser> normalisers;
  detail::Stopwatch solve_clock;
  LinearSolution solution;
  if (method == Method::Both) {
    std::vector<Normaliser> cut_normalisers;
    const LinearSolution by_cut = detail::solve_with(prepared, Method::Cut, tol, cut_normalisers, normaliser_ms);
    solution = detail::solve_with(prepared, Method::Pseudo, tol, normalisers, normaliser_ms);
    out.agreement = numerics::inf_norm(by_cut.z - solution.z);
    if (out.agreement > tol.agreement) {
      std::ostringstream msg;
      msg << "cut and pseudo-cut solutions differ by " << out.agreement;
      throw NumericalFailure(msg.str());
    }
  } else {
    solution = detail::solve_with(prepared, method, tol, normalisers, normaliser_ms);
  }
  out.timings_ms["normaliser"] = normaliser_ms;
  out.timings_ms["solve"] = solve_clock.elapsed_ms() - normaliser_ms;

  const ProductSystem& p = prepared.product;
  out.z = std::move(solution.z);
  out.residual = solution.residual;
  out.clamped = solution.clamped;
  for (ProductIndex i = 0; i < p.size(); ++i) out.labels.push_back(p.label(i));

  std::vector<const RecurrentComponent*> by_scc(prepared.sccs.components.size(), nullptr);
  for (const auto& rc : prepared.recurrent_components) by_scc[rc.scc_id] = &rc;
  std::size_t k = 0;
  for (std::size_t c = 0; c < prepared.sccs.components.size(); ++c) {
    SccReport rep;
    rep.members = prepared.sccs.components[c];
    rep.recurrent = prepared.recurrent[c];
    rep.accepting = prepared.accepting[c];
    if (by_scc[c] && by_scc[c]->accepting) {
      const Normaliser& nz = normalisers[k++];
      rep.method = nz.method;
      rep.normaliser = nz.mu;
      double dot = 0.0;
      for (std::size_t j = 0; j < rep.members.size(); ++j) {
        dot += nz.mu(static_cast<Eigen::Index>(j)) * out.z(static_cast<Eigen::Index>(rep.members[j]));
      }
      rep.normaliser_residual = std::abs(dot - 1.0);
    }
    out.sccs.push_back(std::move(rep));
  }

  double prob = 0.0;
  for (StateIndex q : normalised.initial()) {
    for (ChainState s = 0; s < chain.num_states(); ++s) {
      prob += iota[s] * out.z(static_cast<Eigen::Index>(p.index(q, s)));
    }
  }
  out.probability = prob;
  out.timings_ms["total"] = total.elapsed_ms();
  return out;
}

inline nlohmann::json result_to_json(const ModelCheckResult& r, bool with_timings = true) {
  nlohmann::json doc;
  doc["probability"] = r.probability;
  doc["method"] = std::string(to_string(r.method));
  doc["residual"] = r.residual;
  doc["clamped"] = r.clamped;
  if (r.method == Method::Both) doc["agreement"] = r.agreement;
  nlohmann::json sccs = nlohmann::json::array();
  for (const auto& s : r.sccs) {
    nlohmann::json e;
    std::vector<std::string> names;
    for (ProductIndex i : s.members) names.push_back(r.labels[i]);
    e["states"] = names;
    e["recurrent"] = s.recurrent;
    e["accepting"] = s.accepting;
    if (s.method) {
      std::vector<double> mu(s.normaliser.data(), s.normaliser.data() + s.normaliser.size());
      e["normaliser"] = mu;
      e["normaliser_method"] = std::string(to_string(*s.method));
      e["normaliser_residual"] = s.normaliser_residual;
    } else {
      e["normaliser"] = nullptr;
    }
    sccs.push_back(std::move(e));
  }
  doc["sccs"] = sccs;
  nlohmann::json z = nlohmann::json::object();
  for (Eigen::Index i = 0; i < r.z.size(); ++i) z[r.labels[static_cast<std::size_t>(i)]] = r.z(i);
  doc["z"] = z;
  if (with_timings) doc["timings_ms"] = r.timings_ms;
  return doc;
}

}  // namespace ubamc

#endif  // UBAMC_SOLVER_HPP
