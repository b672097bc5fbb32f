#ifndef UBAMC_CUTFINDER_HPP
#define UBAMC_CUTFINDER_HPP

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ubamc/error.hpp"
#include "ubamc/graph.hpp"
#include "ubamc/product.hpp"

namespace ubamc {

/// A subset α x {anchor} of an SCC D, stored as the sorted automaton part α.
struct Fibre {
  ChainState anchor = 0;
  std::vector<StateIndex> states;

  bool empty() const { return states.empty(); }
  std::size_t size() const { return states.size(); }
  friend bool operator==(const Fibre&, const Fibre&) = default;
  friend auto operator<=>(const Fibre&, const Fibre&) = default;
};

inline Fibre singleton_fibre(const ProductSystem& p, ProductIndex d) {
  return Fibre{p.chain_state(d), {p.automaton_state(d)}};
}

inline std::vector<ProductIndex> fibre_members(const ProductSystem& p, const Fibre& f) {
  std::vector<ProductIndex> out;
  for (StateIndex q : f.states) out.push_back(p.index(q, f.anchor));
  return out;
}

/// f ⟹ t: successors of the fibre along chain edge (anchor, t), within D.
/// Returns nullopt when M(anchor, t) = 0.
inline std::optional<Fibre> fibre_step(const ProductSystem& p, const Component& d, const Fibre& f,
                                       ChainState t) {
  if (t >= p.chain().num_states() || f.anchor >= p.chain().num_states()) {
    throw InvalidInput("fibre_step: unknown chain state");
  }
  if (!p.chain().has_edge(f.anchor, t)) return std::nullopt;
  std::vector<char> hit(p.automaton().num_states(), 0);
  for (StateIndex q : f.states) {
    for (StateIndex r : p.automaton().successors(q, f.anchor)) {
      if (d.contains(p.index(r, t))) hit[r] = 1;
    }
  }
  Fibre out{t, {}};
  for (StateIndex r = 0; r < hit.size(); ++r) {
    if (hit[r]) out.states.push_back(r);
  }
  return out;
}

inline std::optional<Fibre> fibre_walk(const ProductSystem& p, const Component& d, Fibre f,
                                       std::span<const ChainState> word) {
  for (ChainState t : word) {
    auto next = fibre_step(p, d, f, t);
    if (!next) return std::nullopt;
    f = std::move(*next);
  }
  return f;
}

/// Co(d) together with witness words CoPath(d)(e).
struct CoReach {
  ProductIndex base = 0;
  std::vector<ProductIndex> members;          // sorted; contains base
  std::map<ProductIndex, Word> witness;       // e -> word w with {d,e} ⊆ d ⟹ w
};

/// Breadth-first search over pairs of simultaneous runs from (d, d).
///
/// Vertices are pairs of D-states over a common chain state; an edge follows
/// one chain edge with both components. Co(d) collects the partners e that
/// appear next to d itself. Shortest witnesses are read off the BFS tree.
inline CoReach co_reachability(const ProductSystem& p, const Component& d, ProductIndex base,
                               bool with_witnesses = true) {
  if (!d.contains(base)) throw InvalidInput("co_reachability: base state not in SCC");
  const std::size_t n = d.size();
  const ComponentTransitions trans(p, d);
  const std::size_t ns = p.chain().num_states();
  const std::size_t start = d.local(base);

  std::vector<std::size_t> parent(n * n, graph::kNone);
  std::vector<char> seen(n * n, 0);
  std::deque<std::size_t> queue;
  const std::size_t root = start * n + start;
  seen[root] = 1;
  queue.push_back(root);
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    const std::size_t i = v / n;
    const std::size_t j = v % n;
    for (ChainState t = 0; t < ns; ++t) {
      auto si = trans.successors(i, t);
      if (si.empty()) continue;
      auto sj = trans.successors(j, t);
      for (std::size_t a : si) {
        for (std::size_t b : sj) {
          const std::size_t w = a * n + b;
          if (!seen[w]) {
            seen[w] = 1;
            parent[w] = v;
            queue.push_back(w);
          }
        }
      }
    }
  }

  CoReach out;
  out.base = base;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t v = start * n + j;
    if (!seen[v]) continue;
    const ProductIndex e = d.member(j);
    out.members.push_back(e);
    if (!with_witnesses) continue;
    Word w;
    for (std::size_t u = v; u != root; u = parent[u]) w.push_back(p.chain_state(d.member(u / n)));
    std::reverse(w.begin(), w.end());
    out.witness.emplace(e, std::move(w));
  }
  return out;
}

struct CutIteration {
  ProductIndex chosen = 0;                             // e picked from (Co(d) \ {d}) ∩ Survives
  Word prefix;                                         // CoPath(d)(e) prepended to w
  std::vector<std::vector<ProductIndex>> survives;     // Survives after each backward step
  std::size_t fibre_size = 0;                          // |d ⟹ w| after the iteration
};

struct CutTrace {
  std::vector<ProductIndex> initial_survives;
  std::vector<CutIteration> iterations;
};

struct CutResult {
  Fibre cut;
  Word word;  // cut = d ⟹ word
  CoReach co;
  std::optional<CutTrace> trace;
};

/// Cut computation by repeated growth of d ⟹ w.
///
/// While some e ∈ Co(d) \ {d} still survives w (e ⟹ w non-empty), the
/// witness CoPath(d)(e) is prepended to w. Survives is maintained by walking
/// the prepended word backwards. Picks the smallest such e.
inline CutResult compute_cut(const ProductSystem& p, const Component& d, ProductIndex base,
                             bool record_trace = false) {
  CutResult out;
  out.co = co_reachability(p, d, base, true);
  const std::size_t n = d.size();
  const ComponentTransitions trans(p, d);
  const ChainState s = p.chain_state(base);
  const std::size_t nq = p.automaton().num_states();
  const std::size_t max_length = nq * nq * n;

  auto snapshot = [&](const std::vector<char>& alive) {
    std::vector<ProductIndex> v;
    for (std::size_t k = 0; k < n; ++k) {
      if (alive[k]) v.push_back(d.member(k));
    }
    return v;
  };

  std::vector<char> survives(n, 0);
  for (std::size_t k = 0; k < n; ++k) survives[k] = p.chain_state(d.member(k)) == s;
  if (record_trace) out.trace = CutTrace{snapshot(survives), {}};

  std::vector<char> next(n);
  std::size_t iterations = 0;
  std::size_t last_size = 1;
  for (;;) {
    std::optional<ProductIndex> chosen;
    for (ProductIndex e : out.co.members) {
      if (e != base && survives[d.local(e)]) {
        chosen = e;
        break;
      }
    }
    if (!chosen) break;
    if (++iterations > nq) {
      throw InvariantViolation("cut computation exceeded |Q| iterations; input is not an unambiguous automaton");
    }
    const Word& v = out.co.witness.at(*chosen);
    CutIteration it;
    it.chosen = *chosen;
    it.prefix = v;
    // v_0 = s, v_1..v_m = CoPath(d)(e); step i maps Survives over v_i to v_{i-1}.
    for (std::size_t i = v.size(); i >= 1; --i) {
      const ChainState from = i >= 2 ? v[i - 2] : s;
      const ChainState to = v[i - 1];
      std::fill(next.begin(), next.end(), 0);
      for (std::size_t k = 0; k < n; ++k) {
        if (p.chain_state(d.member(k)) != from) continue;
        for (std::size_t j : trans.successors(k, to)) {
          if (survives[j]) {
            next[k] = 1;
            break;
          }
        }
      }
      survives.swap(next);
      if (record_trace) it.survives.push_back(snapshot(survives));
    }
    out.word.insert(out.word.begin(), v.begin(), v.end());
    if (out.word.size() > max_length) {
      throw InvariantViolation("cut word exceeds |Q|^2 |D|");
    }
    if (record_trace) {
      auto grown = fibre_walk(p, d, singleton_fibre(p, base), out.word);
      it.fibre_size = grown ? grown->size() : 0;
      if (it.fibre_size <= last_size) {
        throw InvariantViolation("cut iteration did not enlarge d ⟹ w");
      }
      last_size = it.fibre_size;
      out.trace->iterations.push_back(std::move(it));
    }
  }
  auto cut = fibre_walk(p, d, singleton_fibre(p, base), out.word);
  if (!cut || cut->empty()) throw InvariantViolation("cut word is not enabled from d");
  out.cut = std::move(*cut);
  return out;
}

/// Characteristic vector of the cut over D's local order.
inline Eigen::VectorXd cut_normaliser(const ProductSystem& p, const Component& d, const Fibre& cut) {
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.size()));
  for (ProductIndex i : fibre_members(p, cut)) {
    if (!d.contains(i)) throw InvalidInput("cut_normaliser: fibre leaves the SCC");
    mu(static_cast<Eigen::Index>(d.local(i))) = 1.0;
  }
  return mu;
}

/// Exhaustive check that every fibre reachable from f by enabled steps is
/// non-empty. Exponential in |Q|; meant for small components.
inline bool is_cut(const ProductSystem& p, const Component& d, const Fibre& f) {
  if (f.empty()) return false;
  std::set<Fibre> seen{f};
  std::deque<Fibre> queue{f};
  while (!queue.empty()) {
    Fibre cur = std::move(queue.front());
    queue.pop_front();
    for (ChainState t : p.chain().successors(cur.anchor)) {
      auto next = fibre_step(p, d, cur, t);
      if (!next) continue;
      if (next->empty()) return false;
      if (seen.insert(*next).second) queue.push_back(std::move(*next));
    }
  }
  return true;
}

}  // namespace ubamc

#endif  // UBAMC_CUTFINDER_HPP
