#ifndef UBAMC_NORMALISE_HPP
#define UBAMC_NORMALISE_HPP

#include <algorithm>
#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ubamc/automaton.hpp"
#include "ubamc/graph.hpp"

namespace ubamc {

/// Drops every state not reachable from an initial state.
inline BuchiAutomaton remove_unreachable(const BuchiAutomaton& a) {
  std::vector<bool> seen(a.num_states(), false);
  std::deque<StateIndex> queue;
  for (StateIndex q : a.initial()) {
    seen[q] = true;
    queue.push_back(q);
  }
  while (!queue.empty()) {
    const StateIndex q = queue.front();
    queue.pop_front();
    for (LetterIndex l = 0; l < a.num_letters(); ++l) {
      for (StateIndex r : a.successors(q, l)) {
        if (!seen[r]) {
          seen[r] = true;
          queue.push_back(r);
        }
      }
    }
  }
  return a.restricted_to(seen);
}

/// Repeatedly drops non-initial states without outgoing transitions.
/// Their language is empty, so nothing observable changes.
inline BuchiAutomaton remove_dead_ends(const BuchiAutomaton& a) {
  std::vector<bool> keep(a.num_states(), true);
  bool changed = true;
  while (changed) {
    changed = false;
    for (StateIndex q = 0; q < a.num_states(); ++q) {
      if (!keep[q] || a.is_initial(q)) continue;
      bool alive = false;
      for (LetterIndex l = 0; l < a.num_letters() && !alive; ++l) {
        for (StateIndex r : a.successors(q, l)) {
          if (keep[r]) {
            alive = true;
            break;
          }
        }
      }
      if (!alive) {
        keep[q] = false;
        changed = true;
      }
    }
  }
  return a.restricted_to(keep);
}

namespace detail {

// Breadth-first search over A x A started from the diagonal initial pairs.
// Returns the first state t hit by an edge (s,s') -> (t,t) with s != s'.
inline std::optional<StateIndex> find_diamond_target(const BuchiAutomaton& a) {
  const std::size_t n = a.num_states();
  std::vector<char> seen(n * n, 0);
  std::deque<std::pair<StateIndex, StateIndex>> queue;
  for (StateIndex q : a.initial()) {
    seen[q * n + q] = 1;
    queue.emplace_back(q, q);
  }
  while (!queue.empty()) {
    const auto [s, s2] = queue.front();
    queue.pop_front();
    for (LetterIndex l = 0; l < a.num_letters(); ++l) {
      for (StateIndex t : a.successors(s, l)) {
        for (StateIndex t2 : a.successors(s2, l)) {
          if (s != s2 && t == t2) return t;
          if (!seen[t * n + t2]) {
            seen[t * n + t2] = 1;
            queue.emplace_back(t, t2);
          }
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Removes diamonds from an unambiguous automaton whose states are all
/// reachable. The target of a diamond has empty language, so deleting it
/// preserves the language; the search restarts after every deletion.
///
/// On ambiguous input states may be deleted spuriously, so callers run
/// verify_unambiguous first.
inline BuchiAutomaton remove_diamonds(const BuchiAutomaton& a) {
  BuchiAutomaton current = a;
  while (auto target = detail::find_diamond_target(current)) {
    std::vector<bool> keep(current.num_states(), true);
    keep[*target] = false;
    current = current.restricted_to(keep);
  }
  return current;
}

/// Unreachable-state removal, diamond removal, then trimming of dead ends.
inline BuchiAutomaton normalise(const BuchiAutomaton& a) {
  BuchiAutomaton out = remove_diamonds(remove_unreachable(a));
  return remove_unreachable(remove_dead_ends(out));
}

struct AmbiguityWitness {
  Word prefix;  // word leading from an initial pair to `pair`
  std::pair<StateIndex, StateIndex> pair;
};

struct UnambiguityVerdict {
  bool unambiguous = true;
  std::optional<AmbiguityWitness> witness;
};

/// Decides whether some infinite word has two distinct accepting runs.
///
/// Searches A x A extended with a "diverged" bit that is set once the two
/// runs differ. The automaton is ambiguous iff a diverged product state lies
/// on a cycle through both an F-state of the first run and an F-state of
/// the second run, i.e. inside a non-trivial SCC containing both.
inline UnambiguityVerdict verify_unambiguous(const BuchiAutomaton& a) {
  const std::size_t n = a.num_states();
  const std::size_t total = 2 * n * n;
  auto encode = [n](StateIndex p, StateIndex p2, bool diverged) {
    return (static_cast<std::size_t>(diverged) * n + p) * n + p2;
  };
  auto decode = [n](std::size_t v) {
    const bool diverged = v >= n * n;
    const std::size_t rest = v % (n * n);
    return std::tuple<StateIndex, StateIndex, bool>{rest / n, rest % n, diverged};
  };

  // Forward exploration with parent pointers for the witness.
  std::vector<std::size_t> parent(total, graph::kNone);
  std::vector<LetterIndex> parent_letter(total, 0);
  std::vector<char> reached(total, 0);
  std::deque<std::size_t> queue;
  for (StateIndex p : a.initial()) {
    for (StateIndex p2 : a.initial()) {
      const std::size_t v = encode(p, p2, p != p2);
      if (!reached[v]) {
        reached[v] = 1;
        queue.push_back(v);
      }
    }
  }
  std::vector<std::vector<std::size_t>> succ(total);
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    const auto [p, p2, diverged] = decode(v);
    for (LetterIndex l = 0; l < a.num_letters(); ++l) {
      for (StateIndex r : a.successors(p, l)) {
        for (StateIndex r2 : a.successors(p2, l)) {
          const std::size_t w = encode(r, r2, diverged || r != r2);
          succ[v].push_back(w);
          if (!reached[w]) {
            reached[w] = 1;
            parent[w] = v;
            parent_letter[w] = l;
            queue.push_back(w);
          }
        }
      }
    }
  }

  auto scc = graph::tarjan_scc(total, [&](std::size_t v) {
    return std::span<const std::size_t>(succ[v]);
  });

  for (const auto& comp : scc.components) {
    const auto [p0, q0, diverged0] = decode(comp.front());
    if (!diverged0 || !reached[comp.front()]) continue;
    bool nontrivial = comp.size() > 1;
    if (!nontrivial) {
      for (std::size_t w : succ[comp.front()]) nontrivial = nontrivial || w == comp.front();
    }
    if (!nontrivial) continue;
    bool first_accepts = false;
    bool second_accepts = false;
    for (std::size_t v : comp) {
      const auto [p, p2, d] = decode(v);
      first_accepts = first_accepts || a.is_accepting(p);
      second_accepts = second_accepts || a.is_accepting(p2);
    }
    if (!(first_accepts && second_accepts)) continue;

    std::size_t target = comp.front();
    for (std::size_t v : comp) {
      const auto [p, p2, d] = decode(v);
      if (p != p2) {
        target = v;
        break;
      }
    }
    AmbiguityWitness witness;
    for (std::size_t v = target; parent[v] != graph::kNone; v = parent[v]) {
      witness.prefix.push_back(parent_letter[v]);
    }
    std::reverse(witness.prefix.begin(), witness.prefix.end());
    const auto [p, p2, d] = decode(target);
    witness.pair = {p, p2};
    return UnambiguityVerdict{false, std::move(witness)};
  }
  return UnambiguityVerdict{true, std::nullopt};
}

}  // namespace ubamc

#endif  // UBAMC_NORMALISE_HPP
