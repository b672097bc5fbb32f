#ifndef UBAMC_AUTOMATON_HPP
#define UBAMC_AUTOMATON_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "ubamc/error.hpp"

namespace ubamc {

using StateIndex = std::size_t;
using LetterIndex = std::size_t;
using Word = std::vector<LetterIndex>;

/// Büchi automaton with states and letters identified by their declaration
/// index. Immutable once constructed.
///
/// `delta[q][a]` is the successor set of state q on letter a. Membership
/// queries r ∈ δ(q,a) go through a dense lookup table and take constant time.
class BuchiAutomaton {
public:
  using TransitionTable = std::vector<std::vector<std::vector<StateIndex>>>;

  BuchiAutomaton() = default;

  BuchiAutomaton(std::vector<std::string> states, std::vector<std::string> alphabet,
                 TransitionTable delta, std::vector<StateIndex> initial,
                 std::vector<StateIndex> accepting)
      : states_(std::move(states)),
        alphabet_(std::move(alphabet)),
        delta_(std::move(delta)),
        initial_(std::move(initial)) {
    const std::size_t nq = states_.size();
    const std::size_t ns = alphabet_.size();
    check_unique(states_, "state");
    check_unique(alphabet_, "letter");
    if (delta_.size() != nq) throw InvalidInput("transition table has wrong number of rows");
    for (auto& row : delta_) {
      if (row.size() != ns) throw InvalidInput("transition table has wrong number of letters");
      for (auto& targets : row) {
        for (StateIndex r : targets) {
          if (r >= nq) throw InvalidInput("transition target out of range");
        }
        std::sort(targets.begin(), targets.end());
        targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
      }
    }
    normalise_set(initial_, nq, "initial");
    accepting_mask_.assign(nq, false);
    initial_mask_.assign(nq, false);
    for (StateIndex q : initial_) initial_mask_[q] = true;
    normalise_set(accepting, nq, "accepting");
    for (StateIndex q : accepting) accepting_mask_[q] = true;

    lookup_.assign(nq * ns * nq, 0);
    for (StateIndex q = 0; q < nq; ++q) {
      for (LetterIndex a = 0; a < ns; ++a) {
        for (StateIndex r : delta_[q][a]) lookup_[(q * ns + a) * nq + r] = 1;
      }
    }
    for (std::size_t i = 0; i < nq; ++i) state_lookup_.emplace(states_[i], i);
    for (std::size_t i = 0; i < ns; ++i) letter_lookup_.emplace(alphabet_[i], i);
  }

  std::size_t num_states() const { return states_.size(); }
  std::size_t num_letters() const { return alphabet_.size(); }
  const std::vector<std::string>& state_names() const { return states_; }
  const std::vector<std::string>& alphabet() const { return alphabet_; }
  const std::string& state_name(StateIndex q) const { return states_.at(q); }
  const std::string& letter_name(LetterIndex a) const { return alphabet_.at(a); }

  std::span<const StateIndex> successors(StateIndex q, LetterIndex a) const {
    return delta_[q][a];
  }
  bool has_transition(StateIndex q, LetterIndex a, StateIndex r) const {
    return lookup_[(q * num_letters() + a) * num_states() + r] != 0;
  }
  const TransitionTable& transitions() const { return delta_; }

  std::span<const StateIndex> initial() const { return initial_; }
  bool is_initial(StateIndex q) const { return initial_mask_[q]; }
  bool is_accepting(StateIndex q) const { return accepting_mask_[q]; }
  std::vector<StateIndex> accepting() const {
    std::vector<StateIndex> out;
    for (StateIndex q = 0; q < num_states(); ++q) {
      if (accepting_mask_[q]) out.push_back(q);
    }
    return out;
  }

  /// |δ|: number of state pairs (q,r) joined by at least one letter.
  std::size_t transition_pair_count() const {
    std::size_t count = 0;
    std::vector<char> seen(num_states());
    for (StateIndex q = 0; q < num_states(); ++q) {
      std::fill(seen.begin(), seen.end(), 0);
      for (const auto& targets : delta_[q]) {
        for (StateIndex r : targets) {
          if (!seen[r]) {
            seen[r] = 1;
            ++count;
          }
        }
      }
    }
    return count;
  }

  bool has_outgoing(StateIndex q) const {
    return std::any_of(delta_[q].begin(), delta_[q].end(),
                       [](const auto& t) { return !t.empty(); });
  }

  bool is_deterministic() const {
    if (initial_.size() > 1) return false;
    for (const auto& row : delta_) {
      for (const auto& targets : row) {
        if (targets.size() > 1) return false;
      }
    }
    return true;
  }

  std::optional<StateIndex> find_state(std::string_view name) const {
    auto it = state_lookup_.find(std::string(name));
    if (it == state_lookup_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<LetterIndex> find_letter(std::string_view name) const {
    auto it = letter_lookup_.find(std::string(name));
    if (it == letter_lookup_.end()) return std::nullopt;
    return it->second;
  }

  /// Sub-automaton on the states with keep[q] set, in the original order.
  BuchiAutomaton restricted_to(const std::vector<bool>& keep) const {
    std::vector<StateIndex> remap(num_states(), num_states());
    std::vector<std::string> names;
    for (StateIndex q = 0; q < num_states(); ++q) {
      if (keep[q]) {
        remap[q] = names.size();
        names.push_back(states_[q]);
      }
    }
    TransitionTable delta(names.size(), std::vector<std::vector<StateIndex>>(num_letters()));
    std::vector<StateIndex> init;
    std::vector<StateIndex> acc;
    for (StateIndex q = 0; q < num_states(); ++q) {
      if (!keep[q]) continue;
      for (LetterIndex a = 0; a < num_letters(); ++a) {
        for (StateIndex r : delta_[q][a]) {
          if (keep[r]) delta[remap[q]][a].push_back(remap[r]);
        }
      }
      if (initial_mask_[q]) init.push_back(remap[q]);
      if (accepting_mask_[q]) acc.push_back(remap[q]);
    }
    return BuchiAutomaton(std::move(names), alphabet_, std::move(delta), std::move(init),
                          std::move(acc));
  }

  BuchiAutomaton with_accepting(std::vector<StateIndex> accepting) const {
    return BuchiAutomaton(states_, alphabet_, delta_, initial_, std::move(accepting));
  }

private:
  static void check_unique(const std::vector<std::string>& names, const char* what) {
    std::unordered_set<std::string> seen;
    for (const auto& n : names) {
      if (!seen.insert(n).second) {
        throw InvalidInput(std::string("duplicate ") + what + " '" + n + "'");
      }
    }
  }
  static void normalise_set(std::vector<StateIndex>& set, std::size_t nq, const char* what) {
    for (StateIndex q : set) {
      if (q >= nq) throw InvalidInput(std::string(what) + " state out of range");
    }
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
  }

  std::vector<std::string> states_;
  std::vector<std::string> alphabet_;
  TransitionTable delta_;
  std::vector<StateIndex> initial_;
  std::vector<bool> initial_mask_;
  std::vector<bool> accepting_mask_;
  std::vector<std::uint8_t> lookup_;
  std::unordered_map<std::string, StateIndex> state_lookup_;
  std::unordered_map<std::string, LetterIndex> letter_lookup_;
};

/// δ(source, word) under the usual extension to sets and words.
inline std::vector<StateIndex> delta_set(const BuchiAutomaton& a, std::span<const StateIndex> source,
                                         std::span<const LetterIndex> word) {
  std::vector<char> current(a.num_states(), 0);
  for (StateIndex q : source) {
    if (q >= a.num_states()) throw InvalidInput("delta_set: unknown state");
    current[q] = 1;
  }
  std::vector<char> next(a.num_states());
  for (LetterIndex letter : word) {
    if (letter >= a.num_letters()) throw InvalidInput("delta_set: unknown letter");
    std::fill(next.begin(), next.end(), 0);
    for (StateIndex q = 0; q < a.num_states(); ++q) {
      if (!current[q]) continue;
      for (StateIndex r : a.successors(q, letter)) next[r] = 1;
    }
    current.swap(next);
  }
  std::vector<StateIndex> out;
  for (StateIndex q = 0; q < a.num_states(); ++q) {
    if (current[q]) out.push_back(q);
  }
  return out;
}

/// Word given by letter names; unknown names raise InvalidInput.
inline Word parse_word(const BuchiAutomaton& a, const std::vector<std::string>& letters) {
  Word w;
  w.reserve(letters.size());
  for (const auto& l : letters) {
    auto idx = a.find_letter(l);
    if (!idx) throw InvalidInput("unknown letter '" + l + "'");
    w.push_back(*idx);
  }
  return w;
}

inline BuchiAutomaton automaton_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InvalidInput("automaton document must be a JSON object");
  auto string_list = [&](const char* key) {
    if (!doc.contains(key) || !doc.at(key).is_array()) {
      throw InvalidInput(std::string("automaton: missing array '") + key + "'");
    }
    std::vector<std::string> out;
    for (const auto& v : doc.at(key)) {
      if (!v.is_string()) throw InvalidInput(std::string("automaton: '") + key + "' must hold strings");
      out.push_back(v.get<std::string>());
    }
    return out;
  };
  std::vector<std::string> states = string_list("states");
  std::vector<std::string> alphabet = string_list("alphabet");
  std::unordered_map<std::string, StateIndex> sidx;
  std::unordered_map<std::string, LetterIndex> lidx;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (!sidx.emplace(states[i], i).second) throw InvalidInput("duplicate state '" + states[i] + "'");
  }
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    if (!lidx.emplace(alphabet[i], i).second) throw InvalidInput("duplicate letter '" + alphabet[i] + "'");
  }
  auto state_of = [&](const std::string& n) {
    auto it = sidx.find(n);
    if (it == sidx.end()) throw InvalidInput("undeclared state '" + n + "'");
    return it->second;
  };
  auto states_of = [&](const std::vector<std::string>& names) {
    std::vector<StateIndex> out;
    for (const auto& n : names) out.push_back(state_of(n));
    return out;
  };

  std::vector<StateIndex> initial = states_of(string_list("initial"));
  if (initial.empty()) throw InvalidInput("automaton: empty initial set");
  std::vector<StateIndex> accepting = states_of(string_list("accepting"));

  BuchiAutomaton::TransitionTable delta(states.size(),
                                        std::vector<std::vector<StateIndex>>(alphabet.size()));
  std::vector<std::vector<char>> defined(states.size(), std::vector<char>(alphabet.size(), 0));
  if (doc.contains("transitions")) {
    if (!doc.at("transitions").is_array()) throw InvalidInput("automaton: 'transitions' must be an array");
    for (const auto& t : doc.at("transitions")) {
      if (!t.is_object() || !t.contains("from") || !t.contains("label") || !t.contains("to") ||
          !t.at("from").is_string() || !t.at("label").is_string() || !t.at("to").is_array()) {
        throw InvalidInput("automaton: malformed transition entry");
      }
      const StateIndex q = state_of(t.at("from").get<std::string>());
      const std::string label = t.at("label").get<std::string>();
      auto lit = lidx.find(label);
      if (lit == lidx.end()) throw InvalidInput("undeclared letter '" + label + "'");
      if (defined[q][lit->second]) {
        throw InvalidInput("duplicate transition entry for (" + states[q] + ", " + label + ")");
      }
      defined[q][lit->second] = 1;
      for (const auto& r : t.at("to")) {
        if (!r.is_string()) throw InvalidInput("automaton: transition targets must be strings");
        delta[q][lit->second].push_back(state_of(r.get<std::string>()));
      }
    }
  }
  return BuchiAutomaton(std::move(states), std::move(alphabet), std::move(delta), std::move(initial),
                        std::move(accepting));
}

/// Parses the automaton JSON document. Does not normalise.
inline BuchiAutomaton parse_automaton(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("malformed automaton JSON: ") + e.what());
  }
  return automaton_from_json(doc);
}

inline nlohmann::json automaton_to_json(const BuchiAutomaton& a) {
  nlohmann::json doc;
  doc["states"] = a.state_names();
  doc["alphabet"] = a.alphabet();
  std::vector<std::string> init;
  for (StateIndex q : a.initial()) init.push_back(a.state_name(q));
  std::vector<std::string> acc;
  for (StateIndex q : a.accepting()) acc.push_back(a.state_name(q));
  doc["initial"] = init;
  doc["accepting"] = acc;
  nlohmann::json trans = nlohmann::json::array();
  for (StateIndex q = 0; q < a.num_states(); ++q) {
    for (LetterIndex l = 0; l < a.num_letters(); ++l) {
      auto succ = a.successors(q, l);
      if (succ.empty()) continue;
      std::vector<std::string> to;
      for (StateIndex r : succ) to.push_back(a.state_name(r));
      trans.push_back({{"from", a.state_name(q)}, {"label", a.letter_name(l)}, {"to", to}});
    }
  }
  doc["transitions"] = trans;
  return doc;
}

}  // namespace ubamc

#endif  // UBAMC_AUTOMATON_HPP
