#ifndef UBAMC_TESTS_FIXTURES_HPP
#define UBAMC_TESTS_FIXTURES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ubamc/ubamc.hpp"

namespace fixtures {

// Four-state automaton over {a,b}: q0 <-a-> q1, q1 -b-> {q1,q3}, q2 -b-> {q0,q2},
// q2 <-a-> q3. Initial and accepting: q0.
inline ubamc::BuchiAutomaton running_automaton() {
  ubamc::BuchiAutomaton::TransitionTable d(4, std::vector<std::vector<ubamc::StateIndex>>(2));
  d[0][0] = {1};
  d[1][0] = {0};
  d[1][1] = {1, 3};
  d[2][1] = {0, 2};
  d[2][0] = {3};
  d[3][0] = {2};
  return ubamc::BuchiAutomaton({"q0", "q1", "q2", "q3"}, {"a", "b"}, d, {0}, {0});
}

inline ubamc::ChainModel fair_coin() {
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(2, 2, 0.5);
  return {ubamc::MarkovChain({"a", "b"}, m), ubamc::InitialDistribution::uniform(2)};
}

inline std::string data_path(const std::string& name) { return std::string(UBAMC_DATA_DIR) + "/" + name; }

// z_<q,s> = 1 iff <q,s> is in a set; convenient for hand-derived vectors.
inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Whether A accepts u v^omega, by search over (state, position) pairs of the
// lasso: an accepting state in the loop part that lies on a cycle.
inline bool lasso_accepted(const ubamc::BuchiAutomaton& a, const ubamc::Word& u, const ubamc::Word& v) {
  const std::size_t len = u.size() + v.size();
  const std::size_t nq = a.num_states();
  auto letter = [&](std::size_t i) { return i < u.size() ? u[i] : v[i - u.size()]; };
  auto next = [&](std::size_t i) { return i + 1 < len ? i + 1 : u.size(); };
  auto successors = [&](std::size_t node) {
    std::vector<std::size_t> out;
    const std::size_t q = node / len;
    const std::size_t i = node % len;
    for (auto r : a.successors(q, letter(i))) out.push_back(r * len + next(i));
    return out;
  };
  auto reach = [&](std::vector<std::size_t> from) {
    std::vector<char> seen(nq * len, 0);
    while (!from.empty()) {
      const std::size_t x = from.back();
      from.pop_back();
      for (std::size_t y : successors(x)) {
        if (!seen[y]) {
          seen[y] = 1;
          from.push_back(y);
        }
      }
    }
    return seen;
  };
  std::vector<std::size_t> starts;
  for (auto q : a.initial()) starts.push_back(q * len);
  auto reachable = reach(starts);
  for (auto q : a.initial()) reachable[q * len] = 1;
  for (std::size_t node = 0; node < nq * len; ++node) {
    if (!reachable[node] || node % len < u.size() || !a.is_accepting(node / len)) continue;
    if (reach({node})[node]) return true;
  }
  return false;
}

// Number of runs of A from q on a finite word, per end state.
inline std::vector<std::size_t> run_counts(const ubamc::BuchiAutomaton& a, ubamc::StateIndex q,
                                           const ubamc::Word& w) {
  std::vector<std::size_t> cur(a.num_states(), 0);
  cur[q] = 1;
  for (auto l : w) {
    std::vector<std::size_t> nxt(a.num_states(), 0);
    for (ubamc::StateIndex p = 0; p < a.num_states(); ++p) {
      for (auto r : a.successors(p, l)) nxt[r] += cur[p];
    }
    cur.swap(nxt);
  }
  return cur;
}

// All words over k letters of length exactly n.
inline std::vector<ubamc::Word> all_words(std::size_t k, std::size_t n) {
  std::vector<ubamc::Word> out{{}};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<ubamc::Word> grown;
    for (const auto& w : out) {
      for (std::size_t l = 0; l < k; ++l) {
        auto x = w;
        x.push_back(l);
        grown.push_back(std::move(x));
      }
    }
    out.swap(grown);
  }
  return out;
}

// A fixed batch of random UBAs used by several property tests.
inline std::vector<ubamc::BuchiAutomaton> random_ubas(std::size_t count, std::uint64_t seed0,
                                                      std::size_t max_states = 6, std::size_t letters = 2) {
  std::vector<ubamc::BuchiAutomaton> out;
  for (std::uint64_t seed = seed0; out.size() < count; ++seed) {
    ubamc::harness::RandomUbaOptions o;
    o.states = 2 + seed % (max_states - 1);
    o.letters = letters;
    o.density = 0.2 + 0.05 * static_cast<double>(seed % 4);
    if (seed % 2 == 1) {
      o.reverse_deterministic = true;
      o.density = 1.0;
      o.accepting_fraction = 0.2;
    }
    auto r = ubamc::harness::generate_random_uba(seed, o);
    if (r.automaton) out.push_back(std::move(*r.automaton));
  }
  return out;
}

}  // namespace fixtures

#endif
