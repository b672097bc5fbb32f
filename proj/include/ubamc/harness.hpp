#ifndef UBAMC_HARNESS_HPP
#define UBAMC_HARNESS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "ubamc/automaton.hpp"
#include "ubamc/config.hpp"
#include "ubamc/error.hpp"
#include "ubamc/markov.hpp"
#include "ubamc/normalise.hpp"
#include "ubamc/product.hpp"
#include "ubamc/solver.hpp"

namespace ubamc::harness {

inline std::vector<std::string> letter_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(n <= 26 ? std::string(1, static_cast<char>('a' + i)) : "l" + std::to_string(i));
  }
  return out;
}

inline std::vector<std::string> state_names(std::size_t n, const std::string& prefix = "q") {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

/// Strongly connected UBA over {a,b} with a quadratic number of transitions.
///
/// T1 is a complete binary tree of depth n whose inner nodes branch on a
/// (left) and b (right). T2 is a second copy with every edge reversed. Every
/// leaf of T1 moves to every leaf of T2 on both letters; T2's root loops on
/// a and returns to T1's root on b. T1's root is initial, T2's root accepting.
///
/// With `literal` set the reversed T2 edges carry both letters. That variant
/// is ambiguous for every n (two leaves of one parent reach it on the same
/// word), so the default keeps the original letter on each reversed edge.
inline BuchiAutomaton generate_quadratic_family(std::size_t n, bool literal = false) {
  if (n < 1) throw InvalidInput("quadratic family needs depth n >= 1");
  if (n > 20) throw InvalidInput("quadratic family depth too large");
  const std::size_t tree = (std::size_t{1} << (n + 1)) - 1;  // heap-indexed, root 0
  const std::size_t first_leaf = (std::size_t{1} << n) - 1;
  const std::size_t nq = 2 * tree;
  auto t1 = [](std::size_t i) { return i; };
  auto t2 = [tree](std::size_t i) { return tree + i; };

  std::vector<std::string> names;
  for (std::size_t i = 0; i < tree; ++i) names.push_back("u" + std::to_string(i));
  for (std::size_t i = 0; i < tree; ++i) names.push_back("v" + std::to_string(i));

  BuchiAutomaton::TransitionTable delta(nq, std::vector<std::vector<StateIndex>>(2));
  constexpr LetterIndex a = 0;
  constexpr LetterIndex b = 1;
  for (std::size_t i = 0; i < first_leaf; ++i) {
    const std::size_t left = 2 * i + 1;
    const std::size_t right = 2 * i + 2;
    delta[t1(i)][a].push_back(t1(left));
    delta[t1(i)][b].push_back(t1(right));
    if (literal) {
      for (LetterIndex l : {a, b}) {
        delta[t2(left)][l].push_back(t2(i));
        delta[t2(right)][l].push_back(t2(i));
      }
    } else {
      delta[t2(left)][a].push_back(t2(i));
      delta[t2(right)][b].push_back(t2(i));
    }
  }
  for (std::size_t i = first_leaf; i < tree; ++i) {
    for (std::size_t j = first_leaf; j < tree; ++j) {
      delta[t1(i)][a].push_back(t2(j));
      delta[t1(i)][b].push_back(t2(j));
    }
  }
  delta[t2(0)][a].push_back(t2(0));
  delta[t2(0)][b].push_back(t1(0));
  return BuchiAutomaton(std::move(names), {"a", "b"}, std::move(delta), {t1(0)}, {t2(0)});
}

/// Uniform chain whose states are the automaton's letters, plus uniform ι.
inline ChainModel uniform_chain(const std::vector<std::string>& letters) {
  const auto n = static_cast<Eigen::Index>(letters.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  return ChainModel{MarkovChain(letters, m), InitialDistribution::uniform(letters.size())};
}

/// Random chain with `letters` as states. Each row keeps every entry with
/// probability `density` (at least one) and draws weights uniformly.
inline ChainModel random_chain(std::uint64_t seed, const std::vector<std::string>& letters, double density = 0.6) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = letters.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<double> w(n, 0.0);
    bool any = false;
    for (std::size_t t = 0; t < n; ++t) {
      if (unit(rng) < density) {
        w[t] = 0.1 + unit(rng);
        any = true;
      }
    }
    if (!any) w[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)] = 1.0;
    double sum = 0.0;
    for (double x : w) sum += x;
    for (std::size_t t = 0; t < n; ++t) m(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = w[t] / sum;
  }
  std::vector<double> init(n);
  double sum = 0.0;
  for (double& x : init) sum += (x = 0.1 + unit(rng));
  for (double& x : init) x /= sum;
  return ChainModel{MarkovChain(letters, m), InitialDistribution(init)};
}

struct RandomUbaOptions {
  std::size_t states = 5;
  std::size_t letters = 2;
  double density = 0.25;            // probability of each (q, a, q') triple
  double accepting_fraction = 0.3;  // at least one state is made accepting
  bool backbone_cycle = false;      // add q_i --a--> q_{i+1 mod n}
  // Instead, give each (target, letter) one random source with probability
  // `density`: at most one predecessor per letter, so runs never merge.
  bool reverse_deterministic = false;
  std::size_t max_attempts = 10000;
};

struct RandomUbaResult {
  std::optional<BuchiAutomaton> automaton;
  std::size_t attempts = 0;
};

namespace detail {

inline BuchiAutomaton random_automaton(std::mt19937_64& rng, const RandomUbaOptions& o) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  BuchiAutomaton::TransitionTable delta(o.states, std::vector<std::vector<StateIndex>>(o.letters));
  std::uniform_int_distribution<StateIndex> pick(0, o.states - 1);
  for (StateIndex q = 0; q < o.states; ++q) {
    for (LetterIndex l = 0; l < o.letters; ++l) {
      if (o.reverse_deterministic) {
        if (unit(rng) < o.density) delta[pick(rng)][l].push_back(q);
        continue;
      }
      for (StateIndex r = 0; r < o.states; ++r) {
        if (unit(rng) < o.density) delta[q][l].push_back(r);
      }
    }
    if (o.backbone_cycle) delta[q][0].push_back((q + 1) % o.states);
  }
  std::vector<StateIndex> accepting;
  for (StateIndex q = 0; q < o.states; ++q) {
    if (unit(rng) < o.accepting_fraction) accepting.push_back(q);
  }
  if (accepting.empty()) accepting.push_back(std::uniform_int_distribution<StateIndex>(0, o.states - 1)(rng));
  return BuchiAutomaton(state_names(o.states), letter_names(o.letters), std::move(delta), {0}, std::move(accepting));
}

inline bool has_accepting_recurrent_scc(const BuchiAutomaton& a) {
  const BuchiAutomaton n = normalise(a);
  if (n.num_states() == 0) return false;
  const ChainModel uniform = uniform_chain(n.alphabet());
  const PreparedModel m = prepare_model(n, uniform.chain);
  for (const auto& rc : m.recurrent_components) {
    if (rc.accepting) return true;
  }
  return false;
}

}  // namespace detail

/// Rejection sampling of UBAs: a random automaton is kept iff it is
/// unambiguous and its product with the uniform chain has an accepting
/// recurrent SCC. Gives up (empty result) after `max_attempts` rejections.
inline RandomUbaResult generate_random_uba(std::uint64_t seed, const RandomUbaOptions& o) {
  if (o.states == 0 || o.letters == 0) throw InvalidInput("random UBA needs states and letters");
  std::mt19937_64 rng(seed);
  RandomUbaResult out;
  while (out.attempts < o.max_attempts) {
    ++out.attempts;
    BuchiAutomaton a = detail::random_automaton(rng, o);
    if (!verify_unambiguous(a).unambiguous) continue;
    if (!detail::has_accepting_recurrent_scc(a)) continue;
    out.automaton = std::move(a);
    return out;
  }
  return out;
}

inline RandomUbaResult generate_random_uba(std::uint64_t seed, std::size_t states, std::size_t letters,
                                           double density) {
  RandomUbaOptions o;
  o.states = states;
  o.letters = letters;
  o.density = density;
  return generate_random_uba(seed, o);
}

/// Random deterministic automaton: each (q, a) has one uniformly chosen
/// successor with probability `defined`, none otherwise. State 0 is initial.
inline BuchiAutomaton generate_random_deterministic(std::uint64_t seed, std::size_t states, std::size_t letters,
                                                    double defined = 0.85, double accepting_fraction = 0.3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<StateIndex> pick(0, states - 1);
  BuchiAutomaton::TransitionTable delta(states, std::vector<std::vector<StateIndex>>(letters));
  for (auto& row : delta) {
    for (auto& targets : row) {
      if (unit(rng) < defined) targets.push_back(pick(rng));
    }
  }
  std::vector<StateIndex> accepting;
  for (StateIndex q = 0; q < states; ++q) {
    if (unit(rng) < accepting_fraction) accepting.push_back(q);
  }
  return BuchiAutomaton(state_names(states), letter_names(letters), std::move(delta), {0}, std::move(accepting));
}

/// Classical algorithm for deterministic automata.
///
/// The product of A and M is itself a Markov chain (with a rejecting sink for
/// undefined transitions). Its bottom SCCs that contain an accepting
/// automaton state are winning; the answer is the probability of reaching a
/// winning bottom SCC.
inline double deterministic_oracle(const BuchiAutomaton& a, const MarkovChain& m, const InitialDistribution& iota) {
  if (!a.is_deterministic()) throw InvalidInput("deterministic_oracle: automaton is not deterministic");
  if (a.alphabet() != m.state_names()) throw InvalidInput("deterministic_oracle: alphabet/chain mismatch");
  if (a.initial().size() > 1) throw InvalidInput("deterministic_oracle: more than one initial state");
  if (a.initial().empty() || a.num_states() == 0) return 0.0;
  const std::size_t ns = m.num_states();
  const std::size_t sink = a.num_states() * ns;
  const std::size_t n = sink + 1;
  // Vertex (q, s): the chain is in s and the automaton, in q, is about to read s.
  std::vector<std::vector<std::pair<std::size_t, double>>> edges(n);
  for (StateIndex q = 0; q < a.num_states(); ++q) {
    for (ChainState s = 0; s < ns; ++s) {
      auto next = a.successors(q, s);
      for (ChainState t : m.successors(s)) {
        const std::size_t target = next.empty() ? sink : next[0] * ns + t;
        edges[q * ns + s].emplace_back(target, m.probability(s, t));
      }
    }
  }
  edges[sink].emplace_back(sink, 1.0);

  // Kosaraju: finishing order on G, then components on the reverse graph.
  std::vector<std::vector<std::size_t>> reverse(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (const auto& [w, p] : edges[v]) reverse[w].push_back(v);
  }
  std::vector<char> visited(n, 0);
  std::vector<std::size_t> order;
  for (std::size_t root = 0; root < n; ++root) {
    if (visited[root]) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    visited[root] = 1;
    while (!stack.empty()) {
      auto& [v, k] = stack.back();
      if (k < edges[v].size()) {
        const std::size_t w = edges[v][k++].first;
        if (!visited[w]) {
          visited[w] = 1;
          stack.emplace_back(w, 0);
        }
      } else {
        order.push_back(v);
        stack.pop_back();
      }
    }
  }
  std::vector<std::size_t> comp(n, graph::kNone);
  std::size_t count = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] != graph::kNone) continue;
    std::vector<std::size_t> stack{*it};
    comp[*it] = count;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t w : reverse[v]) {
        if (comp[w] == graph::kNone) {
          comp[w] = count;
          stack.push_back(w);
        }
      }
    }
    ++count;
  }
  std::vector<char> bottom(count, 1);
  std::vector<char> winning(count, 0);
  for (std::size_t v = 0; v < n; ++v) {
    for (const auto& [w, p] : edges[v]) {
      if (comp[w] != comp[v]) bottom[comp[v]] = 0;
    }
    if (v != sink && a.is_accepting(v / ns)) winning[comp[v]] = 1;
  }

  // x = P x on transient vertices, 1 on winning bottom SCCs, 0 elsewhere.
  std::vector<std::size_t> position(n, graph::kNone);
  std::vector<std::size_t> transient;
  for (std::size_t v = 0; v < n; ++v) {
    if (!bottom[comp[v]]) {
      position[v] = transient.size();
      transient.push_back(v);
    }
  }
  const auto t = static_cast<Eigen::Index>(transient.size());
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(t, t);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(t);
  for (Eigen::Index r = 0; r < t; ++r) {
    for (const auto& [w, p] : edges[transient[static_cast<std::size_t>(r)]]) {
      if (position[w] != graph::kNone) {
        lhs(r, static_cast<Eigen::Index>(position[w])) -= p;
      } else if (winning[comp[w]]) {
        rhs(r) += p;
      }
    }
  }
  const Eigen::VectorXd x = t > 0 ? Eigen::VectorXd(lhs.partialPivLu().solve(rhs)) : Eigen::VectorXd();
  auto value = [&](std::size_t v) {
    if (position[v] != graph::kNone) return x(static_cast<Eigen::Index>(position[v]));
    return winning[comp[v]] ? 1.0 : 0.0;
  };
  double prob = 0.0;
  const StateIndex q0 = a.initial()[0];
  for (ChainState s = 0; s < ns; ++s) prob += iota[s] * value(q0 * ns + s);
  return prob;
}

struct MonteCarloEstimate {
  double estimate = 0.0;
  double half_width = 0.0;  // 3 sigma
  std::size_t accepted = 0;
  std::size_t samples = 0;
};

/// Statistical approximation of the acceptance probability.
///
/// Samples N trajectories of length L. A trajectory counts as accepted when
/// some run of A on it survives all L steps and visits F at least K times;
/// the best visit count per state is tracked by dynamic programming. The
/// estimate converges to the true probability as L and K grow.
///
/// Samples are split into fixed chunks with their own seeded generators, so
/// the result does not depend on the number of worker threads.
inline MonteCarloEstimate monte_carlo_estimate(const BuchiAutomaton& a, const MarkovChain& m,
                                               const InitialDistribution& iota, std::size_t length,
                                               std::size_t visits, std::size_t samples, std::uint64_t seed,
                                               std::size_t threads = 0) {
  if (length == 0 || visits == 0 || samples == 0) throw InvalidInput("monte carlo parameters must be positive");
  if (a.alphabet() != m.state_names()) throw InvalidInput("automaton alphabet does not match the chain state list");
  const std::size_t nq = a.num_states();
  const std::size_t ns = m.num_states();
  MonteCarloEstimate out;
  out.samples = samples;
  if (a.accepting().empty() || nq == 0) return out;

  std::vector<std::discrete_distribution<ChainState>> rows;
  for (ChainState s = 0; s < ns; ++s) {
    std::vector<double> w(ns);
    for (ChainState t = 0; t < ns; ++t) w[t] = m.probability(s, t);
    rows.emplace_back(w.begin(), w.end());
  }
  const std::discrete_distribution<ChainState> start(iota.weights().begin(), iota.weights().end());

  constexpr std::size_t kChunks = 16;
  std::vector<std::size_t> accepted(kChunks, 0);
  auto work = [&](std::size_t chunk) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + chunk);
    auto start_dist = start;
    auto row_dist = rows;
    const std::size_t begin = samples * chunk / kChunks;
    const std::size_t end = samples * (chunk + 1) / kChunks;
    std::vector<long> best(nq);
    std::vector<long> next(nq);
    const long cap = static_cast<long>(visits);
    for (std::size_t k = begin; k < end; ++k) {
      std::fill(best.begin(), best.end(), -1);
      for (StateIndex q : a.initial()) best[q] = 0;
      ChainState s = start_dist(rng);
      bool alive = true;
      for (std::size_t step = 0; step < length && alive; ++step) {
        std::fill(next.begin(), next.end(), -1);
        alive = false;
        for (StateIndex q = 0; q < nq; ++q) {
          if (best[q] < 0) continue;
          for (StateIndex r : a.successors(q, s)) {
            const long c = std::min(cap, best[q] + (a.is_accepting(r) ? 1 : 0));
            if (c > next[r]) next[r] = c;
            alive = true;
          }
        }
        best.swap(next);
        s = row_dist[s](rng);
      }
      if (alive && *std::max_element(best.begin(), best.end()) >= cap) ++accepted[chunk];
    }
  };

  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(kChunks, threads ? threads : std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t chunk = w; chunk < kChunks; chunk += workers) work(chunk);
    });
  }
  for (auto& t : pool) t.join();

  for (std::size_t c : accepted) out.accepted += c;
  const double n = static_cast<double>(samples);
  out.estimate = static_cast<double>(out.accepted) / n;
  out.half_width = 3.0 * std::sqrt(out.estimate * (1.0 - out.estimate) / n);
  return out;
}

struct BenchInstance {
  std::string id;
  std::size_t n = 0;  // family parameter, 0 when not applicable
  BuchiAutomaton automaton;
  ChainModel model;
};

struct BenchRow {
  std::string instance_id;
  std::size_t n = 0;
  std::size_t states = 0;       // |Q|
  std::size_t transitions = 0;  // |δ|
  std::size_t chain_states = 0; // |S|
  std::size_t chain_edges = 0;  // |E|
  Method method = Method::Pseudo;
  double normaliser_ms = 0.0;
  double total_ms = 0.0;
  double agreement_delta = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
};

struct BenchOptions {
  std::size_t repeats = 5;          // median of this many samples
  double min_sample_ms = 20.0;      // each sample loops until this much time has passed
};

inline std::vector<BenchInstance> quadratic_instances(std::size_t n_min, std::size_t n_max) {
  std::vector<BenchInstance> out;
  for (std::size_t n = n_min; n <= n_max; ++n) {
    BuchiAutomaton a = generate_quadratic_family(n);
    ChainModel model = uniform_chain(a.alphabet());
    out.push_back(BenchInstance{"quadratic-" + std::to_string(n), n, std::move(a), std::move(model)});
  }
  return out;
}

namespace detail {

// Median over `repeats` samples of the mean time of `fn`, where each sample
// runs `fn` as often as needed to last `min_ms`.
inline double median_time_ms(const std::function<void()>& fn, const BenchOptions& o) {
  fn();  // warmup
  std::vector<double> samples;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, o.repeats); ++r) {
    ubamc::detail::Stopwatch clock;
    std::size_t calls = 0;
    do {
      fn();
      ++calls;
    } while (clock.elapsed_ms() < o.min_sample_ms);
    samples.push_back(clock.elapsed_ms() / static_cast<double>(calls));
  }
  std::sort(samples.begin(), samples.end());
  return samples[samples.size() / 2];
}

}  // namespace detail

/// Times the normaliser stage and the full pipeline per method. The shared
/// stages (normalisation, product, SCCs, eigenvectors) are prepared once
/// and excluded from `normaliser_ms`.
inline BenchReport benchmark(std::span<const Method> methods, std::span<const BenchInstance> instances,
                             const BenchOptions& options = {}, const Tolerances& tol = {}) {
  BenchReport report;
  std::vector<Method> expanded;
  for (Method m : methods) {
    if (m == Method::Both) {
      expanded.push_back(Method::Cut);
      expanded.push_back(Method::Pseudo);
    } else {
      expanded.push_back(m);
    }
  }
  for (const auto& inst : instances) {
    const ChainModel& cm = inst.model;
    const ModelCheckResult by_cut = model_check(inst.automaton, cm.chain, cm.initial, Method::Cut, tol);
    const ModelCheckResult by_pseudo = model_check(inst.automaton, cm.chain, cm.initial, Method::Pseudo, tol);
    const double agreement = numerics::inf_norm(by_cut.z - by_pseudo.z);
    if (agreement > tol.agreement) {
      std::ostringstream msg;
      msg << inst.id << ": cut and pseudo-cut solutions differ by " << agreement;
      throw NumericalFailure(msg.str());
    }
    const PreparedModel prepared = prepare_model(normalise(inst.automaton), cm.chain, tol);
    for (Method m : expanded) {
      BenchRow row;
      row.instance_id = inst.id;
      row.n = inst.n;
      row.states = inst.automaton.num_states();
      row.transitions = inst.automaton.transition_pair_count();
      row.chain_states = cm.chain.num_states();
      row.chain_edges = cm.chain.num_edges();
      row.method = m;
      row.agreement_delta = agreement;
      row.normaliser_ms = detail::median_time_ms(
          [&] {
            for (const auto& rc : prepared.recurrent_components) {
              if (rc.accepting) (void)compute_normaliser(prepared.product, rc, m, tol);
            }
          },
          options);
      row.total_ms = detail::median_time_ms(
          [&] { (void)model_check(inst.automaton, cm.chain, cm.initial, m, tol); }, options);
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

inline void write_csv(std::ostream& out, const BenchReport& report) {
  out << "instance_id,n,Q,delta,S,E,method,normaliser_ms,total_ms,agreement_delta\n";
  for (const auto& r : report.rows) {
    out << r.instance_id << ',' << r.n << ',' << r.states << ',' << r.transitions << ',' << r.chain_states << ','
        << r.chain_edges << ',' << to_string(r.method) << ',' << r.normaliser_ms << ',' << r.total_ms << ','
        << r.agreement_delta << '\n';
  }
}

}  // namespace ubamc::harness

#endif  // UBAMC_HARNESS_HPP
