// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ubamc/ubamc.hpp"

using namespace ubamc;

namespace {

// Pinned tolerances.
constexpr double kProbabilityTol = 1e-9;
constexpr double kInternalsTol = 1e-8;
constexpr double kAgreementTol = 1e-8;
constexpr double kResidualTol = 1e-8;
constexpr double kAffineTol = 1e-8;
constexpr std::size_t kCutCheckLimit = 12;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

struct Instance {
  std::string id;
  BuchiAutomaton automaton;
  ChainModel model;
};

BuchiAutomaton running_automaton() {
  BuchiAutomaton::TransitionTable d(4, std::vector<std::vector<StateIndex>>(2));
  d[0][0] = {1};
  d[1][0] = {0};
  d[1][1] = {1, 3};
  d[2][1] = {0, 2};
  d[2][0] = {3};
  d[3][0] = {2};
  return BuchiAutomaton({"q0", "q1", "q2", "q3"}, {"a", "b"}, d, {0}, {0});
}

ChainModel fair_coin() { return harness::uniform_chain({"a", "b"}); }

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

double projection_residual(const std::vector<Eigen::VectorXd>& from, const std::vector<Eigen::VectorXd>& onto) {
  Eigen::MatrixXd b(onto.front().size(), static_cast<Eigen::Index>(onto.size()));
  for (std::size_t k = 0; k < onto.size(); ++k) b.col(static_cast<Eigen::Index>(k)) = onto[k];
  double worst = 0.0;
  for (const auto& v : from) worst = std::max(worst, numerics::solve_least_squares(b, v).residual / v.norm());
  return worst;
}

std::vector<Instance> random_uba_instances() {
  std::vector<Instance> out;
  for (std::uint64_t i = 0; out.size() < 200; ++i) {
    harness::RandomUbaOptions o;
    o.states = 2 + i % 7;
    o.letters = 2 + i % 3;
    // Alternate between free sampling and reverse-deterministic sampling;
    // the latter yields forward branching with non-trivial co-reachability.
    if (i % 2 == 0) {
      o.density = std::min(0.5, 1.3 / static_cast<double>(o.states));
    } else {
      o.reverse_deterministic = true;
      o.density = 1.0;
      o.accepting_fraction = 0.2;
    }
    auto r = harness::generate_random_uba(10000 + i, o);
    if (!r.automaton) continue;
    auto model = harness::random_chain(20000 + i, r.automaton->alphabet());
    out.push_back({"uba-" + std::to_string(i), std::move(*r.automaton), std::move(model)});
  }
  return out;
}

std::vector<Instance> random_deterministic_instances() {
  std::vector<Instance> out;
  for (std::uint64_t i = 0; i < 100; ++i) {
    auto a = harness::generate_random_deterministic(30000 + i, 2 + i % 9, 2 + i % 3);
    auto model = harness::random_chain(40000 + i, a.alphabet());
    out.push_back({"det-" + std::to_string(i), std::move(a), std::move(model)});
  }
  return out;
}

void report(int number, const std::string& title, Verdict& v, double seconds) {
  std::printf("[%s] criterion %d: %s (%.2f s)%s%s\n", v.pass ? "PASS" : "FAIL", number, title.c_str(), seconds,
              v.detail.str().empty() ? "" : " -- ", v.detail.str().c_str());
  std::fflush(stdout);
}

Verdict criterion_1() {
  Verdict v;
  const auto a = running_automaton();
  const auto m = fair_coin();
  for (Method method : {Method::Cut, Method::Pseudo}) {
    detail::Stopwatch clock;
    const auto r = model_check(a, m.chain, m.initial, method);
    const double ms = clock.elapsed_ms();
    v.require(std::abs(r.probability - 1.0 / 3.0) <= kProbabilityTol, std::string(to_string(method)) + " probability");
    v.require(ms < 100.0, std::string(to_string(method)) + " runtime");
    v.detail << to_string(method) << "=" << r.probability << " in " << ms << " ms; ";
  }
  return v;
}

Verdict criterion_2() {
  Verdict v;
  const ProductSystem p(running_automaton(), fair_coin().chain);
  const Component d(p, {0, 2, 3, 4, 5, 6});
  const Eigen::VectorXd y = dominant_eigenvector(p, d);
  const Eigen::VectorXd expected_y = vec({2, 1, 3, 1, 3, 2}) / 3.0;
  v.require((y - expected_y).cwiseAbs().maxCoeff() <= kInternalsTol, "eigenvector");

  const auto cut = compute_cut(p, d, 0, true);
  v.require(cut.cut.anchor == 0 && cut.cut.states == std::vector<StateIndex>{0, 2}, "cut {(q0,a),(q2,a)}");
  const bool trace_ok = cut.trace && cut.trace->initial_survives == std::vector<ProductIndex>{0, 2, 4, 6} &&
                        cut.trace->iterations.size() == 1 && cut.trace->iterations[0].chosen == 4 &&
                        cut.trace->iterations[0].survives ==
                            std::vector<std::vector<ProductIndex>>{{0, 2, 4, 6}, {3, 5}, {0, 6}};
  v.require(trace_ok, "Survives trace");

  const auto basis = compute_basis(DeltaFamily(p, d), y);
  auto values = [&](ChainState s) {
    std::vector<Eigen::VectorXd> out;
    for (const auto& r : basis.vectors[s]) out.push_back(r.value);
    return out;
  };
  const std::vector<Eigen::VectorXd> ra{vec({2, 1, 0, 1, 0, 2}), vec({1, 2, 0, 2, 0, 1})};
  const std::vector<Eigen::VectorXd> rb{vec({0, 0, 3, 0, 3, 0})};
  const double span_residual = std::max({projection_residual(values(0), ra), projection_residual(ra, values(0)),
                                         projection_residual(values(1), rb), projection_residual(rb, values(1))});
  v.require(values(0).size() == 2 && values(1).size() == 1 && span_residual < kInternalsTol, "span(R(a)), span(R(b))");

  const auto pc = pseudo_cut(p, d, co_reachability(p, d, 0, false), basis, y);
  v.require((pc.mu - vec({1, 0, 0, 1, 0, 0})).cwiseAbs().maxCoeff() <= kInternalsTol, "pseudo-cut mu");
  v.detail << "span residual " << span_residual << "; ";
  return v;
}

struct InstanceChecks {
  bool agreement = true;
  bool residual = true;
  bool signs = true;
  bool normalisers = true;
  bool affine = true;
  bool cuts = true;
  double worst_agreement = 0.0;
  double worst_affine = 0.0;
  std::size_t cuts_checked = 0;
  std::size_t affine_words = 0;
  std::size_t components = 0;
  std::size_t nontrivial_co = 0;  // components with |Co(d)| > 1
};

// Property checks shared by criteria 3, 4 and 5. Returns z of the pseudo method.
Eigen::VectorXd check_instance(const Instance& inst, InstanceChecks& c, std::mt19937_64& rng) {
  const auto& a = inst.automaton;
  const auto& cm = inst.model;
  const auto by_cut = model_check(a, cm.chain, cm.initial, Method::Cut);
  const auto by_pseudo = model_check(a, cm.chain, cm.initial, Method::Pseudo);
  const double delta = numerics::inf_norm(by_cut.z - by_pseudo.z);
  c.worst_agreement = std::max(c.worst_agreement, delta);
  c.agreement = c.agreement && delta <= kAgreementTol;

  const auto prepared = prepare_model(normalise(a), cm.chain);
  const ProductSystem& p = prepared.product;
  for (const auto* r : {&by_cut, &by_pseudo}) {
    c.residual = c.residual && numerics::inf_norm(p.multiply(r->z) - r->z) <= kResidualTol;
  }
  for (const auto& rc : prepared.recurrent_components) {
    for (const auto* r : {&by_cut, &by_pseudo}) {
      for (ProductIndex i : rc.component.members()) {
        const double zi = r->z(static_cast<Eigen::Index>(i));
        c.signs = c.signs && (rc.accepting ? zi > 0.0 : std::abs(zi) <= kResidualTol);
      }
    }
    if (!rc.accepting) continue;
    Eigen::VectorXd zd(static_cast<Eigen::Index>(rc.component.size()));
    for (std::size_t k = 0; k < rc.component.size(); ++k) {
      zd(static_cast<Eigen::Index>(k)) = by_pseudo.z(static_cast<Eigen::Index>(rc.component.member(k)));
    }
    for (Method m : {Method::Cut, Method::Pseudo}) {
      const auto nz = compute_normaliser(p, rc, m);
      c.normalisers = c.normalisers && std::abs(nz.mu.dot(zd) - 1.0) <= kResidualTol;
    }
    const auto cut = compute_cut(p, rc.component, rc.component.member(0));
    ++c.components;
    c.nontrivial_co += cut.co.members.size() > 1 ? 1 : 0;
    if (rc.component.size() <= kCutCheckLimit) {
      c.cuts = c.cuts && is_cut(p, rc.component, cut.cut);
      ++c.cuts_checked;
    }
    // Affine coefficient sums on 50 random enabled words s w per SCC.
    const DeltaFamily delta(p, rc.component);
    const auto basis = compute_basis(delta, rc.y);
    std::vector<ChainState> present;
    for (ChainState s = 0; s < delta.num_letters(); ++s) {
      if (!delta.fibre(s).empty()) present.push_back(s);
    }
    for (int trial = 0; trial < 50; ++trial) {
      Word w{present[std::uniform_int_distribution<std::size_t>(0, present.size() - 1)(rng)]};
      const std::size_t len = std::uniform_int_distribution<std::size_t>(0, 10)(rng);
      for (std::size_t i = 0; i < len; ++i) {
        auto succ = cm.chain.successors(w.back());
        w.push_back(succ[std::uniform_int_distribution<std::size_t>(0, succ.size() - 1)(rng)]);
      }
      const Eigen::VectorXd u =
          delta.restrict(w.front(), delta.apply_word(std::span<const ChainState>(w).subspan(1), rc.y));
      const auto coeff = affine_coefficients(basis, w.front(), u);
      // A vanishing Δ'(s)Δ(w)y has the zero combination; the sum only
      // carries information for non-zero vectors.
      if (u.cwiseAbs().maxCoeff() == 0.0) continue;
      const double err = std::abs(coeff.sum - 1.0);
      c.worst_affine = std::max(c.worst_affine, err);
      c.affine = c.affine && err <= kAffineTol && coeff.residual <= kAffineTol * std::max(1.0, u.norm());
      ++c.affine_words;
    }
  }
  return by_pseudo.z;
}

struct BatchResult {
  Verdict verdict;
  InstanceChecks checks;
  double seconds = 0.0;
};

}  // namespace

int main() {
  bool all = true;
  std::mt19937_64 rng(2024);

  {
    detail::Stopwatch clock;
    Verdict v = criterion_1();
    report(1, "running-example probability 1/3 for both methods", v, clock.elapsed_ms() / 1000);
    all = all && v.pass;
  }
  {
    detail::Stopwatch clock;
    Verdict v = criterion_2();
    report(2, "running-example eigenvector, cut trace, bases, pseudo-cut", v, clock.elapsed_ms() / 1000);
    all = all && v.pass;
  }

  InstanceChecks property_checks;
  auto merge = [&](const InstanceChecks& c) {
    property_checks.residual = property_checks.residual && c.residual;
    property_checks.signs = property_checks.signs && c.signs;
    property_checks.normalisers = property_checks.normalisers && c.normalisers;
    property_checks.affine = property_checks.affine && c.affine;
    property_checks.cuts = property_checks.cuts && c.cuts;
    property_checks.worst_affine = std::max(property_checks.worst_affine, c.worst_affine);
    property_checks.cuts_checked += c.cuts_checked;
    property_checks.affine_words += c.affine_words;
  };

  {
    detail::Stopwatch clock;
    Verdict v;
    InstanceChecks c;
    const auto instances = random_uba_instances();
    std::size_t max_q = 0, max_s = 0;
    for (const auto& inst : instances) {
      max_q = std::max(max_q, inst.automaton.num_states());
      max_s = std::max(max_s, inst.model.chain.num_states());
      try {
        check_instance(inst, c, rng);
      } catch (const std::exception& e) {
        v.require(false, inst.id + ": " + e.what());
      }
    }
    const double seconds = clock.elapsed_ms() / 1000;
    v.require(instances.size() == 200 && max_q <= 8 && max_s <= 4, "instance shape");
    v.require(c.agreement, "cut/pseudo agreement");
    v.require(seconds < 60.0, "runtime");
    v.detail << instances.size() << " instances, " << c.components << " accepting recurrent SCCs ("
             << c.nontrivial_co << " with |Co(d)| > 1), max |z_cut - z_pseudo| = " << c.worst_agreement;
    merge(c);
    report(3, "cross-method equivalence on 200 random UBAs", v, seconds);
    all = all && v.pass;
  }
  {
    detail::Stopwatch clock;
    Verdict v;
    InstanceChecks c;
    double worst = 0.0;
    for (const auto& inst : random_deterministic_instances()) {
      try {
        const double oracle = harness::deterministic_oracle(inst.automaton, inst.model.chain, inst.model.initial);
        check_instance(inst, c, rng);
        for (Method m : {Method::Cut, Method::Pseudo}) {
          const double p = model_check(inst.automaton, inst.model.chain, inst.model.initial, m).probability;
          worst = std::max(worst, std::abs(p - oracle));
        }
      } catch (const std::exception& e) {
        v.require(false, inst.id + ": " + e.what());
      }
    }
    v.require(worst <= kAgreementTol, "oracle agreement");
    v.detail << "max |p - oracle| = " << worst;
    merge(c);
    report(4, "deterministic oracle agreement on 100 random DBAs", v, clock.elapsed_ms() / 1000);
    all = all && v.pass;
  }
  {
    Verdict v;
    v.require(property_checks.residual, "||z - Bz|| <= 1e-8");
    v.require(property_checks.signs, "z_D > 0 on D+, z_D = 0 on D0");
    v.require(property_checks.normalisers, "mu^T z_D = 1");
    v.require(property_checks.affine, "affine coefficient sums");
    v.require(property_checks.cuts, "exhaustive cut check");
    v.require(property_checks.cuts_checked > 0 && property_checks.affine_words > 0, "non-empty property sample");
    v.detail << property_checks.cuts_checked << " cuts checked, " << property_checks.affine_words
             << " words, worst affine error " << property_checks.worst_affine;
    report(5, "property suite over criteria 3-4 instances", v, 0.0);
    all = all && v.pass;
  }
  {
    detail::Stopwatch clock;
    Verdict v;
    const Method methods[] = {Method::Both};
    const auto instances = harness::quadratic_instances(1, 4);
    const auto bench = harness::benchmark(methods, instances);
    std::vector<double> ratios;
    for (std::size_t k = 0; k + 1 < bench.rows.size(); k += 2) {
      ratios.push_back(bench.rows[k].normaliser_ms / bench.rows[k + 1].normaliser_ms);
      v.detail << "n=" << bench.rows[k].n << " cut " << bench.rows[k].normaliser_ms << " ms / pseudo "
               << bench.rows[k + 1].normaliser_ms << " ms = " << ratios.back() << "; ";
    }
    const double seconds = clock.elapsed_ms() / 1000;
    v.require(ratios.size() == 4 && std::is_sorted(ratios.begin(), ratios.end()), "monotone ratio");
    v.require(seconds < 300.0, "runtime");
    report(6, "cut/pseudo normaliser time ratio nondecreasing on quadratic family n=1..4", v, seconds);
    all = all && v.pass;
  }
  {
    detail::Stopwatch clock;
    Verdict v;
    std::vector<Instance> instances{{"running", running_automaton(), fair_coin()}};
    for (std::uint64_t i = 0; instances.size() < 21; ++i) {
      harness::RandomUbaOptions o;
      o.states = 2 + i % 4;
      o.letters = 2;
      o.density = i % 2 == 0 ? 0.3 : 1.0;
      o.reverse_deterministic = i % 2 == 1;
      auto r = harness::generate_random_uba(50000 + i, o);
      if (!r.automaton) continue;
      auto model = harness::random_chain(60000 + i, r.automaton->alphabet());
      instances.push_back({"mc-" + std::to_string(i), std::move(*r.automaton), std::move(model)});
    }
    std::size_t inside = 0;
    for (std::size_t k = 0; k < instances.size(); ++k) {
      const auto& inst = instances[k];
      const double exact =
          model_check(inst.automaton, inst.model.chain, inst.model.initial, Method::Pseudo).probability;
      const auto est = harness::monte_carlo_estimate(inst.automaton, inst.model.chain, inst.model.initial, 2000, 20,
                                                     100000, 70000 + k);
      const bool ok = std::abs(est.estimate - exact) <= est.half_width + 1e-12;
      inside += ok ? 1 : 0;
      if (!ok) v.detail << inst.id << " exact " << exact << " est " << est.estimate << " ± " << est.half_width << "; ";
    }
    v.require(inside >= 19, "3 sigma containment");
    v.detail << inside << "/21 inside";
    report(7, "Monte Carlo 3 sigma containment (advisory)", v, clock.elapsed_ms() / 1000);
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
