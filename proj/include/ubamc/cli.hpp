#ifndef UBAMC_CLI_HPP
#define UBAMC_CLI_HPP

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ubamc/automaton.hpp"
#include "ubamc/config.hpp"
#include "ubamc/error.hpp"
#include "ubamc/harness.hpp"
#include "ubamc/markov.hpp"
#include "ubamc/normalise.hpp"
#include "ubamc/product.hpp"
#include "ubamc/solver.hpp"

namespace ubamc::cli {

enum ExitCode : int { kOk = 0, kInvalidInput = 1, kAmbiguous = 2, kNumericalFailure = 3 };

struct CliConfig {
  std::string subcommand;
  std::string automaton_path;
  std::string chain_path;
  std::string method = "pseudo";
  Tolerances tol;
  bool json = false;
  bool timings = false;
  std::string dot_path;
  std::string family = "quadratic";
  std::string n_range = "1..4";
  std::size_t n = 2;
  bool literal = false;
  std::string output_path;
  std::string csv_path;
  std::uint64_t seed = 1;
  std::size_t states = 5;
  std::size_t letters = 2;
  double density = 0.25;
  std::size_t repeats = 5;
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::pair<std::size_t, std::size_t> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const std::size_t v = std::stoul(text);
      return {v, v};
    }
    return {std::stoul(text.substr(0, dots)), std::stoul(text.substr(dots + 2))};
  } catch (const std::exception&) {
    throw InvalidInput("bad range '" + text + "', expected lo..hi");
  }
}

inline std::string format_word(const BuchiAutomaton& a, const Word& w) {
  std::string out;
  for (LetterIndex l : w) out += (out.empty() ? "" : " ") + a.letter_name(l);
  return out.empty() ? "ε" : out;
}

inline int run_check(const CliConfig& c, std::ostream& out) {
  const BuchiAutomaton a = parse_automaton(read_file(c.automaton_path));
  const ChainModel m = parse_chain(read_file(c.chain_path), c.tol.stochastic);
  const ModelCheckResult r = model_check(a, m.chain, m.initial, parse_method(c.method), c.tol);
  if (!c.dot_path.empty()) {
    const ProductSystem p(normalise(a), m.chain);
    std::ofstream dot(c.dot_path);
    if (!dot) throw InvalidInput("cannot write '" + c.dot_path + "'");
    dot << product_to_dot(p, compute_sccs(p));
  }
  if (c.json) {
    out << result_to_json(r, c.timings).dump(2) << '\n';
  } else {
    out << "probability " << std::setprecision(12) << r.probability << '\n';
    out << "residual " << std::setprecision(3) << r.residual << '\n';
    if (c.timings) out << "total_ms " << std::setprecision(6) << r.timings_ms.at("total") << '\n';
  }
  return kOk;
}

inline int run_verify(const CliConfig& c, std::ostream& out) {
  const BuchiAutomaton a = parse_automaton(read_file(c.automaton_path));
  const UnambiguityVerdict v = verify_unambiguous(a);
  if (v.unambiguous) {
    out << "unambiguous\n";
    return kOk;
  }
  out << "ambiguous\n";
  if (v.witness) {
    out << "witness prefix: " << format_word(a, v.witness->prefix) << '\n';
    out << "diverging runs reach: " << a.state_name(v.witness->pair.first) << ", "
        << a.state_name(v.witness->pair.second) << '\n';
  }
  return kAmbiguous;
}

inline int run_bench(const CliConfig& c, std::ostream& out) {
  if (c.family != "quadratic") throw InvalidInput("bench supports only --family quadratic");
  const auto [lo, hi] = parse_range(c.n_range);
  if (lo < 1 || hi < lo) throw InvalidInput("bad --n-range");
  const auto instances = harness::quadratic_instances(lo, hi);
  const Method methods[] = {parse_method(c.method)};
  harness::BenchOptions options;
  options.repeats = c.repeats;
  const auto report = harness::benchmark(methods, instances, options, c.tol);
  if (c.csv_path.empty()) {
    harness::write_csv(out, report);
  } else {
    std::ofstream csv(c.csv_path);
    if (!csv) throw InvalidInput("cannot write '" + c.csv_path + "'");
    harness::write_csv(csv, report);
    out << "wrote " << report.rows.size() << " rows to " << c.csv_path << '\n';
  }
  return kOk;
}

inline int run_generate(const CliConfig& c, std::ostream& out, std::ostream& err) {
  BuchiAutomaton a;
  if (c.family == "quadratic") {
    a = harness::generate_quadratic_family(c.n, c.literal);
  } else if (c.family == "random") {
    auto r = harness::generate_random_uba(c.seed, c.states, c.letters, c.density);
    if (!r.automaton) {
      err << "error: no unambiguous automaton found after " << r.attempts << " attempts\n";
      return kInvalidInput;
    }
    a = std::move(*r.automaton);
  } else {
    throw InvalidInput("unknown family '" + c.family + "'");
  }
  const std::string text = automaton_to_json(a).dump(2) + "\n";
  if (c.output_path.empty()) {
    out << text;
  } else {
    std::ofstream file(c.output_path);
    if (!file) throw InvalidInput("cannot write '" + c.output_path + "'");
    file << text;
  }
  return kOk;
}

}  // namespace detail

/// Parses argv, runs one subcommand and maps failures to exit codes.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CliConfig c;
  CLI::App app{"Model checking Markov chains against unambiguous Büchi automata"};
  app.require_subcommand(1);
  auto positive = CLI::PositiveNumber;

  auto* check = app.add_subcommand("check", "probability that the chain's trajectory is accepted");
  check->add_option("-a,--automaton", c.automaton_path, "automaton JSON")->required();
  check->add_option("-m,--chain", c.chain_path, "Markov chain JSON")->required();
  check->add_option("--method", c.method, "normaliser method")->check(CLI::IsMember({"cut", "pseudo", "both"}));
  check->add_option("--tol", c.tol.residual, "residual tolerance")->check(positive);
  check->add_option("--tol-rank", c.tol.rank, "relative rank tolerance")->check(positive);
  check->add_option("--tol-independence", c.tol.independence, "linear independence tolerance")->check(positive);
  check->add_option("--tol-agree", c.tol.agreement, "cut/pseudo agreement tolerance")->check(positive);
  check->add_option("--tol-stochastic", c.tol.stochastic, "row-sum tolerance")->check(positive);
  check->add_flag("--json", c.json, "print the full result as JSON");
  check->add_flag("--timings", c.timings, "include wall-clock timings");
  check->add_option("--dot", c.dot_path, "write the product graph in DOT format");

  auto* verify = app.add_subcommand("verify", "check that an automaton is unambiguous");
  verify->add_option("-a,--automaton", c.automaton_path, "automaton JSON")->required();

  auto* bench = app.add_subcommand("bench", "time cut vs pseudo-cut normalisers");
  bench->add_option("--family", c.family, "instance family");
  bench->add_option("--n-range", c.n_range, "depth range lo..hi");
  bench->add_option("--method", c.method, "cut, pseudo or both")->check(CLI::IsMember({"cut", "pseudo", "both"}));
  bench->add_option("--csv", c.csv_path, "CSV output path");
  bench->add_option("--repeats", c.repeats, "timing samples per measurement")->check(positive);

  auto* generate = app.add_subcommand("generate", "write a generated automaton");
  generate->add_option("--family", c.family, "quadratic or random");
  generate->add_option("--n", c.n, "tree depth for the quadratic family")->check(positive);
  generate->add_flag("--literal", c.literal, "both-letter reversed edges (ambiguous)");
  generate->add_option("--seed", c.seed, "random seed");
  generate->add_option("--states", c.states, "states for the random family")->check(positive);
  generate->add_option("--letters", c.letters, "letters for the random family")->check(positive);
  generate->add_option("--density", c.density, "transition density")->check(CLI::Range(0.0, 1.0));
  generate->add_option("-o,--output", c.output_path, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }

  try {
    if (check->parsed()) return detail::run_check(c, out);
    if (verify->parsed()) return detail::run_verify(c, out);
    if (bench->parsed()) return detail::run_bench(c, out);
    if (generate->parsed()) return detail::run_generate(c, out, err);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const AmbiguousAutomaton& e) {
    err << "error: " << e.what() << '\n';
    return kAmbiguous;
  } catch (const NumericalFailure& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const InvariantViolation& e) {
    err << "internal error: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kInvalidInput;
}

}  // namespace ubamc::cli

#endif  // UBAMC_CLI_HPP
