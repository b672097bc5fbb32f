#ifndef UBAMC_MARKOV_HPP
#define UBAMC_MARKOV_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ubamc/config.hpp"
#include "ubamc/error.hpp"

namespace ubamc {

using ChainState = std::size_t;
using ChainEdge = std::pair<ChainState, ChainState>;

/// Finite discrete-time Markov chain with a dense row-stochastic matrix.
/// The declaration order of the states is the letter order used downstream.
class MarkovChain {
public:
  MarkovChain() = default;

  MarkovChain(std::vector<std::string> states, Eigen::MatrixXd matrix, double stochastic_tol = Tolerances{}.stochastic)
      : states_(std::move(states)), matrix_(std::move(matrix)) {
    const auto n = static_cast<Eigen::Index>(states_.size());
    if (matrix_.rows() != n || matrix_.cols() != n) {
      throw InvalidInput("chain matrix dimensions do not match the state list");
    }
    for (Eigen::Index s = 0; s < n; ++s) {
      double sum = 0.0;
      for (Eigen::Index t = 0; t < n; ++t) {
        const double p = matrix_(s, t);
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
          std::ostringstream msg;
          msg << "chain entry (" << states_[s] << ", " << states_[t] << ") = " << p
              << " outside [0,1]";
          throw InvalidInput(msg.str());
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > stochastic_tol) {
        std::ostringstream msg;
        msg << "chain row '" << states_[s] << "' sums to " << sum << ", not 1";
        throw InvalidInput(msg.str());
      }
    }
    successors_.resize(states_.size());
    predecessors_.resize(states_.size());
    for (Eigen::Index s = 0; s < n; ++s) {
      for (Eigen::Index t = 0; t < n; ++t) {
        if (matrix_(s, t) > 0.0) {
          successors_[s].push_back(static_cast<ChainState>(t));
          predecessors_[t].push_back(static_cast<ChainState>(s));
          ++num_edges_;
        }
      }
    }
  }

  std::size_t num_states() const { return states_.size(); }
  const std::vector<std::string>& state_names() const { return states_; }
  const std::string& state_name(ChainState s) const { return states_.at(s); }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  double probability(ChainState s, ChainState t) const { return matrix_(s, t); }
  bool has_edge(ChainState s, ChainState t) const { return matrix_(s, t) > 0.0; }
  std::size_t num_edges() const { return num_edges_; }
  std::span<const ChainState> successors(ChainState s) const { return successors_[s]; }
  std::span<const ChainState> predecessors(ChainState t) const { return predecessors_[t]; }

  std::optional<ChainState> find_state(std::string_view name) const {
    for (ChainState s = 0; s < states_.size(); ++s) {
      if (states_[s] == name) return s;
    }
    return std::nullopt;
  }

private:
  std::vector<std::string> states_;
  Eigen::MatrixXd matrix_;
  std::vector<std::vector<ChainState>> successors_;
  std::vector<std::vector<ChainState>> predecessors_;
  std::size_t num_edges_ = 0;
};

/// Probability vector over the chain states.
class InitialDistribution {
public:
  InitialDistribution() = default;
  explicit InitialDistribution(std::vector<double> weights, double stochastic_tol = Tolerances{}.stochastic)
      : weights_(std::move(weights)) {
    double sum = 0.0;
    for (double w : weights_) {
      if (!std::isfinite(w) || w < 0.0) throw InvalidInput("initial distribution has a negative entry");
      sum += w;
    }
    if (std::abs(sum - 1.0) > stochastic_tol) {
      std::ostringstream msg;
      msg << "initial distribution sums to " << sum << ", not 1";
      throw InvalidInput(msg.str());
    }
  }
  std::size_t size() const { return weights_.size(); }
  double operator[](ChainState s) const { return weights_[s]; }
  const std::vector<double>& weights() const { return weights_; }

  static InitialDistribution uniform(std::size_t n) {
    return InitialDistribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }
  static InitialDistribution dirac(std::size_t n, ChainState s) {
    std::vector<double> w(n, 0.0);
    w[s] = 1.0;
    return InitialDistribution(std::move(w));
  }

private:
  std::vector<double> weights_;
};

struct ChainModel {
  MarkovChain chain;
  InitialDistribution initial;
};

/// E(t): all chain edges ending in t.
inline std::vector<ChainEdge> incoming_edges(const MarkovChain& m, ChainState t) {
  if (t >= m.num_states()) throw InvalidInput("incoming_edges: unknown chain state");
  std::vector<ChainEdge> out;
  for (ChainState s : m.predecessors(t)) out.emplace_back(s, t);
  return out;
}

inline ChainModel chain_from_json(const nlohmann::json& doc, double stochastic_tol = Tolerances{}.stochastic) {
  if (!doc.is_object()) throw InvalidInput("chain document must be a JSON object");
  if (!doc.contains("states") || !doc.at("states").is_array()) throw InvalidInput("chain: missing 'states'");
  if (!doc.contains("matrix") || !doc.at("matrix").is_array()) throw InvalidInput("chain: missing 'matrix'");
  if (!doc.contains("initial") || !doc.at("initial").is_array()) throw InvalidInput("chain: missing 'initial'");
  std::vector<std::string> states;
  for (const auto& s : doc.at("states")) {
    if (!s.is_string()) throw InvalidInput("chain: state identifiers must be strings");
    states.push_back(s.get<std::string>());
  }
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (states[i] == states[j]) throw InvalidInput("duplicate chain state '" + states[i] + "'");
    }
  }
  const auto n = static_cast<Eigen::Index>(states.size());
  const auto& rows = doc.at("matrix");
  if (static_cast<Eigen::Index>(rows.size()) != n) throw InvalidInput("chain: matrix row count mismatch");
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto& row = rows.at(static_cast<std::size_t>(s));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      throw InvalidInput("chain: matrix row length mismatch");
    }
    for (Eigen::Index t = 0; t < n; ++t) {
      const auto& v = row.at(static_cast<std::size_t>(t));
      if (!v.is_number()) throw InvalidInput("chain: matrix entries must be numbers");
      m(s, t) = v.get<double>();
    }
  }
  std::vector<double> init;
  for (const auto& v : doc.at("initial")) {
    if (!v.is_number()) throw InvalidInput("chain: initial entries must be numbers");
    init.push_back(v.get<double>());
  }
  if (static_cast<Eigen::Index>(init.size()) != n) throw InvalidInput("chain: initial length mismatch");
  return ChainModel{MarkovChain(std::move(states), std::move(m), stochastic_tol),
                    InitialDistribution(std::move(init), stochastic_tol)};
}

/// Parses and validates the chain JSON document.
inline ChainModel parse_chain(std::string_view text, double stochastic_tol = Tolerances{}.stochastic) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("malformed chain JSON: ") + e.what());
  }
  return chain_from_json(doc, stochastic_tol);
}

inline nlohmann::json chain_to_json(const MarkovChain& m, const InitialDistribution& init) {
  nlohmann::json doc;
  doc["states"] = m.state_names();
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index s = 0; s < m.matrix().rows(); ++s) {
    std::vector<double> row(static_cast<std::size_t>(m.matrix().cols()));
    for (Eigen::Index t = 0; t < m.matrix().cols(); ++t) row[static_cast<std::size_t>(t)] = m.matrix()(s, t);
    rows.push_back(row);
  }
  doc["matrix"] = rows;
  doc["initial"] = init.weights();
  return doc;
}

}  // namespace ubamc

#endif  // UBAMC_MARKOV_HPP
