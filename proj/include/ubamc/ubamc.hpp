#ifndef UBAMC_UBAMC_HPP
#define UBAMC_UBAMC_HPP

#include "ubamc/automaton.hpp"
#include "ubamc/config.hpp"
#include "ubamc/cutfinder.hpp"
#include "ubamc/error.hpp"
#include "ubamc/graph.hpp"
#include "ubamc/harness.hpp"
#include "ubamc/markov.hpp"
#include "ubamc/normalise.hpp"
#include "ubamc/numerics.hpp"
#include "ubamc/product.hpp"
#include "ubamc/pseudocut.hpp"
#include "ubamc/solver.hpp"

#endif  // UBAMC_UBAMC_HPP
