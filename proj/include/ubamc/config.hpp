#ifndef UBAMC_CONFIG_HPP
#define UBAMC_CONFIG_HPP

namespace ubamc {

/// Every numerical threshold used by the pipeline, in one place.
///
/// All thresholds are relative to the norm of the object they are applied
/// to unless noted otherwise.
struct Tolerances {
  double stochastic = 1e-9;   // absolute, per chain row and for the initial distribution
  double rank = 1e-9;         // scaled by (1 + ||B_DD||_inf) in the recurrence test
  double residual = 1e-8;     // eigenvector, pseudo-cut and final-solve residuals
  double positive = 1e-12;    // minimum eigenvector component after ||y||_inf = 1
  double independence = 1e-9; // Gram-Schmidt linear dependence
  double orthogonal = 1e-10;  // precondition on orthogonal bases
  double agreement = 1e-8;    // cut vs pseudo-cut solutions
};

}  // namespace ubamc

#endif  // UBAMC_CONFIG_HPP
