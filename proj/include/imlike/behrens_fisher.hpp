#pragma once

#include "imlike/types.hpp"

namespace imlike {

// Two-sample normal summaries; sd uses divisor n - 1.
struct BFData {
  int n1 = 0;
  int n2 = 0;
  double mean1 = 0.0;
  double mean2 = 0.0;
  double sd1 = 0.0;
  double sd2 = 0.0;

  void validate() const;
  double mle_difference() const { return mean2 - mean1; }
};

// Maximizer of the likelihood under mean2 - mean1 = phi.
struct BFConstrainedFit {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double var1 = 0.0;  // variance MLEs (divisor n) at the constrained means
  double var2 = 0.0;
  double log_ratio = 0.0;  // constrained minus unconstrained log-likelihood
};

// Solves the stationarity cubic in mu1 exactly and keeps the best root.
BFConstrainedFit bf_constrained_mle(const BFData& data, double phi);

// log of sup{L : mu2 - mu1 = phi} / sup L, always <= 0.
double bf_profile_rloglik(const BFData& data, double phi);

// Travel times by two routes (Lehmann).
BFData lehmann_travel();

}  // namespace imlike
