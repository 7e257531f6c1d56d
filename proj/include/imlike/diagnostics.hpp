#pragma once

#include "imlike/behrens_fisher.hpp"
#include "imlike/im_engine.hpp"
#include "imlike/inner_sampler.hpp"
#include "imlike/marginal.hpp"
#include "imlike/models.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace imlike {

// Distance of an empirical sample from Unif(0,1).
struct UniformityResult {
  Vector values;          // sorted
  double ks = 0.0;        // sup |F(a) - a|
  double max_excess = 0.0;  // sup F(a) - a, the validity direction
};

UniformityResult uniformity(Vector values);

// Draws data of n_obs rows at theta_true and evaluates contour(x, rep) at the truth.
UniformityResult validity_sim(const Model& model, const Vector& theta_true, Index n_obs,
                              const std::function<double(const Data&, Index)>& contour_at_truth, Index reps,
                              std::uint64_t seed);
// Same with the Monte Carlo contour (M replicates).
UniformityResult validity_sim(const Model& model, const Vector& theta_true, Index n_obs, Index reps, Index M,
                              std::uint64_t seed);

double welch_df(const BFData& data);
Interval welch_interval(const BFData& data, double alpha);

enum class BfPrior { right_haar, jeffreys };

// Posterior draws of mean2 - mean1 under independent per-group priors:
// sigma^{-1} gives mean_i + (sd_i / sqrt n_i) T_{n_i - 1}; sigma^{-2} gives
// mean_i + (sqrt(S_i) / n_i) T_{n_i} with S_i = (n_i - 1) sd_i^2.
Vector bayes_bf_sample(const BFData& data, BfPrior prior, Index N, std::uint64_t seed);

// Equal-tailed interval from the empirical quantiles of draws.
Interval equal_tailed(Vector draws, double alpha);

struct BFSettings {
  int n1 = 3;
  int n2 = 20;
  double mu1 = 2.0;
  double mu2 = 0.0;
  double var1 = 1.0;
  double var2 = 2.0;

  double phi() const { return mu2 - mu1; }
};

struct CoverageRow {
  std::string method;
  double coverage = 0.0;
  double coverage_se = 0.0;
  double mean_length = 0.0;
  double length_se = 0.0;
};

struct CoverageOptions {
  Index reps = 2000;
  double alpha = 0.1;
  Index M = 2000;           // bootstrap size for the IM contour
  Index posterior_draws = 4000;
  std::uint64_t seed = 7;
  bool nuisance_grid = false;
};

// Rows in the order jeffreys, right-haar, welch, im.
std::vector<CoverageRow> bf_coverage_table(const BFSettings& settings, const CoverageOptions& options);
void write_coverage_csv(std::ostream& os, const std::vector<CoverageRow>& rows, const RunInfo* info = nullptr);

// IM interval: the alpha-cut of the profile contour.
Interval bf_im_interval(const BFData& data, double alpha, Index M, std::uint64_t seed, bool nuisance_grid = false);

// max over alpha of |fraction of rows with (t - hat)' J (t - hat) <= chi2_{D,1-alpha} - (1 - alpha)|
double bvm_check(const Matrix& samples, const Vector& theta_hat, const Matrix& J, const Vector& alpha_grid);

// 1 - |2q - 1|
double u_statistic(double posterior_cdf_at_truth);
// q = fraction of draws whose Mahalanobis form (sample mean and covariance) is
// <= that of the truth, then the same fold.
double u_statistic(const Matrix& samples, const Vector& theta_true);

struct CorrelationUStudy {
  Vector u_inner;     // inner approximation (w = 1/2) of the IM
  Vector u_jeffreys;  // Jeffreys-prior Bayes
};

// Replicated data of size n at rho; M bootstrap replicates per contour.
CorrelationUStudy correlation_u_study(Index n, double rho, Index reps, Index M, std::uint64_t seed);

// Posterior CDF at t under the Jeffreys prior sqrt(1 + r^2) / (1 - r^2).
double correlation_jeffreys_cdf(const Data& x, double t);

struct GammaBvmResult {
  Index n = 0;
  Vector theta_hat;
  Matrix J;
  double discrepancy = 0.0;
  bool converged = false;
};

struct GammaBvmOptions {
  double shape = 7.0;
  double scale = 3.0;
  Index draws = 20000;
  Index M = 1000;
  Vector alpha_grid;  // empty means the default grid
  SAConfig sa;
  std::uint64_t seed = 11;
};

// Simulates n observations, fits the stitched Gaussian in (log shape, log scale)
// and reports bvm_check of the inner draws.
GammaBvmResult gamma_bvm_study(Index n, const GammaBvmOptions& options);

}  // namespace imlike
