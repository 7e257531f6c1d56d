#pragma once

#include "imlike/behrens_fisher.hpp"
#include "imlike/models.hpp"
#include "imlike/possibility.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace imlike {

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Naive Monte Carlo contour: fraction of M replicates X ~ P_theta with
// R(X, theta) <= R(x, theta). Replicate m uses stream (seed, m), so the same
// seed gives common random numbers across theta.
McEstimate contour_mc(const Model& model, const Data& x, const Vector& theta, Index M, std::uint64_t seed);

// Gamma scale contour through the pivot X / theta ~ Gamma(n, 1).
double contour_pivot_gamma(double x, double n_shape, double theta, const Vector& pivots);

// Same computation with the pivot statistics sorted once for O(log M) evaluation.
class GammaPivotContour {
 public:
  GammaPivotContour(double n_shape, Index M, std::uint64_t seed);
  GammaPivotContour(double n_shape, const Vector& pivots);

  double operator()(double x, double theta) const;
  Index size() const { return static_cast<Index>(stats_.size()); }

 private:
  double n_;
  std::vector<double> stats_;
};

// Exact gamma scale contour for a sufficient statistic x ~ Gamma(n, theta).
double contour_gamma_scale_exact(double x, double n_shape, double theta);

// Conditional von Mises contour P{cos H <= cos(g - theta)}, H ~ vM(0, kappa u).
double contour_vonmises_cond(double g, double u, double kappa, double theta);

// Behrens-Fisher profile contour by parametric bootstrap at the constrained MLE.
// Bootstrap draws are generated once, so all phi share them.
class BfProfileContour {
 public:
  struct Options {
    Index M = 2000;
    std::uint64_t seed = 1;
    // Max over a 5-point variance-ratio grid around the plug-in nuisance.
    bool nuisance_grid = false;
  };

  BfProfileContour(BFData data, Options options);

  McEstimate operator()(double phi) const;
  const BFData& data() const { return data_; }
  Index dropped() const { return dropped_; }

 private:
  McEstimate evaluate(double phi, double ratio) const;

  BFData data_;
  Options options_;
  Vector z1_, z2_, c1_, c2_;
  mutable Index dropped_ = 0;
};

McEstimate contour_bf_profile(const BFData& data, double phi, Index M, std::uint64_t seed);

// Evaluates a 1-D builder over a grid (points in parallel), isotonizes each side
// of the mode and returns the interpolating contour. A known mode is inserted
// into the grid.
PossibilityContour contour_grid(const std::function<double(double)>& builder, const Vector& grid,
                                std::optional<double> mode = std::nullopt,
                                std::optional<double> mc_stderr = std::nullopt);

// Evaluates a contour at every row of points, in parallel.
ContourGrid evaluate_grid(const std::function<double(const Vector&)>& contour, const Matrix& points);

// Evenly spaced grid from lo to hi inclusive.
Vector linspace(double lo, double hi, Index count);

}  // namespace imlike
