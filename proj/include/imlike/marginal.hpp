#pragma once

#include "imlike/csv.hpp"
#include "imlike/inner_sampler.hpp"
#include "imlike/possibility.hpp"
#include "imlike/random.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>

namespace imlike {

// (alpha, value) pairs plus the calibrated reference each value is compared
// against: alpha for non-credibility, 1 - alpha for credibility of cuts.
struct Curve {
  Vector alpha;
  Vector value;
  Vector target;

  double max_excess() const { return (value - target).maxCoeff(); }
  double min_excess() const { return (value - target).minCoeff(); }
  double max_abs_deviation() const { return (value - target).cwiseAbs().maxCoeff(); }
};

// CSV with header alpha,value.
void write_curve_csv(std::ostream& os, const Curve& curve, const RunInfo* info = nullptr);

using ScalarMap = std::function<double(const Vector&)>;

// pi^m(phi_j) = max of the joint grid values whose image falls in the bin of
// phi_j; bins split at midpoints between phi grid points. Empty bins are filled
// by linear interpolation from their neighbours.
PossibilityContour extension_contour(const ContourGrid& joint, const ScalarMap& m, const Vector& phi_grid);

// Applies m to each draw and keeps the levels.
InnerSampleSet pushforward(const InnerSampleSet& samples, const ScalarMap& m);
InnerSampleSet pushforward(const InnerSampleSet& samples, const std::function<Vector(const Vector&)>& m);

// Per level: fraction of samples whose contour value is <= alpha.
Curve noncredibility_curve(const Matrix& samples, const std::function<double(const Vector&)>& contour,
                           const Vector& alpha_grid);
Curve noncredibility_curve(const InnerSampleSet& samples, const PossibilityContour& contour,
                           const Vector& alpha_grid);

// Per level: mass that N posterior draws of m(Theta) put on the image interval
// of the joint cut (closed).
Curve ocd_curve(const std::function<Vector(Rng&)>& posterior_sampler, const ScalarMap& m,
                const std::function<Interval(double)>& cut_image, const Vector& alpha_grid, Index N,
                std::uint64_t seed);

// Clamp of theta to [-1, 1].
double bounded_clamp(double theta);
// Image of x +- z_{1-alpha/2} under the clamp.
Interval bounded_clamp_image(double x, double alpha);
// Image of the disc {|theta - x|^2 <= chi2_{2,1-alpha}} under theta -> |theta|^2.
Interval squared_norm_image(const Vector& x, double alpha);
// Image of x +- z_{1-alpha/2} under theta -> a theta + b.
Interval linear_image(double x, double a, double b, double alpha);

// Ready-made oCD studies with N(x, I) posteriors.
enum class OcdCase { bounded, squared_norm, linear };
Curve ocd_study(OcdCase which, const Vector& x, const Vector& alpha_grid, Index N, std::uint64_t seed);

}  // namespace imlike
