#pragma once

#include "imlike/special.hpp"
#include "imlike/types.hpp"

#include <Eigen/Cholesky>

#include <functional>
#include <limits>
#include <optional>
#include <variant>

namespace imlike {

// Mean and covariance of a Gaussian possibility contour.
class GaussianPossibilityParams {
 public:
  GaussianPossibilityParams(Vector mean, Matrix cov);

  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }
  Index dim() const { return mean_.size(); }

  // (y - m)' v^{-1} (y - m)
  template <class Derived>
  double quad_form(const Eigen::MatrixBase<Derived>& y) const {
    const Vector r = llt_.matrixL().solve(Vector(y - mean_));
    return r.squaredNorm();
  }

 private:
  Vector mean_;
  Matrix cov_;
  Eigen::LLT<Matrix> llt_;
};

// 1 - F_D(q) with q the Mahalanobis quadratic form.
template <class Derived>
double gaussian_contour(const Eigen::MatrixBase<Derived>& y, const GaussianPossibilityParams& params) {
  if (y.size() != params.dim()) throw InvalidParameter("gaussian_contour: dimension mismatch");
  return chi2_sf(params.quad_form(y), static_cast<double>(params.dim()));
}

// Cached evaluations; rows of theta are points, 1-D grids sorted ascending.
struct ContourGrid {
  Matrix theta;
  Vector plausibility;
};

struct ContourOptions {
  // Box domain used to bracket cuts. Empty means unbounded in every coordinate.
  Vector lower;
  Vector upper;
  // Closed domains may be evaluated on the boundary itself (grid contours).
  bool closed_domain = false;
  // Initial outward step for bracketing 1-D cuts.
  double step = 1.0;
  std::optional<double> mc_stderr;
  std::optional<ContourGrid> grid;
};

class PossibilityContour {
 public:
  using Evaluator = std::function<double(const Vector&)>;

  PossibilityContour(Evaluator evaluator, Vector mode, ContourOptions options = {});

  double operator()(const Vector& theta) const { return evaluator_(theta); }
  double operator()(double theta) const;

  const Vector& mode() const { return mode_; }
  Index dim() const { return mode_.size(); }
  double lower(Index d = 0) const;
  double upper(Index d = 0) const;
  bool closed_domain() const { return options_.closed_domain; }
  double step() const { return options_.step; }
  const std::optional<double>& mc_stderr() const { return options_.mc_stderr; }
  const std::optional<ContourGrid>& grid() const { return options_.grid; }

 private:
  Evaluator evaluator_;
  Vector mode_;
  ContourOptions options_;
};

struct Interval {
  double a = 0.0;
  double b = 0.0;
  // Set when the contour never fell to alpha before the search range ended.
  bool lower_unbounded = false;
  bool upper_unbounded = false;

  bool unbounded() const { return lower_unbounded || upper_unbounded; }
  bool contains(double t) const { return a <= t && t <= b; }
  double width() const { return b - a; }
};

struct Ellipsoid {
  Vector center;
  Matrix matrix;
  double radius2 = 0.0;

  template <class Derived>
  bool contains(const Eigen::MatrixBase<Derived>& theta) const {
    const Vector r = theta - center;
    return r.dot(matrix * r) <= radius2;
  }
};

struct AlphaCut {
  double alpha = 0.0;
  std::variant<Interval, Ellipsoid> shape;

  bool is_interval() const { return std::holds_alternative<Interval>(shape); }
  const Interval& interval() const { return std::get<Interval>(shape); }
  const Ellipsoid& ellipsoid() const { return std::get<Ellipsoid>(shape); }
};

// Level set {pi > alpha} of a unimodal 1-D contour, bracketed outward from the
// mode by doubling and refined by bisection to tol.
AlphaCut alpha_cut_1d(const PossibilityContour& contour, double alpha, double tol = 1e-6);

// Gaussian cut {theta : (theta - m)' v^{-1} (theta - m) <= chi2_{D,1-alpha}}.
AlphaCut gaussian_alpha_cut(const GaussianPossibilityParams& params, double alpha);

// sup of the contour over the rows of region; 0 for an empty region.
template <class Derived>
double possibility_of_set(const PossibilityContour& contour, const Eigen::MatrixBase<Derived>& region) {
  double best = 0.0;
  for (Index i = 0; i < region.rows(); ++i) {
    const Vector theta = region.row(i).transpose();
    best = std::max(best, contour(theta));
  }
  return best;
}

// Fraction of sample densities <= density_at_theta.
template <class Derived>
double prob_to_poss_empirical(const Eigen::MatrixBase<Derived>& density_at_samples, double density_at_theta) {
  if (density_at_samples.size() == 0) throw InvalidParameter("prob_to_poss_empirical: no samples");
  return static_cast<double>((density_at_samples.array() <= density_at_theta).count()) /
         static_cast<double>(density_at_samples.size());
}

// Least-squares nondecreasing fit (pool adjacent violators).
Vector isotonic_increasing(const Vector& y);

// Nondecreasing up to mode_index, nonincreasing after it.
Vector isotonize_unimodal(const Vector& y, Index mode_index);

// 1-D contour interpolating a sorted grid linearly; values are clipped to [0,1]
// and held constant beyond the grid ends. The mode defaults to the first argmax.
PossibilityContour contour_from_grid(const Vector& theta, const Vector& plausibility,
                                     std::optional<double> mc_stderr = std::nullopt,
                                     std::optional<double> mode = std::nullopt);

}  // namespace imlike
