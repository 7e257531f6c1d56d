#include "imlike/possibility.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace imlike {

GaussianPossibilityParams::GaussianPossibilityParams(Vector mean, Matrix cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size())
    throw InvalidParameter("GaussianPossibilityParams: covariance shape does not match mean");
  if (!cov_.isApprox(cov_.transpose(), 1e-10))
    throw InvalidParameter("GaussianPossibilityParams: covariance is not symmetric");
  llt_.compute(cov_);
  if (llt_.info() != Eigen::Success)
    throw InvalidParameter("GaussianPossibilityParams: covariance is not positive definite");
}

PossibilityContour::PossibilityContour(Evaluator evaluator, Vector mode, ContourOptions options)
    : evaluator_(std::move(evaluator)), mode_(std::move(mode)), options_(std::move(options)) {
  if (!evaluator_) throw InvalidParameter("PossibilityContour: empty evaluator");
  if (mode_.size() == 0) throw InvalidParameter("PossibilityContour: empty mode");
  if (options_.lower.size() != 0 && options_.lower.size() != mode_.size())
    throw InvalidParameter("PossibilityContour: lower bound dimension mismatch");
  if (options_.upper.size() != 0 && options_.upper.size() != mode_.size())
    throw InvalidParameter("PossibilityContour: upper bound dimension mismatch");
  if (!(options_.step > 0.0)) throw InvalidParameter("PossibilityContour: step must be positive");
}

double PossibilityContour::operator()(double theta) const {
  Vector t(1);
  t(0) = theta;
  return evaluator_(t);
}

double PossibilityContour::lower(Index d) const {
  return options_.lower.size() ? options_.lower(d) : -std::numeric_limits<double>::infinity();
}

double PossibilityContour::upper(Index d) const {
  return options_.upper.size() ? options_.upper(d) : std::numeric_limits<double>::infinity();
}

namespace {

struct SideResult {
  double endpoint;
  bool unbounded;
};

SideResult cut_side(const PossibilityContour& contour, double alpha, double tol, double dir) {
  const double mode = contour.mode()(0);
  const double bound = dir < 0 ? contour.lower() : contour.upper();
  const bool finite_bound = std::isfinite(bound);

  double inner = mode;
  double outer = mode;
  double step = contour.step();
  bool found = false;
  for (int k = 0; k < 400 && !found; ++k) {
    double candidate = mode + dir * step;
    const bool past_bound = finite_bound && (dir < 0 ? candidate <= bound : candidate >= bound);
    if (past_bound) {
      if (contour.closed_domain()) {
        if (contour(bound) <= alpha) {
          outer = bound;
          found = true;
          break;
        }
        return {bound, true};
      }
      // Open boundary: approach it geometrically.
      candidate = bound + 0.5 * (inner - bound);
      if (std::abs(candidate - bound) <= 1e-14 * (1.0 + std::abs(bound))) return {bound, true};
    } else {
      step *= 2.0;
    }
    if (!std::isfinite(candidate)) return {inner, true};
    if (contour(candidate) <= alpha) {
      outer = candidate;
      found = true;
    } else {
      inner = candidate;
    }
  }
  if (!found) return {inner, true};

  for (int k = 0; k < 400 && std::abs(outer - inner) > tol; ++k) {
    const double mid = 0.5 * (inner + outer);
    if (contour(mid) <= alpha) {
      outer = mid;
    } else {
      inner = mid;
    }
  }
  return {0.5 * (inner + outer), false};
}

}  // namespace

AlphaCut alpha_cut_1d(const PossibilityContour& contour, double alpha, double tol) {
  if (contour.dim() != 1) throw InvalidParameter("alpha_cut_1d: contour is not one-dimensional");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidParameter("alpha_cut_1d: alpha outside [0,1]");
  if (!(tol > 0.0)) throw InvalidParameter("alpha_cut_1d: tolerance must be positive");
  const double mode = contour.mode()(0);
  Interval cut{mode, mode};
  if (alpha < 1.0) {
    const SideResult left = cut_side(contour, alpha, tol, -1.0);
    const SideResult right = cut_side(contour, alpha, tol, 1.0);
    cut.a = std::min(left.endpoint, mode);
    cut.b = std::max(right.endpoint, mode);
    cut.lower_unbounded = left.unbounded;
    cut.upper_unbounded = right.unbounded;
  }
  return {alpha, cut};
}

AlphaCut gaussian_alpha_cut(const GaussianPossibilityParams& params, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidParameter("gaussian_alpha_cut: alpha outside [0,1]");
  Ellipsoid e;
  e.center = params.mean();
  e.matrix = params.cov().inverse();
  e.radius2 = chi2_quantile(1.0 - alpha, static_cast<double>(params.dim()));
  return {alpha, e};
}

Vector isotonic_increasing(const Vector& y) {
  const Index n = y.size();
  std::vector<double> level;
  std::vector<Index> count;
  level.reserve(n);
  count.reserve(n);
  for (Index i = 0; i < n; ++i) {
    level.push_back(y(i));
    count.push_back(1);
    while (level.size() > 1 && level[level.size() - 2] > level.back()) {
      const Index c = count.back() + count[count.size() - 2];
      const double merged =
          (level.back() * count.back() + level[level.size() - 2] * count[count.size() - 2]) / c;
      level.pop_back();
      count.pop_back();
      level.back() = merged;
      count.back() = c;
    }
  }
  Vector out(n);
  Index pos = 0;
  for (std::size_t b = 0; b < level.size(); ++b)
    for (Index k = 0; k < count[b]; ++k) out(pos++) = level[b];
  return out;
}

Vector isotonize_unimodal(const Vector& y, Index mode_index) {
  if (mode_index < 0 || mode_index >= y.size())
    throw InvalidParameter("isotonize_unimodal: mode index out of range");
  Vector out(y.size());
  out.head(mode_index + 1) = isotonic_increasing(y.head(mode_index + 1));
  const Index tail = y.size() - mode_index - 1;
  if (tail > 0) {
    const Vector reversed = y.tail(tail).reverse();
    out.tail(tail) = isotonic_increasing(reversed).reverse();
  }
  return out;
}

PossibilityContour contour_from_grid(const Vector& theta, const Vector& plausibility,
                                     std::optional<double> mc_stderr, std::optional<double> mode) {
  const Index n = theta.size();
  if (n < 2 || plausibility.size() != n)
    throw InvalidParameter("contour_from_grid: need at least two matching grid points");
  for (Index i = 1; i < n; ++i)
    if (!(theta(i) > theta(i - 1))) throw InvalidParameter("contour_from_grid: grid not increasing");

  const Vector values = plausibility.cwiseMax(0.0).cwiseMin(1.0);
  Index mode_index = 0;
  values.maxCoeff(&mode_index);

  auto evaluator = [theta, values](const Vector& t) {
    const double x = t(0);
    const Index n = theta.size();
    if (x <= theta(0)) return values(0);
    if (x >= theta(n - 1)) return values(n - 1);
    const auto it = std::upper_bound(theta.data(), theta.data() + n, x);
    const Index hi = it - theta.data();
    const Index lo = hi - 1;
    const double w = (x - theta(lo)) / (theta(hi) - theta(lo));
    return (1.0 - w) * values(lo) + w * values(hi);
  };

  ContourOptions options;
  options.lower = Vector::Constant(1, theta(0));
  options.upper = Vector::Constant(1, theta(n - 1));
  options.closed_domain = true;
  options.step = std::max((theta(n - 1) - theta(0)) / 64.0, theta(1) - theta(0));
  options.mc_stderr = mc_stderr;
  Matrix grid_theta = theta;
  options.grid = ContourGrid{grid_theta, values};
  const double mode_value = mode ? *mode : theta(mode_index);
  return PossibilityContour(evaluator, Vector::Constant(1, mode_value), std::move(options));
}

}  // namespace imlike
