#include "imlike/im_engine.hpp"

#include "imlike/random.hpp"
#include "imlike/special.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>

namespace imlike {

namespace {

constexpr double kTieTol = 1e-10;

McEstimate proportion(Index hits, Index total) {
  const double p = static_cast<double>(hits) / static_cast<double>(total);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(total))};
}

}  // namespace

McEstimate contour_mc(const Model& model, const Data& x, const Vector& theta, Index M, std::uint64_t seed) {
  if (M < 100) throw InvalidParameter("contour_mc: need at least 100 replicates");
  const double observed = log_relative_likelihood(model, x, theta);
  const double cutoff = observed + kTieTol * (1.0 + std::abs(observed));
  Index hits = 0;
  for (Index m = 0; m < M; ++m) {
    Rng rng = derive_stream(seed, static_cast<std::uint64_t>(m));
    const Data rep = model.sample(theta, x.rows(), rng);
    const double lr = model.log_likelihood(rep, theta) - model.log_likelihood(rep, model.mle(rep));
    if (lr <= cutoff) ++hits;
  }
  return proportion(hits, M);
}

// ---------------------------------------------------------------- gamma scale

namespace {

double gamma_pivot_stat(double n, double p) { return n * std::log(p) - p; }

}  // namespace

double contour_pivot_gamma(double x, double n_shape, double theta, const Vector& pivots) {
  if (!(x > 0.0 && theta > 0.0 && n_shape > 0.0)) throw DomainError("contour_pivot_gamma: arguments must be positive");
  if (pivots.size() == 0) throw InvalidParameter("contour_pivot_gamma: no pivots");
  const double observed = gamma_pivot_stat(n_shape, x / theta);
  const double cutoff = observed + kTieTol * (1.0 + std::abs(observed));
  Index hits = 0;
  for (Index m = 0; m < pivots.size(); ++m)
    if (gamma_pivot_stat(n_shape, pivots(m)) <= cutoff) ++hits;
  return static_cast<double>(hits) / static_cast<double>(pivots.size());
}

GammaPivotContour::GammaPivotContour(double n_shape, const Vector& pivots) : n_(n_shape) {
  if (!(n_shape > 0.0)) throw InvalidParameter("GammaPivotContour: shape must be positive");
  if (pivots.size() == 0) throw InvalidParameter("GammaPivotContour: no pivots");
  stats_.reserve(pivots.size());
  for (Index m = 0; m < pivots.size(); ++m) stats_.push_back(gamma_pivot_stat(n_, pivots(m)));
  std::sort(stats_.begin(), stats_.end());
}

namespace {

Vector draw_gamma_pivots(double n_shape, Index M, std::uint64_t seed) {
  Rng rng(seed);
  Vector p(M);
  std::gamma_distribution<double> dist(n_shape, 1.0);
  for (Index m = 0; m < M; ++m) p(m) = dist(rng);
  return p;
}

}  // namespace

GammaPivotContour::GammaPivotContour(double n_shape, Index M, std::uint64_t seed)
    : GammaPivotContour(n_shape, draw_gamma_pivots(n_shape, M, seed)) {}

double GammaPivotContour::operator()(double x, double theta) const {
  if (!(x > 0.0 && theta > 0.0)) throw DomainError("GammaPivotContour: arguments must be positive");
  const double observed = gamma_pivot_stat(n_, x / theta);
  const double cutoff = observed + kTieTol * (1.0 + std::abs(observed));
  const auto it = std::upper_bound(stats_.begin(), stats_.end(), cutoff);
  return static_cast<double>(it - stats_.begin()) / static_cast<double>(stats_.size());
}

double contour_gamma_scale_exact(double x, double n_shape, double theta) {
  if (!(x > 0.0 && theta > 0.0 && n_shape > 0.0))
    throw DomainError("contour_gamma_scale_exact: arguments must be positive");
  const double n = n_shape;
  const double t = x / theta;
  const double target = gamma_pivot_stat(n, t);
  if (t == n) return 1.0;
  // Roots of n log p - p = target on each side of p = n, bisected in log p.
  auto solve = [&](double lo, double hi) {
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      const bool below = gamma_pivot_stat(n, std::exp(mid)) < target;
      // Left branch is increasing, right branch decreasing.
      if ((mid < std::log(n)) == below) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return std::exp(0.5 * (lo + hi));
  };
  double p_lo, p_hi;
  const double log_n = std::log(n);
  if (t < n) {
    p_lo = t;
    double hi = log_n + 1.0;
    while (gamma_pivot_stat(n, std::exp(hi)) > target) hi += 1.0 + 0.5 * hi;
    p_hi = solve(log_n, hi);
  } else {
    p_hi = t;
    double lo = log_n - 1.0;
    while (gamma_pivot_stat(n, std::exp(lo)) > target) lo -= 1.0 + 0.5 * std::abs(lo);
    p_lo = solve(lo, log_n);
  }
  return std::clamp(gamma_p(n, p_lo) + gamma_q(n, p_hi), 0.0, 1.0);
}

// ---------------------------------------------------------------- von Mises

double contour_vonmises_cond(double g, double u, double kappa, double theta) {
  if (!(u > 0.0)) throw DegenerateData("contour_vonmises_cond: resultant length is zero");
  if (u > 1.0 + 1e-12) throw InvalidParameter("contour_vonmises_cond: length exceeds 1");
  if (!(kappa > 0.0)) throw InvalidParameter("contour_vonmises_cond: kappa must be positive");
  const double k = kappa * std::min(u, 1.0);
  const double pi = std::numbers::pi;
  double d = std::fmod(std::abs(g - theta), 2.0 * pi);
  if (d > pi) d = 2.0 * pi - d;
  if (d <= 0.0) return 1.0;
  auto density = [k](double h) { return std::exp(k * (std::cos(h) - 1.0)); };
  const double total = integrate(density, 0.0, pi, 1e-12, 0.0);
  const double tail = integrate(density, d, pi, 1e-12, 0.0);
  return std::clamp(tail / total, 0.0, 1.0);
}

// ---------------------------------------------------------------- Behrens-Fisher

BfProfileContour::BfProfileContour(BFData data, Options options) : data_(data), options_(options) {
  data_.validate();
  if (options_.M < 500) throw InvalidParameter("BfProfileContour: need at least 500 replicates");
  Rng rng(options_.seed);
  z1_.resize(options_.M);
  z2_.resize(options_.M);
  c1_.resize(options_.M);
  c2_.resize(options_.M);
  for (Index m = 0; m < options_.M; ++m) {
    z1_(m) = std_normal(rng);
    z2_(m) = std_normal(rng);
    c1_(m) = chi2_draw(rng, data_.n1 - 1.0);
    c2_(m) = chi2_draw(rng, data_.n2 - 1.0);
  }
}

McEstimate BfProfileContour::evaluate(double phi, double ratio) const {
  const BFConstrainedFit fit = bf_constrained_mle(data_, phi);
  const double cutoff = fit.log_ratio + kTieTol * (1.0 + std::abs(fit.log_ratio));
  const double root = std::sqrt(ratio);
  const double sigma1 = std::sqrt(fit.var1 / root);
  const double sigma2 = std::sqrt(fit.var2 * root);
  Index hits = 0;
  Index used = 0;
  Index drops = 0;
  for (Index m = 0; m < options_.M; ++m) {
    BFData rep = data_;
    rep.mean1 = fit.mu1 + sigma1 * z1_(m) / std::sqrt(static_cast<double>(data_.n1));
    rep.mean2 = fit.mu2 + sigma2 * z2_(m) / std::sqrt(static_cast<double>(data_.n2));
    rep.sd1 = sigma1 * std::sqrt(c1_(m) / (data_.n1 - 1.0));
    rep.sd2 = sigma2 * std::sqrt(c2_(m) / (data_.n2 - 1.0));
    try {
      if (bf_profile_rloglik(rep, phi) <= cutoff) ++hits;
      ++used;
    } catch (const Error&) {
      ++drops;
    }
  }
  if (drops > 0) dropped_ += drops;
  if (drops * 100 > options_.M) throw NumericError("contour_bf_profile: more than 1% of replicates failed");
  return proportion(hits, used);
}

McEstimate BfProfileContour::operator()(double phi) const {
  if (!std::isfinite(phi)) throw DomainError("contour_bf_profile: phi must be finite");
  if (!options_.nuisance_grid) return evaluate(phi, 1.0);
  McEstimate best{-1.0, 0.0};
  for (double ratio : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const McEstimate e = evaluate(phi, ratio);
    if (e.value > best.value) best = e;
  }
  return best;
}

McEstimate contour_bf_profile(const BFData& data, double phi, Index M, std::uint64_t seed) {
  BfProfileContour::Options options;
  options.M = M;
  options.seed = seed;
  return BfProfileContour(data, options)(phi);
}

// ---------------------------------------------------------------- grids

Vector linspace(double lo, double hi, Index count) {
  if (count < 2) throw InvalidParameter("linspace: need at least two points");
  return Vector::LinSpaced(count, lo, hi);
}

ContourGrid evaluate_grid(const std::function<double(const Vector&)>& contour, const Matrix& points) {
  ContourGrid grid{points, Vector(points.rows())};
  parallel_for(points.rows(), [&](Index i) { grid.plausibility(i) = contour(points.row(i).transpose()); });
  return grid;
}

PossibilityContour contour_grid(const std::function<double(double)>& builder, const Vector& grid,
                                std::optional<double> mode, std::optional<double> mc_stderr) {
  if (grid.size() < 3) throw InvalidParameter("contour_grid: need at least three grid points");
  std::vector<double> points(grid.data(), grid.data() + grid.size());
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (mode) {
    if (!(*mode > points.front() && *mode < points.back()))
      throw InvalidParameter("contour_grid: mode not bracketed by the grid");
    if (!std::binary_search(points.begin(), points.end(), *mode))
      points.insert(std::upper_bound(points.begin(), points.end(), *mode), *mode);
  }
  const Index n = static_cast<Index>(points.size());
  Vector theta = Eigen::Map<Vector>(points.data(), n);
  Vector values(n);
  parallel_for(n, [&](Index i) { values(i) = builder(theta(i)); });

  Index mode_index = 0;
  if (mode) {
    mode_index = std::lower_bound(points.begin(), points.end(), *mode) - points.begin();
  } else {
    values.maxCoeff(&mode_index);
    if (mode_index == 0 || mode_index == n - 1)
      throw InvalidParameter("contour_grid: mode not bracketed by the grid");
  }
  values = isotonize_unimodal(values, mode_index);
  return contour_from_grid(theta, values, mc_stderr, theta(mode_index));
}

}  // namespace imlike
