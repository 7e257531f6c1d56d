#include "imlike/marginal.hpp"

#include "imlike/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

namespace imlike {

void write_curve_csv(std::ostream& os, const Curve& curve, const RunInfo* info) {
  Matrix rows(curve.alpha.size(), 2);
  rows.col(0) = curve.alpha;
  rows.col(1) = curve.value;
  write_csv(os, {"alpha", "value"}, rows, info);
}

PossibilityContour extension_contour(const ContourGrid& joint, const ScalarMap& m, const Vector& phi_grid) {
  const Index J = phi_grid.size();
  if (J < 2) throw InvalidParameter("extension_contour: need at least two phi grid points");
  for (Index j = 1; j < J; ++j)
    if (!(phi_grid(j) > phi_grid(j - 1))) throw InvalidParameter("extension_contour: phi grid not increasing");
  if (joint.theta.rows() != joint.plausibility.size() || joint.theta.rows() == 0)
    throw InvalidParameter("extension_contour: malformed joint grid");

  Vector edges(J + 1);
  edges(0) = phi_grid(0) - 0.5 * (phi_grid(1) - phi_grid(0));
  edges(J) = phi_grid(J - 1) + 0.5 * (phi_grid(J - 1) - phi_grid(J - 2));
  for (Index j = 1; j < J; ++j) edges(j) = 0.5 * (phi_grid(j - 1) + phi_grid(j));

  constexpr double missing = -1.0;
  Vector value = Vector::Constant(J, missing);
  for (Index i = 0; i < joint.theta.rows(); ++i) {
    const double phi = m(joint.theta.row(i).transpose());
    if (!(phi >= edges(0) && phi <= edges(J))) continue;
    Index bin = std::upper_bound(edges.data(), edges.data() + J + 1, phi) - edges.data() - 1;
    bin = std::clamp<Index>(bin, 0, J - 1);
    value(bin) = std::max(value(bin), joint.plausibility(i));
  }

  std::vector<Index> filled;
  for (Index j = 0; j < J; ++j)
    if (value(j) != missing) filled.push_back(j);
  if (filled.empty()) throw InvalidParameter("extension_contour: no joint grid point maps into the phi range");
  for (Index j = 0; j < J; ++j) {
    if (value(j) != missing) continue;
    const auto hi = std::upper_bound(filled.begin(), filled.end(), j);
    if (hi == filled.begin()) {
      value(j) = value(*hi);
    } else if (hi == filled.end()) {
      value(j) = value(*(hi - 1));
    } else {
      const Index a = *(hi - 1), b = *hi;
      const double t = (phi_grid(j) - phi_grid(a)) / (phi_grid(b) - phi_grid(a));
      value(j) = (1.0 - t) * value(a) + t * value(b);
    }
  }
  return contour_from_grid(phi_grid, value);
}

InnerSampleSet pushforward(const InnerSampleSet& samples, const std::function<Vector(const Vector&)>& m) {
  InnerSampleSet out;
  out.levels = samples.levels;
  out.pseudo = samples.pseudo;
  out.seed = samples.seed;
  out.provenance = samples.provenance + "+pushforward";
  for (Index i = 0; i < samples.size(); ++i) {
    const Vector phi = m(samples.theta.row(i).transpose());
    if (i == 0) out.theta.resize(samples.size(), phi.size());
    out.theta.row(i) = phi.transpose();
  }
  return out;
}

InnerSampleSet pushforward(const InnerSampleSet& samples, const ScalarMap& m) {
  return pushforward(samples, [&m](const Vector& t) { return Vector::Constant(1, m(t)); });
}

Curve noncredibility_curve(const Matrix& samples, const std::function<double(const Vector&)>& contour,
                           const Vector& alpha_grid) {
  const Index N = samples.rows();
  if (N == 0) throw InvalidParameter("noncredibility_curve: no samples");
  Vector values(N);
  parallel_for(N, [&](Index i) { values(i) = contour(samples.row(i).transpose()); });
  Curve curve{alpha_grid, Vector(alpha_grid.size()), alpha_grid};
  for (Index j = 0; j < alpha_grid.size(); ++j)
    curve.value(j) = static_cast<double>((values.array() <= alpha_grid(j)).count()) / static_cast<double>(N);
  return curve;
}

Curve noncredibility_curve(const InnerSampleSet& samples, const PossibilityContour& contour,
                           const Vector& alpha_grid) {
  if (samples.dim() != contour.dim()) throw InvalidParameter("noncredibility_curve: dimension mismatch");
  return noncredibility_curve(samples.theta, [&contour](const Vector& t) { return contour(t); }, alpha_grid);
}

Curve ocd_curve(const std::function<Vector(Rng&)>& posterior_sampler, const ScalarMap& m,
                const std::function<Interval(double)>& cut_image, const Vector& alpha_grid, Index N,
                std::uint64_t seed) {
  if (N <= 0) throw InvalidParameter("ocd_curve: need a positive draw count");
  Vector phi(N);
  parallel_for(N, [&](Index i) {
    Rng rng = derive_stream(seed, static_cast<std::uint64_t>(i));
    phi(i) = m(posterior_sampler(rng));
  });
  Curve curve{alpha_grid, Vector(alpha_grid.size()), (1.0 - alpha_grid.array()).matrix()};
  for (Index j = 0; j < alpha_grid.size(); ++j) {
    const Interval image = cut_image(alpha_grid(j));
    curve.value(j) = static_cast<double>((phi.array() >= image.a && phi.array() <= image.b).count()) /
                     static_cast<double>(N);
  }
  return curve;
}

double bounded_clamp(double theta) { return std::clamp(theta, -1.0, 1.0); }

Interval bounded_clamp_image(double x, double alpha) {
  const double z = normal_quantile(1.0 - 0.5 * alpha);
  return {bounded_clamp(x - z), bounded_clamp(x + z)};
}

Interval squared_norm_image(const Vector& x, double alpha) {
  const double r = std::sqrt(chi2_quantile(1.0 - alpha, static_cast<double>(x.size())));
  const double norm = x.norm();
  const double inner = std::max(norm - r, 0.0);
  return {inner * inner, (norm + r) * (norm + r)};
}

Interval linear_image(double x, double a, double b, double alpha) {
  const double z = normal_quantile(1.0 - 0.5 * alpha);
  const double lo = a * (x - z) + b, hi = a * (x + z) + b;
  return {std::min(lo, hi), std::max(lo, hi)};
}

Curve ocd_study(OcdCase which, const Vector& x, const Vector& alpha_grid, Index N, std::uint64_t seed) {
  auto sampler = [&x](Rng& rng) {
    Vector t(x.size());
    for (Index d = 0; d < x.size(); ++d) t(d) = x(d) + std_normal(rng);
    return t;
  };
  switch (which) {
    case OcdCase::bounded:
      if (x.size() != 1) throw InvalidParameter("ocd_study: bounded case is one-dimensional");
      return ocd_curve(
          sampler, [](const Vector& t) { return bounded_clamp(t(0)); },
          [&x](double a) { return bounded_clamp_image(x(0), a); }, alpha_grid, N, seed);
    case OcdCase::squared_norm:
      return ocd_curve(
          sampler, [](const Vector& t) { return t.squaredNorm(); },
          [&x](double a) { return squared_norm_image(x, a); }, alpha_grid, N, seed);
    case OcdCase::linear:
      if (x.size() != 1) throw InvalidParameter("ocd_study: linear case is one-dimensional");
      return ocd_curve(
          sampler, [](const Vector& t) { return 2.0 * t(0) - 1.0; },
          [&x](double a) { return linear_image(x(0), 2.0, -1.0, a); }, alpha_grid, N, seed);
  }
  throw InvalidParameter("ocd_study: unknown case");
}

}  // namespace imlike
