#include "imlike/inner_sampler.hpp"

#include "imlike/im_engine.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

namespace imlike {

void write_samples_csv(std::ostream& os, const InnerSampleSet& samples, const RunInfo* info) {
  std::vector<std::string> header{"level"};
  for (Index d = 0; d < samples.dim(); ++d) header.push_back("theta_" + std::to_string(d + 1));
  Matrix rows(samples.size(), samples.dim() + 1);
  rows.col(0) = samples.levels;
  rows.rightCols(samples.dim()) = samples.theta;
  write_csv(os, header, rows, info);
}

double WeightCurve::operator()(double level) const {
  const Index n = alpha.size();
  if (n == 0) throw InvalidParameter("WeightCurve: empty curve");
  if (level <= alpha(0)) return w(0);
  if (level >= alpha(n - 1)) return w(n - 1);
  const Index hi = std::upper_bound(alpha.data(), alpha.data() + n, level) - alpha.data();
  const Index lo = hi - 1;
  const double t = (level - alpha(lo)) / (alpha(hi) - alpha(lo));
  return (1.0 - t) * w(lo) + t * w(hi);
}

namespace {

InnerSampleSet sample_inner_1d_impl(const PossibilityContour& contour, Index N,
                                    const std::function<double(double)>& weight, std::uint64_t seed, double tol) {
  if (contour.dim() != 1) throw InvalidParameter("sample_inner_1d: contour is not one-dimensional");
  if (N <= 0) throw InvalidParameter("sample_inner_1d: need a positive draw count");
  InnerSampleSet out;
  out.levels.resize(N);
  out.theta.resize(N, 1);
  out.pseudo.assign(static_cast<std::size_t>(N), false);
  out.seed = seed;
  out.provenance = "inner-1d";
  std::vector<char> pseudo(static_cast<std::size_t>(N), 0);
  parallel_for(N, [&](Index i) {
    Rng rng = derive_stream(seed, static_cast<std::uint64_t>(i));
    double a = uniform01(rng);
    while (a <= 0.0) a = uniform01(rng);
    const double u = uniform01(rng);
    const double w = weight(a);
    if (!(w >= 0.0 && w <= 1.0)) throw InvalidParameter("sample_inner_1d: weight outside [0,1]");
    const Interval cut = alpha_cut_1d(contour, a, tol).interval();
    const bool left = u < w;
    out.levels(i) = a;
    out.theta(i, 0) = left ? cut.a : cut.b;
    pseudo[static_cast<std::size_t>(i)] = left ? cut.lower_unbounded : cut.upper_unbounded;
  });
  for (std::size_t i = 0; i < pseudo.size(); ++i) out.pseudo[i] = pseudo[i] != 0;
  return out;
}

}  // namespace

InnerSampleSet sample_inner_1d(const PossibilityContour& contour, Index N, double w, std::uint64_t seed,
                               double tol) {
  if (!(w >= 0.0 && w <= 1.0)) throw InvalidParameter("sample_inner_1d: weight outside [0,1]");
  return sample_inner_1d_impl(contour, N, [w](double) { return w; }, seed, tol);
}

InnerSampleSet sample_inner_1d(const PossibilityContour& contour, Index N, const WeightCurve& w,
                               std::uint64_t seed, double tol) {
  return sample_inner_1d_impl(contour, N, [&w](double a) { return std::clamp(w(a), 0.0, 1.0); }, seed, tol);
}

WeightCurve weight_curve(const std::function<double(double)>& posterior_density, const PossibilityContour& contour,
                         const Vector& alpha_grid) {
  std::vector<double> alphas, weights;
  for (Index j = 0; j < alpha_grid.size(); ++j) {
    const double alpha = alpha_grid(j);
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("weight_curve: levels must lie in (0,1)");
    const Interval cut = alpha_cut_1d(contour, alpha, 1e-10).interval();
    if (cut.lower_unbounded) continue;
    const double h = 1e-5 * std::max(cut.width(), 1e-8);
    const double slope = (contour(cut.a + h) - contour(cut.a - h)) / (2.0 * h);
    if (!(slope >= 1e-12)) continue;
    alphas.push_back(alpha);
    weights.push_back(posterior_density(cut.a) / slope);
  }
  WeightCurve curve;
  curve.alpha = Eigen::Map<Vector>(alphas.data(), static_cast<Index>(alphas.size()));
  curve.w = Eigen::Map<Vector>(weights.data(), static_cast<Index>(weights.size()));
  return curve;
}

Vector default_alpha_grid() { return Vector::LinSpaced(19, 0.05, 0.95); }

// ---------------------------------------------------------------- stitched Gaussian

void SAConfig::validate() const {
  if (!(c > 0.0) || !(t0 >= 1.0)) throw InvalidParameter("SAConfig: need c > 0 and t0 >= 1");
  if (!(epsilon > 0.0)) throw InvalidParameter("SAConfig: epsilon must be positive");
  if (max_iter < 1) throw InvalidParameter("SAConfig: max_iter must be positive");
  if (sigma0.size() && (sigma0.array() <= 0.0).any()) throw InvalidParameter("SAConfig: sigma0 must be positive");
}

Matrix representative_points(const Vector& theta_hat, const Matrix& J, const Vector& sigma, double alpha) {
  const Index D = theta_hat.size();
  if (sigma.size() != D || J.rows() != D) throw InvalidParameter("representative_points: dimension mismatch");
  const InfoEigen eig = info_eigen(J);
  const double q = chi2_quantile(1.0 - alpha, static_cast<double>(D));
  Matrix points(D, 2 * D);
  for (Index s = 0; s < D; ++s) {
    const Vector offset = sigma(s) * std::sqrt(q / eig.lambda(s)) * eig.vectors.col(s);
    points.col(2 * s) = theta_hat + offset;
    points.col(2 * s + 1) = theta_hat - offset;
  }
  return points;
}

SigmaFit fit_sigma(const ContourFn& contour, const Vector& theta_hat, const Matrix& J, double alpha,
                   const SAConfig& config) {
  config.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("fit_sigma: alpha must lie in (0,1)");
  const Index D = theta_hat.size();
  if (config.sigma0.size() && config.sigma0.size() != D) throw InvalidParameter("fit_sigma: sigma0 dimension mismatch");
  const double q = chi2_quantile(1.0 - alpha, static_cast<double>(D));
  const double gain = config.normalize_gain ? 1.0 / (2.0 * q * chi2_pdf(q, static_cast<double>(D))) : 1.0;

  SigmaFit fit;
  fit.alpha = alpha;
  fit.sigma = config.sigma0.size() ? config.sigma0 : Vector::Ones(D);
  fit.plausibility.resize(D);
  auto evaluate = [&](const Vector& sigma) {
    const Matrix pts = representative_points(theta_hat, J, sigma, alpha);
    Vector g(D);
    for (Index s = 0; s < D; ++s)
      g(s) = std::max(contour(pts.col(2 * s)), contour(pts.col(2 * s + 1)));
    return g;
  };

  for (int t = 1; t <= config.max_iter; ++t) {
    fit.plausibility = evaluate(fit.sigma);
    const Vector change = config.step(t) * gain * (fit.plausibility.array() - alpha).matrix();
    fit.sigma = (fit.sigma + change).cwiseMax(1e-6);
    fit.iterations = t;
    if (change.cwiseAbs().maxCoeff() < config.epsilon) {
      fit.converged = true;
      break;
    }
  }
  fit.plausibility = evaluate(fit.sigma);
  return fit;
}

SigmaFit fit_sigma(const Model& model, const Data& x, double alpha, const SAConfig& config, Index M,
                   std::uint64_t seed) {
  const Vector theta_hat = fit_mle(model, x);
  const Matrix J = observed_info(model, x, theta_hat);
  auto contour = [&](const Vector& theta) {
    if (!model.in_domain(theta)) return 0.0;
    return contour_mc(model, x, theta, M, seed).value;
  };
  return fit_sigma(contour, theta_hat, J, alpha, config);
}

SigmaTable::SigmaTable(Vector alpha, Matrix sigma, std::vector<bool> converged)
    : alpha_(std::move(alpha)), sigma_(std::move(sigma)), converged_(std::move(converged)) {
  if (alpha_.size() == 0 || sigma_.rows() != alpha_.size() || static_cast<Index>(converged_.size()) != alpha_.size())
    throw InvalidParameter("SigmaTable: inconsistent sizes");
  for (Index i = 1; i < alpha_.size(); ++i)
    if (!(alpha_(i) > alpha_(i - 1))) throw InvalidParameter("SigmaTable: levels must increase");
  if ((sigma_.array() <= 0.0).any()) throw InvalidParameter("SigmaTable: sigma entries must be positive");
}

bool SigmaTable::all_converged() const {
  return std::all_of(converged_.begin(), converged_.end(), [](bool c) { return c; });
}

Vector SigmaTable::operator()(double level) const {
  const Index n = alpha_.size();
  if (level <= alpha_(0)) return sigma_.row(0).transpose();
  if (level >= alpha_(n - 1)) return sigma_.row(n - 1).transpose();
  const Index hi = std::upper_bound(alpha_.data(), alpha_.data() + n, level) - alpha_.data();
  const Index lo = hi - 1;
  const double t = (level - alpha_(lo)) / (alpha_(hi) - alpha_(lo));
  return ((1.0 - t) * sigma_.row(lo) + t * sigma_.row(hi)).transpose();
}

void SigmaTable::write_csv(std::ostream& os, const RunInfo* info) const {
  std::vector<std::string> header{"alpha"};
  for (Index d = 0; d < dim(); ++d) header.push_back("sigma_" + std::to_string(d + 1));
  header.push_back("converged");
  Matrix rows(alpha_.size(), dim() + 2);
  rows.col(0) = alpha_;
  rows.middleCols(1, dim()) = sigma_;
  for (Index i = 0; i < alpha_.size(); ++i) rows(i, dim() + 1) = converged_[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  imlike::write_csv(os, header, rows, info);
}

SigmaTable SigmaTable::read_csv(std::istream& is) {
  const CsvData data = imlike::read_csv(is);
  if (data.header.empty() || data.header[0] != "alpha") throw DatasetError("sigma table: first column must be alpha");
  Index D = 0;
  while (std::find(data.header.begin(), data.header.end(), "sigma_" + std::to_string(D + 1)) != data.header.end()) ++D;
  if (D == 0) throw DatasetError("sigma table: no sigma columns");
  Matrix sigma(data.values.rows(), D);
  for (Index d = 0; d < D; ++d) sigma.col(d) = data.column("sigma_" + std::to_string(d + 1));
  std::vector<bool> converged(static_cast<std::size_t>(data.values.rows()), true);
  if (std::find(data.header.begin(), data.header.end(), "converged") != data.header.end()) {
    const Vector c = data.column("converged");
    for (Index i = 0; i < c.size(); ++i) converged[static_cast<std::size_t>(i)] = c(i) != 0.0;
  }
  return SigmaTable(data.column("alpha"), sigma, converged);
}

SigmaTable fit_sigma_table(const ContourFn& contour, const Vector& theta_hat, const Matrix& J,
                           const Vector& alpha_grid, const SAConfig& config) {
  const Index L = alpha_grid.size();
  if (L == 0) throw InvalidParameter("fit_sigma_table: empty level grid");
  Matrix sigma(L, theta_hat.size());
  std::vector<char> ok(static_cast<std::size_t>(L), 0);
  parallel_for(L, [&](Index i) {
    const SigmaFit fit = fit_sigma(contour, theta_hat, J, alpha_grid(i), config);
    sigma.row(i) = fit.sigma.transpose();
    ok[static_cast<std::size_t>(i)] = fit.converged;
  });
  std::vector<bool> converged(ok.begin(), ok.end());
  return SigmaTable(alpha_grid, sigma, converged);
}

InnerSampleSet sample_inner_md(const Vector& theta_hat, const Matrix& J, const SigmaTable& table, Index N,
                               std::uint64_t seed, bool allow_nonconverged) {
  if (!allow_nonconverged && !table.all_converged())
    throw NumericError("sample_inner_md: sigma table has non-converged levels");
  if (table.dim() != theta_hat.size()) throw InvalidParameter("sample_inner_md: dimension mismatch");
  InnerSampleSet out;
  out.levels.resize(N);
  out.theta.resize(N, theta_hat.size());
  out.pseudo.assign(static_cast<std::size_t>(N), false);
  out.seed = seed;
  out.provenance = "inner-stitched-gaussian";
  parallel_for(N, [&](Index i) {
    Rng rng = derive_stream(seed, static_cast<std::uint64_t>(i));
    double a = uniform01(rng);
    while (a <= 0.0) a = uniform01(rng);
    const Matrix Js = embellish_info(J, table(a));
    out.levels(i) = a;
    out.theta.row(i) = sample_boundary(theta_hat, Js, a, rng).transpose();
  });
  return out;
}

}  // namespace imlike
