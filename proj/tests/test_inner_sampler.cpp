#include <doctest.h>

#include "imlike/diagnostics.hpp"
#include "imlike/im_engine.hpp"
#include "imlike/inner_sampler.hpp"
#include "imlike/marginal.hpp"

#include <cmath>
#include <sstream>

using namespace imlike;
using doctest::Approx;

namespace {

PossibilityContour gaussian_location_contour(double x) {
  const GaussianPossibilityParams params(Vector::Constant(1, x), Matrix::Identity(1, 1));
  return PossibilityContour([params](const Vector& t) { return gaussian_contour(t, params); }, Vector::Constant(1, x));
}

PossibilityContour gamma_contour() {
  ContourOptions options;
  options.lower = Vector::Zero(1);
  return PossibilityContour([](const Vector& t) { return contour_gamma_scale_exact(14.0, 7.0, t(0)); },
                            Vector::Constant(1, 2.0), options);
}

// inverse gamma right-Haar posterior for (n=7, x=14)
double haar_density(double t) {
  return t > 0 ? std::exp(7.0 * std::log(14.0) - 8.0 * std::log(t) - 14.0 / t - std::lgamma(7.0)) : 0.0;
}

double sup_cdf_distance(Vector draws, const std::function<double(double)>& cdf) {
  std::sort(draws.data(), draws.data() + draws.size());
  const double n = static_cast<double>(draws.size());
  double worst = 0.0;
  for (Index i = 0; i < draws.size(); ++i) {
    const double F = cdf(draws(i));
    worst = std::max({worst, std::abs((i + 1) / n - F), std::abs(i / n - F)});
  }
  return worst;
}

}  // namespace

TEST_CASE("sample_inner_1d") {
  SUBCASE("Gaussian location recovers N(x, 1)") {
    const InnerSampleSet s = sample_inner_1d(gaussian_location_contour(0.0), 10000, 0.5, 1);
    CHECK(sup_cdf_distance(s.theta.col(0), [](double t) { return normal_cdf(t); }) <= 0.02);
  }
  SUBCASE("gamma with w = 1/2 follows the half-contour CDF") {
    const auto contour = gamma_contour();
    const InnerSampleSet s = sample_inner_1d(contour, 10000, 0.5, 2);
    auto cdf = [&](double t) { return t <= 2.0 ? 0.5 * contour(t) : 1.0 - 0.5 * contour(t); };
    CHECK(sup_cdf_distance(s.theta.col(0), cdf) <= 0.02);
    // each draw sits on its level's cut boundary
    for (Index i = 0; i < 200; ++i) CHECK(contour(s.theta(i, 0)) == Approx(s.levels(i)).epsilon(1e-4));
  }
  SUBCASE("w = 1 puts every draw left of the mode") {
    const InnerSampleSet s = sample_inner_1d(gamma_contour(), 2000, 1.0, 3);
    CHECK((s.theta.col(0).array() <= 2.0).all());
  }
  SUBCASE("endpoint weight neutrality") {
    const InnerSampleSet s = sample_inner_1d(gamma_contour(), 10000, 0.5, 4);
    double sum = 0.0;
    Index count = 0;
    for (Index i = 0; i < s.size(); ++i)
      if (s.theta(i, 0) < 2.0) {
        sum += s.levels(i);
        ++count;
      }
    CHECK(sum / count == Approx(0.5).epsilon(3.0 * std::sqrt(1.0 / 12.0 / count) / 0.5));
    CHECK(static_cast<double>(count) / s.size() == Approx(0.5).epsilon(0.03));
  }
  SUBCASE("calibration on the 19-level grid") {
    const auto contour = gamma_contour();
    const InnerSampleSet s = sample_inner_1d(contour, 10000, 0.5, 5);
    const Curve c = noncredibility_curve(s, contour, default_alpha_grid());
    CHECK(c.max_abs_deviation() <= 0.02);
  }
  SUBCASE("deterministic for a seed, independent of threads") {
    const auto contour = gamma_contour();
    const InnerSampleSet a = sample_inner_1d(contour, 300, 0.5, 6);
    setenv("IMLIKE_THREADS", "4", 1);
    const InnerSampleSet b = sample_inner_1d(contour, 300, 0.5, 6);
    unsetenv("IMLIKE_THREADS");
    CHECK(a.theta == b.theta);
    CHECK(a.levels == b.levels);
  }
  SUBCASE("bounded-away contours yield pseudo draws at the range edge") {
    const Vector theta = Vector::LinSpaced(101, -1.0, 1.0);
    const Vector values = (1.0 - 0.7 * theta.array().abs()).matrix();
    const InnerSampleSet s = sample_inner_1d(contour_from_grid(theta, values), 2000, 0.5, 7);
    for (Index i = 0; i < s.size(); ++i) {
      if (s.levels(i) < 0.29) {
        CHECK(s.pseudo[static_cast<std::size_t>(i)]);
        CHECK(std::abs(s.theta(i, 0)) == 1.0);
      }
      if (s.levels(i) > 0.31) CHECK_FALSE(s.pseudo[static_cast<std::size_t>(i)]);
    }
  }
  SUBCASE("CSV header") {
    const InnerSampleSet s = sample_inner_1d(gaussian_location_contour(0.0), 3, 0.5, 1);
    std::ostringstream os;
    RunInfo info{"sample --model gaussian-loc", 1};
    write_samples_csv(os, s, &info);
    const std::string text = os.str();
    CHECK(text.rfind("# imlike", 0) == 0);
    CHECK(text.find("\nlevel,theta_1\n") != std::string::npos);
  }
}

TEST_CASE("weight_curve") {
  const Vector grid = default_alpha_grid();
  SUBCASE("Gaussian location with its flat-prior posterior") {
    const WeightCurve w = weight_curve([](double t) { return normal_pdf(t); }, gaussian_location_contour(0.0), grid);
    REQUIRE(w.w.size() == grid.size());
    for (Index i = 0; i < w.w.size(); ++i) CHECK(w.w(i) == Approx(0.5).epsilon(2e-3));
  }
  SUBCASE("gamma with the right-Haar posterior") {
    const WeightCurve w = weight_curve(haar_density, gamma_contour(), grid);
    CHECK(w(0.5) == Approx(0.45).epsilon(0.02 / 0.45));
    CHECK((w.w.array() >= 0.0).all());
    CHECK((w.w.array() <= 1.0).all());
  }
  SUBCASE("brute force: w equals the posterior mass left of the mode per unit level") {
    // d/dalpha of Q(Theta <= a(alpha)) by finite differences along the cut endpoints
    const auto contour = gamma_contour();
    const WeightCurve w = weight_curve(haar_density, contour, grid);
    auto haar_cdf = [](double t) { return gamma_q(7.0, 14.0 / t); };
    for (double alpha : {0.2, 0.5, 0.8}) {
      const double h = 1e-4;
      const double a1 = alpha_cut_1d(contour, alpha - h, 1e-12).interval().a;
      const double a2 = alpha_cut_1d(contour, alpha + h, 1e-12).interval().a;
      CHECK(w(alpha) == Approx((haar_cdf(a2) - haar_cdf(a1)) / (2 * h)).epsilon(2e-3));
    }
  }
}

TEST_CASE("embellish_info") {
  Matrix J(2, 2);
  J << 3.0, 1.0, 1.0, 2.0;
  CHECK(embellish_info(J, Vector::Ones(2)).isApprox(J, 1e-12));
  CHECK(embellish_info(Matrix::Constant(1, 1, 4.0), Vector::Constant(1, 2.0))(0, 0) == Approx(1.0));
  SUBCASE("doubling sigma_s stretches the cut along e_s") {
    const InfoEigen eig = info_eigen(J);
    Vector sigma = Vector::Ones(2);
    sigma(0) = 2.0;
    const Matrix Js = embellish_info(J, sigma);
    const Vector e0 = eig.vectors.col(0), e1 = eig.vectors.col(1);
    CHECK(e0.dot(Js * e0) == Approx(e0.dot(J * e0) / 4.0));
    CHECK(e1.dot(Js * e1) == Approx(e1.dot(J * e1)));
    CHECK(eig.lambda(0) >= eig.lambda(1));
  }
  CHECK_THROWS_AS(embellish_info(J, Vector::Zero(2)), InvalidParameter);
}

TEST_CASE("sample_boundary") {
  Rng rng(12);
  const Vector hat = Vector::Constant(1, 0.3);
  CHECK(sample_boundary(hat, Matrix::Identity(1, 1), 1.0, rng)(0) == Approx(0.3));
  SUBCASE("D=1 at 0.05 gives +-1.96 with equal frequency") {
    int plus = 0;
    const int N = 4000;
    for (int i = 0; i < N; ++i) {
      const double t = sample_boundary(Vector::Zero(1), Matrix::Identity(1, 1), 0.05, rng)(0);
      CHECK(std::abs(t) == Approx(1.959963984540054).epsilon(1e-10));
      if (t > 0) ++plus;
    }
    CHECK(std::abs(plus - N / 2) <= 3.0 * std::sqrt(N / 4.0));
  }
  SUBCASE("quadratic form equals the chi-square quantile") {
    Matrix J(3, 3);
    J << 4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 1.0;
    const Vector center = Vector::LinSpaced(3, 1.0, 3.0);
    for (int i = 0; i < 100; ++i) {
      const Vector t = sample_boundary(center, J, 0.2, rng);
      const Vector r = t - center;
      CHECK(r.dot(J * r) == Approx(chi2_quantile(0.8, 3)).epsilon(1e-10));
    }
  }
}

TEST_CASE("fit_sigma") {
  SUBCASE("Gaussian location converges to ones") {
    Matrix J(2, 2);
    J << 2.0, 0.5, 0.5, 1.0;
    const GaussianPossibilityParams params(Vector::Zero(2), J.inverse());
    const ContourFn contour = [&](const Vector& t) { return gaussian_contour(t, params); };
    for (double alpha : {0.05, 0.5, 0.9}) {
      const SigmaFit fit = fit_sigma(contour, Vector::Zero(2), J, alpha);
      CHECK(fit.converged);
      CHECK((fit.sigma.array() - 1.0).abs().maxCoeff() <= 1e-6);
    }
  }
  SUBCASE("recovers a known inflation") {
    // true contour is the Gaussian one with covariance scaled by 1.3^2 along both axes
    Matrix J = Matrix::Identity(2, 2);
    J(0, 0) = 4.0;
    const GaussianPossibilityParams params(Vector::Zero(2), 1.69 * J.inverse());
    const ContourFn contour = [&](const Vector& t) { return gaussian_contour(t, params); };
    const SigmaFit fit = fit_sigma(contour, Vector::Zero(2), J, 0.1);
    CHECK(fit.converged);
    CHECK(fit.sigma(0) == Approx(1.3).epsilon(0.01));
    CHECK(fit.sigma(1) == Approx(1.3).epsilon(0.01));
    CHECK((fit.plausibility.array() - 0.1).abs().maxCoeff() <= 0.01);
  }
  SUBCASE("monotone response to inflation") {
    const GammaShapeScale model;
    Rng rng(21);
    const Data x = model.sample(model.to_theta(7.0, 3.0), 20, rng);
    const Vector hat = fit_mle(model, x);
    const Matrix J = observed_info(model, x, hat);
    const ContourFn contour = [&](const Vector& t) { return contour_mc(model, x, t, 1000, 5).value; };
    const SigmaFit fit = fit_sigma(contour, hat, J, 0.1);
    const Matrix pts = representative_points(hat, J, 1.5 * fit.sigma, 0.1);
    for (Index k = 0; k < pts.cols(); ++k) CHECK(contour(pts.col(k)) <= 0.1);
  }
  SUBCASE("non-converged flag") {
    SAConfig config;
    config.max_iter = 1;
    config.epsilon = 1e-12;
    const GaussianPossibilityParams params(Vector::Zero(1), Matrix::Constant(1, 1, 4.0));
    const SigmaFit fit = fit_sigma([&](const Vector& t) { return gaussian_contour(t, params); }, Vector::Zero(1),
                                   Matrix::Identity(1, 1), 0.2, config);
    CHECK_FALSE(fit.converged);
    CHECK(fit.iterations == 1);
  }
  SUBCASE("step family") {
    const SAConfig config;
    double sum = 0.0, sum2 = 0.0;
    for (int t = 1; t <= 100000; ++t) {
      sum += config.step(t);
      sum2 += config.step(t) * config.step(t);
    }
    CHECK(sum > 10.0);  // harmonic growth
    CHECK(sum2 < config.c * config.c * 1.7);  // bounded by c^2 pi^2 / 6
  }
}

TEST_CASE("SigmaTable") {
  Vector alpha(3);
  alpha << 0.1, 0.5, 0.9;
  Matrix sigma(3, 2);
  sigma << 1.2, 1.0, 1.1, 1.0, 1.0, 0.9;
  const SigmaTable table(alpha, sigma, {true, true, false});
  CHECK(table(0.3)(0) == Approx(1.15));
  CHECK(table(0.01)(0) == 1.2);
  CHECK(table(0.99)(1) == 0.9);
  CHECK_FALSE(table.all_converged());
  std::stringstream ss;
  table.write_csv(ss);
  CHECK(ss.str().rfind("alpha,sigma_1,sigma_2", 0) == 0);
  const SigmaTable back = SigmaTable::read_csv(ss);
  CHECK(back.sigma().isApprox(sigma));
  CHECK(back.converged() == table.converged());
  CHECK_THROWS_AS(SigmaTable(alpha, -sigma, {true, true, true}), InvalidParameter);
}

TEST_CASE("sample_inner_md") {
  Matrix J(2, 2);
  J << 2.0, 0.5, 0.5, 1.0;
  const Vector hat = Vector::Zero(2);
  const SigmaTable ones(default_alpha_grid(), Matrix::Ones(19, 2), std::vector<bool>(19, true));
  SUBCASE("levels are uniform") {
    const InnerSampleSet s = sample_inner_md(hat, J, ones, 10000, 1);
    for (double a : {0.1, 0.5, 0.9}) {
      const double frac = static_cast<double>((s.levels.array() <= a).count()) / s.size();
      CHECK(std::abs(frac - a) <= 3.0 * std::sqrt(a * (1 - a) / s.size()));
    }
  }
  SUBCASE("exact Gaussian contour: draws cover the cuts at the nominal rate") {
    const GaussianPossibilityParams params(hat, J.inverse());
    const InnerSampleSet s = sample_inner_md(hat, J, ones, 10000, 2);
    const Curve c = noncredibility_curve(s.theta, [&](const Vector& t) { return gaussian_contour(t, params); },
                                         default_alpha_grid());
    CHECK(c.max_abs_deviation() <= 0.02);
    CHECK(bvm_check(s.theta, hat, J, default_alpha_grid()) <= 0.02);
  }
  SUBCASE("non-converged tables are refused") {
    const SigmaTable bad(default_alpha_grid(), Matrix::Ones(19, 2), std::vector<bool>(19, false));
    CHECK_THROWS_AS(sample_inner_md(hat, J, bad, 10, 1), NumericError);
    CHECK(sample_inner_md(hat, J, bad, 10, 1, true).size() == 10);
  }
  SUBCASE("gamma shape-scale at n=200: conservative and close to the BvM covariance") {
    const GammaShapeScale model;
    Rng rng(33);
    const Data x = model.sample(model.to_theta(7.0, 3.0), 200, rng);
    const Vector theta_hat = fit_mle(model, x);
    const Matrix Jx = observed_info(model, x, theta_hat);
    const ContourFn contour = [&](const Vector& t) { return contour_mc(model, x, t, 1000, 9).value; };
    Vector grid(5);
    grid << 0.05, 0.25, 0.5, 0.75, 0.95;
    const SigmaTable table = fit_sigma_table(contour, theta_hat, Jx, grid);
    const InnerSampleSet s = sample_inner_md(theta_hat, Jx, table, 4000, 3, true);
    const Matrix centered = s.theta.rowwise() - s.theta.colwise().mean();
    const Matrix cov = centered.transpose() * centered / (s.size() - 1.0);
    const Matrix target = Jx.inverse();
    for (Index i = 0; i < 2; ++i) CHECK(cov(i, i) == Approx(target(i, i)).epsilon(0.15));
    // contour evaluations dominate the cost, so check conservativeness on a subset
    const Curve c = noncredibility_curve(s.theta.topRows(500), contour, grid);
    CHECK(c.min_excess() >= -3.0 * std::sqrt(0.25 / 500.0));
  }
}
