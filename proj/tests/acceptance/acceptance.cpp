// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "imlike/imlike.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace imlike;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) { return format_number(v); }

std::string band(double lo, double hi) { return "[" + fmt(lo) + ", " + fmt(hi) + "]"; }

// gamma scale example: one observation x = 14 of Gamma(shape 7, scale theta)
constexpr double kGammaX = 14.0;
constexpr double kGammaN = 7.0;

PossibilityContour gamma_contour() {
  ContourOptions options;
  options.lower = Vector::Zero(1);
  options.step = 2.0 / std::sqrt(kGammaN);
  return PossibilityContour([](const Vector& t) { return contour_gamma_scale_exact(kGammaX, kGammaN, t(0)); },
                            Vector::Constant(1, kGammaX / kGammaN), options);
}

double haar_density(double t) {
  if (!(t > 0.0)) return 0.0;
  return std::exp(kGammaN * std::log(kGammaX) - (kGammaN + 1.0) * std::log(t) - kGammaX / t - std::lgamma(kGammaN));
}

double haar_cdf(double t) { return t > 0.0 ? gamma_q(kGammaN, kGammaX / t) : 0.0; }

InnerSampleSet haar_draws(Index N, std::uint64_t seed) {
  InnerSampleSet s;
  s.theta.resize(N, 1);
  s.levels = Vector::Zero(N);
  s.pseudo.assign(static_cast<std::size_t>(N), false);
  for (Index i = 0; i < N; ++i) {
    Rng rng = derive_stream(seed, static_cast<std::uint64_t>(i));
    s.theta(i, 0) = kGammaX / gamma_draw(rng, kGammaN);
  }
  return s;
}

// ---------------------------------------------------------------- criteria

Outcome ac1(std::uint64_t seed) {
  const GaussianLocation gauss(Matrix::Identity(1, 1));
  const UniformityResult g = validity_sim(gauss, Vector::Zero(1), 5, 2000, 1000, seed);
  const GammaScale gamma(1.0);
  const UniformityResult h = validity_sim(gamma, Vector::Constant(1, 2.0), 7, 2000, 1000, seed + 1);
  const bool pass = g.ks <= 0.035 && h.ks <= 0.035;
  return {pass, "KS gaussian-loc " + fmt(g.ks) + ", gamma-scale " + fmt(h.ks) + " (limit 0.035, 2000 reps)"};
}

Outcome ac2(std::uint64_t seed) {
  const PossibilityContour contour = gamma_contour();
  const Vector grid = default_alpha_grid();
  const Index N = 10000;
  const Curve half = noncredibility_curve(sample_inner_1d(contour, N, 0.5, seed), contour, grid);
  const WeightCurve w = weight_curve(haar_density, contour, grid);
  const Curve curve = noncredibility_curve(sample_inner_1d(contour, N, w, seed + 1), contour, grid);
  const Curve haar = noncredibility_curve(haar_draws(N, seed + 2), contour, grid);
  const double worst = std::max({half.max_abs_deviation(), curve.max_abs_deviation(), haar.max_abs_deviation()});
  return {worst <= 0.02, "max |noncred - alpha|: w=1/2 " + fmt(half.max_abs_deviation()) + ", weight curve " +
                             fmt(curve.max_abs_deviation()) + ", right-Haar " + fmt(haar.max_abs_deviation()) +
                             " (limit 0.02)"};
}

Outcome ac3(std::uint64_t seed) {
  const PossibilityContour contour = gamma_contour();
  const WeightCurve w = weight_curve(haar_density, contour, default_alpha_grid());
  const InnerSampleSet s = sample_inner_1d(contour, 10000, w, seed);
  Vector draws = s.theta.col(0);
  std::sort(draws.data(), draws.data() + draws.size());
  const double n = static_cast<double>(draws.size());
  double sup = 0.0;
  for (Index i = 0; i < draws.size(); ++i) {
    const double F = haar_cdf(draws(i));
    sup = std::max({sup, std::abs((i + 1) / n - F), std::abs(i / n - F)});
  }
  return {sup <= 0.03, "sup |F_inner - F_haar| = " + fmt(sup) + " (limit 0.03)"};
}

Outcome ac4() {
  const Vector grid = default_alpha_grid();
  const GaussianPossibilityParams params(Vector::Zero(1), Matrix::Identity(1, 1));
  const PossibilityContour gauss([params](const Vector& t) { return gaussian_contour(t, params); }, Vector::Zero(1));
  const WeightCurve wg = weight_curve([](double t) { return normal_pdf(t); }, gauss, grid);
  const double dev = (wg.w.array() - 0.5).abs().maxCoeff();
  const double w05 = weight_curve(haar_density, gamma_contour(), grid)(0.5);
  const bool pass = wg.w.size() == grid.size() && dev <= 1e-3 && std::abs(w05 - 0.45) <= 0.02;
  return {pass, "gaussian max |w - 1/2| = " + fmt(dev) + " (limit 1e-3); gamma w_0.5 = " + fmt(w05) +
                    " (target 0.45 +- 0.02)"};
}

Outcome ac5(Index reps, std::uint64_t seed) {
  CoverageOptions options;
  options.reps = reps;
  options.alpha = 0.1;
  options.M = 2000;
  options.posterior_draws = 4000;
  options.seed = seed;
  const auto rows = bf_coverage_table(BFSettings{}, options);
  // rows: jeffreys, right-haar, welch, im
  const double half = reps >= 2000 ? 0.02 : 0.07;
  const double target[4] = {0.861, 0.929, 0.881, 0.904};
  bool pass = true;
  std::ostringstream os;
  for (int k = 0; k < 4; ++k) {
    const bool ok = std::abs(rows[k].coverage - target[k]) <= half + 1e-12;
    pass = pass && ok;
    os << rows[k].method << " " << fmt(rows[k].coverage) << " in " << band(target[k] - half, target[k] + half)
       << (ok ? "" : " (out)") << ", len " << fmt(rows[k].mean_length) << "; ";
  }
  const double jeff = rows[0].mean_length, haar = rows[1].mean_length, welch = rows[2].mean_length,
               im = rows[3].mean_length;
  // IM and Welch lengths agree to 10% relative; both sit strictly between Jeffreys and right-Haar
  const bool order = jeff < std::min(im, welch) && std::max(im, welch) < haar && std::abs(im / welch - 1.0) <= 0.10;
  os << "length order " << (order ? "ok" : "violated") << " (reps " << reps << ")";
  return {pass && order, os.str()};
}

Outcome ac6(std::uint64_t seed) {
  GammaBvmOptions options;
  options.seed = seed;
  options.draws = 20000;
  options.M = 1000;
  std::vector<double> d;
  std::ostringstream os;
  for (Index n : {20, 80, 320}) {
    const GammaBvmResult r = gamma_bvm_study(n, options);
    d.push_back(r.discrepancy);
    os << "n=" << n << " " << fmt(r.discrepancy) << (r.converged ? "" : " (sigma not converged)") << "; ";
  }
  const bool pass = d[0] > d[1] && d[1] > d[2] && d[2] <= 0.05;
  os << "strictly decreasing and final <= 0.05";
  return {pass, os.str()};
}

Outcome ac7(std::uint64_t seed) {
  const CsvData csv = read_csv_file(std::string(IMLIKE_DATA_DIR) + "/wheel_regime.csv");
  const AnglesData data(csv.column("angle"), 4.0);
  const PolarStats ps = polar_stats(data);
  const double k = data.kappa * ps.u;
  const Index K = 4001;
  ContourGrid joint{Matrix(K, 1), Vector(K)};
  joint.theta.col(0) = linspace(ps.g - std::numbers::pi, ps.g + std::numbers::pi, K);
  parallel_for(K, [&](Index i) { joint.plausibility(i) = contour_vonmises_cond(ps.g, ps.u, data.kappa, joint.theta(i, 0)); });

  const Index N = 10000;
  InnerSampleSet bayes;
  bayes.theta.resize(N, 1);
  bayes.levels = Vector::Zero(N);
  bayes.pseudo.assign(static_cast<std::size_t>(N), false);
  for (Index i = 0; i < N; ++i) {
    Rng rng = derive_stream(seed, static_cast<std::uint64_t>(i));
    bayes.theta(i, 0) = von_mises_draw(rng, ps.g, k);
  }
  const Vector grid = default_alpha_grid();
  const Vector phi = linspace(-1.0, 1.0, 513);

  auto curves = [&](double a) {
    const ScalarMap m = [a](const Vector& t) { return std::cos(a * t(0)); };
    const PossibilityContour marg = extension_contour(joint, m, phi);
    const Curve bayes_curve = noncredibility_curve(pushforward(bayes, m), marg, grid);
    const Curve inner_curve = noncredibility_curve(sample_inner_1d(marg, N, 0.5, seed + 1), marg, grid);
    return std::pair{bayes_curve, inner_curve};
  };
  const auto [bayes1, inner1] = curves(1.0);
  const auto [bayes15, inner15] = curves(1.5);
  double late = 0.0;
  for (Index j = 0; j < grid.size(); ++j)
    if (grid(j) >= 0.3 - 1e-12) late = std::max(late, std::abs(inner15.value(j) - grid(j)));
  const bool pass = bayes1.max_abs_deviation() <= 0.03 && bayes15.min_excess() <= -0.05 && late <= 0.03;
  return {pass, "cos: Bayes max dev " + fmt(bayes1.max_abs_deviation()) + " (limit 0.03, inner " +
                    fmt(inner1.max_abs_deviation()) + "); cos 1.5: Bayes min excess " + fmt(bayes15.min_excess()) +
                    " (need <= -0.05), pseudo-inner max dev for alpha >= 0.3 " + fmt(late) + " (limit 0.03)"};
}

Outcome ac8(std::uint64_t seed) {
  const Vector grid = default_alpha_grid();
  const Curve bounded = ocd_study(OcdCase::bounded, Vector::Constant(1, 2.0), grid, 20000, seed);
  Vector x(2);
  x << 0.1, 3.0;
  const Curve norm = ocd_study(OcdCase::squared_norm, x, grid, 20000, seed + 1);
  const Curve linear = ocd_study(OcdCase::linear, Vector::Constant(1, 2.0), grid, 20000, seed + 2);
  const bool pass = bounded.max_excess() >= 0.05 && norm.max_excess() >= 0.05 && linear.max_abs_deviation() <= 0.02;
  return {pass, "max excess bounded " + fmt(bounded.max_excess()) + ", squared norm " + fmt(norm.max_excess()) +
                    " (need >= 0.05); linear max dev " + fmt(linear.max_abs_deviation()) + " (limit 0.02)"};
}

Outcome ac9(std::uint64_t seed) {
  const Vector grid = default_alpha_grid();
  std::ostringstream os;

  // Gaussian location, D = 2, Monte Carlo contour
  const GaussianLocation gauss(Matrix::Identity(2, 2));
  Rng rng(seed);
  const Data xg = gauss.sample(Vector::Zero(2), 10, rng);
  double gauss_dev = 0.0;
  for (Index j = 0; j < grid.size(); ++j) {
    const SigmaFit fit = fit_sigma(gauss, xg, grid(j), SAConfig{}, 20000, seed + 1);
    gauss_dev = std::max(gauss_dev, (fit.sigma.array() - 1.0).abs().maxCoeff());
  }
  os << "gaussian max |sigma - 1| " << fmt(gauss_dev) << " (limit 0.05); ";

  // gamma shape-scale
  const GammaShapeScale model;
  const Data x = model.sample(model.to_theta(7.0, 3.0), 50, rng);
  const Vector hat = fit_mle(model, x);
  const Matrix J = observed_info(model, x, hat);
  const Index M = 4000;
  const std::uint64_t cseed = seed + 2;
  const ContourFn contour = [&](const Vector& t) {
    return model.in_domain(t) ? contour_mc(model, x, t, M, cseed).value : 0.0;
  };
  const SigmaTable table = fit_sigma_table(contour, hat, J, grid);
  double rep_dev = 0.0;
  for (Index j = 0; j < grid.size(); ++j) {
    const Matrix pts = representative_points(hat, J, table.sigma().row(j).transpose(), grid(j));
    for (Index s = 0; s < 2; ++s) {
      const double top = std::max(contour(pts.col(2 * s)), contour(pts.col(2 * s + 1)));
      rep_dev = std::max(rep_dev, std::abs(top - grid(j)));
    }
  }
  os << "gamma representative max |pi - alpha| " << fmt(rep_dev) << " (limit 0.02); ";

  // inclusion: exterior points of the embellished ellipsoid, spread over levels
  const Index P = 1000;
  double worst = -1.0;
  Index violations = 0;
  Matrix points(P, 2);
  Vector levels(P);
  for (Index i = 0; i < P; ++i) {
    Rng r = derive_stream(seed + 3, static_cast<std::uint64_t>(i));
    const Index j = static_cast<Index>(uniform01(r) * static_cast<double>(grid.size())) % grid.size();
    const double alpha = grid(j);
    const Vector sigma = table.sigma().row(j).transpose();
    const Vector boundary = sample_boundary(hat, embellish_info(J, sigma), alpha, r);
    const double stretch = 1.0 + 0.5 * uniform01(r);
    points.row(i) = (hat + stretch * (boundary - hat)).transpose();
    levels(i) = alpha;
  }
  Vector values(P);
  parallel_for(P, [&](Index i) { values(i) = contour(points.row(i).transpose()); });
  for (Index i = 0; i < P; ++i) {
    worst = std::max(worst, values(i) - levels(i));
    if (values(i) > levels(i)) ++violations;
  }
  os << "exterior points with pi > alpha: " << violations << "/" << P << " (max excess " << fmt(worst) << ")";
  const bool pass = gauss_dev <= 0.05 && rep_dev <= 0.02 && violations == 0 && table.all_converged();
  return {pass, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  Index reps = 2000;
  std::uint64_t seed = 7;
  std::vector<int> only;
  app.add_option("--reps", reps, "coverage replicates for AC5; below 2000 the smoke bands (+-0.07) apply")
      ->capture_default_str();
  app.add_option("--seed", seed, "master seed")->capture_default_str();
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);

  using Check = std::function<Outcome()>;
  const std::vector<std::pair<std::string, Check>> checks{
      {"AC1 validity uniformity", [&] { return ac1(seed); }},
      {"AC2 gamma non-credibility curves", [&] { return ac2(seed); }},
      {"AC3 inner approximation matches right-Haar", [&] { return ac3(seed); }},
      {"AC4 weight curve constants", [&] { return ac4(); }},
      {"AC5 Behrens-Fisher coverage table", [&] { return ac5(reps, seed); }},
      {"AC6 Bernstein-von Mises trend", [&] { return ac6(seed); }},
      {"AC7 marginalization dichotomy", [&] { return ac7(seed); }},
      {"AC8 over-confidence curves", [&] { return ac8(seed); }},
      {"AC9 stitched Gaussian fit", [&] { return ac9(seed); }},
  };
  int failures = 0;
  for (std::size_t k = 0; k < checks.size(); ++k) {
    if (!only.empty() && std::find(only.begin(), only.end(), static_cast<int>(k + 1)) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = checks[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS " : "FAIL ") << checks[k].first << ": " << o.detail << " [" << fmt(secs) << " s]"
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
