#include <doctest.h>

#include "imlike/diagnostics.hpp"
#include "imlike/im_engine.hpp"

#include <cmath>
#include <numbers>

using namespace imlike;
using doctest::Approx;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }
Data single(double v) { return Data::Constant(1, 1, v); }

}  // namespace

TEST_CASE("contour_mc") {
  SUBCASE("one at the MLE") {
    const GammaScale gamma(7.0);
    for (Index M : {100, 1000}) CHECK(contour_mc(gamma, single(14.0), scalar(2.0), M, 3).value == 1.0);
    CHECK(contour_mc(GaussianLocation(), single(0.4), scalar(0.4), 500, 1).value == 1.0);
  }
  SUBCASE("Gaussian location at the 5% point") {
    const McEstimate e = contour_mc(GaussianLocation(), single(0.0), scalar(1.959964), 100000, 42);
    const double oracle = std::erfc(1.959964 / std::sqrt(2.0));
    CHECK(std::abs(e.value - oracle) <= 3.0 * e.std_error);
    CHECK(e.std_error == Approx(std::sqrt(e.value * (1 - e.value) / 1e5)));
  }
  SUBCASE("too few replicates") { CHECK_THROWS_AS(contour_mc(GaussianLocation(), single(0.0), scalar(1.0), 10, 1), InvalidParameter); }
  SUBCASE("same seed gives the same value") {
    const GammaScale gamma(7.0);
    CHECK(contour_mc(gamma, single(14.0), scalar(3.1), 2000, 9).value ==
          contour_mc(gamma, single(14.0), scalar(3.1), 2000, 9).value);
  }
}

TEST_CASE("gamma scale contours") {
  const Vector pivots = [] {
    Rng rng(1);
    Vector p(20000);
    for (Index m = 0; m < p.size(); ++m) p(m) = gamma_draw(rng, 7.0);
    return p;
  }();
  SUBCASE("pivot contour is one at x/n") { CHECK(contour_pivot_gamma(14.0, 7.0, 2.0, pivots) == 1.0); }
  SUBCASE("pivot contour agrees with contour_mc") {
    const GammaScale gamma(7.0);
    for (double t : {0.9, 1.3, 1.7, 2.5, 3.0, 4.0, 5.5}) {
      const double p = contour_pivot_gamma(14.0, 7.0, t, pivots);
      const McEstimate mc = contour_mc(gamma, single(14.0), scalar(t), 5000, 77);
      const double se = std::sqrt(p * (1 - p) / pivots.size() + mc.std_error * mc.std_error);
      CHECK(std::abs(p - mc.value) <= 3.0 * se + 1e-12);
    }
  }
  SUBCASE("scale equivariance with shared pivots") {
    for (double c : {0.1, 3.0, 17.0})
      for (double t : {1.0, 2.2, 4.0})
        CHECK(contour_pivot_gamma(14.0, 7.0, t, pivots) == contour_pivot_gamma(c * 14.0, 7.0, c * t, pivots));
  }
  SUBCASE("sorted pivot class matches the direct count") {
    const GammaPivotContour sorted(7.0, pivots);
    for (double t : {0.9, 1.6, 2.0, 3.3, 6.0}) CHECK(sorted(14.0, t) == contour_pivot_gamma(14.0, 7.0, t, pivots));
  }
  SUBCASE("exact contour matches the pivot count") {
    for (double t : {1.0, 1.5, 2.0, 3.0, 5.0}) {
      const double p = contour_pivot_gamma(14.0, 7.0, t, pivots);
      CHECK(std::abs(contour_gamma_scale_exact(14.0, 7.0, t) - p) <= 4.0 * std::sqrt(p * (1 - p) / 20000.0) + 1e-12);
    }
    CHECK(contour_gamma_scale_exact(14.0, 7.0, 2.0) == 1.0);
    CHECK(contour_gamma_scale_exact(14.0, 7.0, 3.0) == Approx(0.3207).epsilon(1e-3));
    CHECK(contour_gamma_scale_exact(14.0, 7.0, 5.0) == Approx(0.0375).epsilon(1e-2));
  }
}

TEST_CASE("contour_vonmises_cond") {
  const double g = 1.35, u = 0.87, kappa = 4.0;
  CHECK(contour_vonmises_cond(g, u, kappa, g) == 1.0);
  CHECK(contour_vonmises_cond(g, u, kappa, g + std::numbers::pi) == Approx(0.0).epsilon(1e-12));
  SUBCASE("symmetric about g") {
    for (double d : {0.1, 0.5, 1.3, 2.9})
      CHECK(contour_vonmises_cond(g, u, kappa, g + d) == Approx(contour_vonmises_cond(g, u, kappa, g - d)).epsilon(1e-12));
  }
  SUBCASE("monotone in angular distance and periodic") {
    double prev = 1.0;
    for (double d = 0.05; d <= std::numbers::pi; d += 0.05) {
      const double v = contour_vonmises_cond(g, u, kappa, g + d);
      CHECK(v <= prev + 1e-14);
      prev = v;
    }
    CHECK(contour_vonmises_cond(g, u, kappa, g + 0.4 + 2 * std::numbers::pi) ==
          Approx(contour_vonmises_cond(g, u, kappa, g + 0.4)).epsilon(1e-12));
  }
  SUBCASE("matches a Monte Carlo oracle") {
    Rng rng(8);
    const double theta = 2.0;
    int hits = 0;
    const int N = 200000;
    for (int i = 0; i < N; ++i)
      if (std::cos(von_mises_draw(rng, 0.0, kappa * u)) <= std::cos(g - theta)) ++hits;
    const double p = static_cast<double>(hits) / N;
    CHECK(std::abs(contour_vonmises_cond(g, u, kappa, theta) - p) <= 4.0 * std::sqrt(p * (1 - p) / N));
  }
  SUBCASE("uniform limit") {
    // small kappa u: H nearly uniform, so the contour is 1 - d / pi
    CHECK(contour_vonmises_cond(0.0, 1e-9, 1.0, 1.0) == Approx(1.0 - 1.0 / std::numbers::pi).epsilon(1e-6));
  }
  CHECK_THROWS_AS(contour_vonmises_cond(g, 0.0, kappa, 0.0), DegenerateData);
}

TEST_CASE("contour_bf_profile") {
  const BFData lehmann = lehmann_travel();
  CHECK(contour_bf_profile(lehmann, lehmann.mle_difference(), 500, 1).value == 1.0);
  CHECK_THROWS_AS(contour_bf_profile(lehmann, 0.0, 100, 1), InvalidParameter);

  SUBCASE("90% cut contains the MLE difference") {
    BfProfileContour::Options options;
    options.seed = 3;
    const BfProfileContour contour(lehmann, options);
    ContourOptions copts;
    copts.step = 1.0;
    const PossibilityContour pc([&](const Vector& t) { return contour(t(0)).value; },
                                Vector::Constant(1, lehmann.mle_difference()), copts);
    const Interval cut = alpha_cut_1d(pc, 0.1, 1e-4).interval();
    CHECK(cut.contains(-1.444));
    CHECK(cut.a < -1.444 - 0.5);
    CHECK(cut.b > -1.444 + 0.5);
    // compare with the Welch interval, which is of similar size
    const Interval welch = welch_interval(lehmann, 0.1);
    CHECK(cut.width() == Approx(welch.width()).epsilon(0.5));
  }
  SUBCASE("equal variances and large n follow the Wilks limit") {
    const BFData data{200, 200, 0.0, 0.3, 1.0, 1.0};
    for (double phi : {0.1, 0.15, 0.3, 0.45, 0.5}) {
      const double wilks = chi2_sf(-2.0 * bf_profile_rloglik(data, phi), 1.0);
      CHECK(std::abs(contour_bf_profile(data, phi, 4000, 5).value - wilks) <= 0.02);
    }
  }
  SUBCASE("common random numbers give a monotone-ish contour") {
    BfProfileContour::Options options;
    const BfProfileContour contour(lehmann, options);
    double prev = 1.0;
    int violations = 0;
    for (double phi = -1.444; phi < 6.0; phi += 0.25) {
      const double v = contour(phi).value;
      if (v > prev + 0.01) ++violations;
      prev = v;
    }
    CHECK(violations == 0);
  }
  SUBCASE("nuisance grid is at least the plug-in value") {
    BfProfileContour::Options plain, grid;
    grid.nuisance_grid = true;
    const BfProfileContour a(lehmann, plain), b(lehmann, grid);
    for (double phi : {-4.0, 0.5, 2.0}) CHECK(b(phi).value >= a(phi).value);
  }
}

TEST_CASE("contour_grid") {
  const Vector grid = linspace(0.8, 6.0, 200);
  const GammaPivotContour pivots(7.0, 4000, 11);
  const auto contour = contour_grid([&](double t) { return pivots(14.0, t); }, grid, 2.0, 0.01);
  SUBCASE("reproduces the shape of the gamma contour") {
    const ContourGrid& cache = *contour.grid();
    Index best = 0;
    cache.plausibility.maxCoeff(&best);
    CHECK(cache.theta(best, 0) == Approx(2.0).epsilon(1e-12));
    CHECK(contour(2.0) == 1.0);
    CHECK(contour(3.0) > 0.1);
    CHECK(contour(5.0) < 0.1);
  }
  SUBCASE("monotone on each side of the mode") {
    const ContourGrid& cache = *contour.grid();
    for (Index i = 1; i < cache.theta.rows(); ++i) {
      if (cache.theta(i, 0) <= 2.0) {
        CHECK(cache.plausibility(i) >= cache.plausibility(i - 1));
      } else {
        CHECK(cache.plausibility(i) <= cache.plausibility(i - 1));
      }
    }
  }
  SUBCASE("interpolation hits grid values") {
    const ContourGrid& cache = *contour.grid();
    for (Index i = 0; i < cache.theta.rows(); i += 17) CHECK(contour(cache.theta(i, 0)) == cache.plausibility(i));
  }
  SUBCASE("mode must be bracketed") {
    CHECK_THROWS_AS(contour_grid([&](double t) { return pivots(14.0, t); }, linspace(2.5, 6.0, 50)), InvalidParameter);
  }
  SUBCASE("identical values regardless of thread count") {
    setenv("IMLIKE_THREADS", "3", 1);
    const auto again = contour_grid([&](double t) { return pivots(14.0, t); }, grid, 2.0, 0.01);
    unsetenv("IMLIKE_THREADS");
    CHECK(again.grid()->plausibility == contour.grid()->plausibility);
  }
}
