#include "imlike/diagnostics.hpp"

#include "imlike/random.hpp"
#include "imlike/special.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>

namespace imlike {

UniformityResult uniformity(Vector values) {
  const Index n = values.size();
  if (n == 0) throw InvalidParameter("uniformity: no values");
  std::sort(values.data(), values.data() + n);
  UniformityResult r;
  double ks = 0.0, excess = -1.0;
  for (Index i = 0; i < n; ++i) {
    const double u = values(i);
    // F jumps at u from i/n to (i+1)/n; ties resolve at the last copy.
    const double after = static_cast<double>(i + 1) / static_cast<double>(n);
    const double before = static_cast<double>(i) / static_cast<double>(n);
    ks = std::max({ks, after - u, u - before});
    if (i + 1 == n || values(i + 1) > u) excess = std::max(excess, after - u);
  }
  r.values = std::move(values);
  r.ks = ks;
  r.max_excess = std::max(excess, 0.0);
  return r;
}

UniformityResult validity_sim(const Model& model, const Vector& theta_true, Index n_obs,
                              const std::function<double(const Data&, Index)>& contour_at_truth, Index reps,
                              std::uint64_t seed) {
  if (reps < 1) throw InvalidParameter("validity_sim: need at least one replication");
  Vector values(reps);
  parallel_for(reps, [&](Index r) {
    Rng rng = derive_stream(seed, static_cast<std::uint64_t>(r));
    const Data x = model.sample(theta_true, n_obs, rng);
    values(r) = contour_at_truth(x, r);
  });
  return uniformity(std::move(values));
}

UniformityResult validity_sim(const Model& model, const Vector& theta_true, Index n_obs, Index reps, Index M,
                              std::uint64_t seed) {
  const std::uint64_t inner_seed = derive_seed(seed, 0xC0FFEEULL);
  return validity_sim(
      model, theta_true, n_obs,
      [&](const Data& x, Index r) {
        return contour_mc(model, x, theta_true, M, derive_seed(inner_seed, static_cast<std::uint64_t>(r))).value;
      },
      reps, seed);
}

// ---------------------------------------------------------------- Behrens-Fisher comparisons

double welch_df(const BFData& data) {
  data.validate();
  const double v1 = data.sd1 * data.sd1 / data.n1;
  const double v2 = data.sd2 * data.sd2 / data.n2;
  return (v1 + v2) * (v1 + v2) / (v1 * v1 / (data.n1 - 1.0) + v2 * v2 / (data.n2 - 1.0));
}

Interval welch_interval(const BFData& data, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("welch_interval: alpha must lie in (0,1)");
  const double se = std::sqrt(data.sd1 * data.sd1 / data.n1 + data.sd2 * data.sd2 / data.n2);
  const double half = student_t_quantile(1.0 - 0.5 * alpha, welch_df(data)) * se;
  return {data.mle_difference() - half, data.mle_difference() + half};
}

Vector bayes_bf_sample(const BFData& data, BfPrior prior, Index N, std::uint64_t seed) {
  data.validate();
  const double n1 = data.n1, n2 = data.n2;
  double scale1, scale2, df1, df2;
  if (prior == BfPrior::right_haar) {
    scale1 = data.sd1 / std::sqrt(n1);
    scale2 = data.sd2 / std::sqrt(n2);
    df1 = n1 - 1.0;
    df2 = n2 - 1.0;
  } else {
    scale1 = std::sqrt((n1 - 1.0) * data.sd1 * data.sd1) / n1;
    scale2 = std::sqrt((n2 - 1.0) * data.sd2 * data.sd2) / n2;
    df1 = n1;
    df2 = n2;
  }
  Rng rng(seed);
  Vector phi(N);
  for (Index i = 0; i < N; ++i) {
    const double mu1 = data.mean1 + scale1 * student_t_draw(rng, df1);
    const double mu2 = data.mean2 + scale2 * student_t_draw(rng, df2);
    phi(i) = mu2 - mu1;
  }
  return phi;
}

Interval equal_tailed(Vector draws, double alpha) {
  const Index n = draws.size();
  if (n < 2) throw InvalidParameter("equal_tailed: need at least two draws");
  std::sort(draws.data(), draws.data() + n);
  auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(n - 1);
    const Index lo = static_cast<Index>(std::floor(pos));
    const Index hi = std::min(lo + 1, n - 1);
    const double t = pos - static_cast<double>(lo);
    return (1.0 - t) * draws(lo) + t * draws(hi);
  };
  return {quantile(0.5 * alpha), quantile(1.0 - 0.5 * alpha)};
}

Interval bf_im_interval(const BFData& data, double alpha, Index M, std::uint64_t seed, bool nuisance_grid) {
  BfProfileContour::Options options;
  options.M = M;
  options.seed = seed;
  options.nuisance_grid = nuisance_grid;
  const BfProfileContour contour(data, options);
  const double se = std::sqrt(data.sd1 * data.sd1 / data.n1 + data.sd2 * data.sd2 / data.n2);
  ContourOptions copts;
  copts.step = se;
  copts.mc_stderr = std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(M));
  const PossibilityContour pc([&contour](const Vector& t) { return contour(t(0)).value; },
                              Vector::Constant(1, data.mle_difference()), copts);
  return alpha_cut_1d(pc, alpha, 1e-4 * se).interval();
}

std::vector<CoverageRow> bf_coverage_table(const BFSettings& settings, const CoverageOptions& options) {
  if (options.reps < 1) throw InvalidParameter("bf_coverage_table: need at least one replication");
  const Index R = options.reps;
  constexpr int kMethods = 4;
  Matrix covered = Matrix::Zero(R, kMethods);
  Matrix length = Matrix::Zero(R, kMethods);
  std::vector<char> failed(static_cast<std::size_t>(R), 0);
  const double truth = settings.phi();
  const double sd1 = std::sqrt(settings.var1), sd2 = std::sqrt(settings.var2);

  parallel_for(R, [&](Index r) {
    Rng rng = derive_stream(options.seed, static_cast<std::uint64_t>(r));
    BFData data;
    data.n1 = settings.n1;
    data.n2 = settings.n2;
    data.mean1 = settings.mu1 + sd1 * std_normal(rng) / std::sqrt(static_cast<double>(settings.n1));
    data.mean2 = settings.mu2 + sd2 * std_normal(rng) / std::sqrt(static_cast<double>(settings.n2));
    data.sd1 = sd1 * std::sqrt(chi2_draw(rng, settings.n1 - 1.0) / (settings.n1 - 1.0));
    data.sd2 = sd2 * std::sqrt(chi2_draw(rng, settings.n2 - 1.0) / (settings.n2 - 1.0));
    const std::uint64_t sub = derive_seed(options.seed, 0x5eed0000ULL + static_cast<std::uint64_t>(r));
    try {
      const Interval intervals[kMethods] = {
          equal_tailed(bayes_bf_sample(data, BfPrior::jeffreys, options.posterior_draws, derive_seed(sub, 1)),
                       options.alpha),
          equal_tailed(bayes_bf_sample(data, BfPrior::right_haar, options.posterior_draws, derive_seed(sub, 2)),
                       options.alpha),
          welch_interval(data, options.alpha),
          bf_im_interval(data, options.alpha, options.M, derive_seed(sub, 3), options.nuisance_grid)};
      for (int k = 0; k < kMethods; ++k) {
        covered(r, k) = intervals[k].contains(truth) ? 1.0 : 0.0;
        length(r, k) = intervals[k].width();
      }
    } catch (const Error&) {
      failed[static_cast<std::size_t>(r)] = 1;
    }
  });

  Index failures = 0;
  for (char f : failed) failures += f;
  if (failures * 100 > R) throw NumericError("bf_coverage_table: more than 1% of replications failed");
  const double used = static_cast<double>(R - failures);
  const char* names[kMethods] = {"jeffreys", "right-haar", "welch", "im"};
  std::vector<CoverageRow> rows;
  for (int k = 0; k < kMethods; ++k) {
    double hits = 0.0, sum = 0.0, sum2 = 0.0;
    for (Index r = 0; r < R; ++r) {
      if (failed[static_cast<std::size_t>(r)]) continue;
      hits += covered(r, k);
      sum += length(r, k);
      sum2 += length(r, k) * length(r, k);
    }
    CoverageRow row;
    row.method = names[k];
    row.coverage = hits / used;
    row.coverage_se = std::sqrt(row.coverage * (1.0 - row.coverage) / used);
    row.mean_length = sum / used;
    const double var = std::max(0.0, sum2 / used - row.mean_length * row.mean_length);
    row.length_se = std::sqrt(var / used);
    rows.push_back(row);
  }
  return rows;
}

void write_coverage_csv(std::ostream& os, const std::vector<CoverageRow>& rows, const RunInfo* info) {
  if (info) os << provenance_comment(*info) << '\n';
  os << "method,coverage,coverage_se,mean_length,length_se\n";
  for (const auto& r : rows)
    os << r.method << ',' << format_number(r.coverage) << ',' << format_number(r.coverage_se) << ','
       << format_number(r.mean_length) << ',' << format_number(r.length_se) << '\n';
}

// ---------------------------------------------------------------- Bernstein-von Mises

double bvm_check(const Matrix& samples, const Vector& theta_hat, const Matrix& J, const Vector& alpha_grid) {
  const Index N = samples.rows();
  const Index D = theta_hat.size();
  if (N == 0) throw InvalidParameter("bvm_check: no samples");
  if (samples.cols() != D || J.rows() != D || J.cols() != D) throw InvalidParameter("bvm_check: dimension mismatch");
  Vector q(N);
  for (Index i = 0; i < N; ++i) {
    const Vector r = samples.row(i).transpose() - theta_hat;
    q(i) = r.dot(J * r);
  }
  double worst = 0.0;
  for (Index j = 0; j < alpha_grid.size(); ++j) {
    const double alpha = alpha_grid(j);
    const double radius2 = chi2_quantile(1.0 - alpha, static_cast<double>(D));
    const double inside = static_cast<double>((q.array() <= radius2).count()) / static_cast<double>(N);
    worst = std::max(worst, std::abs(inside - (1.0 - alpha)));
  }
  return worst;
}

double u_statistic(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidParameter("u_statistic: CDF value outside [0,1]");
  return 1.0 - std::abs(2.0 * q - 1.0);
}

double u_statistic(const Matrix& samples, const Vector& theta_true) {
  const Index N = samples.rows();
  if (N < 2 || samples.cols() != theta_true.size()) throw InvalidParameter("u_statistic: bad sample matrix");
  const Vector mean = samples.colwise().mean().transpose();
  const Matrix centered = samples.rowwise() - mean.transpose();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(N - 1);
  Eigen::LDLT<Matrix> ldlt(cov);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 1e-14 * cov.trace())
    throw NumericError("u_statistic: sample covariance is singular");
  const Vector dt = theta_true - mean;
  const double kappa_true = dt.dot(ldlt.solve(dt));
  Index below = 0;
  for (Index i = 0; i < N; ++i) {
    const Vector r = centered.row(i).transpose();
    if (r.dot(ldlt.solve(r)) <= kappa_true) ++below;
  }
  return u_statistic(static_cast<double>(below) / static_cast<double>(N));
}

// ---------------------------------------------------------------- correlation study

double correlation_jeffreys_cdf(const Data& x, double t) {
  const Correlation model;
  const double peak = model.log_likelihood(x, model.mle(x));
  auto density = [&](double r) {
    if (!(r > -1.0 && r < 1.0)) return 0.0;
    const double ll = model.log_likelihood(x, Vector::Constant(1, r)) - peak;
    return std::exp(ll) * std::sqrt(1.0 + r * r) / (1.0 - r * r);
  };
  const double lo = -1.0 + 1e-12, hi = 1.0 - 1e-12;
  if (t <= lo) return 0.0;
  if (t >= hi) return 1.0;
  const double total = integrate(density, lo, hi, 1e-10, 0.0);
  return std::clamp(integrate(density, lo, t, 1e-10, 0.0) / total, 0.0, 1.0);
}

CorrelationUStudy correlation_u_study(Index n, double rho, Index reps, Index M, std::uint64_t seed) {
  const Correlation model;
  const Vector truth = Vector::Constant(1, rho);
  CorrelationUStudy out{Vector(reps), Vector(reps)};
  parallel_for(reps, [&](Index r) {
    Rng rng = derive_stream(seed, static_cast<std::uint64_t>(r));
    const Data x = model.sample(truth, n, rng);
    // With endpoint weight 1/2 the inner CDF at the truth is pi/2 or 1 - pi/2,
    // so its U statistic is the contour value itself.
    out.u_inner(r) = contour_mc(model, x, truth, M, derive_seed(seed, 0xABCD0000ULL + r)).value;
    out.u_jeffreys(r) = u_statistic(correlation_jeffreys_cdf(x, rho));
  });
  return out;
}

// ---------------------------------------------------------------- gamma shape-scale merging

GammaBvmResult gamma_bvm_study(Index n, const GammaBvmOptions& options) {
  const GammaShapeScale model(true);
  Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(n)));
  const Data x = model.sample(model.to_theta(options.shape, options.scale), n, rng);
  GammaBvmResult result;
  result.n = n;
  result.theta_hat = fit_mle(model, x);
  result.J = observed_info(model, x, result.theta_hat);
  const std::uint64_t contour_seed = derive_seed(options.seed, 0xB0B0ULL + static_cast<std::uint64_t>(n));
  auto contour = [&](const Vector& theta) {
    return model.in_domain(theta) ? contour_mc(model, x, theta, options.M, contour_seed).value : 0.0;
  };
  const Vector grid = options.alpha_grid.size() ? options.alpha_grid : default_alpha_grid();
  const SigmaTable table = fit_sigma_table(contour, result.theta_hat, result.J, grid, options.sa);
  result.converged = table.all_converged();
  const InnerSampleSet draws = sample_inner_md(result.theta_hat, result.J, table, options.draws,
                                               derive_seed(options.seed, 0xD0D0ULL + n), true);
  result.discrepancy = bvm_check(draws.theta, result.theta_hat, result.J, grid);
  return result;
}

}  // namespace imlike
