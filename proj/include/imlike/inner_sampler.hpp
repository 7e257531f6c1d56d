#pragma once

#include "imlike/csv.hpp"
#include "imlike/models.hpp"
#include "imlike/possibility.hpp"
#include "imlike/random.hpp"
#include "imlike/special.hpp"

#include <Eigen/Eigenvalues>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace imlike {

// Draws (A, theta) from the inner approximation; pseudo marks draws clamped to
// the edge of the search range because the cut at A was unbounded.
struct InnerSampleSet {
  Vector levels;
  Matrix theta;  // one draw per row
  std::vector<bool> pseudo;
  std::string provenance;
  std::uint64_t seed = 0;

  Index size() const { return levels.size(); }
  Index dim() const { return theta.cols(); }
};

// CSV with header level,theta_1,...,theta_D.
void write_samples_csv(std::ostream& os, const InnerSampleSet& samples, const RunInfo* info = nullptr);

// Endpoint weight as a function of the level, linear between knots, flat outside.
struct WeightCurve {
  Vector alpha;
  Vector w;

  double operator()(double level) const;
};

// Per draw: A ~ Unif(0,1), then the left endpoint of C_A with probability w(A),
// else the right one. Draw i uses stream (seed, i).
InnerSampleSet sample_inner_1d(const PossibilityContour& contour, Index N, double w, std::uint64_t seed,
                               double tol = 1e-6);
InnerSampleSet sample_inner_1d(const PossibilityContour& contour, Index N, const WeightCurve& w,
                               std::uint64_t seed, double tol = 1e-6);

// w_alpha = q(theta_alpha) / pi'(theta_alpha) at the left solution of pi = alpha.
// Levels where the derivative is below 1e-12 are skipped.
WeightCurve weight_curve(const std::function<double(double)>& posterior_density, const PossibilityContour& contour,
                         const Vector& alpha_grid);

// Default 19-level grid 0.05, 0.10, ..., 0.95.
Vector default_alpha_grid();

// Eigenpairs of a symmetric matrix, eigenvalues in descending order.
struct InfoEigen {
  Vector lambda;
  Matrix vectors;  // columns
};

template <class Derived>
InfoEigen info_eigen(const Eigen::MatrixBase<Derived>& J) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(Matrix(J.eval()));
  if (solver.info() != Eigen::Success) throw NumericError("info_eigen: decomposition failed");
  return {solver.eigenvalues().reverse(), solver.eigenvectors().rowwise().reverse()};
}

// E diag(1/sigma) Lambda diag(1/sigma) E' with J = E Lambda E'.
template <class DerivedJ, class DerivedS>
Matrix embellish_info(const Eigen::MatrixBase<DerivedJ>& J, const Eigen::MatrixBase<DerivedS>& sigma) {
  if (J.rows() != J.cols() || J.rows() != sigma.size())
    throw InvalidParameter("embellish_info: dimension mismatch");
  if ((sigma.array() <= 0.0).any()) throw InvalidParameter("embellish_info: sigma entries must be positive");
  const InfoEigen eig = info_eigen(J);
  if ((eig.lambda.array() <= 0.0).any()) throw InvalidParameter("embellish_info: J is not positive definite");
  const Vector scaled = eig.lambda.array() / sigma.array().square();
  return eig.vectors * scaled.asDiagonal() * eig.vectors.transpose();
}

// theta_hat + sqrt(chi2_{D,1-alpha}) J_sigma^{-1/2} z with z uniform on the unit sphere.
template <class DerivedT, class DerivedJ>
Vector sample_boundary(const Eigen::MatrixBase<DerivedT>& theta_hat, const Eigen::MatrixBase<DerivedJ>& J_sigma,
                       double alpha, Rng& rng) {
  const Index D = theta_hat.size();
  if (J_sigma.rows() != D || J_sigma.cols() != D) throw InvalidParameter("sample_boundary: dimension mismatch");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidParameter("sample_boundary: alpha outside [0,1]");
  const InfoEigen eig = info_eigen(J_sigma);
  if ((eig.lambda.array() <= 0.0).any()) throw InvalidParameter("sample_boundary: J_sigma is not positive definite");
  const Vector z = unit_sphere(rng, D);
  const double radius = std::sqrt(chi2_quantile(1.0 - alpha, static_cast<double>(D)));
  const Vector inv_sqrt = eig.lambda.array().rsqrt();
  return theta_hat + radius * (eig.vectors * (inv_sqrt.asDiagonal() * (eig.vectors.transpose() * z)));
}

// Robbins-Monro steps w_t = c / (t + t0). Steps are divided by the slope
// 2 q f_D(q), q = chi2_{D,1-alpha}, of the Gaussian contour along a ray when
// normalize_gain is set.
struct SAConfig {
  double c = 1.0;
  double t0 = 1.0;
  bool normalize_gain = true;
  double epsilon = 1e-3;
  int max_iter = 200;
  Vector sigma0;  // empty means all ones

  double step(int t) const { return c / (t + t0); }
  void validate() const;
};

struct SigmaFit {
  double alpha = 0.0;
  Vector sigma;
  bool converged = false;
  int iterations = 0;
  // max(pi+, pi-) per axis at the returned sigma
  Vector plausibility;
};

// 2D points theta_hat +- sigma_s sqrt(chi2_{D,1-alpha} / lambda_s) e_s; columns
// 2s and 2s+1 hold the pair for axis s.
Matrix representative_points(const Vector& theta_hat, const Matrix& J, const Vector& sigma, double alpha);

using ContourFn = std::function<double(const Vector&)>;

SigmaFit fit_sigma(const ContourFn& contour, const Vector& theta_hat, const Matrix& J, double alpha,
                   const SAConfig& config = {});

// Monte Carlo contour (contour_mc with M replicates, fixed seed) as the target.
SigmaFit fit_sigma(const Model& model, const Data& x, double alpha, const SAConfig& config, Index M,
                   std::uint64_t seed);

class SigmaTable {
 public:
  SigmaTable(Vector alpha, Matrix sigma, std::vector<bool> converged);

  const Vector& alpha() const { return alpha_; }
  const Matrix& sigma() const { return sigma_; }
  const std::vector<bool>& converged() const { return converged_; }
  bool all_converged() const;
  Index dim() const { return sigma_.cols(); }

  // Per-coordinate linear interpolation in alpha, clamped at the grid ends.
  Vector operator()(double level) const;

  void write_csv(std::ostream& os, const RunInfo* info = nullptr) const;
  static SigmaTable read_csv(std::istream& is);

 private:
  Vector alpha_;
  Matrix sigma_;  // one row per level
  std::vector<bool> converged_;
};

// Fits every level (in parallel).
SigmaTable fit_sigma_table(const ContourFn& contour, const Vector& theta_hat, const Matrix& J,
                           const Vector& alpha_grid, const SAConfig& config = {});

// Per draw: A ~ Unif(0,1), sigma(A) from the table, then a boundary point of the
// embellished Gaussian cut at level A.
InnerSampleSet sample_inner_md(const Vector& theta_hat, const Matrix& J, const SigmaTable& table, Index N,
                               std::uint64_t seed, bool allow_nonconverged = false);

}  // namespace imlike
