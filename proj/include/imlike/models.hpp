#pragma once

#include "imlike/random.hpp"
#include "imlike/types.hpp"

#include <memory>
#include <string>

namespace imlike {

// Parametric model contract. Data rows are observations.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string name() const = 0;
  virtual Index dim() const = 0;
  virtual double log_likelihood(const Data& x, const Vector& theta) const = 0;
  virtual Data sample(const Vector& theta, Index count, Rng& rng) const = 0;
  virtual Vector mle(const Data& x) const = 0;

  // Negative Hessian of the log-likelihood; central differences unless overridden.
  virtual Matrix observed_info(const Data& x, const Vector& theta) const;

  // Open box domain of the parameter.
  virtual Vector lower() const;
  virtual Vector upper() const;

  bool in_domain(const Vector& theta) const;
};

// exp(l(theta) - l(mle)); throws DomainError outside the domain.
double relative_likelihood(const Model& model, const Data& x, const Vector& theta);
double log_relative_likelihood(const Model& model, const Data& x, const Vector& theta);
Vector fit_mle(const Model& model, const Data& x);
// Symmetrized observed information; throws NumericError unless positive definite.
Matrix observed_info(const Model& model, const Data& x, const Vector& theta_hat);

// Central-difference negative Hessian with step max(1e-5, 1e-5 |theta_d|).
Matrix observed_info_fd(const Model& model, const Data& x, const Vector& theta);

// X_i ~ N_D(theta, cov) with cov known.
class GaussianLocation final : public Model {
 public:
  explicit GaussianLocation(Matrix cov);
  explicit GaussianLocation(Index dim = 1) : GaussianLocation(Matrix::Identity(dim, dim)) {}

  std::string name() const override { return "gaussian-loc"; }
  Index dim() const override { return cov_.rows(); }
  double log_likelihood(const Data& x, const Vector& theta) const override;
  Data sample(const Vector& theta, Index count, Rng& rng) const override;
  Vector mle(const Data& x) const override;
  Matrix observed_info(const Data& x, const Vector& theta) const override;

  const Matrix& cov() const { return cov_; }
  // Closed-form contour 1 - F_D(n (xbar - theta)' cov^{-1} (xbar - theta)).
  double exact_contour(const Data& x, const Vector& theta) const;

 private:
  Matrix cov_;
  Matrix precision_;
  Matrix chol_;
};

// X_i ~ Gamma(shape n, scale theta) with n known.
class GammaScale final : public Model {
 public:
  explicit GammaScale(double shape);

  std::string name() const override { return "gamma-scale"; }
  Index dim() const override { return 1; }
  double log_likelihood(const Data& x, const Vector& theta) const override;
  Data sample(const Vector& theta, Index count, Rng& rng) const override;
  Vector mle(const Data& x) const override;
  Matrix observed_info(const Data& x, const Vector& theta) const override;
  Vector lower() const override { return Vector::Zero(1); }

  double shape() const { return shape_; }

 private:
  double shape_;
};

struct AnglesData {
  Vector angles;
  double kappa = 1.0;

  // Reduces angles mod 2 pi and validates.
  AnglesData(Vector raw_angles, double concentration);
};

struct PolarStats {
  double g = 0.0;  // mean direction in [0, 2 pi)
  double u = 0.0;  // mean resultant length in [0, 1]
};

// Throws DegenerateData when the resultant length vanishes.
PolarStats polar_stats(const AnglesData& data);
PolarStats polar_stats(const Vector& angles);

// Angles ~ von Mises(theta, kappa) with kappa known.
class VonMises final : public Model {
 public:
  explicit VonMises(double kappa);

  std::string name() const override { return "vonmises"; }
  Index dim() const override { return 1; }
  double log_likelihood(const Data& x, const Vector& theta) const override;
  Data sample(const Vector& theta, Index count, Rng& rng) const override;
  Vector mle(const Data& x) const override;
  Matrix observed_info(const Data& x, const Vector& theta) const override;

  double kappa() const { return kappa_; }

 private:
  double kappa_;
};

// Standardized bivariate normal with unknown correlation; data columns x1, x2.
class Correlation final : public Model {
 public:
  std::string name() const override { return "correlation"; }
  Index dim() const override { return 1; }
  double log_likelihood(const Data& x, const Vector& theta) const override;
  Data sample(const Vector& theta, Index count, Rng& rng) const override;
  Vector mle(const Data& x) const override;
  Vector lower() const override { return Vector::Constant(1, -1.0); }
  Vector upper() const override { return Vector::Constant(1, 1.0); }
};

// Centers each column and scales it to unit sample standard deviation (divisor n - 1).
Data standardize(const Data& x);

// X_i ~ Gamma(shape k, scale s). Parameters are (log k, log s) unless log_scale is false.
class GammaShapeScale final : public Model {
 public:
  explicit GammaShapeScale(bool log_scale = true) : log_scale_(log_scale) {}

  std::string name() const override { return "gamma-shape-scale"; }
  Index dim() const override { return 2; }
  double log_likelihood(const Data& x, const Vector& theta) const override;
  Data sample(const Vector& theta, Index count, Rng& rng) const override;
  Vector mle(const Data& x) const override;
  Vector lower() const override;

  bool log_scale() const { return log_scale_; }
  // (shape, scale) from a parameter vector in this model's coordinates.
  std::pair<double, double> shape_scale(const Vector& theta) const;
  Vector to_theta(double shape, double scale) const;

 private:
  bool log_scale_;
};

// Shape MLE from c = log(mean x) - mean(log x) > 0 by Newton on log k - digamma(k) = c.
double gamma_shape_mle(double c);

}  // namespace imlike
