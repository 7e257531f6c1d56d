#include "imlike/models.hpp"

#include "imlike/special.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <numbers>

namespace imlike {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0.0 ? a + kTwoPi : a;
}

void require_rows(const Data& x, const char* who) {
  if (x.rows() == 0) throw InvalidParameter(std::string(who) + ": empty data");
}

}  // namespace

// ---------------------------------------------------------------- Model

Vector Model::lower() const { return Vector::Constant(dim(), -std::numeric_limits<double>::infinity()); }

Vector Model::upper() const { return Vector::Constant(dim(), std::numeric_limits<double>::infinity()); }

bool Model::in_domain(const Vector& theta) const {
  if (theta.size() != dim()) return false;
  const Vector lo = lower();
  const Vector hi = upper();
  for (Index d = 0; d < dim(); ++d)
    if (!(theta(d) > lo(d) && theta(d) < hi(d))) return false;
  return true;
}

Matrix Model::observed_info(const Data& x, const Vector& theta) const { return observed_info_fd(*this, x, theta); }

Matrix observed_info_fd(const Model& model, const Data& x, const Vector& theta) {
  const Index D = model.dim();
  Vector h(D);
  for (Index d = 0; d < D; ++d) h(d) = std::max(1e-5, 1e-5 * std::abs(theta(d)));
  auto f = [&](const Vector& t) { return model.log_likelihood(x, t); };
  const double f0 = f(theta);
  Matrix H(D, D);
  for (Index i = 0; i < D; ++i) {
    Vector tp = theta, tm = theta;
    tp(i) += h(i);
    tm(i) -= h(i);
    H(i, i) = (f(tp) - 2.0 * f0 + f(tm)) / (h(i) * h(i));
    for (Index j = 0; j < i; ++j) {
      Vector pp = theta, pm = theta, mp = theta, mm = theta;
      pp(i) += h(i), pp(j) += h(j);
      pm(i) += h(i), pm(j) -= h(j);
      mp(i) -= h(i), mp(j) += h(j);
      mm(i) -= h(i), mm(j) -= h(j);
      H(i, j) = H(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h(i) * h(j));
    }
  }
  return -H;
}

double log_relative_likelihood(const Model& model, const Data& x, const Vector& theta) {
  if (!model.in_domain(theta)) throw DomainError(model.name() + ": parameter outside the domain");
  const Vector hat = model.mle(x);
  return std::min(0.0, model.log_likelihood(x, theta) - model.log_likelihood(x, hat));
}

double relative_likelihood(const Model& model, const Data& x, const Vector& theta) {
  return std::exp(log_relative_likelihood(model, x, theta));
}

Vector fit_mle(const Model& model, const Data& x) {
  require_rows(x, "fit_mle");
  return model.mle(x);
}

Matrix observed_info(const Model& model, const Data& x, const Vector& theta_hat) {
  if (!model.in_domain(theta_hat)) throw DomainError(model.name() + ": parameter outside the domain");
  Matrix J = model.observed_info(x, theta_hat);
  J = 0.5 * (J + J.transpose()).eval();
  Eigen::LLT<Matrix> llt(J);
  if (llt.info() != Eigen::Success || !J.allFinite())
    throw NumericError(model.name() + ": observed information is not positive definite", theta_hat);
  return J;
}

// ---------------------------------------------------------------- Gaussian location

GaussianLocation::GaussianLocation(Matrix cov) : cov_(std::move(cov)) {
  if (cov_.rows() == 0 || cov_.rows() != cov_.cols()) throw InvalidParameter("GaussianLocation: bad covariance shape");
  Eigen::LLT<Matrix> llt(cov_);
  if (llt.info() != Eigen::Success) throw InvalidParameter("GaussianLocation: covariance not positive definite");
  chol_ = llt.matrixL();
  precision_ = llt.solve(Matrix::Identity(cov_.rows(), cov_.rows()));
}

double GaussianLocation::log_likelihood(const Data& x, const Vector& theta) const {
  require_rows(x, "GaussianLocation");
  double q = 0.0;
  for (Index i = 0; i < x.rows(); ++i) {
    const Vector r = x.row(i).transpose() - theta;
    q += r.dot(precision_ * r);
  }
  const double D = static_cast<double>(dim());
  return -0.5 * q - 0.5 * static_cast<double>(x.rows()) * (D * std::log(kTwoPi) + std::log(cov_.determinant()));
}

Data GaussianLocation::sample(const Vector& theta, Index count, Rng& rng) const {
  Data out(count, dim());
  Vector z(dim());
  for (Index i = 0; i < count; ++i) {
    for (Index d = 0; d < dim(); ++d) z(d) = std_normal(rng);
    out.row(i) = (theta + chol_ * z).transpose();
  }
  return out;
}

Vector GaussianLocation::mle(const Data& x) const {
  require_rows(x, "GaussianLocation");
  return x.colwise().mean().transpose();
}

Matrix GaussianLocation::observed_info(const Data& x, const Vector&) const {
  return static_cast<double>(x.rows()) * precision_;
}

double GaussianLocation::exact_contour(const Data& x, const Vector& theta) const {
  const Vector r = mle(x) - theta;
  return chi2_sf(static_cast<double>(x.rows()) * r.dot(precision_ * r), static_cast<double>(dim()));
}

// ---------------------------------------------------------------- gamma scale

GammaScale::GammaScale(double shape) : shape_(shape) {
  if (!(shape > 0.0)) throw InvalidParameter("GammaScale: shape must be positive");
}

double GammaScale::log_likelihood(const Data& x, const Vector& theta) const {
  require_rows(x, "GammaScale");
  const double t = theta(0);
  if (!(t > 0.0)) throw DomainError("gamma-scale: scale must be positive");
  const double n = static_cast<double>(x.rows());
  const auto xs = x.col(0).array();
  return (shape_ - 1.0) * xs.log().sum() - xs.sum() / t - n * shape_ * std::log(t) - n * std::lgamma(shape_);
}

Data GammaScale::sample(const Vector& theta, Index count, Rng& rng) const {
  Data out(count, 1);
  std::gamma_distribution<double> dist(shape_, theta(0));
  for (Index i = 0; i < count; ++i) out(i, 0) = dist(rng);
  return out;
}

Vector GammaScale::mle(const Data& x) const {
  require_rows(x, "GammaScale");
  if ((x.col(0).array() <= 0.0).any()) throw DomainError("gamma-scale: observations must be positive");
  return Vector::Constant(1, x.col(0).mean() / shape_);
}

Matrix GammaScale::observed_info(const Data& x, const Vector& theta) const {
  const double t = theta(0);
  const double n = static_cast<double>(x.rows());
  return Matrix::Constant(1, 1, -n * shape_ / (t * t) + 2.0 * x.col(0).sum() / (t * t * t));
}

// ---------------------------------------------------------------- von Mises

AnglesData::AnglesData(Vector raw_angles, double concentration) : angles(std::move(raw_angles)), kappa(concentration) {
  if (angles.size() == 0) throw DatasetError("angles: no observations");
  if (!(kappa > 0.0)) throw InvalidParameter("angles: kappa must be positive");
  for (Index i = 0; i < angles.size(); ++i) {
    if (!std::isfinite(angles(i))) throw DatasetError("angles: non-finite value");
    angles(i) = wrap_angle(angles(i));
  }
}

PolarStats polar_stats(const Vector& angles) {
  if (angles.size() == 0) throw DatasetError("polar_stats: no observations");
  const double c = angles.array().cos().mean();
  const double s = angles.array().sin().mean();
  const double u = std::hypot(c, s);
  if (u < 1e-12) throw DegenerateData("polar_stats: resultant length is zero");
  return {wrap_angle(std::atan2(s, c)), std::min(u, 1.0)};
}

PolarStats polar_stats(const AnglesData& data) { return polar_stats(data.angles); }

VonMises::VonMises(double kappa) : kappa_(kappa) {
  if (!(kappa > 0.0)) throw InvalidParameter("VonMises: kappa must be positive");
}

double VonMises::log_likelihood(const Data& x, const Vector& theta) const {
  require_rows(x, "VonMises");
  const double n = static_cast<double>(x.rows());
  return kappa_ * (x.col(0).array() - theta(0)).cos().sum() -
         n * (std::log(kTwoPi) + std::log(std::cyl_bessel_i(0.0, kappa_)));
}

Data VonMises::sample(const Vector& theta, Index count, Rng& rng) const {
  Data out(count, 1);
  for (Index i = 0; i < count; ++i) out(i, 0) = von_mises_draw(rng, theta(0), kappa_);
  return out;
}

Vector VonMises::mle(const Data& x) const {
  require_rows(x, "VonMises");
  return Vector::Constant(1, polar_stats(Vector(x.col(0))).g);
}

Matrix VonMises::observed_info(const Data& x, const Vector& theta) const {
  return Matrix::Constant(1, 1, kappa_ * (x.col(0).array() - theta(0)).cos().sum());
}

// ---------------------------------------------------------------- correlation

double Correlation::log_likelihood(const Data& x, const Vector& theta) const {
  require_rows(x, "Correlation");
  if (x.cols() != 2) throw DatasetError("correlation: data need two columns");
  const double r = theta(0);
  if (!(r > -1.0 && r < 1.0)) throw DomainError("correlation: rho outside (-1, 1)");
  const double n = static_cast<double>(x.rows());
  const double sxx = x.col(0).squaredNorm();
  const double syy = x.col(1).squaredNorm();
  const double sxy = x.col(0).dot(x.col(1));
  const double one_m = 1.0 - r * r;
  return -n * std::log(kTwoPi) - 0.5 * n * std::log(one_m) - (sxx - 2.0 * r * sxy + syy) / (2.0 * one_m);
}

Data Correlation::sample(const Vector& theta, Index count, Rng& rng) const {
  const double r = theta(0);
  const double c = std::sqrt(1.0 - r * r);
  Data out(count, 2);
  for (Index i = 0; i < count; ++i) {
    const double z1 = std_normal(rng);
    const double z2 = std_normal(rng);
    out(i, 0) = z1;
    out(i, 1) = r * z1 + c * z2;
  }
  return out;
}

Vector Correlation::mle(const Data& x) const {
  require_rows(x, "Correlation");
  if (x.cols() != 2) throw DatasetError("correlation: data need two columns");
  const double n = static_cast<double>(x.rows());
  const double sxx = x.col(0).squaredNorm();
  const double syy = x.col(1).squaredNorm();
  const double sxy = x.col(0).dot(x.col(1));
  // Score equation: n r (1 - r^2) + (1 + r^2) sxy - r (sxx + syy) = 0.
  const auto roots = cubic_real_roots(-n, sxy, n - sxx - syy, sxy);
  double best = std::numeric_limits<double>::quiet_NaN();
  double best_ll = -std::numeric_limits<double>::infinity();
  for (double r : roots) {
    if (!(r > -1.0 && r < 1.0)) continue;
    const double ll = log_likelihood(x, Vector::Constant(1, r));
    if (ll > best_ll) {
      best_ll = ll;
      best = r;
    }
  }
  if (!std::isfinite(best)) throw NumericError("correlation: no interior maximizer");
  return Vector::Constant(1, best);
}

Data standardize(const Data& x) {
  if (x.rows() < 2) throw DatasetError("standardize: need at least two rows");
  Data out = x.rowwise() - x.colwise().mean();
  for (Index j = 0; j < out.cols(); ++j) {
    const double sd = std::sqrt(out.col(j).squaredNorm() / static_cast<double>(out.rows() - 1));
    if (!(sd > 0.0)) throw DegenerateData("standardize: constant column");
    out.col(j) /= sd;
  }
  return out;
}

// ---------------------------------------------------------------- gamma shape and scale

double gamma_shape_mle(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DegenerateData("gamma shape: log-mean gap must be positive");
  double k = (3.0 - c + std::sqrt((c - 3.0) * (c - 3.0) + 24.0 * c)) / (12.0 * c);
  for (int it = 0; it < 100; ++it) {
    const double f = std::log(k) - digamma(k) - c;
    const double df = 1.0 / k - trigamma(k);
    double next = k - f / df;
    if (!(next > 0.0)) next = 0.5 * k;
    if (std::abs(next - k) <= 1e-13 * k) return next;
    k = next;
  }
  throw NumericError("gamma shape: Newton did not converge", Vector::Constant(1, k));
}

std::pair<double, double> GammaShapeScale::shape_scale(const Vector& theta) const {
  if (log_scale_) return {std::exp(theta(0)), std::exp(theta(1))};
  return {theta(0), theta(1)};
}

Vector GammaShapeScale::to_theta(double shape, double scale) const {
  Vector t(2);
  if (log_scale_) {
    t << std::log(shape), std::log(scale);
  } else {
    t << shape, scale;
  }
  return t;
}

Vector GammaShapeScale::lower() const {
  if (log_scale_) return Model::lower();
  return Vector::Zero(2);
}

double GammaShapeScale::log_likelihood(const Data& x, const Vector& theta) const {
  require_rows(x, "GammaShapeScale");
  const auto [k, s] = shape_scale(theta);
  if (!(k > 0.0 && s > 0.0)) throw DomainError("gamma-shape-scale: parameters must be positive");
  const double n = static_cast<double>(x.rows());
  const auto xs = x.col(0).array();
  return (k - 1.0) * xs.log().sum() - xs.sum() / s - n * k * std::log(s) - n * std::lgamma(k);
}

Data GammaShapeScale::sample(const Vector& theta, Index count, Rng& rng) const {
  const auto [k, s] = shape_scale(theta);
  Data out(count, 1);
  std::gamma_distribution<double> dist(k, s);
  for (Index i = 0; i < count; ++i) out(i, 0) = dist(rng);
  return out;
}

Vector GammaShapeScale::mle(const Data& x) const {
  require_rows(x, "GammaShapeScale");
  if ((x.col(0).array() <= 0.0).any()) throw DomainError("gamma-shape-scale: observations must be positive");
  const double mean = x.col(0).mean();
  const double c = std::log(mean) - x.col(0).array().log().mean();
  const double k = gamma_shape_mle(c);
  return to_theta(k, mean / k);
}

}  // namespace imlike
