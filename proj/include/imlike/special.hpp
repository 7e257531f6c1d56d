#pragma once

#include <functional>

namespace imlike {

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

double normal_cdf(double z);
double normal_pdf(double z);
double normal_quantile(double p);

double chi2_cdf(double x, double dof);
double chi2_sf(double x, double dof);
double chi2_pdf(double x, double dof);
// Inverse of chi2_cdf by safeguarded Newton; relative tolerance 1e-10.
double chi2_quantile(double p, double dof);

double student_t_cdf(double t, double dof);
double student_t_quantile(double p, double dof);

double gamma_cdf(double x, double shape, double scale = 1.0);

double digamma(double x);
double trigamma(double x);

// Adaptive Gauss-Kronrod (7/15) quadrature of f over [a, b].
double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-10,
                 double abs_tol = 1e-14);

}  // namespace imlike

#include <vector>

namespace imlike {

// Real roots of c3 x^3 + c2 x^2 + c1 x + c0, ascending (falls back to lower degree
// when leading coefficients vanish).
std::vector<double> cubic_real_roots(double c3, double c2, double c1, double c0);

}  // namespace imlike
