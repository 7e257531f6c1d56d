#include "imlike/behrens_fisher.hpp"

#include "imlike/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace imlike {

void BFData::validate() const {
  if (n1 < 2 || n2 < 2) throw InvalidParameter("BFData: each sample needs at least two observations");
  if (!(sd1 > 0.0 && sd2 > 0.0)) throw InvalidParameter("BFData: standard deviations must be positive");
  if (!std::isfinite(mean1) || !std::isfinite(mean2) || !std::isfinite(sd1) || !std::isfinite(sd2))
    throw InvalidParameter("BFData: non-finite summary");
}

BFConstrainedFit bf_constrained_mle(const BFData& data, double phi) {
  data.validate();
  const double n1 = data.n1;
  const double n2 = data.n2;
  const double a1 = (n1 - 1.0) * data.sd1 * data.sd1 / n1;
  const double a2 = (n2 - 1.0) * data.sd2 * data.sd2 / n2;
  // mu1 = mean1 + t, mu2 = mu1 + phi; d is the offset of (mean2 - phi) from mean1.
  const double d = data.mean2 - phi - data.mean1;
  auto profile = [&](double t) {
    return -0.5 * n1 * std::log(a1 + t * t) - 0.5 * n2 * std::log(a2 + (d - t) * (d - t));
  };

  const double lo = std::min(0.0, d);
  const double hi = std::max(0.0, d);
  double best_t = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  auto consider = [&](double t) {
    t = std::clamp(t, lo, hi);
    const double v = profile(t);
    if (v > best) {
      best = v;
      best_t = t;
    }
  };
  consider(lo);
  consider(hi);
  for (double t : cubic_real_roots(-(n1 + n2), (2.0 * n1 + n2) * d, -(n1 * (a2 + d * d) + n2 * a1), n2 * d * a1))
    if (std::isfinite(t)) consider(t);
  if (!std::isfinite(best)) throw NumericError("bf_constrained_mle: profile not finite", Vector::Constant(1, lo));

  BFConstrainedFit fit;
  fit.mu1 = data.mean1 + best_t;
  fit.mu2 = fit.mu1 + phi;
  fit.var1 = a1 + best_t * best_t;
  fit.var2 = a2 + (d - best_t) * (d - best_t);
  fit.log_ratio = std::min(0.0, best + 0.5 * n1 * std::log(a1) + 0.5 * n2 * std::log(a2));
  return fit;
}

double bf_profile_rloglik(const BFData& data, double phi) { return bf_constrained_mle(data, phi).log_ratio; }

BFData lehmann_travel() { return {5, 11, 7.580, 6.136, 2.237, 0.073}; }

}  // namespace imlike
