#include "bbpn/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "bbpn/errors.hpp"

namespace bbpn {

double error_w(const LimitPosterior& post, const Eigen::VectorXd& truth) {
  if (post.mean.size() != truth.size()) throw ArgumentError("error_W: dimension mismatch");
  return (post.mean - truth).norm();
}

Surprise surprise_s(const LimitPosterior& post, const Eigen::VectorXd& truth,
                    bool diagonal_only) {
  if (post.mean.size() != truth.size()) throw ArgumentError("surprise_S: dimension mismatch");
  const Eigen::VectorXd residual = post.mean - truth;

  Eigen::MatrixXd cov = post.covariance;
  if (diagonal_only) cov = post.covariance.diagonal().asDiagonal();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw NumericError("surprise_S: eigendecomposition failed");
  const Eigen::VectorXd& eig = es.eigenvalues();
  const double floor = 1e-12 * std::max(eig.maxCoeff(), 0.0);

  Surprise out;
  Eigen::VectorXd rotated = es.eigenvectors().transpose() * residual;
  double s2 = 0.0;
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    double lambda = eig[i];
    if (lambda < floor || lambda <= 0.0) {
      lambda = floor;
      out.degraded_rank = true;
    }
    if (lambda > 0.0) s2 += rotated[i] * rotated[i] / lambda;
  }
  out.value = std::sqrt(s2);
  return out;
}

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw ArgumentError("incomplete gamma: need a > 0, x >= 0");
  if (x == 0.0) return 0.0;

  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    // Series expansion.
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < 500; ++n) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  // Continued fraction for Q(a, x), modified Lentz.
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double frac = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    frac *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  const double q = std::exp(-x + a * std::log(x) - lg) * frac;
  return 1.0 - q;
}

double chi2_cdf(int dof, double x) {
  if (dof < 1) throw ArgumentError("chi2: dof must be >= 1");
  if (x <= 0.0) return 0.0;
  return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_quantile(int dof, double prob) {
  if (!(prob > 0.0 && prob < 1.0)) throw ArgumentError("chi2: probability must lie in (0,1)");
  double lo = 0.0;
  double hi = 1.0;
  while (chi2_cdf(dof, hi) < prob) {
    hi *= 2.0;
    if (hi > 1e12) throw NumericError("chi2 quantile: bracket expansion failed");
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf(dof, mid) < prob)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-12 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

std::pair<double, double> chi2_band(int dof, double central_mass) {
  if (dof < 1) throw ArgumentError("chi2_band: dof must be >= 1");
  if (!(central_mass > 0.0 && central_mass < 1.0))
    throw ArgumentError("chi2_band: central mass must lie in (0,1)");
  const double tail = 0.5 * (1.0 - central_mass);
  return {chi2_quantile(dof, tail), chi2_quantile(dof, 1.0 - tail)};
}

double convergence_slope(std::span<const std::pair<double, double>> errors) {
  if (errors.size() < 2) throw ArgumentError("convergence_slope: at least two points required");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [h, err] : errors) {
    if (!(h > 0.0)) throw ArgumentError("convergence_slope: h must be positive");
    if (!(err > 0.0)) throw ArgumentError("convergence_slope: errors must be positive");
    const double x = std::log(h);
    const double y = std::log(err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(errors.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw ArgumentError("convergence_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / denom;
}

CalibrationReport calibrate(const LimitPosterior& post, const Eigen::VectorXd& truth,
                            double central_mass, bool diagonal_only) {
  CalibrationReport report;
  report.w = error_w(post, truth);
  const Surprise s = surprise_s(post, truth, diagonal_only);
  report.s = s.value;
  report.degraded_rank = s.degraded_rank;
  report.dof = static_cast<int>(post.mean.size());
  const auto [lo, hi] = chi2_band(report.dof, central_mass);
  report.band_lower = lo;
  report.band_upper = hi;
  const double s2 = s.value * s.value;
  report.inside_band = (s2 >= lo && s2 <= hi);
  return report;
}

}  // namespace bbpn
