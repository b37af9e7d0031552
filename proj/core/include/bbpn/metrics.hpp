#ifndef BBPN_METRICS_HPP
#define BBPN_METRICS_HPP

#include <Eigen/Core>
#include <span>
#include <utility>

#include "bbpn/posterior.hpp"

namespace bbpn {

/// Error and surprise of one limit posterior against a ground truth, with
/// the chi-squared band for S^2.
struct CalibrationReport {
  double w = 0.0;
  double s = 0.0;
  int dof = 0;
  double band_lower = 0.0;
  double band_upper = 0.0;
  bool inside_band = false;
  bool degraded_rank = false;
};

/// W = || mean - truth ||_2 over the query grid.
double error_w(const LimitPosterior& post, const Eigen::VectorXd& truth);

struct Surprise {
  double value = 0.0;
  bool degraded_rank = false;  // eigenvalue floor was active
};

/// S = || C^{-1/2} (mean - truth) ||_2 via symmetric square root; eigenvalues
/// below 1e-12 * max are floored and flagged. With diagonal_only the
/// covariance is replaced by its diagonal.
Surprise surprise_s(const LimitPosterior& post, const Eigen::VectorXd& truth,
                    bool diagonal_only = false);

/// Central quantile pair of the chi-squared distribution, computed from the
/// regularized incomplete gamma function by bisection.
std::pair<double, double> chi2_band(int dof, double central_mass);

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

double chi2_cdf(int dof, double x);
double chi2_quantile(int dof, double prob);

/// Least-squares slope of log(err) against log(h).
double convergence_slope(std::span<const std::pair<double, double>> errors);

CalibrationReport calibrate(const LimitPosterior& post, const Eigen::VectorXd& truth,
                            double central_mass = 0.95, bool diagonal_only = false);

}  // namespace bbpn

#endif  // BBPN_METRICS_HPP
