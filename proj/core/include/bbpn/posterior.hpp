#ifndef BBPN_POSTERIOR_HPP
#define BBPN_POSTERIOR_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <span>
#include <utility>
#include <vector>

#include "bbpn/dataset.hpp"
#include "bbpn/kernel.hpp"

namespace bbpn {

/// Joint Gaussian summary of the limit process over a query grid T'.
struct LimitPosterior {
  std::vector<Ordinate> query;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // symmetric, PSD after clamping
};

/// mean +/- width_sigmas * sqrt(diag covariance).
std::pair<Eigen::VectorXd, Eigen::VectorXd> credible_band(const LimitPosterior& post,
                                                          double width_sigmas);

/// The GP prior conditioned on a dataset: factorized nugget-augmented Gram
/// matrix plus the solved weight vector. Immutable after construction;
/// predict calls are pure.
class ConditionedModel {
 public:
  /// Posterior mean and variance at (h, t); h = 0 queries the limit.
  std::pair<double, double> predict(double h, const Ordinate& t) const;

  /// Joint limit marginal over T' at h = 0. The covariance is symmetrized
  /// and negative eigenvalues are floored at 0.
  LimitPosterior predict_limit(std::span<const Ordinate> query) const;
  LimitPosterior predict_limit(const std::vector<Ordinate>& query) const;

  const Dataset& data() const { return data_; }
  const Hyperparameters& params() const { return params_; }
  const BasisSet& basis() const { return basis_; }
  const ProfileSet& profiles() const { return profiles_; }
  /// Diagonal shift actually applied (after any escalation).
  double nugget() const { return nugget_; }
  /// Nugget-augmented Gram matrix K_Q.
  const Eigen::MatrixXd& gram() const { return gram_; }
  /// Lower Cholesky factor of gram().
  Eigen::MatrixXd factor_l() const { return llt_.matrixL(); }
  /// K_Q^{-1} q.
  const Eigen::VectorXd& weights() const { return weights_; }

  friend ConditionedModel condition(Dataset data, const Hyperparameters& params,
                                    const BasisSet& basis, const ProfileSet& profiles,
                                    double nugget_tau);

 private:
  ConditionedModel() = default;

  Dataset data_;
  Hyperparameters params_;
  BasisSet basis_;
  ProfileSet profiles_;
  Eigen::MatrixXd gram_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd weights_;
  double nugget_ = 0.0;
};

/// Assembles K_Q, adds the nugget tau * trace / m (escalating by factors of
/// 10, at most 5 times, if the factorization fails), factorizes and solves
/// for the weights. Throws ConditioningError with a condition-number
/// estimate when factorization still fails after escalation.
ConditionedModel condition(Dataset data, const Hyperparameters& params, const BasisSet& basis,
                           const ProfileSet& profiles, double nugget_tau = 1e-10);

namespace detail {

/// Adds tau * trace(K)/m to the diagonal, escalating on LLT failure.
/// Returns the applied shift. Shared by the posterior and likelihood paths.
double factor_with_nugget(Eigen::MatrixXd& k, Eigen::LLT<Eigen::MatrixXd>& llt, double tau);

}  // namespace detail

}  // namespace bbpn

#endif  // BBPN_POSTERIOR_HPP
