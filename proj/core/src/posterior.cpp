#include "bbpn/posterior.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "bbpn/errors.hpp"

namespace bbpn {

std::pair<Eigen::VectorXd, Eigen::VectorXd> credible_band(const LimitPosterior& post,
                                                          double width_sigmas) {
  if (!(width_sigmas > 0.0)) throw ArgumentError("credible_band: width must be positive");
  const Eigen::VectorXd sd = post.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  return {post.mean - width_sigmas * sd, post.mean + width_sigmas * sd};
}

namespace detail {

double factor_with_nugget(Eigen::MatrixXd& k, Eigen::LLT<Eigen::MatrixXd>& llt, double tau) {
  const Eigen::Index m = k.rows();
  const double base = k.trace() / static_cast<double>(m);
  double shift = tau * base;
  for (int attempt = 0; attempt <= 5; ++attempt) {
    Eigen::MatrixXd shifted = k;
    shifted.diagonal().array() += shift;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) {
      k = std::move(shifted);
      return shift;
    }
    shift *= 10.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  const double cond = (lo > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
  throw ConditioningError("gram factorization failed after nugget escalation", cond);
}

}  // namespace detail

ConditionedModel condition(Dataset data, const Hyperparameters& params, const BasisSet& basis,
                           const ProfileSet& profiles, double nugget_tau) {
  if (data.empty()) throw ArgumentError("condition: empty dataset");
  params.validate(data.ordinate_blocks());

  ConditionedModel model;
  model.data_ = std::move(data);
  model.params_ = params;
  model.basis_ = basis;
  model.profiles_ = profiles;
  model.gram_ = assemble_gram(model.data_, params, basis, profiles);
  model.nugget_ = detail::factor_with_nugget(model.gram_, model.llt_, nugget_tau);
  model.weights_ = model.llt_.solve(model.data_.values());
  return model;
}

std::pair<double, double> ConditionedModel::predict(double h, const Ordinate& t) const {
  if (h < 0.0) throw ArgumentError("predict: h must be non-negative");
  const Eigen::VectorXd k = gram_cross(data_, h, t, params_, basis_, profiles_);
  const double mean = k.dot(weights_);
  const double prior = k_q(h, t, h, t, params_, basis_, profiles_);
  const double variance = prior - k.dot(llt_.solve(k));
  return {mean, std::max(variance, 0.0)};
}

LimitPosterior ConditionedModel::predict_limit(std::span<const Ordinate> query) const {
  if (query.empty()) throw ArgumentError("predict_limit: empty query");
  const Eigen::Index m = static_cast<Eigen::Index>(data_.size());
  const Eigen::Index nq = static_cast<Eigen::Index>(query.size());

  Eigen::MatrixXd cross(m, nq);
  for (Eigen::Index j = 0; j < nq; ++j)
    cross.col(j) = gram_cross(data_, 0.0, query[static_cast<std::size_t>(j)], params_, basis_,
                              profiles_);

  Eigen::MatrixXd prior(nq, nq);
  for (Eigen::Index i = 0; i < nq; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = k_q(0.0, query[static_cast<std::size_t>(i)], 0.0,
                           query[static_cast<std::size_t>(j)], params_, basis_, profiles_);
      prior(i, j) = v;
      prior(j, i) = v;
    }
  }

  LimitPosterior post;
  post.query.assign(query.begin(), query.end());
  post.mean = cross.transpose() * weights_;
  Eigen::MatrixXd cov = prior - cross.transpose() * llt_.solve(cross);
  cov = 0.5 * (cov + cov.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.eigenvalues().minCoeff() < 0.0) {
    const Eigen::VectorXd floored = es.eigenvalues().cwiseMax(0.0);
    cov = es.eigenvectors() * floored.asDiagonal() * es.eigenvectors().transpose();
    cov = 0.5 * (cov + cov.transpose()).eval();
  }
  post.covariance = std::move(cov);
  return post;
}

LimitPosterior ConditionedModel::predict_limit(const std::vector<Ordinate>& query) const {
  return predict_limit(std::span<const Ordinate>(query.data(), query.size()));
}

}  // namespace bbpn
