#ifndef BBPN_KERNEL_HPP
#define BBPN_KERNEL_HPP

#include <Eigen/Core>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bbpn/dataset.hpp"
#include "bbpn/ordinate.hpp"

namespace bbpn {

/// Radial profile families, scaled so that the value at 0 is exactly 1 and
/// strictly positive, non-increasing on [0, inf).
enum class RadialProfile { Matern12, Matern32, Gaussian };

RadialProfile profile_from_name(std::string_view name);
std::string_view profile_name(RadialProfile kind);

/// phi(eps). Matern12: exp(-eps); Matern32: (1 + sqrt(3) eps) exp(-sqrt(3) eps);
/// Gaussian: exp(-eps^2 / 2). Negative eps is an argument error.
double eval_profile(RadialProfile kind, double eps);

/// d phi / d eps, one-sided at 0.
double profile_slope(RadialProfile kind, double eps);

/// The radial profiles of one model: phi_i per ordinate block plus psi for
/// the resolution axis.
struct ProfileSet {
  std::vector<RadialProfile> phi;
  RadialProfile psi = RadialProfile::Matern12;

  static ProfileSet uniform(RadialProfile kind, std::size_t p) {
    return ProfileSet{std::vector<RadialProfile>(p, kind), kind};
  }
};

/// Prior hyperparameters. sigma2 is the overall amplitude whose maximum
/// likelihood value has a closed form; rho_G and rho_E weight the limit and
/// error components; ell_h and ell_t are length-scales; alpha is the
/// convergence order of the underlying numerical method. alpha = 0 selects
/// the stationary ablation and must be requested explicitly.
struct Hyperparameters {
  double sigma2 = 1.0;
  double rho_g = 1.0;
  double rho_e = 1.0;
  double ell_h = 1.0;
  std::vector<double> ell_t = {1.0};
  double alpha = 1.0;
  bool alpha_learned = false;

  /// Throws ArgumentError unless all scales are strictly positive, alpha is
  /// non-negative and ell_t has one entry per ordinate block.
  void validate(std::size_t p) const;
};

/// Finite-dimensional mean component: v basis functions b_1..b_v on T. The
/// coefficient vector is marginalized analytically, so only evaluation is
/// needed. v = 0 means no finite-dimensional component.
class BasisSet {
 public:
  using Function = std::function<double(const Ordinate&)>;

  BasisSet() = default;
  explicit BasisSet(std::vector<Function> functions) : functions_(std::move(functions)) {}

  static BasisSet none() { return BasisSet(); }

  /// b_j(t) = c^(j-1) for j = 1..v, with c the first flattened coordinate of
  /// t. v = 1 is the constant intercept.
  static BasisSet polynomial(std::size_t v);

  std::size_t size() const { return functions_.size(); }  // v

  /// Stacked vector b(t), length v.
  Eigen::VectorXd evaluate(const Ordinate& t) const;

 private:
  std::vector<Function> functions_;
};

/// Tensor-product spatial kernel k_G(t, t') = prod_i phi_i(||t_i - t_i'|| / ell_t_i).
double k_g(const Ordinate& t, const Ordinate& t2, const Hyperparameters& params,
           const ProfileSet& profiles);

/// Order-encoding error kernel
/// k_E((h,t),(h',t')) = (h h')^alpha psi(|h - h'| / ell_h) k_G(t, t').
/// Exactly 0 when h or h' is 0 and alpha > 0; with alpha = 0 the resolution
/// factor is stationary.
double k_e(double h, const Ordinate& t, double h2, const Ordinate& t2,
           const Hyperparameters& params, const ProfileSet& profiles);

/// Combined kernel k_Q = sigma^2 [ b(t).b(t') + rho_G k_G + rho_E k_E ].
double k_q(double h, const Ordinate& t, double h2, const Ordinate& t2,
           const Hyperparameters& params, const BasisSet& basis, const ProfileSet& profiles);

using HtPoint = std::pair<double, Ordinate>;

/// Gram matrix of k_Q over an arbitrary point list (order preserved).
Eigen::MatrixXd gram_matrix(std::span<const HtPoint> points, const Hyperparameters& params,
                            const BasisSet& basis, const ProfileSet& profiles);

/// Gram matrix K_Q over the dataset in lexicographic order. Call with
/// sigma2 = 1 to obtain the amplitude-free matrix.
Eigen::MatrixXd assemble_gram(const Dataset& data, const Hyperparameters& params,
                              const BasisSet& basis, const ProfileSet& profiles);

/// Cross-covariance vector (k_Q((h_l,t_l),(h,t)))_l against the dataset.
Eigen::VectorXd gram_cross(const Dataset& data, double h, const Ordinate& t,
                           const Hyperparameters& params, const BasisSet& basis,
                           const ProfileSet& profiles);

/// Names of the free parameters, in gradient order:
/// rho_G, rho_E, ell_h, ell_t_1..ell_t_p, then alpha when learned.
std::vector<std::string> free_parameter_names(const Hyperparameters& params);

/// Analytic derivatives of the amplitude-free Gram matrix with respect to
/// each free parameter, in free_parameter_names order.
std::vector<Eigen::MatrixXd> gram_gradients(const Dataset& data, const Hyperparameters& params,
                                            const BasisSet& basis, const ProfileSet& profiles);

}  // namespace bbpn

#endif  // BBPN_KERNEL_HPP
