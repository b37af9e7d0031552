#ifndef BBPN_PROBLEMS_HPP
#define BBPN_PROBLEMS_HPP

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bbpn/dataset.hpp"
#include "bbpn/ordinate.hpp"

namespace bbpn {

/// Uniform interface of a built-in numerical method used as a data
/// generator: run(h) yields the method output at resolution h as (t, value)
/// pairs, deterministically for fixed h. truth, when present, gives q*(t).
struct ProblemAdapter {
  std::string name;
  std::function<std::vector<std::pair<Ordinate, double>>(double)> run;
  std::optional<double> order_hint;
  std::function<double(const Ordinate&)> truth;  // empty when unavailable

  /// Runs the method at each resolution and assembles one Dataset per run.
  std::vector<Dataset> datasets(std::span<const double> h_grid) const;
};

// ---------- quadrature ----------

/// Left Riemann sum over uniform cells of width h; the final partial cell is
/// truncated at b. First-order in h.
double riemann_sum(const std::function<double(double)>& f, double a, double b, double h);

/// sin^2(4 pi x) + exp(x) - (5/2) x^4 + cos(16 pi x)/2 + cos(20 pi x)/4;
/// integrates to e - 1 over [0, 1].
double oscillatory_integrand(double x);

// ---------- ODE integrators ----------

using VectorField = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

struct OdeTrajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;

  const Eigen::VectorXd& final_state() const { return states.back(); }
};

/// Explicit Euler, order 1. Throws DivergenceError naming the failing step if
/// the state leaves the finite range.
OdeTrajectory euler_solve(const VectorField& f, Eigen::VectorXd y0, double t_end, double h);

/// Two-step Adams-Bashforth bootstrapped with one Euler step, order 2.
OdeTrajectory ab2_solve(const VectorField& f, Eigen::VectorXd y0, double t_end, double h);

/// Classical fourth-order Runge-Kutta final state, used as a ground-truth
/// proxy at small h_ref.
Eigen::VectorXd rk4_reference(const VectorField& f, Eigen::VectorXd y0, double t_end,
                              double h_ref);

/// dy/dt = (0.5 y1 - 0.05 y1 y2, -0.5 y2 + 0.05 y1 y2).
VectorField lotka_volterra_field();

// ---------- matrix eigenvalues ----------

/// Block-tridiagonal five-point-stencil Laplacian: l x l blocks
/// B = tridiag(-1, 4, -1) on the diagonal (m of them) and -I off-diagonal.
struct LaplacianSpec {
  int l = 1;
  int m = 1;
};

Eigen::MatrixXd laplacian_matrix(const LaplacianSpec& spec);

/// Closed-form eigenvalues 4 - 2 cos(p pi/(l+1)) - 2 cos(q pi/(m+1)),
/// sorted ascending.
Eigen::VectorXd laplacian_eigenvalues(const LaplacianSpec& spec);

/// Unshifted QR iteration A_k = R_{k-1} Q_{k-1}; returns diag(A_k) for
/// k = 1..iterations.
std::vector<Eigen::VectorXd> qr_iteration(Eigen::MatrixXd a, int iterations);

// ---------- tensor eigenpairs ----------

/// Fully symmetric order-m, dimension-n real tensor stored densely.
class SymmetricTensor {
 public:
  /// Entries in row-major multi-index order, length n^m. Symmetry is spot
  /// checked on random index tuples.
  SymmetricTensor(int order, int dim, std::vector<double> entries);

  /// Symmetrized i.i.d. standard normal entries, seeded.
  static SymmetricTensor random(int order, int dim, std::uint64_t seed);

  int order() const { return order_; }
  int dim() const { return dim_; }
  double entry(std::span<const int> index) const;
  double max_abs_entry() const;

 private:
  int order_;
  int dim_;
  std::vector<double> entries_;
};

/// Full (m-1)-fold contraction (A x^{m-1})_i1 = sum a_{i1..im} x_{i2}..x_{im}.
Eigen::VectorXd tensor_apply(const SymmetricTensor& a, const Eigen::VectorXd& x);

struct PowerIterate {
  double lambda = 0.0;
  Eigen::VectorXd x;
};

/// Shifted symmetric higher-order power method: from unit x0 iterate
/// x_{k+1} = normalize(A x_k^{m-1} + shift x_k), with the Rayleigh quotient
/// lambda_k = x_k^T A x_k^{m-1} recorded after each update.
std::vector<PowerIterate> shifted_power_method(const SymmetricTensor& a, Eigen::VectorXd x0,
                                               double shift, int iterations);

// ---------- spectral KSE ----------

/// Fourth-order exponential-time-differencing solve of
/// u_t + u_xxxx + u_xx + u u_x = 0 on a periodic grid of N points spanning
/// 2 pi L, advanced in Fourier space.
struct KSEConfig {
  int grid_size = 128;  // N, power of two
  double dx = 1.0 / 128.0;
  double dt = 0.01;
  double t_end = 10.0;
  double length_scale = 0.15915494309189535;  // L = 1/(2 pi): unit domain
  double initial_amplitude = 1.0;
  double initial_decay = 0.01;  // u(x,0) = amplitude exp(-decay (x - center)^2)
  /// Bump center; negative selects the domain midpoint, which keeps the
  /// periodic wrap smooth.
  double initial_center = -1.0;
  bool nonlinear = true;

  void validate() const;
};

/// The configured initial state on the grid x_l = l dx.
Eigen::VectorXd kse_initial_state(const KSEConfig& config);

struct KSESolution {
  Eigen::VectorXd u;          // real-space solution at t_end
  double imag_residue = 0.0;  // max |imag| left by the final inverse transform
};

KSESolution kse_etdrk4_full(const KSEConfig& config, const Eigen::VectorXd& u0);
Eigen::VectorXd kse_etdrk4(const KSEConfig& config, const Eigen::VectorXd& u0);
Eigen::VectorXd kse_etdrk4(const KSEConfig& config);

// ---------- adapter factories ----------

ProblemAdapter make_riemann_adapter(std::function<double(double)> f, double a, double b,
                                    std::optional<double> exact_integral);

/// Final-state ODE adapter: ordinates are component indices 1..d; truth is
/// the RK4 reference at h_ref.
ProblemAdapter make_ode_adapter(const std::string& name, VectorField field, Eigen::VectorXd y0,
                                double t_end, bool second_order, double h_ref);

/// QR-iteration adapter; h maps to the iteration count through the given
/// parameterization. Ordinates are diagonal positions 1..n; the truth of
/// position i is the closed-form eigenvalue its diagonal entry converges to,
/// matched against an oracle run of truth_iterations sweeps (the limit
/// arrangement is not sorted in general).
ProblemAdapter make_qr_adapter(const LaplacianSpec& spec, const HParameterization& param,
                               int truth_iterations = 60);

/// Shifted-power-method adapter; the single ordinate is 0 and h maps to the
/// iteration count through the given parameterization.
ProblemAdapter make_tensor_adapter(const SymmetricTensor& tensor, Eigen::VectorXd x0,
                                   double shift, const HParameterization& param);

/// ETDRK4 adapter over h = dt, observing the solution at the given grid
/// indices.
ProblemAdapter make_kse_adapter(KSEConfig base, std::vector<int> data_indices);

}  // namespace bbpn

#endif  // BBPN_PROBLEMS_HPP
