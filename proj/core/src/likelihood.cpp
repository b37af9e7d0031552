#include "bbpn/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

#include "bbpn/errors.hpp"
#include "bbpn/posterior.hpp"

namespace bbpn {

namespace {

constexpr double kLog2Pi = 1.8378770664093454;

struct KbarFactor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd w;   // Kbar^-1 q
  double quad = 0.0;   // q^T Kbar^-1 q
  double logdet = 0.0;
  double nugget = 0.0;
};

Hyperparameters unit_amplitude(const Hyperparameters& params) {
  Hyperparameters out = params;
  out.sigma2 = 1.0;
  return out;
}

KbarFactor factor_kbar(const Dataset& data, const Hyperparameters& params, const BasisSet& basis,
                       const ProfileSet& profiles, double tau) {
  if (data.empty()) throw ArgumentError("likelihood: empty dataset");
  const Hyperparameters bar = unit_amplitude(params);
  bar.validate(data.ordinate_blocks());

  KbarFactor f;
  Eigen::MatrixXd kbar = assemble_gram(data, bar, basis, profiles);
  f.nugget = detail::factor_with_nugget(kbar, f.llt, tau);
  const Eigen::VectorXd q = data.values();
  f.w = f.llt.solve(q);
  f.quad = q.dot(f.w);
  f.logdet = 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();
  return f;
}

}  // namespace

void FitConfig::validate() const {
  if (restarts < 1) throw ArgumentError("fit config: restarts must be positive");
  if (max_iters < 1) throw ArgumentError("fit config: max_iters must be positive");
  if (!(grad_tol > 0.0)) throw ArgumentError("fit config: grad_tol must be positive");
  if (alpha < 0.0) throw ArgumentError("fit config: alpha must be non-negative");
  if (alpha == 0.0 && learn_alpha)
    throw ArgumentError("fit config: stationary alpha = 0 cannot be learned");
  for (const auto& [lo, hi] : log_bounds) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
      throw ArgumentError("fit config: bounds must be finite with lower < upper");
  }
}

double log_likelihood(const Dataset& data, const Hyperparameters& params, const BasisSet& basis,
                      const ProfileSet& profiles, double nugget_tau) {
  if (!(params.sigma2 > 0.0)) throw ArgumentError("log_likelihood: sigma2 must be positive");
  const auto f = factor_kbar(data, params, basis, profiles, nugget_tau);
  const double m = static_cast<double>(data.size());
  return -0.5 * m * kLog2Pi - 0.5 * m * std::log(params.sigma2) - 0.5 * f.logdet -
         f.quad / (2.0 * params.sigma2);
}

double sigma2_ml(const Dataset& data, const Hyperparameters& params, const BasisSet& basis,
                 const ProfileSet& profiles, double nugget_tau) {
  if (data.values().isZero(0.0))
    throw DegenerateDataError("sigma2_ml: all observations are zero");
  const auto f = factor_kbar(data, params, basis, profiles, nugget_tau);
  return f.quad / static_cast<double>(data.size());
}

double profile_log_likelihood(const Dataset& data, const Hyperparameters& params,
                              const BasisSet& basis, const ProfileSet& profiles,
                              double nugget_tau) {
  if (data.values().isZero(0.0))
    throw DegenerateDataError("profile likelihood: all observations are zero");
  const auto f = factor_kbar(data, params, basis, profiles, nugget_tau);
  const double m = static_cast<double>(data.size());
  return -0.5 * m * std::log(f.quad) - 0.5 * f.logdet;
}

Eigen::VectorXd profile_gradient(const Dataset& data, const Hyperparameters& params,
                                 const BasisSet& basis, const ProfileSet& profiles,
                                 double nugget_tau) {
  const auto f = factor_kbar(data, params, basis, profiles, nugget_tau);
  const auto grads = gram_gradients(data, unit_amplitude(params), basis, profiles);
  const double m = static_cast<double>(data.size());
  const Eigen::Index n = static_cast<Eigen::Index>(data.size());
  const Eigen::MatrixXd kinv = f.llt.solve(Eigen::MatrixXd::Identity(n, n));

  Eigen::VectorXd g(static_cast<Eigen::Index>(grads.size()));
  for (std::size_t j = 0; j < grads.size(); ++j) {
    const double quad_term = f.w.dot(grads[j] * f.w);
    const double trace_term = kinv.cwiseProduct(grads[j]).sum();
    g[static_cast<Eigen::Index>(j)] = 0.5 * m * quad_term / f.quad - 0.5 * trace_term;
  }
  return g;
}

namespace {

// ---- box-constrained quasi-Newton ascent in log-parameter space ----

struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Eigen::VectorXd clamp(const Eigen::VectorXd& u) const {
    return u.cwiseMax(lo).cwiseMin(hi);
  }
};

struct FreeParameterMap {
  std::size_t p = 0;
  bool learn_alpha = false;
  double fixed_alpha = 1.0;

  std::size_t count() const { return 3 + p + (learn_alpha ? 1 : 0); }

  Hyperparameters to_params(const Eigen::VectorXd& u) const {
    Hyperparameters out;
    out.sigma2 = 1.0;
    out.rho_g = std::exp(u[0]);
    out.rho_e = std::exp(u[1]);
    out.ell_h = std::exp(u[2]);
    out.ell_t.assign(p, 1.0);
    for (std::size_t i = 0; i < p; ++i) out.ell_t[i] = std::exp(u[3 + static_cast<Eigen::Index>(i)]);
    out.alpha_learned = learn_alpha;
    out.alpha = learn_alpha ? std::exp(u[u.size() - 1]) : fixed_alpha;
    return out;
  }
};

struct Evaluation {
  double value = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd grad;  // in log-space
  bool ok = false;
};

class ProfileObjective {
 public:
  ProfileObjective(const Dataset& data, const BasisSet& basis, const ProfileSet& profiles,
                   FreeParameterMap map, double tau)
      : data_(data), basis_(basis), profiles_(profiles), map_(map), tau_(tau) {}

  Evaluation operator()(const Eigen::VectorXd& u) const {
    Evaluation e;
    e.grad = Eigen::VectorXd::Zero(u.size());
    try {
      const Hyperparameters params = map_.to_params(u);
      e.value = profile_log_likelihood(data_, params, basis_, profiles_, tau_);
      const Eigen::VectorXd g = profile_gradient(data_, params, basis_, profiles_, tau_);
      // chain rule d/d log theta = theta d/d theta
      e.grad[0] = g[0] * params.rho_g;
      e.grad[1] = g[1] * params.rho_e;
      e.grad[2] = g[2] * params.ell_h;
      for (std::size_t i = 0; i < map_.p; ++i) {
        const Eigen::Index j = 3 + static_cast<Eigen::Index>(i);
        e.grad[j] = g[j] * params.ell_t[i];
      }
      if (map_.learn_alpha) e.grad[u.size() - 1] = g[g.size() - 1] * params.alpha;
      e.ok = std::isfinite(e.value) && e.grad.allFinite();
    } catch (const std::exception&) {
      // Degenerate parameter points (failed factorizations, overflowed
      // kernels) are simply unusable line-search candidates.
      e.ok = false;
      e.grad.setZero();
    }
    return e;
  }

 private:
  const Dataset& data_;
  const BasisSet& basis_;
  const ProfileSet& profiles_;
  FreeParameterMap map_;
  double tau_;
};

struct AscentOutcome {
  Eigen::VectorXd u;
  double value = -std::numeric_limits<double>::infinity();
  double projected_grad_norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  bool usable = false;
};

// Projected L-BFGS with Armijo backtracking along the projected path.
AscentOutcome maximize(const ProfileObjective& f, Eigen::VectorXd u0, const Box& box,
                       int max_iters, double grad_tol) {
  AscentOutcome out;
  Eigen::VectorXd u = box.clamp(u0);
  Evaluation cur = f(u);
  if (!cur.ok) return out;
  out.usable = true;

  const int memory = 10;
  std::deque<Eigen::VectorXd> s_hist, y_hist;

  auto projected_gradient_norm = [&](const Eigen::VectorXd& point, const Eigen::VectorXd& grad) {
    return (box.clamp(point + grad) - point).lpNorm<Eigen::Infinity>();
  };

  for (int iter = 0; iter < max_iters; ++iter) {
    out.iterations = iter;
    const double pg = projected_gradient_norm(u, cur.grad);
    if (pg <= grad_tol) {
      out.converged = true;
      break;
    }

    // Two-loop recursion on the minimization problem (negated gradient).
    Eigen::VectorXd d = cur.grad;  // ascent direction seed
    if (!s_hist.empty()) {
      std::vector<double> alpha_coef(s_hist.size());
      Eigen::VectorXd q = -cur.grad;
      for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
        const double rho = 1.0 / y_hist[i].dot(s_hist[i]);
        alpha_coef[i] = rho * s_hist[i].dot(q);
        q -= alpha_coef[i] * y_hist[i];
      }
      const double gamma =
          s_hist.back().dot(y_hist.back()) / y_hist.back().dot(y_hist.back());
      Eigen::VectorXd z = gamma * q;
      for (std::size_t i = 0; i < s_hist.size(); ++i) {
        const double rho = 1.0 / y_hist[i].dot(s_hist[i]);
        const double beta = rho * y_hist[i].dot(z);
        z += (alpha_coef[i] - beta) * s_hist[i];
      }
      d = -z;  // back to ascent
    }
    if (d.dot(cur.grad) <= 1e-12 * d.norm() * cur.grad.norm()) {
      d = cur.grad;
      s_hist.clear();
      y_hist.clear();
    }

    // Backtracking on the projected path.
    double step = 1.0;
    Evaluation next;
    Eigen::VectorXd u_next;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      u_next = box.clamp(u + step * d);
      const Eigen::VectorXd delta = u_next - u;
      if (delta.lpNorm<Eigen::Infinity>() < 1e-15) break;
      next = f(u_next);
      if (next.ok && next.value >= cur.value + 1e-4 * cur.grad.dot(delta)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no progress along this direction

    const Eigen::VectorXd s = u_next - u;
    const Eigen::VectorXd y = -(next.grad - cur.grad);  // minimization curvature
    if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      if (static_cast<int>(s_hist.size()) > memory) {
        s_hist.pop_front();
        y_hist.pop_front();
      }
    }
    u = u_next;
    cur = next;
  }

  out.u = u;
  out.value = cur.value;
  out.projected_grad_norm = projected_gradient_norm(u, cur.grad);
  return out;
}

std::vector<std::pair<double, double>> default_log_bounds(const FreeParameterMap& map) {
  std::vector<std::pair<double, double>> bounds(map.count(),
                                                {std::log(1e-4), std::log(1e4)});
  if (map.learn_alpha) bounds.back() = {std::log(0.1), std::log(6.0)};
  return bounds;
}

}  // namespace

FitResult fit(const Dataset& data, const FitConfig& config, const BasisSet& basis,
              const ProfileSet& profiles) {
  config.validate();
  if (data.resolution_count() < 2)
    throw ArgumentError("fit: at least two distinct resolutions are required");
  if (data.values().isZero(0.0)) throw DegenerateDataError("fit: all observations are zero");

  FreeParameterMap map;
  map.p = data.ordinate_blocks();
  map.learn_alpha = config.learn_alpha;
  map.fixed_alpha = config.alpha;

  auto bounds = config.log_bounds.empty() ? default_log_bounds(map) : config.log_bounds;
  if (bounds.size() != map.count())
    throw ArgumentError("fit: bounds must match the number of free parameters");

  Box box;
  box.lo.resize(static_cast<Eigen::Index>(bounds.size()));
  box.hi.resize(static_cast<Eigen::Index>(bounds.size()));
  for (std::size_t j = 0; j < bounds.size(); ++j) {
    box.lo[static_cast<Eigen::Index>(j)] = bounds[j].first;
    box.hi[static_cast<Eigen::Index>(j)] = bounds[j].second;
  }

  const ProfileObjective objective(data, basis, profiles, map, config.nugget_tau);

  FitResult result;
  double best_value = -std::numeric_limits<double>::infinity();

  for (int r = 0; r < config.restarts; ++r) {
    Eigen::VectorXd u0(static_cast<Eigen::Index>(map.count()));
    if (r == 0) {
      u0.setZero();  // all scales at 1
      if (map.learn_alpha) u0[u0.size() - 1] = std::log(std::max(config.alpha, 0.1));
    } else {
      std::mt19937_64 rng(config.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(r));
      for (Eigen::Index j = 0; j < u0.size(); ++j) {
        std::uniform_real_distribution<double> dist(box.lo[j], box.hi[j]);
        u0[j] = dist(rng);
      }
    }
    u0 = box.clamp(u0);

    const Evaluation initial = objective(u0);
    const AscentOutcome outcome =
        maximize(objective, u0, box, config.max_iters, config.grad_tol);

    RestartRecord rec;
    rec.index = r;
    rec.initial_objective = initial.ok ? initial.value : -std::numeric_limits<double>::infinity();
    rec.final_objective = outcome.usable ? outcome.value : rec.initial_objective;
    rec.gradient_norm = outcome.projected_grad_norm;
    rec.iterations = outcome.iterations;
    rec.converged = outcome.converged;
    result.restarts.push_back(rec);

    if (outcome.usable && outcome.value > best_value) {
      best_value = outcome.value;
      result.params = map.to_params(outcome.u);
      result.profile_log_likelihood = outcome.value;
      result.gradient_norm = outcome.projected_grad_norm;
      result.converged = outcome.converged;
      result.restart_index = r;
    }
  }

  if (result.restart_index < 0) {
    // Every restart failed to produce a usable evaluation.
    result.converged = false;
    result.params = map.to_params(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(map.count())));
    return result;
  }

  result.params.sigma2 =
      sigma2_ml(data, result.params, basis, profiles, config.nugget_tau);
  result.log_likelihood =
      log_likelihood(data, result.params, basis, profiles, config.nugget_tau);
  return result;
}

}  // namespace bbpn
