#include "bbpn/kernel.hpp"

#include <cmath>

#include "bbpn/errors.hpp"

namespace bbpn {

namespace {
constexpr double kSqrt3 = 1.7320508075688772;
}

RadialProfile profile_from_name(std::string_view name) {
  if (name == "matern12") return RadialProfile::Matern12;
  if (name == "matern32") return RadialProfile::Matern32;
  if (name == "gaussian") return RadialProfile::Gaussian;
  throw ArgumentError("unknown radial profile '" + std::string(name) + "'");
}

std::string_view profile_name(RadialProfile kind) {
  switch (kind) {
    case RadialProfile::Matern12: return "matern12";
    case RadialProfile::Matern32: return "matern32";
    case RadialProfile::Gaussian: return "gaussian";
  }
  return "?";
}

double eval_profile(RadialProfile kind, double eps) {
  if (eps < 0.0) throw ArgumentError("radial profile: eps must be non-negative");
  switch (kind) {
    case RadialProfile::Matern12:
      return std::exp(-eps);
    case RadialProfile::Matern32:
      return (1.0 + kSqrt3 * eps) * std::exp(-kSqrt3 * eps);
    case RadialProfile::Gaussian:
      return std::exp(-0.5 * eps * eps);
  }
  throw ArgumentError("radial profile: unknown kind");
}

double profile_slope(RadialProfile kind, double eps) {
  if (eps < 0.0) throw ArgumentError("radial profile: eps must be non-negative");
  switch (kind) {
    case RadialProfile::Matern12:
      return -std::exp(-eps);
    case RadialProfile::Matern32:
      return -3.0 * eps * std::exp(-kSqrt3 * eps);
    case RadialProfile::Gaussian:
      return -eps * std::exp(-0.5 * eps * eps);
  }
  throw ArgumentError("radial profile: unknown kind");
}

void Hyperparameters::validate(std::size_t p) const {
  if (!(sigma2 > 0.0)) throw ArgumentError("hyperparameters: sigma2 must be positive");
  if (!(rho_g > 0.0)) throw ArgumentError("hyperparameters: rho_G must be positive");
  if (!(rho_e > 0.0)) throw ArgumentError("hyperparameters: rho_E must be positive");
  if (!(ell_h > 0.0)) throw ArgumentError("hyperparameters: ell_h must be positive");
  if (ell_t.size() != p)
    throw ArgumentError("hyperparameters: ell_t must have one entry per ordinate block");
  for (double l : ell_t)
    if (!(l > 0.0)) throw ArgumentError("hyperparameters: ell_t entries must be positive");
  if (alpha < 0.0) throw ArgumentError("hyperparameters: alpha must be non-negative");
  if (alpha == 0.0 && alpha_learned)
    throw ArgumentError("hyperparameters: alpha = 0 cannot be combined with alpha_learned");
}

BasisSet BasisSet::polynomial(std::size_t v) {
  std::vector<Function> fns;
  fns.reserve(v);
  for (std::size_t j = 0; j < v; ++j) {
    fns.push_back([j](const Ordinate& t) {
      const double c = t.block(0)[0];
      return std::pow(c, static_cast<double>(j));
    });
  }
  return BasisSet(std::move(fns));
}

Eigen::VectorXd BasisSet::evaluate(const Ordinate& t) const {
  Eigen::VectorXd b(static_cast<Eigen::Index>(functions_.size()));
  for (std::size_t j = 0; j < functions_.size(); ++j)
    b[static_cast<Eigen::Index>(j)] = functions_[j](t);
  return b;
}

double k_g(const Ordinate& t, const Ordinate& t2, const Hyperparameters& params,
           const ProfileSet& profiles) {
  const std::size_t p = t.block_count();
  if (t2.block_count() != p) throw ArgumentError("k_G: ordinate block counts differ");
  if (profiles.phi.size() != p) throw ArgumentError("k_G: one profile per block required");
  if (params.ell_t.size() != p) throw ArgumentError("k_G: one ell_t per block required");
  double out = 1.0;
  for (std::size_t i = 0; i < p; ++i) {
    out *= eval_profile(profiles.phi[i], block_distance(t, t2, i) / params.ell_t[i]);
  }
  return out;
}

namespace {

// (h h')^alpha with the limit conventions: 0 when the product vanishes and
// alpha > 0, 1 when alpha = 0.
double resolution_power(double h, double h2, double alpha) {
  const double prod = h * h2;
  if (alpha == 0.0) return 1.0;
  if (prod == 0.0) return 0.0;
  return std::pow(prod, alpha);
}

}  // namespace

double k_e(double h, const Ordinate& t, double h2, const Ordinate& t2,
           const Hyperparameters& params, const ProfileSet& profiles) {
  if (h < 0.0 || h2 < 0.0) throw ArgumentError("k_E: resolutions must be non-negative");
  const double pw = resolution_power(h, h2, params.alpha);
  if (pw == 0.0) return 0.0;
  return pw * eval_profile(profiles.psi, std::abs(h - h2) / params.ell_h) *
         k_g(t, t2, params, profiles);
}

double k_q(double h, const Ordinate& t, double h2, const Ordinate& t2,
           const Hyperparameters& params, const BasisSet& basis, const ProfileSet& profiles) {
  double out = params.rho_g * k_g(t, t2, params, profiles) +
               params.rho_e * k_e(h, t, h2, t2, params, profiles);
  if (basis.size() > 0) out += basis.evaluate(t).dot(basis.evaluate(t2));
  return params.sigma2 * out;
}

Eigen::MatrixXd gram_matrix(std::span<const HtPoint> points, const Hyperparameters& params,
                            const BasisSet& basis, const ProfileSet& profiles) {
  const Eigen::Index m = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd k(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = k_q(points[i].first, points[i].second, points[j].first, points[j].second,
                           params, basis, profiles);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Eigen::MatrixXd assemble_gram(const Dataset& data, const Hyperparameters& params,
                              const BasisSet& basis, const ProfileSet& profiles) {
  if (data.empty()) throw ArgumentError("assemble_gram: empty dataset");
  std::vector<HtPoint> pts;
  pts.reserve(data.size());
  for (const auto& d : data) pts.emplace_back(d.h, d.t);
  return gram_matrix(pts, params, basis, profiles);
}

Eigen::VectorXd gram_cross(const Dataset& data, double h, const Ordinate& t,
                           const Hyperparameters& params, const BasisSet& basis,
                           const ProfileSet& profiles) {
  Eigen::VectorXd k(static_cast<Eigen::Index>(data.size()));
  for (std::size_t l = 0; l < data.size(); ++l)
    k[static_cast<Eigen::Index>(l)] = k_q(data[l].h, data[l].t, h, t, params, basis, profiles);
  return k;
}

std::vector<std::string> free_parameter_names(const Hyperparameters& params) {
  std::vector<std::string> names = {"rho_G", "rho_E", "ell_h"};
  for (std::size_t i = 0; i < params.ell_t.size(); ++i)
    names.push_back("ell_t_" + std::to_string(i + 1));
  if (params.alpha_learned) names.push_back("alpha");
  return names;
}

std::vector<Eigen::MatrixXd> gram_gradients(const Dataset& data, const Hyperparameters& params,
                                            const BasisSet& basis, const ProfileSet& profiles) {
  if (data.empty()) throw ArgumentError("gram_gradients: empty dataset");
  (void)basis;  // the basis term carries no free parameter
  const std::size_t p = data.ordinate_blocks();
  params.validate(p);
  const Eigen::Index m = static_cast<Eigen::Index>(data.size());
  const std::size_t n_free = 3 + p + (params.alpha_learned ? 1 : 0);

  std::vector<Eigen::MatrixXd> grads(n_free, Eigen::MatrixXd::Zero(m, m));

  // Scratch per pair: per-block profile values and slopes.
  std::vector<double> phi(p), dphi_deps(p), eps(p);

  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      const Datum& da = data[static_cast<std::size_t>(a)];
      const Datum& db = data[static_cast<std::size_t>(b)];

      double kg = 1.0;
      for (std::size_t i = 0; i < p; ++i) {
        eps[i] = block_distance(da.t, db.t, i) / params.ell_t[i];
        phi[i] = eval_profile(profiles.phi[i], eps[i]);
        dphi_deps[i] = profile_slope(profiles.phi[i], eps[i]);
        kg *= phi[i];
      }

      const double pw = resolution_power(da.h, db.h, params.alpha);
      const double eps_h = std::abs(da.h - db.h) / params.ell_h;
      const double psi = eval_profile(profiles.psi, eps_h);
      const double dpsi_deps = profile_slope(profiles.psi, eps_h);
      const double ke = pw * psi * kg;

      std::size_t j = 0;
      auto set = [&](double v) {
        grads[j](a, b) = v;
        grads[j](b, a) = v;
        ++j;
      };

      // d/d rho_G = K_G, d/d rho_E = K_E
      set(kg);
      set(ke);
      // d/d ell_h: eps_h depends on ell_h as |dh| / ell_h, so
      // d eps_h / d ell_h = -eps_h / ell_h.
      set(params.rho_e * pw * dpsi_deps * (-eps_h / params.ell_h) * kg);
      // d/d ell_t_i acts on k_G inside both the limit and error terms.
      for (std::size_t i = 0; i < p; ++i) {
        double dkg = dphi_deps[i] * (-eps[i] / params.ell_t[i]);
        for (std::size_t u = 0; u < p; ++u)
          if (u != i) dkg *= phi[u];
        set(params.rho_g * dkg + params.rho_e * pw * psi * dkg);
      }
      if (params.alpha_learned) {
        // d (h h')^alpha / d alpha = (h h')^alpha log(h h'), taken as 0 when
        // the product vanishes.
        const double prod = da.h * db.h;
        set(prod > 0.0 ? params.rho_e * pw * std::log(prod) * psi * kg : 0.0);
      }
    }
  }
  return grads;
}

}  // namespace bbpn
