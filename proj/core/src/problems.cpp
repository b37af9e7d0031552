#include "bbpn/problems.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <random>

#include "bbpn/errors.hpp"
#include "bbpn/fft.hpp"

namespace bbpn {

std::vector<Dataset> ProblemAdapter::datasets(std::span<const double> h_grid) const {
  std::vector<Dataset> out;
  out.reserve(h_grid.size());
  for (double h : h_grid) {
    std::vector<Datum> points;
    for (auto& [t, value] : run(h)) points.push_back({h, t, value});
    out.push_back(Dataset::build(std::move(points)));
  }
  return out;
}

// ---------- quadrature ----------

double riemann_sum(const std::function<double(double)>& f, double a, double b, double h) {
  if (!(b > a)) throw ArgumentError("riemann_sum: b must exceed a");
  if (!(h > 0.0)) throw ArgumentError("riemann_sum: h must be positive");
  if (h > b - a) throw ArgumentError("riemann_sum: h must not exceed the interval length");
  double sum = 0.0;
  double x = a;
  while (x < b) {
    const double width = std::min(h, b - x);
    sum += f(x) * width;
    x += h;
  }
  return sum;
}

double oscillatory_integrand(double x) {
  const double pi = std::numbers::pi;
  const double s = std::sin(4.0 * pi * x);
  return s * s + std::exp(x) - 2.5 * x * x * x * x + 0.5 * std::cos(16.0 * pi * x) +
         0.25 * std::cos(20.0 * pi * x);
}

// ---------- ODE integrators ----------

namespace {

void check_finite(const Eigen::VectorXd& y, std::size_t step, const char* method) {
  if (!y.allFinite()) throw DivergenceError(std::string(method) + ": non-finite state", step);
}

std::size_t step_count(double t_end, double h) {
  return static_cast<std::size_t>(std::ceil(t_end / h - 1e-12));
}

}  // namespace

OdeTrajectory euler_solve(const VectorField& f, Eigen::VectorXd y0, double t_end, double h) {
  if (!(h > 0.0) || h > t_end) throw ArgumentError("euler: need 0 < h <= t_end");
  OdeTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(y0);
  double t = 0.0;
  Eigen::VectorXd y = std::move(y0);
  const std::size_t n = step_count(t_end, h);
  for (std::size_t k = 0; k < n; ++k) {
    const double step = std::min(h, t_end - t);
    y += step * f(t, y);
    t += step;
    check_finite(y, k, "euler");
    traj.times.push_back(t);
    traj.states.push_back(y);
  }
  return traj;
}

OdeTrajectory ab2_solve(const VectorField& f, Eigen::VectorXd y0, double t_end, double h) {
  if (!(h > 0.0) || h > t_end) throw ArgumentError("ab2: need 0 < h <= t_end");
  OdeTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(y0);

  double t = 0.0;
  Eigen::VectorXd y = std::move(y0);
  Eigen::VectorXd f_prev = f(t, y);
  const std::size_t n = step_count(t_end, h);

  // Bootstrap with one Euler step.
  if (n >= 1) {
    const double step = std::min(h, t_end - t);
    y += step * f_prev;
    t += step;
    check_finite(y, 0, "ab2");
    traj.times.push_back(t);
    traj.states.push_back(y);
  }
  for (std::size_t k = 1; k < n; ++k) {
    const double step = std::min(h, t_end - t);
    const Eigen::VectorXd f_cur = f(t, y);
    y += step * (1.5 * f_cur - 0.5 * f_prev);
    f_prev = f_cur;
    t += step;
    check_finite(y, k, "ab2");
    traj.times.push_back(t);
    traj.states.push_back(y);
  }
  return traj;
}

Eigen::VectorXd rk4_reference(const VectorField& f, Eigen::VectorXd y0, double t_end,
                              double h_ref) {
  if (!(h_ref > 0.0) || h_ref > t_end) throw ArgumentError("rk4: need 0 < h_ref <= t_end");
  double t = 0.0;
  Eigen::VectorXd y = std::move(y0);
  const std::size_t n = step_count(t_end, h_ref);
  for (std::size_t k = 0; k < n; ++k) {
    const double step = std::min(h_ref, t_end - t);
    const Eigen::VectorXd k1 = f(t, y);
    const Eigen::VectorXd k2 = f(t + 0.5 * step, y + 0.5 * step * k1);
    const Eigen::VectorXd k3 = f(t + 0.5 * step, y + 0.5 * step * k2);
    const Eigen::VectorXd k4 = f(t + step, y + step * k3);
    y += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += step;
    check_finite(y, k, "rk4");
  }
  return y;
}

VectorField lotka_volterra_field() {
  return [](double, const Eigen::VectorXd& y) {
    Eigen::VectorXd dy(2);
    dy[0] = 0.5 * y[0] - 0.05 * y[0] * y[1];
    dy[1] = -0.5 * y[1] + 0.05 * y[0] * y[1];
    return dy;
  };
}

// ---------- matrix eigenvalues ----------

Eigen::MatrixXd laplacian_matrix(const LaplacianSpec& spec) {
  if (spec.l < 1 || spec.m < 1) throw ArgumentError("laplacian: l, m must be >= 1");
  const int n = spec.l * spec.m;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int block = 0; block < spec.m; ++block) {
    const int off = block * spec.l;
    for (int i = 0; i < spec.l; ++i) {
      a(off + i, off + i) = 4.0;
      if (i + 1 < spec.l) {
        a(off + i, off + i + 1) = -1.0;
        a(off + i + 1, off + i) = -1.0;
      }
    }
    if (block + 1 < spec.m) {
      for (int i = 0; i < spec.l; ++i) {
        a(off + i, off + spec.l + i) = -1.0;
        a(off + spec.l + i, off + i) = -1.0;
      }
    }
  }
  return a;
}

Eigen::VectorXd laplacian_eigenvalues(const LaplacianSpec& spec) {
  if (spec.l < 1 || spec.m < 1) throw ArgumentError("laplacian: l, m must be >= 1");
  const double pi = std::numbers::pi;
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(spec.l) * spec.m);
  for (int p = 1; p <= spec.l; ++p) {
    for (int q = 1; q <= spec.m; ++q) {
      vals.push_back(4.0 - 2.0 * std::cos(p * pi / (spec.l + 1)) -
                     2.0 * std::cos(q * pi / (spec.m + 1)));
    }
  }
  std::sort(vals.begin(), vals.end());
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

std::vector<Eigen::VectorXd> qr_iteration(Eigen::MatrixXd a, int iterations) {
  if (a.rows() != a.cols()) throw ArgumentError("qr_iteration: matrix must be square");
  if (iterations < 1) throw ArgumentError("qr_iteration: iterations must be positive");
  std::vector<Eigen::VectorXd> diags;
  diags.reserve(static_cast<std::size_t>(iterations));
  for (int k = 0; k < iterations; ++k) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    const Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    a = r * q;
    if (!a.allFinite())
      throw NumericError("qr_iteration: non-finite entries after iteration " +
                         std::to_string(k + 1));
    diags.emplace_back(a.diagonal());
  }
  return diags;
}

// ---------- tensor eigenpairs ----------

namespace {

// Odometer increment over multi-indices in [0, dim)^order.
bool next_index(std::vector<int>& idx, int dim) {
  for (std::size_t pos = idx.size(); pos-- > 0;) {
    if (++idx[pos] < dim) return true;
    idx[pos] = 0;
  }
  return false;
}

std::size_t flat_offset(std::span<const int> idx, int dim) {
  std::size_t off = 0;
  for (int i : idx) off = off * static_cast<std::size_t>(dim) + static_cast<std::size_t>(i);
  return off;
}

}  // namespace

SymmetricTensor::SymmetricTensor(int order, int dim, std::vector<double> entries)
    : order_(order), dim_(dim), entries_(std::move(entries)) {
  if (order_ < 2) throw ArgumentError("tensor: order must be >= 2");
  if (dim_ < 1) throw ArgumentError("tensor: dimension must be >= 1");
  std::size_t expect = 1;
  for (int i = 0; i < order_; ++i) expect *= static_cast<std::size_t>(dim_);
  if (entries_.size() != expect) throw ArgumentError("tensor: entry count mismatch");

  // Spot-check symmetry on random tuples; a relative tolerance absorbs
  // rounding differences in how callers built the permuted entries.
  std::mt19937_64 rng(0x5ca1ab1e);
  std::uniform_int_distribution<int> pick(0, dim_ - 1);
  std::vector<int> idx(static_cast<std::size_t>(order_));
  for (int trial = 0; trial < 64; ++trial) {
    for (auto& i : idx) i = pick(rng);
    const double ref = entries_[flat_offset(idx, dim_)];
    std::vector<int> perm = idx;
    std::shuffle(perm.begin(), perm.end(), rng);
    const double other = entries_[flat_offset(perm, dim_)];
    if (std::abs(other - ref) > 1e-12 * (1.0 + std::abs(ref)))
      throw ArgumentError("tensor: entries are not symmetric under index permutation");
  }
}

SymmetricTensor SymmetricTensor::random(int order, int dim, std::uint64_t seed) {
  if (order < 2 || dim < 1) throw ArgumentError("tensor: bad shape");
  std::size_t total = 1;
  for (int i = 0; i < order; ++i) total *= static_cast<std::size_t>(dim);

  std::vector<double> raw(total);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& v : raw) v = normal(rng);

  // Average over index permutations: accumulate onto the sorted
  // representative, then broadcast back.
  std::map<std::vector<int>, std::pair<double, int>> canon;
  std::vector<int> idx(static_cast<std::size_t>(order), 0);
  std::size_t off = 0;
  do {
    std::vector<int> key = idx;
    std::sort(key.begin(), key.end());
    auto& [sum, count] = canon[key];
    sum += raw[off];
    ++count;
    ++off;
  } while (next_index(idx, dim));

  std::vector<double> sym(total);
  std::fill(idx.begin(), idx.end(), 0);
  off = 0;
  do {
    std::vector<int> key = idx;
    std::sort(key.begin(), key.end());
    const auto& [sum, count] = canon[key];
    sym[off] = sum / count;
    ++off;
  } while (next_index(idx, dim));

  return SymmetricTensor(order, dim, std::move(sym));
}

double SymmetricTensor::entry(std::span<const int> index) const {
  if (index.size() != static_cast<std::size_t>(order_))
    throw ArgumentError("tensor: index arity mismatch");
  for (int i : index)
    if (i < 0 || i >= dim_) throw ArgumentError("tensor: index out of range");
  return entries_[flat_offset(index, dim_)];
}

double SymmetricTensor::max_abs_entry() const {
  double m = 0.0;
  for (double v : entries_) m = std::max(m, std::abs(v));
  return m;
}

Eigen::VectorXd tensor_apply(const SymmetricTensor& a, const Eigen::VectorXd& x) {
  if (x.size() != a.dim()) throw ArgumentError("tensor_apply: dimension mismatch");
  const int dim = a.dim();
  const int order = a.order();

  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
  std::vector<int> idx(static_cast<std::size_t>(order), 0);
  std::size_t off = 0;
  // Full contraction over the trailing order-1 indices.
  do {
    double weight = 1.0;
    for (int pos = 1; pos < order; ++pos) weight *= x[idx[static_cast<std::size_t>(pos)]];
    out[idx[0]] += a.entry(idx) * weight;
    ++off;
  } while (next_index(idx, dim));
  (void)off;
  return out;
}

std::vector<PowerIterate> shifted_power_method(const SymmetricTensor& a, Eigen::VectorXd x0,
                                               double shift, int iterations) {
  if (iterations < 1) throw ArgumentError("shifted power method: iterations must be positive");
  const double norm0 = x0.norm();
  if (std::abs(norm0 - 1.0) > 1e-8)
    throw ArgumentError("shifted power method: x0 must be a unit vector");
  x0 /= norm0;

  std::vector<PowerIterate> out;
  out.reserve(static_cast<std::size_t>(iterations));
  Eigen::VectorXd x = std::move(x0);
  for (int k = 0; k < iterations; ++k) {
    const Eigen::VectorXd ax = tensor_apply(a, x);
    Eigen::VectorXd g = ax + shift * x;
    const double gn = g.norm();
    if (gn == 0.0 || !g.allFinite())
      throw NumericError("shifted power method: zero update vector at iteration " +
                         std::to_string(k + 1));
    x = g / gn;
    const double lambda = x.dot(tensor_apply(a, x));
    out.push_back({lambda, x});
  }
  return out;
}

// ---------- spectral KSE ----------

void KSEConfig::validate() const {
  if (grid_size < 2 || (grid_size & (grid_size - 1)) != 0)
    throw ArgumentError("kse: grid size must be an even power of two");
  if (!(dx > 0.0) || !(dt > 0.0) || !(t_end > 0.0))
    throw ArgumentError("kse: dx, dt, t_end must be positive");
  const double span = grid_size * dx;
  const double domain = 2.0 * std::numbers::pi * length_scale;
  if (std::abs(span - domain) > 1e-9 * domain)
    throw ArgumentError("kse: N*dx must span the periodic domain 2 pi L");
  const double steps = t_end / dt;
  if (std::abs(steps - std::round(steps)) > 1.0)
    throw ArgumentError("kse: dt must divide t_end to within one step");
}

Eigen::VectorXd kse_initial_state(const KSEConfig& config) {
  const double domain = 2.0 * std::numbers::pi * config.length_scale;
  const double center =
      config.initial_center >= 0.0 ? config.initial_center : 0.5 * domain;
  Eigen::VectorXd u0(config.grid_size);
  for (int l = 0; l < config.grid_size; ++l) {
    const double x = l * config.dx - center;
    u0[l] = config.initial_amplitude * std::exp(-config.initial_decay * x * x);
  }
  return u0;
}

namespace {

// Contour-averaged ETDRK4 coefficient: h * mean_j expr((h*lk + r_j)) with 32
// points r_j on the unit circle, which sidesteps cancellation for small h*lk.
struct EtdCoefficients {
  Eigen::VectorXd e;   // exp(h L)
  Eigen::VectorXd e2;  // exp(h L / 2)
  Eigen::VectorXd q;
  Eigen::VectorXd f1;
  Eigen::VectorXd f2;
  Eigen::VectorXd f3;
};

EtdCoefficients etd_coefficients(const Eigen::VectorXd& lk, double h) {
  const int n = static_cast<int>(lk.size());
  const int m_pts = 32;
  EtdCoefficients c;
  c.e = (h * lk.array()).exp();
  c.e2 = (0.5 * h * lk.array()).exp();
  c.q.resize(n);
  c.f1.resize(n);
  c.f2.resize(n);
  c.f3.resize(n);

  for (int i = 0; i < n; ++i) {
    std::complex<double> q_acc = 0.0, f1_acc = 0.0, f2_acc = 0.0, f3_acc = 0.0;
    for (int j = 0; j < m_pts; ++j) {
      const double angle = 2.0 * std::numbers::pi * (j + 0.5) / m_pts;
      const std::complex<double> r(std::cos(angle), std::sin(angle));
      const std::complex<double> z = h * lk[i] + r;
      const std::complex<double> ez = std::exp(z);
      const std::complex<double> ez2 = std::exp(0.5 * z);
      const std::complex<double> z2 = z * z;
      const std::complex<double> z3 = z2 * z;
      q_acc += (ez2 - 1.0) / z;
      f1_acc += (-4.0 - z + ez * (4.0 - 3.0 * z + z2)) / z3;
      f2_acc += (2.0 + z + ez * (-2.0 + z)) / z3;
      f3_acc += (-4.0 - 3.0 * z - z2 + ez * (4.0 - z)) / z3;
    }
    c.q[i] = h * q_acc.real() / m_pts;
    c.f1[i] = h * f1_acc.real() / m_pts;
    c.f2[i] = h * f2_acc.real() / m_pts;
    c.f3[i] = h * f3_acc.real() / m_pts;
  }
  return c;
}

using Spectrum = std::vector<std::complex<double>>;

Spectrum to_spectrum(const Eigen::VectorXd& u) {
  Spectrum v(u.data(), u.data() + u.size());
  fft_radix2(v, false);
  return v;
}

}  // namespace

KSESolution kse_etdrk4_full(const KSEConfig& config, const Eigen::VectorXd& u0) {
  config.validate();
  const int n = config.grid_size;
  if (u0.size() != n) throw ArgumentError("kse: initial state size mismatch");

  // Signed wavenumbers in DFT bin order; the Nyquist bin carries no odd
  // derivative.
  Eigen::VectorXd wavenumber(n);
  for (int i = 0; i < n; ++i) wavenumber[i] = (i <= n / 2) ? i : i - n;
  wavenumber[n / 2] = 0.0;

  const double inv_l = 1.0 / config.length_scale;
  Eigen::VectorXd lk(n);
  for (int i = 0; i < n; ++i) {
    double k_over_l = ((i <= n / 2) ? i : i - n) * inv_l;
    const double k2 = k_over_l * k_over_l;
    lk[i] = k2 - k2 * k2;  // k^2/L^2 - k^4/L^4
  }

  const EtdCoefficients coef = etd_coefficients(lk, config.dt);

  std::vector<std::complex<double>> g(n);
  for (int i = 0; i < n; ++i)
    g[i] = config.nonlinear ? std::complex<double>(0.0, -0.5 * wavenumber[i] * inv_l)
                            : std::complex<double>(0.0, 0.0);

  auto nonlinear_term = [&](const Spectrum& v) {
    Spectrum real_space = v;
    fft_radix2(real_space, true);
    for (auto& x : real_space) {
      const double re = x.real();
      x = re * re;
    }
    fft_radix2(real_space, false);
    for (int i = 0; i < n; ++i) real_space[i] *= g[i];
    return real_space;
  };

  Spectrum v = to_spectrum(u0);
  const auto steps = static_cast<std::size_t>(std::llround(config.t_end / config.dt));
  for (std::size_t step = 0; step < steps; ++step) {
    const Spectrum nv = nonlinear_term(v);
    Spectrum a(n), b(n), c(n);
    for (int i = 0; i < n; ++i) a[i] = coef.e2[i] * v[i] + coef.q[i] * nv[i];
    const Spectrum na = nonlinear_term(a);
    for (int i = 0; i < n; ++i) b[i] = coef.e2[i] * v[i] + coef.q[i] * na[i];
    const Spectrum nb = nonlinear_term(b);
    for (int i = 0; i < n; ++i) c[i] = coef.e2[i] * a[i] + coef.q[i] * (2.0 * nb[i] - nv[i]);
    const Spectrum nc = nonlinear_term(c);
    for (int i = 0; i < n; ++i) {
      v[i] = coef.e[i] * v[i] + coef.f1[i] * nv[i] + 2.0 * coef.f2[i] * (na[i] + nb[i]) +
             coef.f3[i] * nc[i];
      if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag()))
        throw DivergenceError("kse: non-finite mode amplitude", step);
    }
  }

  Spectrum real_space = v;
  fft_radix2(real_space, true);
  KSESolution sol;
  sol.u.resize(n);
  for (int i = 0; i < n; ++i) {
    sol.u[i] = real_space[i].real();
    sol.imag_residue = std::max(sol.imag_residue, std::abs(real_space[i].imag()));
  }
  return sol;
}

Eigen::VectorXd kse_etdrk4(const KSEConfig& config, const Eigen::VectorXd& u0) {
  return kse_etdrk4_full(config, u0).u;
}

Eigen::VectorXd kse_etdrk4(const KSEConfig& config) {
  return kse_etdrk4(config, kse_initial_state(config));
}

// ---------- adapter factories ----------

ProblemAdapter make_riemann_adapter(std::function<double(double)> f, double a, double b,
                                    std::optional<double> exact_integral) {
  ProblemAdapter adapter;
  adapter.name = "riemann";
  adapter.order_hint = 1.0;
  adapter.run = [f = std::move(f), a, b](double h) {
    return std::vector<std::pair<Ordinate, double>>{{Ordinate(0.0), riemann_sum(f, a, b, h)}};
  };
  if (exact_integral) {
    const double v = *exact_integral;
    adapter.truth = [v](const Ordinate&) { return v; };
  }
  return adapter;
}

ProblemAdapter make_ode_adapter(const std::string& name, VectorField field, Eigen::VectorXd y0,
                                double t_end, bool second_order, double h_ref) {
  ProblemAdapter adapter;
  adapter.name = name;
  adapter.order_hint = second_order ? 2.0 : 1.0;
  const Eigen::VectorXd reference = rk4_reference(field, y0, t_end, h_ref);
  adapter.run = [field, y0, t_end, second_order](double h) {
    const OdeTrajectory traj =
        second_order ? ab2_solve(field, y0, t_end, h) : euler_solve(field, y0, t_end, h);
    std::vector<std::pair<Ordinate, double>> out;
    for (Eigen::Index c = 0; c < traj.final_state().size(); ++c)
      out.emplace_back(Ordinate::index(c + 1), traj.final_state()[c]);
    return out;
  };
  adapter.truth = [reference](const Ordinate& t) {
    const auto c = static_cast<Eigen::Index>(t.block(0)[0]);
    return reference[c - 1];
  };
  return adapter;
}

ProblemAdapter make_qr_adapter(const LaplacianSpec& spec, const HParameterization& param,
                               int truth_iterations) {
  ProblemAdapter adapter;
  adapter.name = "eigen-qr";
  const Eigen::MatrixXd a = laplacian_matrix(spec);

  // q*(i) is the limit of diagonal position i: run the iteration well past
  // the data horizon and match each position's value to a closed-form
  // eigenvalue bijectively. The diagonal does not in general converge in
  // sorted order; for symmetric matrices with near-degenerate structure the
  // observable arrangement plateaus long before the final (astronomically
  // slow) sorting swaps, so the horizon is a parameter.
  const int n = spec.l * spec.m;
  const Eigen::VectorXd limit_diag = qr_iteration(a, truth_iterations).back();
  const Eigen::VectorXd closed = laplacian_eigenvalues(spec);
  Eigen::VectorXd truth(n);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    int best = -1;
    for (int j = 0; j < n; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      if (best < 0 ||
          std::abs(closed[j] - limit_diag[i]) < std::abs(closed[best] - limit_diag[i]))
        best = j;
    }
    used[static_cast<std::size_t>(best)] = true;
    truth[i] = closed[best];
  }

  adapter.run = [a, param](double h) {
    const int w = static_cast<int>(std::llround(param.control_from_h(h)));
    if (w < 1) throw ArgumentError("eigen-qr: h must map to a positive iteration count");
    const auto diags = qr_iteration(a, w);
    std::vector<std::pair<Ordinate, double>> out;
    const Eigen::VectorXd& d = diags.back();
    for (Eigen::Index i = 0; i < d.size(); ++i)
      out.emplace_back(Ordinate::index(i + 1), d[i]);
    return out;
  };
  adapter.truth = [truth](const Ordinate& t) {
    const auto i = static_cast<Eigen::Index>(t.block(0)[0]);
    return truth[i - 1];
  };
  return adapter;
}

ProblemAdapter make_tensor_adapter(const SymmetricTensor& tensor, Eigen::VectorXd x0,
                                   double shift, const HParameterization& param) {
  ProblemAdapter adapter;
  adapter.name = "eigen-tensor";
  adapter.run = [tensor, x0, shift, param](double h) {
    const int w = static_cast<int>(std::llround(param.control_from_h(h)));
    if (w < 1) throw ArgumentError("eigen-tensor: h must map to a positive iteration count");
    const auto iterates = shifted_power_method(tensor, x0, shift, w);
    return std::vector<std::pair<Ordinate, double>>{{Ordinate(0.0), iterates.back().lambda}};
  };
  return adapter;
}

ProblemAdapter make_kse_adapter(KSEConfig base, std::vector<int> data_indices) {
  ProblemAdapter adapter;
  adapter.name = "pde-kse";
  adapter.order_hint = 4.0;
  adapter.run = [base, idx = std::move(data_indices)](double h) {
    KSEConfig config = base;
    config.dt = h;
    const Eigen::VectorXd u = kse_etdrk4(config);
    std::vector<std::pair<Ordinate, double>> out;
    out.reserve(idx.size());
    for (int i : idx) out.emplace_back(Ordinate(i * config.dx), u[i]);
    return out;
  };
  return adapter;
}

}  // namespace bbpn
