#include "bbpn/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "bbpn/classical.hpp"
#include "bbpn/errors.hpp"

namespace fs = std::filesystem;

namespace bbpn {

// ---------------------------------------------------------------- ConfigMap

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string opt_to_csv(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace

ConfigMap ConfigMap::parse(std::istream& in) {
  ConfigMap out;
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw IoError("config: malformed section header on line " + std::to_string(lineno));
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw IoError("config: expected key = value on line " + std::to_string(lineno));
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw IoError("config: empty key on line " + std::to_string(lineno));
    out.set(section.empty() ? key : section + "." + key, value);
  }
  return out;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open " + path);
  return parse(in);
}

bool ConfigMap::has(const std::string& key) const { return entries_.count(key) > 0; }

void ConfigMap::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw IoError("config: key '" + key + "' is not a number");
  }
}

int ConfigMap::get_int(const std::string& key, int fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw IoError("config: key '" + key + "' is not an integer");
  }
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw IoError("config: key '" + key + "' is not a boolean");
}

std::uint64_t ConfigMap::get_uint64(const std::string& key, std::uint64_t fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    throw IoError("config: key '" + key + "' is not an unsigned integer");
  }
}

std::vector<double> ConfigMap::get_doubles(const std::string& key,
                                           const std::vector<double>& fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw IoError("config: key '" + key + "' has a non-numeric element");
    }
  }
  return out;
}

// --------------------------------------------------------- ExperimentConfig

ExperimentConfig ExperimentConfig::from_map(const ConfigMap& map) {
  ExperimentConfig c;
  c.problem = map.get_string("problem", "");
  c.label = map.get_string("label", c.problem);
  c.seed = map.get_uint64("seed", 1);
  c.out_dir = map.get_string("out_dir", "out");

  c.h_grid = map.get_doubles("data.h_grid", {});
  c.w_grid = map.get_doubles("data.w_grid", {});
  c.h_param = map.get_string("data.h_param", "w^-1");
  c.cumulative = map.get_bool("data.cumulative", c.problem == "ode" || c.problem == "eigen-qr");

  c.profile = profile_from_name(map.get_string("kernel.profile", "matern12"));
  c.stationary = map.get_bool("kernel.stationary", false);
  c.learn_alpha = map.get_bool("kernel.learn_alpha", c.problem == "eigen-qr" ||
                                                         c.problem == "eigen-tensor");
  double default_alpha = 1.0;
  if (c.problem == "ode" && map.get_string("ode.method", "euler") == "ab2") default_alpha = 2.0;
  if (c.problem == "pde-kse") default_alpha = 4.0;
  c.alpha = map.get_double("kernel.alpha", default_alpha);
  c.basis_v = map.get_int("kernel.basis_v", 1);
  c.nugget_tau = map.get_double("kernel.nugget_tau", 1e-10);

  c.fit.restarts = map.get_int("fit.restarts", 10);
  c.fit.max_iters = map.get_int("fit.max_iters", 300);
  c.fit.grad_tol = map.get_double("fit.grad_tol", 1e-5);
  c.fit.seed = map.get_uint64("fit.seed", c.seed);
  c.fit.nugget_tau = c.nugget_tau;

  c.diagonal_s = map.get_bool("query.diagonal_s", false);
  c.band_sigmas = map.get_double("query.band_sigmas", 2.0);
  c.central_mass = map.get_double("query.central_mass", 0.95);
  c.classical_baselines = map.get_bool("query.classical_baselines", true);

  c.extra = map;
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  return from_map(ConfigMap::parse_file(path));
}

void ExperimentConfig::validate() const {
  const auto names = problem_names();
  if (std::find(names.begin(), names.end(), problem) == names.end())
    throw ArgumentError("experiment: unknown problem '" + problem + "'");
  if (!h_grid.empty()) {
    for (std::size_t i = 1; i < h_grid.size(); ++i)
      if (!(h_grid[i] < h_grid[i - 1]))
        throw ArgumentError("experiment: h_grid must be strictly decreasing");
    if (!(h_grid.back() > 0.0)) throw ArgumentError("experiment: h_grid must be positive");
  }
  if (stationary && learn_alpha)
    throw ArgumentError("experiment: stationary ablation cannot learn alpha");
  if (basis_v < 0) throw ArgumentError("experiment: basis_v must be non-negative");
}

std::vector<std::string> problem_names() {
  return {"riemann", "ode", "eigen-qr", "eigen-tensor", "pde-kse"};
}

// ------------------------------------------------------------ problem setup

namespace {

struct ProblemSetup {
  ProblemAdapter adapter;
  std::vector<double> h_grid;
  std::vector<Ordinate> query;
  bool group_by_first_block = false;
  double classical_alpha = 1.0;  // abscissa order for the baseline tableaus
};

std::vector<double> controls_to_grid(const std::vector<double>& w_grid,
                                     const HParameterization& param) {
  std::vector<double> h;
  h.reserve(w_grid.size());
  for (double w : w_grid) h.push_back(param.h_from_control(w));
  std::sort(h.begin(), h.end(), std::greater<double>());
  return h;
}

ProblemAdapter make_ode_trajectory_adapter(const VectorField& field, const Eigen::VectorXd& y0,
                                           double t_end, bool second_order, int snapshots,
                                           const Eigen::VectorXd& reference) {
  ProblemAdapter adapter;
  adapter.name = second_order ? "ab2" : "euler";
  adapter.order_hint = second_order ? 2.0 : 1.0;
  adapter.run = [field, y0, t_end, second_order, snapshots](double h) {
    const OdeTrajectory traj =
        second_order ? ab2_solve(field, y0, t_end, h) : euler_solve(field, y0, t_end, h);
    std::vector<std::pair<Ordinate, double>> out;
    for (int j = 1; j <= snapshots; ++j) {
      const double target = t_end * j / snapshots;
      // Nearest completed step.
      std::size_t best = 0;
      for (std::size_t k = 1; k < traj.times.size(); ++k) {
        if (std::abs(traj.times[k] - target) < std::abs(traj.times[best] - target)) best = k;
      }
      for (Eigen::Index c = 0; c < traj.states[best].size(); ++c) {
        Eigen::VectorXd comp(1), time(1);
        comp[0] = static_cast<double>(c + 1);
        time[0] = target;
        out.emplace_back(Ordinate({comp, time}), traj.states[best][c]);
      }
    }
    return out;
  };
  adapter.truth = [reference, t_end](const Ordinate& t) -> double {
    if (std::abs(t.block(1)[0] - t_end) > 1e-12)
      throw ArgumentError("ode: truth is only available at t_end");
    const auto c = static_cast<Eigen::Index>(t.block(0)[0]);
    return reference[c - 1];
  };
  return adapter;
}

ProblemSetup make_setup(const ExperimentConfig& config) {
  const ConfigMap& x = config.extra;
  ProblemSetup setup;
  setup.classical_alpha = config.stationary ? 1.0 : config.alpha;

  if (config.problem == "riemann") {
    setup.adapter =
        make_riemann_adapter([](double t) { return oscillatory_integrand(t); }, 0.0, 1.0,
                             std::numbers::e - 1.0);
    setup.h_grid = config.h_grid.empty() ? std::vector<double>{0.08, 0.04, 0.02, 0.01}
                                         : config.h_grid;
    setup.query = {Ordinate(0.0)};
    return setup;
  }

  if (config.problem == "ode") {
    const std::string field_name = x.get_string("ode.field", "lotka_volterra");
    if (field_name != "lotka_volterra")
      throw ArgumentError("ode: unknown field '" + field_name + "'");
    const VectorField field = lotka_volterra_field();
    const std::vector<double> y0v = x.get_doubles("ode.y0", {20.0, 20.0});
    Eigen::VectorXd y0(static_cast<Eigen::Index>(y0v.size()));
    for (std::size_t i = 0; i < y0v.size(); ++i) y0[static_cast<Eigen::Index>(i)] = y0v[i];
    const double t_end = x.get_double("ode.t_end", 20.0);
    const bool second_order = x.get_string("ode.method", "euler") == "ab2";
    const double h_ref = x.get_double("ode.reference_h", 1e-4);
    const std::string mode = x.get_string("ode.mode", "final");

    if (mode == "trajectory") {
      const int snapshots = x.get_int("ode.snapshots", 10);
      const Eigen::VectorXd reference = rk4_reference(field, y0, t_end, h_ref);
      setup.adapter = make_ode_trajectory_adapter(field, y0, t_end, second_order, snapshots,
                                                  reference);
      for (Eigen::Index c = 0; c < y0.size(); ++c) {
        Eigen::VectorXd comp(1), time(1);
        comp[0] = static_cast<double>(c + 1);
        time[0] = t_end;
        setup.query.emplace_back(Ordinate({comp, time}));
      }
    } else if (mode == "final") {
      setup.adapter = make_ode_adapter(second_order ? "ab2" : "euler", field, y0, t_end,
                                       second_order, h_ref);
      for (Eigen::Index c = 0; c < y0.size(); ++c) setup.query.push_back(Ordinate::index(c + 1));
    } else {
      throw ArgumentError("ode: mode must be final or trajectory");
    }
    setup.group_by_first_block = true;

    if (config.h_grid.empty()) {
      for (int i = 1; i <= 6; ++i) setup.h_grid.push_back(std::pow(2.0, -i));
    } else {
      setup.h_grid = config.h_grid;
    }
    return setup;
  }

  if (config.problem == "eigen-qr") {
    LaplacianSpec spec;
    spec.l = x.get_int("qr.l", 5);
    spec.m = x.get_int("qr.m", 2);
    // Default parameterization for the iteration count; see the ablation
    // configs for the alternatives.
    const HParameterization param = HParameterization::parse(
        x.has("data.h_param") ? config.h_param : std::string("w^-0.5"));
    setup.adapter = make_qr_adapter(spec, param, x.get_int("qr.truth_iterations", 60));
    // The classical tableaus get the natural abscissa x = 1/w regardless of
    // the GP's h-parameterization: x = h^(-1/exponent).
    setup.classical_alpha =
        x.get_double("query.classical_alpha", -1.0 / param.exponent());
    const int top = x.get_int("qr.top_indices", 0);
    const int n = spec.l * spec.m;
    const int keep = (top > 0 && top < n) ? top : n;
    if (keep < n) {
      // Restrict both data and query to the leading diagonal positions.
      ProblemAdapter inner = setup.adapter;
      setup.adapter.run = [inner, keep](double h) {
        auto all = inner.run(h);
        all.resize(static_cast<std::size_t>(keep));
        return all;
      };
    }
    for (int i = 1; i <= keep; ++i) setup.query.push_back(Ordinate::index(i));

    if (!config.h_grid.empty()) {
      setup.h_grid = config.h_grid;
    } else {
      std::vector<double> w = config.w_grid;
      if (w.empty()) w = {1, 2, 3, 4, 5};
      setup.h_grid = controls_to_grid(w, param);
    }
    return setup;
  }

  if (config.problem == "eigen-tensor") {
    const int order = x.get_int("tensor.order", 6);
    const int dim = x.get_int("tensor.dim", 6);
    const std::uint64_t tensor_seed = x.get_uint64("tensor.seed", config.seed);
    const std::uint64_t x0_seed = x.get_uint64("tensor.x0_seed", config.seed + 1);
    const SymmetricTensor tensor = SymmetricTensor::random(order, dim, tensor_seed);

    std::mt19937_64 rng(x0_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd x0(dim);
    for (int i = 0; i < dim; ++i) x0[i] = normal(rng);
    x0.normalize();

    double shift = x.get_double("tensor.shift", -1.0);
    if (!(shift > 0.0)) shift = 2.0 * tensor.max_abs_entry();

    // The presented parameterization for the power method is h = w^-2.
    const HParameterization param = HParameterization::parse(
        x.has("data.h_param") ? config.h_param : std::string("w^-2"));
    setup.adapter = make_tensor_adapter(tensor, x0, shift, param);
    setup.classical_alpha =
        x.get_double("query.classical_alpha", -1.0 / param.exponent());

    const int oracle_iters = x.get_int("tensor.oracle_iterations", 50);
    const double oracle_lambda =
        shifted_power_method(tensor, x0, shift, oracle_iters).back().lambda;
    setup.adapter.truth = [oracle_lambda](const Ordinate&) { return oracle_lambda; };

    setup.query = {Ordinate(0.0)};
    if (!config.h_grid.empty()) {
      setup.h_grid = config.h_grid;
    } else {
      std::vector<double> w = config.w_grid;
      if (w.empty()) w = {1, 2, 3, 4, 5};
      setup.h_grid = controls_to_grid(w, param);
    }
    return setup;
  }

  if (config.problem == "pde-kse") {
    KSEConfig kse;
    kse.grid_size = x.get_int("kse.grid_size", 128);
    // Desk default: the 32 pi domain, whose dynamics stay alive. The unit
    // domain (length_scale 1/(2 pi)) is fully dissipative and is only useful
    // for the linear checks.
    kse.length_scale = x.get_double("kse.length_scale", 16.0);
    kse.dx = 2.0 * std::numbers::pi * kse.length_scale / kse.grid_size;
    kse.t_end = x.get_double("kse.t_end", 10.0);
    kse.initial_amplitude = x.get_double("kse.initial_amplitude", 1.0);
    kse.initial_decay = x.get_double("kse.initial_decay", 0.01);
    kse.initial_center = x.get_double("kse.initial_center", -1.0);

    // Query grid: equispaced targets snapped to grid points. The data grid
    // contains the query grid so that limit extrapolation, not spatial
    // interpolation, is what the metrics see.
    const int n = kse.grid_size;
    const int query_count = x.get_int("kse.query_x_count", 101);
    std::vector<int> query_idx;
    for (int i = 0; i < query_count; ++i) {
      int idx = static_cast<int>(std::lround(static_cast<double>(i) * n / (query_count - 1.0)));
      idx = std::min(idx, n - 1);
      if (query_idx.empty() || query_idx.back() != idx) query_idx.push_back(idx);
    }
    std::vector<int> data_idx = query_idx;
    const int data_count = x.get_int("kse.data_x_count", 0);
    if (data_count > 0) {
      data_idx.clear();
      for (int i = 0; i < std::min(data_count, n); ++i)
        data_idx.push_back(static_cast<int>(static_cast<long long>(i) * n / data_count));
    }

    setup.adapter = make_kse_adapter(kse, data_idx);
    for (int idx : query_idx) setup.query.emplace_back(idx * kse.dx);

    const double reference_dt = x.get_double("kse.reference_dt", 0.0025);
    KSEConfig ref = kse;
    ref.dt = reference_dt;
    const Eigen::VectorXd u_ref = kse_etdrk4(ref);
    setup.adapter.truth = [u_ref, dx = kse.dx](const Ordinate& t) {
      const int idx = static_cast<int>(std::lround(t.block(0)[0] / dx));
      return u_ref[idx];
    };

    setup.h_grid = config.h_grid.empty() ? std::vector<double>{0.1, 0.05, 0.02} : config.h_grid;
    return setup;
  }

  throw ArgumentError("experiment: unknown problem '" + config.problem + "'");
}

// ------------------------------------------------------------ stage builder

FitConfig resolve_fit_config(const ExperimentConfig& config) {
  FitConfig f = config.fit;
  f.learn_alpha = config.learn_alpha && !config.stationary;
  f.alpha = config.stationary ? 0.0 : config.alpha;
  f.nugget_tau = config.nugget_tau;
  return f;
}

struct Group {
  Dataset data;
  std::vector<Ordinate> query;
  std::vector<std::size_t> query_slots;  // positions in the stage query
};

std::vector<Group> split_groups(const Dataset& data, const std::vector<Ordinate>& query,
                                bool group_by_first_block) {
  std::vector<Group> groups;
  if (!group_by_first_block) {
    Group g;
    g.data = data;
    g.query = query;
    for (std::size_t i = 0; i < query.size(); ++i) g.query_slots.push_back(i);
    groups.push_back(std::move(g));
    return groups;
  }

  std::vector<double> keys;
  for (const auto& d : data) {
    const double key = d.t.block(0)[0];
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  std::sort(keys.begin(), keys.end());

  for (double key : keys) {
    Group g;
    std::vector<Datum> points;
    for (const auto& d : data)
      if (d.t.block(0)[0] == key) points.push_back(d);
    g.data = Dataset::build(std::move(points));
    for (std::size_t i = 0; i < query.size(); ++i) {
      if (query[i].block(0)[0] == key) {
        g.query.push_back(query[i]);
        g.query_slots.push_back(i);
      }
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

StageResult build_stage(const ExperimentConfig& config, const ProblemSetup& setup,
                        const Dataset& dataset) {
  StageResult stage;
  stage.h_finest = dataset.finest_h();
  stage.dataset = dataset;

  const std::size_t p = dataset.ordinate_blocks();
  const ProfileSet profiles = ProfileSet::uniform(config.profile, p);
  const BasisSet basis = config.basis_v > 0
                             ? BasisSet::polynomial(static_cast<std::size_t>(config.basis_v))
                             : BasisSet::none();
  const FitConfig fit_config = resolve_fit_config(config);

  const auto groups = split_groups(dataset, setup.query, setup.group_by_first_block);

  const std::size_t total = setup.query.size();
  stage.posterior.query = setup.query;
  stage.posterior.mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total));
  stage.posterior.covariance =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
  stage.points.resize(total);

  for (const auto& group : groups) {
    FitResult fit_result = fit(group.data, fit_config, basis, profiles);
    const ConditionedModel model =
        condition(group.data, fit_result.params, basis, profiles, config.nugget_tau);
    if (!group.query.empty()) {
      const LimitPosterior post = model.predict_limit(group.query);
      for (std::size_t i = 0; i < group.query.size(); ++i) {
        const auto gi = static_cast<Eigen::Index>(i);
        const auto slot = static_cast<Eigen::Index>(group.query_slots[i]);
        stage.posterior.mean[slot] = post.mean[gi];
        for (std::size_t j = 0; j < group.query.size(); ++j) {
          const auto gj = static_cast<Eigen::Index>(j);
          const auto slot_j = static_cast<Eigen::Index>(group.query_slots[j]);
          stage.posterior.covariance(slot, slot_j) = post.covariance(gi, gj);
        }
      }
    }
    stage.fits.push_back(std::move(fit_result));
  }
  stage.alpha_ml = stage.fits.empty() ? config.alpha : stage.fits.front().params.alpha;

  // Per-point summaries, truths and classical baselines.
  bool have_all_truth = static_cast<bool>(setup.adapter.truth);
  Eigen::VectorXd truth_vec(static_cast<Eigen::Index>(total));
  for (std::size_t i = 0; i < total; ++i) {
    QueryPointResult& point = stage.points[i];
    point.t = setup.query[i];
    const auto slot = static_cast<Eigen::Index>(i);
    point.mean = stage.posterior.mean[slot];
    point.sd = std::sqrt(std::max(stage.posterior.covariance(slot, slot), 0.0));
    if (setup.adapter.truth) {
      point.truth = setup.adapter.truth(point.t);
      truth_vec[slot] = *point.truth;
    }

    if (config.classical_baselines) {
      std::vector<std::pair<double, double>> seq;
      for (const auto& d : dataset)
        if (d.t == point.t) seq.emplace_back(d.h, d.value);
      if (seq.size() >= 2) {
        const ScalarSequence scalar = ScalarSequence::build(seq, setup.classical_alpha);
        point.baseline_richardson = neville_extrapolate(scalar);
        try {
          point.baseline_bs = bulirsch_stoer_extrapolate(scalar);
        } catch (const BreakdownError&) {
          point.baseline_bs = std::nullopt;
        }
      }
    }
  }

  if (have_all_truth && total > 0)
    stage.report = calibrate(stage.posterior, truth_vec, config.central_mass, config.diagonal_s);
  return stage;
}

ExperimentResult run_with_setup(const ExperimentConfig& config, const ProblemSetup& setup,
                                const std::vector<Dataset>& runs) {
  ExperimentResult result;
  result.label = config.label;
  result.config = config;
  result.runs = runs;

  std::vector<Dataset> stage_data;
  try {
    if (config.cumulative) {
      for (auto& d : augment_cumulative(runs))
        if (d.resolution_count() >= 2) stage_data.push_back(std::move(d));
    } else {
      std::vector<Datum> all;
      for (const auto& run : runs) all.insert(all.end(), run.begin(), run.end());
      stage_data.push_back(Dataset::build(std::move(all)));
    }
  } catch (const std::exception& e) {
    result.failure = std::string("augment: ") + e.what();
    return result;
  }

  for (const auto& data : stage_data) {
    try {
      result.stages.push_back(build_stage(config, setup, data));
    } catch (const std::exception& e) {
      result.failure = std::string("fit: ") + e.what();
      return result;
    }
  }
  return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.label = config.label;
  result.config = config;

  ProblemSetup setup;
  try {
    setup = make_setup(config);
  } catch (const std::exception& e) {
    result.failure = std::string("setup: ") + e.what();
    return result;
  }

  std::vector<Dataset> runs;
  try {
    runs = setup.adapter.datasets(setup.h_grid);
  } catch (const std::exception& e) {
    result.failure = std::string("generate: ") + e.what();
    return result;
  }

  return run_with_setup(config, setup, runs);
}

ExperimentResult run_extrapolate(const ExperimentConfig& config, const Dataset& data,
                                 const std::vector<Ordinate>& query) {
  ExperimentResult result;
  result.label = config.label.empty() ? "extrapolate" : config.label;
  result.config = config;
  result.runs = {data};

  ProblemSetup setup;
  setup.adapter.name = "extrapolate";
  setup.query = query.empty() ? data.distinct_ordinates() : query;
  setup.classical_alpha = config.stationary ? 1.0 : config.alpha;

  try {
    result.stages.push_back(build_stage(config, setup, data));
  } catch (const std::exception& e) {
    result.failure = std::string("fit: ") + e.what();
  }
  return result;
}

// ----------------------------------------------------------------- emission

void emit_outputs(const ExperimentResult& result, const std::string& out_dir) {
  try {
    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/runs");
  } catch (const fs::filesystem_error& e) {
    throw IoError(std::string("emit: cannot create output directory: ") + e.what());
  }

  const std::size_t p =
      !result.stages.empty() && !result.stages.front().points.empty()
          ? result.stages.front().points.front().t.flattened().size()
          : (!result.runs.empty() && !result.runs.front().empty()
                 ? result.runs.front()[0].t.flattened().size()
                 : 1);

  auto open = [&](const std::string& name) {
    std::ofstream out(out_dir + "/" + name, std::ios::trunc);
    if (!out) throw IoError("emit: cannot write " + out_dir + "/" + name);
    return out;
  };

  {
    std::ofstream out = open("results.csv");
    out << "experiment,h_finest";
    for (std::size_t i = 1; i <= p; ++i) out << ",t_" << i;
    out << ",posterior_mean,posterior_sd,truth,W,S,S2_band_lo,S2_band_hi,alpha_ml,"
           "baseline_richardson,baseline_bs\n";
    for (const auto& stage : result.stages) {
      for (const auto& point : stage.points) {
        out << result.label << ',' << format_double(stage.h_finest);
        for (double c : point.t.flattened()) out << ',' << format_double(c);
        out << ',' << format_double(point.mean) << ',' << format_double(point.sd) << ','
            << opt_to_csv(point.truth) << ',';
        if (stage.report) {
          out << format_double(stage.report->w) << ',' << format_double(stage.report->s) << ','
              << format_double(stage.report->band_lower) << ','
              << format_double(stage.report->band_upper);
        } else {
          out << ",,,";
        }
        out << ',' << format_double(stage.alpha_ml) << ','
            << opt_to_csv(point.baseline_richardson) << ',' << opt_to_csv(point.baseline_bs)
            << '\n';
      }
    }
  }

  {
    std::ofstream out = open("band.csv");
    out << "experiment,h_finest";
    for (std::size_t i = 1; i <= p; ++i) out << ",t_" << i;
    out << ",mean,lower,upper\n";
    for (const auto& stage : result.stages) {
      const auto [lo, hi] = stage.points.empty()
                                ? std::make_pair(Eigen::VectorXd(), Eigen::VectorXd())
                                : credible_band(stage.posterior, result.config.band_sigmas);
      for (std::size_t i = 0; i < stage.points.size(); ++i) {
        const auto slot = static_cast<Eigen::Index>(i);
        out << result.label << ',' << format_double(stage.h_finest);
        for (double c : stage.points[i].t.flattened()) out << ',' << format_double(c);
        out << ',' << format_double(stage.points[i].mean) << ',' << format_double(lo[slot])
            << ',' << format_double(hi[slot]) << '\n';
      }
    }
  }

  {
    nlohmann::ordered_json doc;
    doc["experiment"] = result.label;
    doc["status"] = result.failure ? "failed" : "ok";
    if (result.failure) doc["failure"] = *result.failure;
    doc["stages"] = nlohmann::ordered_json::array();
    for (const auto& stage : result.stages) {
      nlohmann::ordered_json js;
      js["h_finest"] = stage.h_finest;
      js["alpha_ml"] = stage.alpha_ml;
      js["groups"] = nlohmann::ordered_json::array();
      for (const auto& fit_result : stage.fits) {
        nlohmann::ordered_json jf;
        jf["log_likelihood"] = fit_result.log_likelihood;
        jf["profile_log_likelihood"] = fit_result.profile_log_likelihood;
        jf["converged"] = fit_result.converged;
        jf["gradient_norm"] = fit_result.gradient_norm;
        jf["restart_index"] = fit_result.restart_index;
        jf["sigma2"] = fit_result.params.sigma2;
        jf["rho_G"] = fit_result.params.rho_g;
        jf["rho_E"] = fit_result.params.rho_e;
        jf["ell_h"] = fit_result.params.ell_h;
        jf["ell_t"] = fit_result.params.ell_t;
        jf["alpha"] = fit_result.params.alpha;
        jf["restarts"] = nlohmann::ordered_json::array();
        for (const auto& rec : fit_result.restarts) {
          nlohmann::ordered_json jr;
          jr["index"] = rec.index;
          jr["initial_objective"] = rec.initial_objective;
          jr["final_objective"] = rec.final_objective;
          jr["gradient_norm"] = rec.gradient_norm;
          jr["iterations"] = rec.iterations;
          jr["converged"] = rec.converged;
          jf["restarts"].push_back(std::move(jr));
        }
        js["groups"].push_back(std::move(jf));
      }
      doc["stages"].push_back(std::move(js));
    }
    std::ofstream out = open("fit.json");
    out << doc.dump(2) << '\n';
  }

  for (std::size_t i = 0; i < result.runs.size(); ++i) {
    std::ofstream out = open("runs/run_" + std::to_string(i + 1) + ".csv");
    write_dataset_csv(result.runs[i], out);
  }

  {
    std::ofstream out = open("status.txt");
    if (result.failure)
      out << "failed " << *result.failure << '\n';
    else
      out << "ok\n";
  }
}

void run_calibration_study(const ExperimentConfig& config, int repetitions, std::ostream& out) {
  if (repetitions < 1) throw ArgumentError("calibrate: repetitions must be positive");
  config.validate();

  const ProblemSetup setup = make_setup(config);
  const std::vector<Dataset> runs = setup.adapter.datasets(setup.h_grid);

  out << "experiment,repetition,seed,h_finest,W,S,S2,dof,S2_band_lo,S2_band_hi,inside_band,"
         "degraded_rank\n";
  for (int rep = 0; rep < repetitions; ++rep) {
    ExperimentConfig c = config;
    c.fit.seed = config.fit.seed + static_cast<std::uint64_t>(rep);
    const ExperimentResult result = run_with_setup(c, setup, runs);
    if (result.failure) throw NumericError("calibrate: repetition failed: " + *result.failure);
    if (result.stages.empty() || !result.stages.back().report)
      throw NumericError("calibrate: no calibration report (missing ground truth?)");
    const auto& report = *result.stages.back().report;
    out << config.label << ',' << rep << ',' << c.fit.seed << ','
        << format_double(result.stages.back().h_finest) << ',' << format_double(report.w) << ','
        << format_double(report.s) << ',' << format_double(report.s * report.s) << ','
        << report.dof << ',' << format_double(report.band_lower) << ','
        << format_double(report.band_upper) << ',' << (report.inside_band ? 1 : 0) << ','
        << (report.degraded_rank ? 1 : 0) << '\n';
  }
}

}  // namespace bbpn
