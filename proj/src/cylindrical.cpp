#include "cylreg/cylindrical.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cylreg {

JumpLaw JumpLaw::normal(double mu, double var) {
  if (!(var >= 0.0)) throw std::invalid_argument("JumpLaw::normal: var must be >= 0");
  JumpLaw law;
  law.kind = Kind::normal;
  law.mu = mu;
  law.var = var;
  return law;
}

JumpLaw JumpLaw::constant(double value) {
  JumpLaw law;
  law.kind = Kind::constant;
  law.value = value;
  return law;
}

JumpLaw JumpLaw::two_point(double magnitude, double prob_up) {
  if (!(prob_up >= 0.0 && prob_up <= 1.0)) {
    throw std::invalid_argument("JumpLaw::two_point: prob_up must be in [0,1]");
  }
  JumpLaw law;
  law.kind = Kind::two_point;
  law.magnitude = magnitude;
  law.prob_up = prob_up;
  return law;
}

std::complex<double> JumpLaw::char_fn(double u) const {
  using namespace std::complex_literals;
  switch (kind) {
    case Kind::normal:
      return std::exp(1i * (u * mu) - 0.5 * var * u * u);
    case Kind::constant:
      return std::exp(1i * (u * value));
    case Kind::two_point:
      return prob_up * std::exp(1i * (u * magnitude)) +
             (1.0 - prob_up) * std::exp(-1i * (u * magnitude));
  }
  return 0.0;
}

double JumpLaw::mean() const {
  switch (kind) {
    case Kind::normal: return mu;
    case Kind::constant: return value;
    case Kind::two_point: return magnitude * (2.0 * prob_up - 1.0);
  }
  return 0.0;
}

double JumpLaw::second_moment() const {
  switch (kind) {
    case Kind::normal: return var + mu * mu;
    case Kind::constant: return value * value;
    case Kind::two_point: return magnitude * magnitude;
  }
  return 0.0;
}

double JumpLaw::sample(RngStream& rng) const {
  switch (kind) {
    case Kind::normal: return mu + std::sqrt(var) * rng.gaussian();
    case Kind::constant: return value;
    case Kind::two_point: return rng.uniform01() < prob_up ? magnitude : -magnitude;
  }
  return 0.0;
}

LevyDriver LevyDriver::wiener() {
  LevyDriver d;
  d.gaussian_var = 1.0;
  return d;
}

LevyDriver LevyDriver::compound_poisson(double rate, JumpLaw law) {
  LevyDriver d;
  d.jumps = CompoundPoissonSpec{rate, law};
  d.validate();
  return d;
}

LevyDriver LevyDriver::alpha_stable(double alpha, double scale) {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw std::invalid_argument("alpha_stable: alpha must be in (0,2]");
  }
  if (!(scale > 0.0)) throw std::invalid_argument("alpha_stable: scale must be > 0");
  LevyDriver d;
  if (alpha == 2.0) {
    d.gaussian_var = 2.0 * scale * scale;
  } else {
    d.jumps = StableSpec{alpha, scale};
  }
  return d;
}

LevyDriver LevyDriver::composite(double drift, double gaussian_var, JumpPart jumps) {
  LevyDriver d;
  d.drift = drift;
  d.gaussian_var = gaussian_var;
  d.jumps = std::move(jumps);
  d.validate();
  return d;
}

void LevyDriver::validate() const {
  if (!(gaussian_var >= 0.0)) throw std::invalid_argument("LevyDriver: gaussian_var must be >= 0");
  if (!std::isfinite(drift)) throw std::invalid_argument("LevyDriver: drift must be finite");
  if (const auto* cp = std::get_if<CompoundPoissonSpec>(&jumps)) {
    if (!(cp->rate > 0.0)) throw std::invalid_argument("LevyDriver: Poisson rate must be > 0");
  }
  if (const auto* st = std::get_if<StableSpec>(&jumps)) {
    if (!(st->alpha > 0.0 && st->alpha < 2.0)) {
      throw std::invalid_argument("LevyDriver: stable alpha must be in (0,2)");
    }
    if (!(st->scale > 0.0)) throw std::invalid_argument("LevyDriver: stable scale must be > 0");
  }
}

std::complex<double> LevyDriver::levy_exponent(double u) const {
  using namespace std::complex_literals;
  std::complex<double> psi = 1i * (drift * u) - 0.5 * gaussian_var * u * u;
  if (const auto* cp = std::get_if<CompoundPoissonSpec>(&jumps)) {
    psi += cp->rate * (cp->law.char_fn(u) - 1.0);
  } else if (const auto* st = std::get_if<StableSpec>(&jumps)) {
    psi -= std::pow(st->scale * std::abs(u), st->alpha);
  }
  return psi;
}

bool LevyDriver::is_deterministic() const {
  return gaussian_var == 0.0 && std::holds_alternative<std::monostate>(jumps);
}

bool LevyDriver::is_martingale() const {
  if (drift != 0.0) return false;
  if (std::holds_alternative<StableSpec>(jumps)) return false;
  if (const auto* cp = std::get_if<CompoundPoissonSpec>(&jumps)) return cp->law.mean() == 0.0;
  return true;
}

bool LevyDriver::has_finite_moment(double r) const {
  if (const auto* st = std::get_if<StableSpec>(&jumps)) return r < st->alpha;
  return true;  // Gaussian and compound-Poisson components have all moments here
}

double LevyDriver::abs_moment(double r, double horizon) const {
  if (!(r >= 1.0)) throw std::invalid_argument("abs_moment: r must be >= 1");
  if (std::holds_alternative<StableSpec>(jumps)) {
    throw std::invalid_argument("abs_moment: not available for stable drivers at r >= 1");
  }
  const bool centered = drift == 0.0;
  const auto* cp = std::get_if<CompoundPoissonSpec>(&jumps);
  if (cp == nullptr && centered) {
    // |N(0, var*T)|^r
    const double v = gaussian_var * horizon;
    return std::pow(v, r / 2.0) * std::pow(2.0, r / 2.0) * std::tgamma((r + 1.0) / 2.0) /
           std::sqrt(M_PI);
  }
  if (r == 2.0 && centered && (cp == nullptr || cp->law.mean() == 0.0)) {
    const double jump_var = cp ? cp->rate * cp->law.second_moment() : 0.0;
    return (gaussian_var + jump_var) * horizon;
  }
  throw std::invalid_argument(
      "abs_moment: analytic moment only available for centered Gaussian drivers (any r) "
      "or centered Gaussian+compound-Poisson drivers at r = 2");
}

double DriverPath::value(double t) const {
  if (t < grid.front() || t > grid.back()) {
    std::ostringstream os;
    os << "DriverPath::value: t = " << t << " outside [0, " << grid.back() << "]";
    throw std::out_of_range(os.str());
  }
  // continuous part: linear interpolation (exact at grid points)
  const auto it = std::upper_bound(grid.begin(), grid.end(), t);
  const std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - grid.begin()),
                                               grid.size() - 1);
  const std::size_t lo = hi - (hi > 0 ? 1 : 0);
  double v;
  if (hi == lo || t == grid[lo]) {
    v = continuous_part[lo];
  } else {
    const double w = (t - grid[lo]) / (grid[hi] - grid[lo]);
    v = (1.0 - w) * continuous_part[lo] + w * continuous_part[hi];
  }
  // stable part: right-continuous steps at grid times
  if (!stable_part.empty()) {
    std::size_t k = static_cast<std::size_t>(
        std::upper_bound(grid.begin(), grid.end(), t) - grid.begin());
    v += stable_part[k - 1];
  }
  for (const auto& [time, size] : jump_list) {
    if (time > t) break;
    v += size;
  }
  return v;
}

double DriverPath::left_limit(double t) const {
  if (t <= grid.front()) return 0.0;
  const auto it = std::upper_bound(grid.begin(), grid.end(), t);
  const std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - grid.begin()),
                                               grid.size() - 1);
  const std::size_t lo = hi - (hi > 0 ? 1 : 0);
  double v;
  if (hi == lo || t == grid[lo]) {
    v = continuous_part[lo];
  } else {
    const double w = (t - grid[lo]) / (grid[hi] - grid[lo]);
    v = (1.0 - w) * continuous_part[lo] + w * continuous_part[hi];
  }
  if (!stable_part.empty()) {
    // strictly-before steps only
    std::size_t k = static_cast<std::size_t>(
        std::lower_bound(grid.begin(), grid.end(), t) - grid.begin());
    if (k == 0) k = 1;
    v += stable_part[k - 1];
  }
  for (const auto& [time, size] : jump_list) {
    if (time >= t) break;
    v += size;
  }
  return v;
}

std::complex<double> CylindricalLevy::char_function(const ModelVector& phi, double t) const {
  if (phi.size() != dim()) {
    throw std::invalid_argument("char_function: dimension mismatch");
  }
  if (!(t >= 0.0)) throw std::invalid_argument("char_function: t must be >= 0");
  std::complex<double> total = 0.0;
  for (Eigen::Index j = 0; j < dim(); ++j) {
    total += drivers[static_cast<std::size_t>(j)].levy_exponent(phi[j]);
  }
  return std::exp(t * total);
}

CylindricalLevy make_cylindrical(const LevyDriver& driver, Eigen::Index dim, std::string label) {
  driver.validate();
  if (dim <= 0) throw std::invalid_argument("make_cylindrical: dim must be positive");
  CylindricalLevy x;
  x.drivers.assign(static_cast<std::size_t>(dim), driver);
  x.label = std::move(label);
  return x;
}

CylindricalLevy make_wiener(Eigen::Index dim, std::string label) {
  return make_cylindrical(LevyDriver::wiener(), dim, std::move(label));
}

namespace {

// Per-coordinate sampling; draw order is fixed (Brownian increments, Poisson
// count, jump times, jump sizes, stable increments) so samples are a pure
// function of the stream key.
DriverPath sample_driver(const LevyDriver& d, const std::vector<double>& grid,
                         RngStream& rng) {
  DriverPath path;
  path.grid = grid;
  const std::size_t K = grid.size() - 1;
  const double horizon = grid.back();

  path.continuous_part.resize(grid.size(), 0.0);
  if (d.gaussian_var > 0.0) {
    const double sigma = std::sqrt(d.gaussian_var);
    double level = 0.0;
    for (std::size_t i = 1; i <= K; ++i) {
      level += sigma * std::sqrt(grid[i] - grid[i - 1]) * rng.gaussian();
      path.continuous_part[i] = d.drift * grid[i] + level;
    }
  } else if (d.drift != 0.0) {
    for (std::size_t i = 1; i <= K; ++i) path.continuous_part[i] = d.drift * grid[i];
  }

  if (const auto* cp = std::get_if<CompoundPoissonSpec>(&d.jumps)) {
    const std::uint64_t count = rng.poisson(cp->rate * horizon);
    std::vector<double> times(count);
    for (auto& t : times) t = rng.uniform(0.0, horizon);
    std::sort(times.begin(), times.end());
    path.jump_list.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      const double size = cp->law.sample(rng);
      if (!path.jump_list.empty() && path.jump_list.back().first == times[i]) {
        path.jump_list.back().second += size;  // coincident draws merge
      } else {
        path.jump_list.emplace_back(times[i], size);
      }
    }
  } else if (const auto* st = std::get_if<StableSpec>(&d.jumps)) {
    path.stable_part.resize(grid.size(), 0.0);
    for (std::size_t i = 1; i <= K; ++i) {
      const double dt = grid[i] - grid[i - 1];
      path.stable_part[i] =
          path.stable_part[i - 1] + st->scale * std::pow(dt, 1.0 / st->alpha) * rng.stable(st->alpha);
    }
  }
  return path;
}

}  // namespace

CylPathSample sample_paths(const CylindricalLevy& process, double horizon,
                           int grid_resolution, std::uint64_t seed, std::uint64_t replica) {
  if (!(horizon > 0.0)) throw std::invalid_argument("sample_paths: horizon must be > 0");
  if (grid_resolution < 1) throw std::invalid_argument("sample_paths: resolution must be >= 1");

  std::vector<double> grid(static_cast<std::size_t>(grid_resolution) + 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = horizon * static_cast<double>(i) / static_cast<double>(grid_resolution);
  }

  CylPathSample s;
  s.seed = seed;
  s.replica = replica;
  s.horizon = horizon;
  s.paths.reserve(process.drivers.size());
  for (std::size_t j = 0; j < process.drivers.size(); ++j) {
    RngStream rng(seed, replica, static_cast<std::uint64_t>(j));
    s.paths.push_back(sample_driver(process.drivers[j], grid, rng));
  }

  s.event_times = grid;
  for (const auto& p : s.paths) {
    for (const auto& [time, size] : p.jump_list) s.event_times.push_back(time);
  }
  std::sort(s.event_times.begin(), s.event_times.end());
  s.event_times.erase(std::unique(s.event_times.begin(), s.event_times.end()),
                      s.event_times.end());
  return s;
}

double CylPathSample::eval(const ModelVector& phi, double t) const {
  if (phi.size() != dim()) throw std::invalid_argument("CylPathSample::eval: dimension mismatch");
  if (t < 0.0 || t > horizon) throw std::out_of_range("CylPathSample::eval: t outside [0, T]");
  double sum = 0.0;
  for (Eigen::Index j = 0; j < dim(); ++j) {
    if (phi[j] != 0.0) sum += phi[j] * paths[static_cast<std::size_t>(j)].value(t);
  }
  return sum;
}

Eigen::MatrixXd CylPathSample::values_table(const std::vector<double>& times) const {
  Eigen::MatrixXd table(dim(), static_cast<Eigen::Index>(times.size()));
  for (Eigen::Index j = 0; j < dim(); ++j) {
    const auto& p = paths[static_cast<std::size_t>(j)];
    for (std::size_t i = 0; i < times.size(); ++i) {
      table(j, static_cast<Eigen::Index>(i)) = p.value(times[i]);
    }
  }
  return table;
}

ComposedProcess compose(const CylindricalLevy& process, const LinearOperator& op) {
  if (op.rows() != process.dim()) {
    throw std::invalid_argument("compose: operator codomain does not match process dimension");
  }
  return ComposedProcess{process, op};
}

Eigen::MatrixXd project(const CylPathSample& sample, const std::vector<ModelVector>& dirs) {
  Eigen::MatrixXd table = sample.values_table(sample.event_times);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(dirs.size()), table.cols());
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    if (dirs[i].size() != sample.dim()) {
      throw std::invalid_argument("project: dimension mismatch");
    }
    out.row(static_cast<Eigen::Index>(i)) = dirs[i].transpose() * table;
  }
  return out;
}

}  // namespace cylreg
