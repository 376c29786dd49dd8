#include "cylreg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

namespace cylreg {

namespace {

// reserved stream tags for probe generation, outside the replica range
constexpr std::uint64_t kProbeTagVersion = 0xc11e600000000001ull;
constexpr std::uint64_t kProbeTagCov = 0xc11e600000000002ull;
constexpr std::uint64_t kProbeTagLevy = 0xc11e600000000003ull;
constexpr std::uint64_t kProbeTagWeak = 0xc11e600000000004ull;
constexpr std::uint64_t kProbeTagCert = 0xc11e600000000005ull;

ModelVector unit_vector(Eigen::Index dim, Eigen::Index i) {
  ModelVector v = ModelVector::Zero(dim);
  v[i] = 1.0;
  return v;
}

ModelVector random_unit(Eigen::Index dim, RngStream& rng) {
  ModelVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = rng.gaussian();
  const double n = v.norm();
  return n > 0 ? ModelVector(v / n) : unit_vector(dim, 0);
}

// dual pairing weights <f_j, phi> for j < m
Eigen::VectorXd dual_weights(const OrthonormalSystem& sys, Eigen::Index m,
                             const ModelVector& phi) {
  Eigen::VectorXd w(m);
  for (Eigen::Index j = 0; j < m; ++j) w[j] = sys.duals[static_cast<std::size_t>(j)].dot(phi);
  return w;
}

// q-resolved part of phi at truncation m
ModelVector resolved_projection(const OrthonormalSystem& sys, Eigen::Index m,
                                const ModelVector& phi) {
  ModelVector out = ModelVector::Zero(phi.size());
  for (Eigen::Index j = 0; j < m; ++j) {
    out += sys.duals[static_cast<std::size_t>(j)].dot(phi) * sys.basis[static_cast<std::size_t>(j)];
  }
  return out;
}

bool drivers_identical_gaussian(const CylindricalLevy& x, double& var_out) {
  if (x.drivers.empty()) return false;
  const auto& d0 = x.drivers.front();
  if (d0.drift != 0.0 || d0.gaussian_var <= 0.0 ||
      !std::holds_alternative<std::monostate>(d0.jumps)) {
    return false;
  }
  for (const auto& d : x.drivers) {
    if (d.drift != d0.drift || d.gaussian_var != d0.gaussian_var ||
        !std::holds_alternative<std::monostate>(d.jumps)) {
      return false;
    }
  }
  var_out = d0.gaussian_var;
  return true;
}

std::size_t snapped_index(const std::vector<double>& times, double t) {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  return static_cast<std::size_t>(it - times.begin()) - 1;
}

}  // namespace

void McConfig::validate(bool distributional) const {
  if (replicas < 2) throw std::invalid_argument("McConfig: need at least 2 replicas");
  if (distributional && replicas < 100) {
    throw std::invalid_argument("McConfig: distributional tests need at least 100 replicas");
  }
  if (!(alpha > 0.0 && alpha < 0.5)) throw std::invalid_argument("McConfig: alpha must be in (0, 0.5)");
  if (!(stderr_multiplier > 0.0)) throw std::invalid_argument("McConfig: stderr multiplier must be > 0");
  if (grid_resolution < 1) throw std::invalid_argument("McConfig: grid resolution must be >= 1");
}

bool VerificationReport::overall_pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

CheckResult check_version(const Radonifier& rad, const McConfig& cfg, bool strict_out_of_span) {
  cfg.validate(false);
  const auto& sys = *rad.system();
  const Eigen::Index dim = sys.dim();
  const Eigen::Index m = rad.truncation();

  struct Probe {
    ModelVector phi;
    Eigen::VectorXd weights;
    ModelVector mapped;   // S phi
    bool in_span;
  };
  std::vector<Probe> probes;
  auto add_probe = [&](ModelVector phi) {
    Probe p;
    p.weights = dual_weights(sys, m, phi);
    p.mapped = rad.op().apply(phi);
    const ModelVector gap = phi - resolved_projection(sys, m, phi);
    p.in_span = sys.seminorm(gap) <= 1e-8 * std::max(1.0, sys.seminorm(phi));
    p.phi = std::move(phi);
    probes.push_back(std::move(p));
  };
  for (Eigen::Index i = 0; i < dim; ++i) add_probe(unit_vector(dim, i));
  RngStream prng(cfg.seed, kProbeTagVersion, 0);
  for (int i = 0; i < 10; ++i) {
    ModelVector phi = ModelVector::Zero(dim);
    for (Eigen::Index j = 0; j < m; ++j) {
      phi += prng.gaussian() * sys.basis[static_cast<std::size_t>(j)];
    }
    if (m > 0) add_probe(std::move(phi));
  }

  std::vector<double> worst_in(cfg.replicas, 0.0), worst_out(cfg.replicas, 0.0);
  replica_sweep(cfg.replicas, cfg.exec, [&](std::size_t i) {
    const CylPathSample s = rad.sample(static_cast<std::uint64_t>(i));
    const RegularizedPath y = rad.from_sample(s);
    const Eigen::MatrixXd table = s.values_table(s.event_times);
    double win = 0.0, wout = 0.0;
    for (const auto& p : probes) {
      double& slot = p.in_span ? win : wout;
      for (Eigen::Index e = 0; e < table.cols(); ++e) {
        const double lhs = p.weights.dot(y.coords.col(e));
        const double rhs = p.mapped.dot(table.col(e));
        slot = std::max(slot, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
      }
    }
    worst_in[i] = win;
    worst_out[i] = wout;
  });

  double max_in = 0.0, max_out = 0.0;
  for (std::size_t i = 0; i < cfg.replicas; ++i) {
    max_in = std::max(max_in, worst_in[i]);
    max_out = std::max(max_out, worst_out[i]);
  }

  std::size_t n_out = 0;
  for (const auto& p : probes) n_out += p.in_span ? 0 : 1;

  CheckResult r;
  r.name = "version";
  r.seed = cfg.seed;
  r.replicas = cfg.replicas;
  r.threshold = 1e-10;
  r.statistic = strict_out_of_span ? std::max(max_in, max_out) : max_in;
  r.pass = r.statistic <= r.threshold;
  std::ostringstream os;
  os << "pass iff statistic <= threshold; max relative deviation |<Y_t,phi> - X_t(S phi)| "
     << "over " << probes.size() << " probes (" << n_out << " out-of-span)";
  if (n_out > 0 && !strict_out_of_span) {
    os << "; out-of-span expected gap " << max_out << " (reported, not asserted)";
  }
  r.details = os.str();
  return r;
}

std::vector<CovProbe> default_cov_probes(const Radonifier& rad, std::size_t count,
                                         std::uint64_t seed) {
  const Eigen::Index dim = rad.system()->dim();
  const double T = rad.horizon();
  RngStream rng(seed, kProbeTagCov, 0);
  std::vector<CovProbe> probes;
  const double quarters[4] = {0.25 * T, 0.5 * T, 0.75 * T, T};
  // structured probes first: variances, covariances, an orthogonal pair, a zero time
  probes.push_back({T, T, unit_vector(dim, 0), unit_vector(dim, 0)});
  probes.push_back({0.5 * T, 0.5 * T, unit_vector(dim, 0), unit_vector(dim, 0)});
  if (dim > 1) {
    probes.push_back({T, T, unit_vector(dim, 1), unit_vector(dim, 1)});
    probes.push_back({T, T, unit_vector(dim, 0), unit_vector(dim, 1)});
    probes.push_back({0.25 * T, 0.75 * T, unit_vector(dim, 0), unit_vector(dim, 1)});
  }
  probes.push_back({0.5 * T, 0.0, unit_vector(dim, 0), unit_vector(dim, 0)});
  while (probes.size() < count) {
    CovProbe p;
    p.s = quarters[static_cast<std::size_t>(rng.uniform01() * 4.0) % 4];
    p.t = quarters[static_cast<std::size_t>(rng.uniform01() * 4.0) % 4];
    p.phi = random_unit(dim, rng);
    p.psi = rng.uniform01() < 0.5 ? p.phi : random_unit(dim, rng);
    probes.push_back(std::move(p));
  }
  probes.resize(count);
  return probes;
}

CheckResult check_qwiener_covariance(const Radonifier& rad, const std::vector<CovProbe>& probes,
                                     const McConfig& cfg) {
  cfg.validate(false);
  double var = 0.0;
  if (!drivers_identical_gaussian(rad.process(), var)) {
    throw std::invalid_argument("check_qwiener_covariance: requires identical Brownian drivers");
  }
  const auto& sys = *rad.system();
  const Eigen::Index m = rad.truncation();

  struct Prepared {
    Eigen::VectorXd w_phi, w_psi;
    double target = 0.0;
  };
  std::vector<Prepared> prep;
  prep.reserve(probes.size());
  for (const auto& p : probes) {
    Prepared q;
    q.w_phi = dual_weights(sys, m, p.phi);
    q.w_psi = dual_weights(sys, m, p.psi);
    const ModelVector phi_m = resolved_projection(sys, m, p.phi);
    const ModelVector psi_m = resolved_projection(sys, m, p.psi);
    // route one: inner product of mapped vectors
    const double route1 = rad.op().apply(phi_m).dot(rad.op().apply(psi_m));
    // route two: sum over singular directions
    const auto& sv = rad.op().singular_values();
    const Eigen::MatrixXd& v = rad.op().right_singular_vectors();
    double route2 = 0.0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
      route2 += sv[k] * sv[k] * v.col(k).dot(phi_m) * v.col(k).dot(psi_m);
    }
    const double scale = std::max({std::abs(route1), std::abs(route2), 1.0});
    if (std::abs(route1 - route2) > 1e-12 * scale) {
      throw std::logic_error("check_qwiener_covariance: analytic target routes disagree");
    }
    q.target = var * std::min(p.s, p.t) * route1;
    prep.push_back(std::move(q));
  }

  Eigen::MatrixXd products(static_cast<Eigen::Index>(probes.size()),
                           static_cast<Eigen::Index>(cfg.replicas));
  replica_sweep(cfg.replicas, cfg.exec, [&](std::size_t i) {
    const RegularizedPath y = rad.run(static_cast<std::uint64_t>(i));
    for (std::size_t k = 0; k < probes.size(); ++k) {
      const auto is = snapped_index(y.times, probes[k].s);
      const auto it = snapped_index(y.times, probes[k].t);
      const double a = prep[k].w_phi.dot(y.coords.col(static_cast<Eigen::Index>(is)));
      const double b = prep[k].w_psi.dot(y.coords.col(static_cast<Eigen::Index>(it)));
      products(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = a * b;
    }
  });

  double worst_z = 0.0;
  std::size_t worst_idx = 0;
  for (std::size_t k = 0; k < probes.size(); ++k) {
    std::vector<double> xs(cfg.replicas);
    for (std::size_t i = 0; i < cfg.replicas; ++i) {
      xs[i] = products(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
    }
    const auto ms = stats::mean_stderr(xs);
    const double dev = std::abs(ms.mean - prep[k].target);
    double z;
    if (ms.stderror > 0.0) {
      z = dev / ms.stderror;
    } else {
      z = dev <= 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    if (z > worst_z) {
      worst_z = z;
      worst_idx = k;
    }
  }

  CheckResult r;
  r.name = "qwiener_covariance";
  r.seed = cfg.seed;
  r.replicas = cfg.replicas;
  r.statistic = worst_z;
  r.threshold = cfg.stderr_multiplier;
  r.pass = worst_z <= r.threshold;
  std::ostringstream os;
  os << "pass iff statistic <= threshold; worst |empirical - min(s,t)<S phi,S psi>| in stderr "
     << "units over " << probes.size() << " probes (worst probe " << worst_idx
     << "); targets cross-checked by two algebraic routes";
  r.details = os.str();
  return r;
}

CheckResult check_levy_increments(const Radonifier& rad, const McConfig& cfg) {
  cfg.validate(true);
  const auto& sys = *rad.system();
  const Eigen::Index m = rad.truncation();
  const double T = rad.horizon();

  std::vector<ModelVector> dirs;
  if (m > 0) dirs.push_back(sys.basis[0]);
  RngStream prng(cfg.seed, kProbeTagLevy, 0);
  if (m > 0) {
    ModelVector mix = ModelVector::Zero(sys.dim());
    for (Eigen::Index j = 0; j < m; ++j) {
      mix += prng.gaussian() * sys.basis[static_cast<std::size_t>(j)];
    }
    dirs.push_back(mix);
  }

  std::vector<Eigen::VectorXd> weights;
  for (const auto& d : dirs) weights.push_back(dual_weights(sys, m, d));

  // per replica and direction: v at 0, T/4, T/2, 3T/4
  const double h = 0.25 * T;
  struct Row {
    double v_h, v_half, v_3q;
  };
  std::vector<std::vector<Row>> values(dirs.size(), std::vector<Row>(cfg.replicas));
  const bool has_jumps = std::holds_alternative<CompoundPoissonSpec>(rad.process().drivers[0].jumps);
  std::vector<std::uint64_t> counts_store;
  if (has_jumps) counts_store.resize(cfg.replicas * rad.process().drivers.size());

  replica_sweep(cfg.replicas, cfg.exec, [&](std::size_t i) {
    const CylPathSample s = rad.sample(static_cast<std::uint64_t>(i));
    const RegularizedPath y = rad.from_sample(s);
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      const auto& w = weights[d];
      Row row;
      row.v_h = w.dot(y.coords.col(static_cast<Eigen::Index>(snapped_index(y.times, h))));
      row.v_half = w.dot(y.coords.col(static_cast<Eigen::Index>(snapped_index(y.times, 0.5 * T))));
      row.v_3q = w.dot(y.coords.col(static_cast<Eigen::Index>(snapped_index(y.times, 0.75 * T))));
      values[d][i] = row;
    }
    if (has_jumps) {
      for (std::size_t c = 0; c < s.paths.size(); ++c) {
        counts_store[i * s.paths.size() + c] =
            static_cast<std::uint64_t>(s.paths[c].jump_list.size());
      }
    }
  });

  // the correlation band k/sqrt(n) presumes finite variance; KS does not
  bool finite_variance = true;
  for (const auto& d : rad.process().drivers) {
    finite_variance = finite_variance && d.has_finite_moment(2.0);
  }

  double min_p = 1.0;
  double worst_corr_z = 0.0;
  std::size_t skipped = 0;
  bool pass = true;
  std::ostringstream os;
  os << "pass iff every performed p-value >= alpha = " << cfg.alpha
     << " and |increment correlation| <= k/sqrt(n)";

  for (std::size_t d = 0; d < dirs.size(); ++d) {
    std::vector<double> inc_late(cfg.replicas), inc_early(cfg.replicas);
    for (std::size_t i = 0; i < cfg.replicas; ++i) {
      inc_late[i] = values[d][i].v_3q - values[d][i].v_half;  // increment over [T/2, 3T/4]
      inc_early[i] = values[d][i].v_h;                        // increment over [0, T/4]
    }
    const auto va = stats::mean_stderr(inc_late);
    const auto vb = stats::mean_stderr(inc_early);
    const double spread_a = va.stderror * std::sqrt(static_cast<double>(cfg.replicas));
    const double spread_b = vb.stderror * std::sqrt(static_cast<double>(cfg.replicas));
    if (spread_a <= 1e-14 && spread_b <= 1e-14) {
      ++skipped;  // degenerate projection: constant increments
    } else {
      const auto ks = stats::ks_two_sample(inc_late, inc_early);
      min_p = std::min(min_p, ks.p_value);
      if (ks.p_value < cfg.alpha) pass = false;
      if (finite_variance) {
        const auto corr = stats::correlation(inc_early, inc_late);
        if (!corr.degenerate) {
          const double z = std::abs(corr.rho) / corr.null_stderr;
          worst_corr_z = std::max(worst_corr_z, z);
          if (z > cfg.stderr_multiplier) pass = false;
        }
      }
    }
  }
  if (skipped > 0) os << "; " << skipped << " degenerate projection(s) skipped";
  if (!finite_variance) os << "; correlation sub-check skipped (infinite-variance driver)";

  if (has_jumps) {
    const auto* cp = std::get_if<CompoundPoissonSpec>(&rad.process().drivers[0].jumps);
    const auto gof = stats::chi_square_poisson_gof(counts_store, cp->rate * T);
    min_p = std::min(min_p, gof.p_value);
    if (gof.p_value < cfg.alpha) pass = false;
    os << "; jump-count chi-square p = " << gof.p_value << " over " << gof.bins << " bins";
  }
  os << "; worst correlation z = " << worst_corr_z;

  CheckResult r;
  r.name = "levy_increments";
  r.seed = cfg.seed;
  r.replicas = cfg.replicas;
  r.statistic = min_p;
  r.threshold = cfg.alpha;
  r.pass = pass;
  r.details = os.str();
  return r;
}

CheckResult check_cadlag(const Radonifier& rad, const McConfig& cfg) {
  cfg.validate(false);
  const auto& drivers = rad.process().drivers;
  bool pure_jump = true;
  bool has_gaussian = false;
  bool has_jumps = false;
  for (const auto& d : drivers) {
    if (d.gaussian_var > 0.0) {
      has_gaussian = true;
      pure_jump = false;
    }
    if (!std::holds_alternative<std::monostate>(d.jumps)) has_jumps = true;
    if (d.drift != 0.0 || std::holds_alternative<StableSpec>(d.jumps)) pure_jump = false;
  }
  // the stride-subsampling proxy only reads grid times, so it needs paths
  // whose event times are the grid
  const bool pure_gaussian = has_gaussian && !has_jumps;

  std::ostringstream os;
  bool pass = true;
  double statistic = 0.0;
  double threshold = 1e-12;

  // structural: value at a jump time includes the jump; left limits finite
  {
    const std::size_t n = std::min<std::size_t>(cfg.replicas, 200);
    std::vector<double> worst(n, 0.0);
    replica_sweep(n, cfg.exec, [&](std::size_t i) {
      const CylPathSample s = rad.sample(static_cast<std::uint64_t>(i));
      double w = 0.0;
      for (const auto& p : s.paths) {
        for (const auto& [time, size] : p.jump_list) {
          const double v = p.value(time);
          const double l = p.left_limit(time);
          if (!std::isfinite(l) || !std::isfinite(v)) {
            w = std::numeric_limits<double>::infinity();
            continue;
          }
          const double dev = std::abs((v - l) - size) / (1.0 + std::abs(size) + std::abs(v));
          w = std::max(w, dev);
        }
      }
      worst[i] = w;
    });
    double max_dev = 0.0;
    for (double w : worst) max_dev = std::max(max_dev, w);
    statistic = std::max(statistic, max_dev);
    if (max_dev > 1e-10) pass = false;
    os << "jump inclusion max deviation " << max_dev;
  }

  if (pure_jump) {
    const std::size_t n = std::min<std::size_t>(cfg.replicas, 1000);
    std::vector<double> worst(n, 0.0);
    replica_sweep(n, cfg.exec, [&](std::size_t i) {
      const CylPathSample s = rad.sample(static_cast<std::uint64_t>(i));
      const RegularizedPath y = rad.from_sample(s);
      // collect driver jump times; qnorm must be flat strictly between them
      std::vector<double> jump_times;
      for (const auto& p : s.paths) {
        for (const auto& [time, size] : p.jump_list) jump_times.push_back(time);
      }
      std::sort(jump_times.begin(), jump_times.end());
      double w = 0.0;
      double anchor = y.qnorm_at(0);
      std::size_t jt = 0;
      for (std::size_t e = 0; e < y.times.size(); ++e) {
        while (jt < jump_times.size() && jump_times[jt] <= y.times[e]) {
          anchor = y.qnorm_at(e);  // re-anchor at each jump
          ++jt;
        }
        const double q = y.qnorm_at(e);
        w = std::max(w, std::abs(q - anchor) / (1.0 + std::abs(anchor)));
      }
      worst[i] = w;
    });
    double max_drift = 0.0;
    for (double w : worst) max_drift = std::max(max_drift, w);
    statistic = std::max(statistic, max_drift);
    if (max_drift > 1e-12) pass = false;
    os << "; piecewise-constant drift " << max_drift;
  }

  if (has_gaussian && !pure_gaussian) os << "; resolution proxy skipped (jump component present)";

  if (pure_gaussian) {
    // resolution-halving proxy for path continuity: coarser grids are strided
    // subsamples of the same fine path, so the comparison is pathwise coupled
    const int fine = rad.grid_resolution();
    if (fine % 4 != 0) throw std::invalid_argument("check_cadlag: resolution must be divisible by 4");
    const std::size_t n = std::min<std::size_t>(cfg.replicas, 2000);
    std::vector<double> inc_fine(n), inc_mid(n), inc_coarse(n);
    replica_sweep(n, cfg.exec, [&](std::size_t i) {
      const CylPathSample s = rad.sample(static_cast<std::uint64_t>(i));
      const RegularizedPath y = rad.from_sample(s);
      auto max_increment = [&](int stride) {
        double best = 0.0;
        double prev = y.qnorm_at(0);
        for (std::size_t e = static_cast<std::size_t>(stride); e < y.times.size();
             e += static_cast<std::size_t>(stride)) {
          const double q = y.qnorm_at(e);
          best = std::max(best, std::abs(q - prev));
          prev = q;
        }
        return best;
      };
      inc_fine[i] = max_increment(1);
      inc_mid[i] = max_increment(2);
      inc_coarse[i] = max_increment(4);
    });
    const auto mf = stats::mean_stderr(inc_fine);
    const auto mm = stats::mean_stderr(inc_mid);
    const auto mc = stats::mean_stderr(inc_coarse);
    const double ratio1 = mf.mean / mm.mean;
    const double ratio2 = mm.mean / mc.mean;
    const double worst_ratio = std::max(ratio1, ratio2);
    if (!(worst_ratio < 1.0)) pass = false;
    statistic = std::max(statistic, worst_ratio);
    threshold = std::max(threshold, 1.0);
    os << "; mean max qnorm increment " << mc.mean << " -> " << mm.mean << " -> " << mf.mean
       << " under resolution doubling (must strictly decrease)";
  }

  CheckResult r;
  r.name = "cadlag";
  r.seed = cfg.seed;
  r.replicas = cfg.replicas;
  r.statistic = statistic;
  r.threshold = threshold;
  r.pass = pass;
  r.details = "pass iff statistic <= threshold (strict for resolution ratios); " + os.str();
  return r;
}

CheckResult check_weak_continuity_zero(const Radonifier& rad, std::vector<double> t_sequence,
                                       const McConfig& cfg) {
  cfg.validate(false);
  if (t_sequence.size() < 2) {
    throw std::invalid_argument("check_weak_continuity_zero: need a t sequence");
  }
  for (std::size_t i = 0; i < t_sequence.size(); ++i) {
    if (!(t_sequence[i] > 0.0) || (i && t_sequence[i] >= t_sequence[i - 1])) {
      throw std::invalid_argument("check_weak_continuity_zero: t sequence must be positive decreasing");
    }
  }
  const auto& sys = *rad.system();
  const Eigen::Index m = rad.truncation();

  std::vector<ModelVector> dirs;
  if (m > 0) dirs.push_back(sys.basis[0]);
  RngStream prng(cfg.seed, kProbeTagWeak, 0);
  if (m > 1) {
    ModelVector mix = ModelVector::Zero(sys.dim());
    for (Eigen::Index j = 0; j < m; ++j) {
      mix += prng.gaussian() * sys.basis[static_cast<std::size_t>(j)];
    }
    mix /= std::max(mix.norm(), 1e-300);
    dirs.push_back(mix);
  }
  std::vector<Eigen::VectorXd> weights;
  for (const auto& d : dirs) weights.push_back(dual_weights(sys, m, d));

  const std::size_t nt = t_sequence.size();
  // per (dir, t): store per-replica phase
  std::vector<std::vector<std::complex<double>>> phases(
      dirs.size() * nt, std::vector<std::complex<double>>(cfg.replicas));
  replica_sweep(cfg.replicas, cfg.exec, [&](std::size_t i) {
    const RegularizedPath y = rad.run(static_cast<std::uint64_t>(i));
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      for (std::size_t k = 0; k < nt; ++k) {
        const double v = weights[d].dot(
            y.coords.col(static_cast<Eigen::Index>(snapped_index(y.times, t_sequence[k]))));
        phases[d * nt + k][i] = std::complex<double>(std::cos(v), std::sin(v));
      }
    }
  });

  bool pass = true;
  double final_stat = 0.0, final_thresh = 0.0;
  std::ostringstream os;
  os << "pass iff |E exp(i<Y_t,phi>) - 1| is nonincreasing along t (within k stderr) and "
        "bounded by the analytic CF gap at the smallest t";
  const ComposedProcess comp = compose(rad.process(), rad.op());
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    std::vector<double> dist(nt), se(nt);
    for (std::size_t k = 0; k < nt; ++k) {
      std::complex<double> mean = 0.0;
      for (const auto& z : phases[d * nt + k]) mean += z;
      mean /= static_cast<double>(cfg.replicas);
      double var_re = 0.0, var_im = 0.0;
      for (const auto& z : phases[d * nt + k]) {
        var_re += (z.real() - mean.real()) * (z.real() - mean.real());
        var_im += (z.imag() - mean.imag()) * (z.imag() - mean.imag());
      }
      const double n = static_cast<double>(cfg.replicas);
      dist[k] = std::abs(mean - 1.0);
      se[k] = std::sqrt((var_re + var_im) / (n - 1.0) / n);
    }
    for (std::size_t k = 0; k + 1 < nt; ++k) {
      if (dist[k + 1] > dist[k] + cfg.stderr_multiplier * (se[k] + se[k + 1])) pass = false;
    }
    const ModelVector resolved = resolved_projection(sys, m, dirs[d]);
    const double analytic = std::abs(comp.char_function(resolved, t_sequence.back()) - 1.0);
    const double thresh = analytic + cfg.stderr_multiplier * se.back();
    if (dist.back() > thresh) pass = false;
    if (dist.back() > final_stat) {
      final_stat = dist.back();
      final_thresh = thresh;
    }
    os << "; dir " << d << ": |CF-1| at t=" << t_sequence.back() << " is " << dist.back()
       << " (analytic " << analytic << ")";
  }

  CheckResult r;
  r.name = "weak_continuity_zero";
  r.seed = cfg.seed;
  r.replicas = cfg.replicas;
  r.statistic = final_stat;
  r.threshold = final_thresh;
  r.pass = pass;
  r.details = os.str();
  return r;
}

CertificateResult sazonov_certificate(const CylindricalLevy& process, const LinearOperator& op,
                                      double horizon, double epsilon, double c_max,
                                      const McConfig& cfg, std::size_t random_probes) {
  cfg.validate(false);
  if (!(epsilon > 0.0)) throw std::invalid_argument("sazonov_certificate: epsilon must be > 0");
  if (!(c_max > 0.0)) throw std::invalid_argument("sazonov_certificate: c_max must be > 0");
  if (op.rows() != process.dim()) {
    throw std::invalid_argument("sazonov_certificate: operator/process dimension mismatch");
  }

  const Eigen::Index dim = op.cols();
  std::vector<ModelVector> base;
  std::vector<std::string> labels;
  for (Eigen::Index i = 0; i < dim; ++i) {
    base.push_back(unit_vector(dim, i));
    labels.push_back("e" + std::to_string(i + 1));
  }
  RngStream prng(cfg.seed, kProbeTagCert, 0);
  for (std::size_t i = 0; i < random_probes; ++i) {
    base.push_back(random_unit(dim, prng));
    labels.push_back("u" + std::to_string(i + 1));
  }
  const std::vector<double> multiples = {1.0, 0.5, 0.25, 0.125, 0.0625};

  const std::size_t nb = base.size();
  const std::size_t rows = nb * multiples.size();
  Eigen::MatrixXd mapped(op.rows(), static_cast<Eigen::Index>(nb));
  for (std::size_t i = 0; i < nb; ++i) {
    mapped.col(static_cast<Eigen::Index>(i)) = op.apply(base[i]);
  }

  // per (probe row, replica): sup_t |1 - exp(i tau X_t(S phi))|
  Eigen::MatrixXd sup_vals(static_cast<Eigen::Index>(rows),
                           static_cast<Eigen::Index>(cfg.replicas));
  replica_sweep(cfg.replicas, cfg.exec, [&](std::size_t i) {
    const CylPathSample s =
        sample_paths(process, horizon, cfg.grid_resolution, cfg.seed, static_cast<std::uint64_t>(i));
    const Eigen::MatrixXd table = s.values_table(s.event_times);
    const Eigen::MatrixXd evals = mapped.transpose() * table;  // nb x E
    for (std::size_t b = 0; b < nb; ++b) {
      for (std::size_t t = 0; t < multiples.size(); ++t) {
        double sup = 0.0;
        for (Eigen::Index e = 0; e < evals.cols(); ++e) {
          const double x = multiples[t] * evals(static_cast<Eigen::Index>(b), e);
          sup = std::max(sup, 2.0 * std::abs(std::sin(0.5 * x)));
        }
        sup_vals(static_cast<Eigen::Index>(b * multiples.size() + t),
                 static_cast<Eigen::Index>(i)) = sup;
      }
    }
  });

  struct RowStat {
    double mean, se, norm;  // norm = |S (tau phi)|
    std::size_t b, t;
  };
  std::vector<RowStat> rowstats(rows);
  for (std::size_t b = 0; b < nb; ++b) {
    const double base_norm = mapped.col(static_cast<Eigen::Index>(b)).norm();
    for (std::size_t t = 0; t < multiples.size(); ++t) {
      const std::size_t rix = b * multiples.size() + t;
      std::vector<double> xs(cfg.replicas);
      for (std::size_t i = 0; i < cfg.replicas; ++i) {
        xs[i] = sup_vals(static_cast<Eigen::Index>(rix), static_cast<Eigen::Index>(i));
      }
      const auto ms = stats::mean_stderr(xs);
      rowstats[rix] = RowStat{ms.mean, ms.stderror, multiples[t] * base_norm, b, t};
    }
  }

  const double k = cfg.stderr_multiplier;
  auto admissible_at = [&](double c) {
    for (const auto& rs : rowstats) {
      if (rs.mean > epsilon + 2.0 * c * c * rs.norm * rs.norm + k * rs.se) return false;
    }
    return true;
  };

  CertificateResult out;
  out.epsilon = epsilon;
  out.c_max = c_max;

  // a probe with S phi = 0 constrains no c; it must pass on epsilon alone
  bool hopeless = false;
  std::string hopeless_label;
  for (const auto& rs : rowstats) {
    if (rs.norm <= 0.0 && rs.mean > epsilon + k * rs.se) {
      hopeless = true;
      hopeless_label = labels[rs.b];
    }
  }

  if (!hopeless && admissible_at(c_max)) {
    double lo = 0.0, hi = c_max;
    if (admissible_at(0.0)) {
      hi = 0.0;
    } else {
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (admissible_at(mid) ? hi : lo) = mid;
      }
    }
    out.admissible = true;
    out.scale_c = hi;
  } else {
    out.admissible = false;
    out.scale_c = std::numeric_limits<double>::infinity();
  }
  out.generator_hs_norm = out.admissible ? out.scale_c * op.hs_norm()
                                         : std::numeric_limits<double>::infinity();

  // report the tightest rows at the found scale
  const double c_rep = out.admissible ? out.scale_c : c_max;
  std::vector<std::size_t> order(rows);
  for (std::size_t i = 0; i < rows; ++i) order[i] = i;
  auto margin_of = [&](const RowStat& rs) {
    return epsilon + 2.0 * c_rep * c_rep * rs.norm * rs.norm + k * rs.se - rs.mean;
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return margin_of(rowstats[a]) < margin_of(rowstats[b]);
  });
  const std::size_t keep = std::min<std::size_t>(rows, 32);
  for (std::size_t i = 0; i < keep; ++i) {
    const auto& rs = rowstats[order[i]];
    CertificateProbeRow row;
    row.label = labels[rs.b] + " x " + std::to_string(multiples[rs.t]);
    row.lhs = rs.mean;
    row.lhs_stderr = rs.se;
    row.mapped_norm = rs.norm;
    row.margin = margin_of(rs);
    out.probes.push_back(std::move(row));
  }

  out.check.name = "sazonov_certificate";
  out.check.seed = cfg.seed;
  out.check.replicas = cfg.replicas;
  out.check.statistic = out.scale_c;
  out.check.threshold = c_max;
  out.check.pass = out.admissible;
  std::ostringstream os;
  os << "pass iff an admissible scale c <= c_max exists for "
     << "E sup_t |1-exp(i X_t(S phi))| <= eps + 2 (c |S phi|)^2 + k stderr over " << rows
     << " probes";
  if (hopeless) os << "; inadmissible at every c: probe " << hopeless_label << " with S phi = 0";
  if (out.admissible) os << "; c = " << out.scale_c << ", generator HS mass " << out.generator_hs_norm;
  out.check.details = os.str();
  return out;
}

double band_constant() { return std::sqrt(M_E) / (std::sqrt(M_E) - 1.0); }
double band_constant_2() { return 2.0 * band_constant(); }

BandResult probability_band_diagnostic(const Radonifier& rad, const std::vector<double>& epsilons,
                                       std::vector<double> radius_sweep, const McConfig& cfg) {
  cfg.validate(true);
  if (epsilons.empty()) throw std::invalid_argument("probability_band_diagnostic: empty epsilons");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0) || (i && epsilons[i] > epsilons[i - 1])) {
      throw std::invalid_argument("probability_band_diagnostic: epsilons must be positive decreasing");
    }
  }
  if (radius_sweep.empty()) throw std::invalid_argument("probability_band_diagnostic: empty sweep");
  std::sort(radius_sweep.begin(), radius_sweep.end());

  std::vector<double> sup_sq(cfg.replicas);
  replica_sweep(cfg.replicas, cfg.exec, [&](std::size_t i) {
    const RegularizedPath y = rad.run(static_cast<std::uint64_t>(i));
    sup_sq[i] = y.sup_partial_square_sum(0, rad.truncation());
  });

  const double n = static_cast<double>(cfg.replicas);
  std::vector<std::pair<double, double>> curve;
  curve.reserve(radius_sweep.size());
  double prev = 1.0;
  for (double radius : radius_sweep) {
    std::size_t count = 0;
    for (double v : sup_sq) count += v > radius ? 1 : 0;
    const double est = static_cast<double>(count) / n;
    if (est > prev + 1e-12) {
      throw std::logic_error("probability_band_diagnostic: estimate not nonincreasing in R");
    }
    prev = est;
    curve.emplace_back(radius, est);
  }

  BandResult out;
  bool pass = true;
  double worst_margin = -std::numeric_limits<double>::infinity();
  for (double eps : epsilons) {
    BandLevel level;
    level.epsilon = eps;
    level.band = band_constant() * eps;
    level.curve = curve;
    double best_margin = std::numeric_limits<double>::infinity();
    for (const auto& [radius, est] : curve) {
      const double se = std::sqrt(std::max(est * (1.0 - est), 0.0) / n);
      const double margin = est - level.band - cfg.stderr_multiplier * se;
      best_margin = std::min(best_margin, margin);
      if (!level.crossed && margin <= 0.0) {
        level.crossed = true;
        level.crossing_radius = radius;
      }
    }
    if (!level.crossed) pass = false;
    worst_margin = std::max(worst_margin, best_margin);
    out.levels.push_back(std::move(level));
  }

  out.check.name = "probability_band";
  out.check.seed = cfg.seed;
  out.check.replicas = cfg.replicas;
  out.check.statistic = worst_margin;
  out.check.threshold = 0.0;
  out.check.pass = pass;
  std::ostringstream os;
  os << "pass iff for every level the tail estimate falls below sqrt(e)/(sqrt(e)-1) * eps "
     << "(+ k stderr) at some R in the sweep; constants " << band_constant() << " and "
     << band_constant_2();
  out.check.details = os.str();
  return out;
}

BandResult probability_band_diagnostic(const Radonifier& rad, const SeminormChain& chain,
                                       std::vector<double> radius_sweep, const McConfig& cfg) {
  if (chain.epsilons().empty()) {
    throw std::invalid_argument("probability_band_diagnostic: chain carries no epsilon levels");
  }
  return probability_band_diagnostic(rad, chain.epsilons(), std::move(radius_sweep), cfg);
}

CheckResult check_moment_bound(const Radonifier& rad, Eigen::Index m, double r,
                               const McConfig& cfg) {
  cfg.validate(false);
  if (2 * m > rad.truncation()) {
    throw std::invalid_argument("check_moment_bound: radonifier truncation must be >= 2m");
  }

  CheckResult res;
  res.name = "moment_bound";
  res.seed = cfg.seed;
  res.replicas = cfg.replicas;

  const auto& drivers = rad.process().drivers;
  bool martingale = true;
  for (const auto& d : drivers) martingale = martingale && d.is_martingale() && d.has_finite_moment(r);
  if (!martingale) {
    res.pass = true;
    res.details = "skipped: drivers are not r-integrable martingales; no certified bound applies";
    return res;
  }
  double moment_scale;
  try {
    moment_scale = drivers[0].abs_moment(r, rad.horizon());
  } catch (const std::invalid_argument& e) {
    res.pass = true;
    res.details = std::string("skipped: ") + e.what();
    return res;
  }

  const double bound = truncation_tail_bound(rad.op(), m, r, rad.horizon(), true, moment_scale);

  std::vector<double> gap_r(cfg.replicas), sup_r(cfg.replicas);
  replica_sweep(cfg.replicas, cfg.exec, [&](std::size_t i) {
    const RegularizedPath y = rad.run(static_cast<std::uint64_t>(i));
    gap_r[i] = std::pow(y.sup_partial_square_sum(m, 2 * m), r / 2.0);
    sup_r[i] = std::pow(y.qnorm_sup(), r);
  });

  const auto gap = stats::mean_stderr(gap_r);
  const auto sup_full = stats::mean_stderr(sup_r);
  bool stable = true;
  double half_mean = sup_full.mean;
  if (sup_r.size() >= 4) {
    const std::vector<double> first_half(sup_r.begin(), sup_r.begin() + sup_r.size() / 2);
    const auto sup_half = stats::mean_stderr(first_half);
    half_mean = sup_half.mean;
    stable = std::abs(sup_full.mean - sup_half.mean) <= 3.0 * sup_full.stderror;
  }

  res.statistic = gap.mean;
  res.threshold = bound + cfg.stderr_multiplier * gap.stderror;
  res.pass = gap.mean <= res.threshold && stable && std::isfinite(sup_full.mean);
  std::ostringstream os;
  os << "pass iff E sup_t qnorm(Y^{2m}-Y^m)^r <= Doob/Schatten bound " << bound
     << " + k stderr; sup-moment estimate " << sup_full.mean << " (half-sample "
     << half_mean << ", stable = " << (stable ? "yes" : "no") << ")";
  res.details = os.str();
  return res;
}

}  // namespace cylreg
