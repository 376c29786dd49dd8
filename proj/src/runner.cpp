#include "cylreg/runner.hpp"

#include "cylreg/regularize.hpp"
#include "cylreg/replica_sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cylreg {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

void write_json(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::string out_path(const std::string& dir, const char* name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

Radonifier make_radonifier(const RunConfig& cfg, Eigen::Index m) {
  return Radonifier(make_cylindrical(cfg.driver(), cfg.dim(), cfg.label()), cfg.make_operator(),
                    cfg.make_seminorm(), m, cfg.horizon(), cfg.grid_resolution(), cfg.seed());
}

// resolve the truncation level against the operator
struct ResolvedPlan {
  TruncationPlan plan;
  bool tol_driven = false;
};

ResolvedPlan resolve_truncation(const RunConfig& cfg, const LinearOperator& op) {
  ResolvedPlan out;
  const TruncationSpec spec = cfg.truncation();
  const bool martingale = cfg.driver().is_martingale();
  if (spec.m) {
    out.plan.m = std::min<Eigen::Index>(*spec.m, op.rank());
    out.plan.r = spec.r;
    out.plan.bound_kind = martingale ? TruncationPlan::BoundKind::doob_schatten_tail
                                     : TruncationPlan::BoundKind::schatten_tail;
    double scale = 1.0;
    try {
      scale = cfg.driver().abs_moment(spec.r, cfg.horizon());
    } catch (const std::invalid_argument&) {
      scale = -1.0;  // fall back to the standard Brownian scale
    }
    out.plan.achieved_bound =
        truncation_tail_bound(op, out.plan.m, spec.r, cfg.horizon(), martingale, scale);
    return out;
  }
  double scale = -1.0;
  try {
    scale = cfg.driver().abs_moment(spec.r, cfg.horizon());
  } catch (const std::invalid_argument&) {
  }
  out.plan = choose_truncation(op, spec.r, spec.tol, cfg.horizon(), martingale, scale);
  out.tol_driven = true;
  return out;
}

json base_echo(const RunConfig& cfg) {
  json j;
  j["schema_version"] = 1;
  j["label"] = cfg.label();
  j["config"] = cfg.echo();
  return j;
}

}  // namespace

json check_to_json(const CheckResult& c) {
  json j;
  j["check"] = c.name;
  j["statistic"] = c.statistic;
  j["threshold"] = c.threshold;
  j["pass"] = c.pass;
  j["seed"] = c.seed;
  j["replicas"] = c.replicas;
  j["details"] = c.details;
  return j;
}

RunOutcome run_simulate(const RunConfig& cfg, const std::string& out_dir) {
  const CylindricalLevy process = make_cylindrical(cfg.driver(), cfg.dim(), cfg.label());
  const McConfig mc = cfg.mc();
  const std::size_t replicas = mc.replicas;

  std::ostringstream paths_csv, jumps_csv;
  paths_csv << "# cylreg-csv 1\nreplica,coord,t,value\n";
  jumps_csv << "# cylreg-csv 1\nreplica,coord,time,size\n";

  const Eigen::Index dim = process.dim();
  std::vector<double> inc_sum(static_cast<std::size_t>(dim), 0.0);
  std::vector<double> inc_sumsq(static_cast<std::size_t>(dim), 0.0);
  std::vector<std::size_t> inc_count(static_cast<std::size_t>(dim), 0);
  std::vector<std::size_t> jump_totals(static_cast<std::size_t>(dim), 0);

  // replicas are generated in parallel blocks and written in order
  const std::size_t block = 256;
  std::vector<CylPathSample> samples;
  for (std::size_t start = 0; start < replicas; start += block) {
    const std::size_t n = std::min(block, replicas - start);
    samples.assign(n, CylPathSample{});
    replica_sweep(n, mc.exec, [&](std::size_t i) {
      samples[i] = sample_paths(process, cfg.horizon(), cfg.grid_resolution(), cfg.seed(),
                                static_cast<std::uint64_t>(start + i));
    });
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t rep = start + b;
      const auto& s = samples[b];
      for (Eigen::Index c = 0; c < dim; ++c) {
        const auto& p = s.paths[static_cast<std::size_t>(c)];
        double prev = 0.0;
        for (std::size_t e = 0; e < s.event_times.size(); ++e) {
          const double t = s.event_times[e];
          const double v = p.value(t);
          paths_csv << rep << ',' << c << ',' << fmt(t) << ',' << fmt(v) << '\n';
          if (e > 0) {
            const double inc = v - prev;
            inc_sum[static_cast<std::size_t>(c)] += inc;
            inc_sumsq[static_cast<std::size_t>(c)] += inc * inc;
            ++inc_count[static_cast<std::size_t>(c)];
          }
          prev = v;
        }
        for (const auto& [time, size] : p.jump_list) {
          jumps_csv << rep << ',' << c << ',' << fmt(time) << ',' << fmt(size) << '\n';
          ++jump_totals[static_cast<std::size_t>(c)];
        }
      }
    }
  }

  json summary = base_echo(cfg);
  summary["replicas"] = replicas;
  json coords = json::array();
  for (Eigen::Index c = 0; c < dim; ++c) {
    const auto i = static_cast<std::size_t>(c);
    const double n = std::max<double>(1.0, static_cast<double>(inc_count[i]));
    const double mean = inc_sum[i] / n;
    json jc;
    jc["coord"] = c;
    jc["increment_mean"] = mean;
    jc["increment_var"] = inc_sumsq[i] / n - mean * mean;
    jc["jump_count_total"] = jump_totals[i];
    coords.push_back(jc);
  }
  summary["per_coordinate"] = coords;

  RunOutcome out;
  const std::string p1 = out_path(out_dir, "paths.csv");
  const std::string p2 = out_path(out_dir, "jumps.csv");
  const std::string p3 = out_path(out_dir, "summary.json");
  write_text(p1, paths_csv.str());
  write_text(p2, jumps_csv.str());
  write_json(p3, summary);
  out.files = {p1, p2, p3};
  return out;
}

RunOutcome run_radonify(const RunConfig& cfg, const std::string& out_dir) {
  const LinearOperator op = cfg.make_operator();
  const ResolvedPlan resolved = resolve_truncation(cfg, op);
  const Radonifier rad = make_radonifier(cfg, resolved.plan.m);
  const McConfig mc = cfg.mc();

  std::ostringstream coords_csv, qnorm_csv;
  coords_csv << "# cylreg-csv 1\nreplica,t";
  for (Eigen::Index j = 0; j < resolved.plan.m; ++j) coords_csv << ",c_" << (j + 1);
  coords_csv << '\n';
  qnorm_csv << "# cylreg-csv 1\nreplica,t,qnorm\n";

  const std::size_t block = 256;
  std::vector<RegularizedPath> paths;
  std::vector<double> sup_qnorm(mc.replicas, 0.0);
  for (std::size_t start = 0; start < mc.replicas; start += block) {
    const std::size_t n = std::min(block, mc.replicas - start);
    paths.assign(n, RegularizedPath{});
    replica_sweep(n, mc.exec, [&](std::size_t i) {
      paths[i] = rad.run(static_cast<std::uint64_t>(start + i));
    });
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t rep = start + b;
      const auto& y = paths[b];
      sup_qnorm[rep] = y.qnorm_sup();
      for (std::size_t e = 0; e < y.times.size(); ++e) {
        coords_csv << rep << ',' << fmt(y.times[e]);
        for (Eigen::Index j = 0; j < y.truncation; ++j) {
          coords_csv << ',' << fmt(y.coords(j, static_cast<Eigen::Index>(e)));
        }
        coords_csv << '\n';
        qnorm_csv << rep << ',' << fmt(y.times[e]) << ',' << fmt(y.qnorm_at(e)) << '\n';
      }
    }
  }

  json plan = base_echo(cfg);
  plan["m"] = resolved.plan.m;
  plan["r"] = resolved.plan.r;
  plan["tol_driven"] = resolved.tol_driven;
  if (resolved.tol_driven) plan["tol"] = resolved.plan.tol;
  plan["bound_kind"] = resolved.plan.bound_kind == TruncationPlan::BoundKind::doob_schatten_tail
                           ? "doob_schatten_tail"
                           : "schatten_tail";
  plan["achieved_bound"] = resolved.plan.achieved_bound;
  plan["domination_scale"] = rad.domination_scale();
  plan["system_size"] = rad.system()->size();
  plan["kernel_inputs"] = rad.system()->kernel_inputs.size();
  plan["sup_qnorm"] = sup_qnorm;

  RunOutcome out;
  const std::string p1 = out_path(out_dir, "coords.csv");
  const std::string p2 = out_path(out_dir, "qnorm.csv");
  const std::string p3 = out_path(out_dir, "plan.json");
  write_text(p1, coords_csv.str());
  write_text(p2, qnorm_csv.str());
  write_json(p3, plan);
  out.files = {p1, p2, p3};
  return out;
}

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {
      "version",      "qwiener_covariance", "levy_increments", "cadlag",
      "weak_continuity", "probability_band", "moment_bound"};
  return names;
}

RunOutcome run_verify(const RunConfig& cfg, const std::string& out_dir,
                      std::vector<std::string> checks) {
  if (checks.empty()) checks = cfg.checks();
  const bool all = checks.empty() ||
                   (checks.size() == 1 && checks.front() == "all");
  if (!all) {
    for (const auto& c : checks) {
      if (std::find(known_checks().begin(), known_checks().end(), c) == known_checks().end()) {
        throw ConfigError("verify: unknown check name '" + c + "'");
      }
    }
  }
  auto wants = [&](const char* name) {
    return all || std::find(checks.begin(), checks.end(), name) != checks.end();
  };

  const LinearOperator op = cfg.make_operator();
  const ResolvedPlan resolved = resolve_truncation(cfg, op);
  const Radonifier rad = make_radonifier(cfg, resolved.plan.m);
  const McConfig mc = cfg.mc();

  const bool gaussian_input = [&] {
    for (const auto& d : rad.process().drivers) {
      if (d.drift != 0.0 || d.gaussian_var <= 0.0 ||
          !std::holds_alternative<std::monostate>(d.jumps)) {
        return false;
      }
    }
    return !rad.process().drivers.empty();
  }();

  VerificationReport report;
  if (wants("version")) report.checks.push_back(check_version(rad, mc, cfg.strict_version()));
  if (wants("qwiener_covariance")) {
    if (gaussian_input) {
      report.checks.push_back(
          check_qwiener_covariance(rad, default_cov_probes(rad, 20, mc.seed), mc));
    } else if (!all) {
      throw ConfigError("verify: qwiener_covariance requires a Brownian driver");
    }
  }
  if (wants("levy_increments")) report.checks.push_back(check_levy_increments(rad, mc));
  if (wants("cadlag")) report.checks.push_back(check_cadlag(rad, mc));
  if (wants("weak_continuity")) {
    std::vector<double> ts;
    for (double t = 0.5 * cfg.horizon();
         t * cfg.grid_resolution() >= cfg.horizon() && ts.size() < 6; t *= 0.5) {
      ts.push_back(t);
    }
    if (ts.size() >= 2) report.checks.push_back(check_weak_continuity_zero(rad, ts, mc));
  }
  if (wants("probability_band")) {
    BandSpec band = cfg.band();
    if (band.radius_sweep.empty()) {
      for (double radius = 1.0 / 1024.0; radius <= 1048576.0; radius *= 2.0) {
        band.radius_sweep.push_back(radius);
      }
    }
    report.checks.push_back(
        probability_band_diagnostic(rad, band.epsilons, band.radius_sweep, mc).check);
  }
  if (wants("moment_bound")) {
    const Eigen::Index m_half = rad.truncation() / 2;
    if (m_half >= 1) {
      report.checks.push_back(check_moment_bound(rad, m_half, 2.0, mc));
    }
  }

  json rep = base_echo(cfg);
  json checks_json = json::array();
  for (const auto& c : report.checks) checks_json.push_back(check_to_json(c));
  rep["checks"] = checks_json;
  rep["overall_pass"] = report.overall_pass();
  rep["plan_m"] = resolved.plan.m;

  RunOutcome out;
  const std::string p = out_path(out_dir, "report.json");
  write_json(p, rep);
  out.files = {p};
  out.exit_code = report.overall_pass() ? 0 : 1;
  return out;
}

RunOutcome run_certificate(const RunConfig& cfg, const std::string& out_dir,
                           std::optional<double> epsilon_override) {
  const CertificateSpec spec = cfg.certificate();
  const double epsilon = epsilon_override.value_or(spec.epsilon);
  const CylindricalLevy process = make_cylindrical(cfg.driver(), cfg.dim(), cfg.label());
  const LinearOperator op = cfg.make_operator();
  const CertificateResult cert = sazonov_certificate(process, op, cfg.horizon(), epsilon,
                                                     spec.c_max, cfg.mc(), spec.random_probes);

  json j = base_echo(cfg);
  j["epsilon"] = cert.epsilon;
  j["admissible"] = cert.admissible;
  j["scale_c"] = cert.admissible ? json(cert.scale_c) : json();
  j["c_max"] = cert.c_max;
  j["generator_hs_norm"] = cert.admissible ? json(cert.generator_hs_norm) : json();
  j["operator_hs_norm"] = op.hs_norm();
  j["pass"] = cert.check.pass;
  j["result"] = check_to_json(cert.check);
  json probes = json::array();
  for (const auto& row : cert.probes) {
    json r;
    r["probe"] = row.label;
    r["lhs"] = row.lhs;
    r["lhs_stderr"] = row.lhs_stderr;
    r["mapped_norm"] = row.mapped_norm;
    r["margin"] = row.margin;
    probes.push_back(r);
  }
  j["tightest_probes"] = probes;

  RunOutcome out;
  const std::string p = out_path(out_dir, "certificate.json");
  write_json(p, j);
  out.files = {p};
  out.exit_code = cert.check.pass ? 0 : 1;
  return out;
}

}  // namespace cylreg
