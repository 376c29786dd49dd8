#include "cylreg/config.hpp"

#include <fstream>
#include <sstream>

namespace cylreg {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config: " + where + ": " + what);
}

double need_number(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) fail(where + "." + key, "expected a number");
  return j[key].get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? j[key].get<double>() : fallback;
}

Eigen::VectorXd parse_vector(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(where, "entry " + std::to_string(i) + " is not a number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

// nested rows, or a flat row-major square matrix
Eigen::MatrixXd parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array");
  if (j[0].is_array()) {
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (!j[static_cast<std::size_t>(r)].is_array() ||
          static_cast<Eigen::Index>(j[static_cast<std::size_t>(r)].size()) != cols) {
        fail(where, "row " + std::to_string(r) + " has inconsistent length");
      }
      for (Eigen::Index c = 0; c < cols; ++c) {
        m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
      }
    }
    return m;
  }
  const Eigen::VectorXd flat = parse_vector(j, where);
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(flat.size()))));
  if (n * n != flat.size()) fail(where, "flat matrix length is not a perfect square");
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = flat[r * n + c];
  }
  return m;
}

JumpLaw parse_jump_law(const json& j, const std::string& where) {
  if (!j.contains("kind")) fail(where, "jump law needs a kind");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "normal") return JumpLaw::normal(number_or(j, "mean", 0.0), need_number(j, where, "var"));
  if (kind == "constant") return JumpLaw::constant(need_number(j, where, "value"));
  if (kind == "two_point") {
    return JumpLaw::two_point(need_number(j, where, "magnitude"), number_or(j, "prob_up", 0.5));
  }
  fail(where, "unknown jump law kind '" + kind + "'");
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return from_json(j);
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig cfg;
  cfg.normalized_ = j;
  cfg.parse();
  return cfg;
}

void RunConfig::parse() {
  const json& j = normalized_;
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  label_ = j.value("label", std::string{});
  if (!j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<long long>() <= 0) {
    fail("dim", "expected a positive integer");
  }
  dim_ = j["dim"].get<Eigen::Index>();
  horizon_ = j.value("horizon", 1.0);
  if (!(horizon_ > 0.0)) fail("horizon", "must be > 0");
  grid_resolution_ = j.value("grid_resolution", 256);
  if (grid_resolution_ < 1) fail("grid_resolution", "must be >= 1");
  seed_ = j.value("seed", std::uint64_t{0});
  output_dir_ = j.value("output_dir", std::string{"out"});

  if (j.contains("truncation")) {
    const json& t = j["truncation"];
    if (t.contains("m")) {
      truncation_.m = t["m"].get<Eigen::Index>();
      if (*truncation_.m < 0) fail("truncation.m", "must be >= 0");
    } else {
      truncation_.tol = need_number(t, "truncation", "tol");
      truncation_.r = t.value("r", 2.0);
      if (!(truncation_.tol > 0.0)) fail("truncation.tol", "must be > 0");
      if (!(truncation_.r >= 2.0)) fail("truncation.r", "must be >= 2");
    }
  }

  if (j.contains("certificate")) {
    const json& c = j["certificate"];
    certificate_.epsilon = c.value("epsilon", 0.1);
    certificate_.c_max = c.value("c_max", 64.0);
    certificate_.random_probes = c.value("random_probes", std::size_t{8});
    if (!(certificate_.epsilon > 0.0)) fail("certificate.epsilon", "must be > 0");
    if (!(certificate_.c_max > 0.0)) fail("certificate.c_max", "must be > 0");
  }

  if (j.contains("band")) {
    const json& b = j["band"];
    if (b.contains("epsilons")) {
      band_.epsilons.clear();
      for (const auto& e : b["epsilons"]) band_.epsilons.push_back(e.get<double>());
    }
    if (b.contains("radius_sweep")) {
      for (const auto& e : b["radius_sweep"]) band_.radius_sweep.push_back(e.get<double>());
    }
  }

  if (j.contains("verify")) {
    const json& v = j["verify"];
    if (v.contains("checks")) {
      for (const auto& c : v["checks"]) checks_.push_back(c.get<std::string>());
    }
    strict_version_ = v.value("strict_version", false);
  }

  // eagerly validate the pieces so errors carry the config path
  (void)driver();
  if (has_operator()) (void)make_operator();
  (void)make_seminorm();
  (void)mc();
}

LevyDriver RunConfig::driver() const {
  const json& j = normalized_;
  if (!j.contains("driver")) fail("driver", "missing");
  const json& d = j["driver"];
  if (!d.contains("kind")) fail("driver", "needs a kind");
  const std::string kind = d["kind"].get<std::string>();
  try {
    if (kind == "wiener") return LevyDriver::wiener();
    if (kind == "cpoisson") {
      return LevyDriver::compound_poisson(need_number(d, "driver", "rate"),
                                          parse_jump_law(d.at("jump"), "driver.jump"));
    }
    if (kind == "stable") {
      return LevyDriver::alpha_stable(need_number(d, "driver", "alpha"),
                                      need_number(d, "driver", "scale"));
    }
    if (kind == "composite") {
      JumpPart jumps;
      if (d.contains("jump")) {
        const json& jj = d["jump"];
        if (jj.contains("kind") && jj["kind"].get<std::string>() == "stable") {
          jumps = StableSpec{need_number(jj, "driver.jump", "alpha"),
                             need_number(jj, "driver.jump", "scale")};
        } else if (d.contains("rate")) {
          jumps = CompoundPoissonSpec{need_number(d, "driver", "rate"),
                                      parse_jump_law(jj, "driver.jump")};
        } else {
          fail("driver", "composite jump needs either stable fields or a rate + jump law");
        }
      }
      return LevyDriver::composite(number_or(d, "drift", 0.0),
                                   number_or(d, "gaussian_var", 0.0), jumps);
    }
  } catch (const std::invalid_argument& e) {
    fail("driver", e.what());
  } catch (const json::exception& e) {
    fail("driver", e.what());
  }
  fail("driver", "unknown kind '" + kind + "'");
}

LinearOperator RunConfig::make_operator() const {
  const json& o = normalized_.at("operator");
  try {
    if (o.contains("diag")) {
      const Eigen::VectorXd d = parse_vector(o["diag"], "operator.diag");
      if (d.size() != dim_) fail("operator.diag", "length does not match dim");
      return LinearOperator::diagonal(d);
    }
    if (o.contains("dense")) {
      const Eigen::MatrixXd m = parse_matrix(o["dense"], "operator.dense");
      if (m.cols() != dim_) fail("operator.dense", "column count does not match dim");
      return LinearOperator::dense(m);
    }
    if (o.contains("kernel")) {
      const json& k = o["kernel"];
      if (k.contains("gaussian")) {
        return LinearOperator::gaussian_kernel(dim_,
                                               need_number(k["gaussian"], "operator.kernel.gaussian",
                                                           "bandwidth"));
      }
      fail("operator.kernel", "unknown kernel");
    }
  } catch (const std::invalid_argument& e) {
    fail("operator", e.what());
  }
  fail("operator", "expected one of diag|dense|kernel");
}

HilbertianSeminorm RunConfig::make_seminorm() const {
  const json& j = normalized_;
  if (!j.contains("seminorm")) return HilbertianSeminorm::euclidean(dim_, "q");
  const json& s = j["seminorm"];
  const std::string label = s.value("label", std::string{"q"});
  const double tol = s.value("tol", -1.0);
  try {
    if (s.contains("diag")) {
      const Eigen::VectorXd d = parse_vector(s["diag"], "seminorm.diag");
      if (d.size() != dim_) fail("seminorm.diag", "length does not match dim");
      return HilbertianSeminorm::diagonal(d, label, tol);
    }
    if (s.contains("dense")) {
      const Eigen::MatrixXd m = parse_matrix(s["dense"], "seminorm.dense");
      if (m.rows() != dim_) fail("seminorm.dense", "size does not match dim");
      return HilbertianSeminorm::dense(m, label, tol);
    }
  } catch (const std::invalid_argument& e) {
    fail("seminorm", e.what());
  }
  fail("seminorm", "expected diag or dense");
}

McConfig RunConfig::mc() const {
  const json& j = normalized_;
  McConfig cfg;
  cfg.seed = seed_;
  cfg.grid_resolution = grid_resolution_;
  if (j.contains("mc")) {
    const json& m = j["mc"];
    cfg.replicas = m.value("replicas", std::size_t{10000});
    cfg.alpha = m.value("alpha", 0.01);
    cfg.stderr_multiplier = m.value("stderr_multiplier", 5.0);
    cfg.exec = m.value("parallel", true) ? ExecMode::parallel : ExecMode::serial;
  }
  try {
    cfg.validate(false);
  } catch (const std::invalid_argument& e) {
    fail("mc", e.what());
  }
  return cfg;
}

void RunConfig::set_seed(std::uint64_t seed) {
  seed_ = seed;
  normalized_["seed"] = seed;
}

void RunConfig::set_replicas(std::size_t replicas) {
  if (!normalized_.contains("mc")) normalized_["mc"] = nlohmann::json::object();
  normalized_["mc"]["replicas"] = replicas;
}

}  // namespace cylreg
