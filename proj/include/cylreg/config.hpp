#pragma once

#include "cylreg/cylindrical.hpp"
#include "cylreg/operators.hpp"
#include "cylreg/space.hpp"
#include "cylreg/verify.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace cylreg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Either an explicit truncation level or a (tol, r) target resolved through
// choose_truncation.
struct TruncationSpec {
  std::optional<Eigen::Index> m;
  double tol = 0.0;
  double r = 2.0;
};

struct CertificateSpec {
  double epsilon = 0.1;
  double c_max = 64.0;
  std::size_t random_probes = 8;
};

struct BandSpec {
  std::vector<double> epsilons = {0.1};
  std::vector<double> radius_sweep;  // empty: geometric default sweep
};

// One structured config file drives every run; the normalized echo embedded
// in every output is sufficient to reproduce it. Seed resolution order:
// config value < CYLREG_SEED environment variable < --seed flag.
class RunConfig {
 public:
  static RunConfig from_file(const std::string& path);
  static RunConfig from_json(const nlohmann::json& j);

  nlohmann::json echo() const { return normalized_; }

  const std::string& label() const { return label_; }
  Eigen::Index dim() const { return dim_; }
  LevyDriver driver() const;
  bool has_operator() const { return normalized_.contains("operator"); }
  LinearOperator make_operator() const;
  HilbertianSeminorm make_seminorm() const;  // identity when absent
  double horizon() const { return horizon_; }
  int grid_resolution() const { return grid_resolution_; }
  TruncationSpec truncation() const { return truncation_; }
  McConfig mc() const;
  CertificateSpec certificate() const { return certificate_; }
  BandSpec band() const { return band_; }
  std::uint64_t seed() const { return seed_; }
  void set_seed(std::uint64_t seed);
  void set_replicas(std::size_t replicas);
  const std::string& output_dir() const { return output_dir_; }
  const std::vector<std::string>& checks() const { return checks_; }
  bool strict_version() const { return strict_version_; }

 private:
  RunConfig() = default;
  void parse();

  nlohmann::json normalized_;
  std::string label_;
  Eigen::Index dim_ = 0;
  double horizon_ = 1.0;
  int grid_resolution_ = 256;
  TruncationSpec truncation_;
  CertificateSpec certificate_;
  BandSpec band_;
  std::uint64_t seed_ = 0;
  std::string output_dir_ = "out";
  std::vector<std::string> checks_;
  bool strict_version_ = false;
};

}  // namespace cylreg
