#include <doctest.h>

#include "cylreg/regularize.hpp"
#include "cylreg/replica_sweep.hpp"
#include "cylreg/verify.hpp"

#include <stdexcept>
#include <vector>

using namespace cylreg;

namespace {

Eigen::VectorXd inverse_index_diag(Eigen::Index n) {
  Eigen::VectorXd d(n);
  for (Eigen::Index j = 1; j <= n; ++j) d[j - 1] = 1.0 / static_cast<double>(j);
  return d;
}

}  // namespace

TEST_CASE("parallel sweep is bit-identical to the serial reference") {
  const Eigen::Index n = 12;
  const Radonifier rad(make_wiener(n), LinearOperator::diagonal(inverse_index_diag(n)),
                       HilbertianSeminorm::euclidean(n), n, 1.0, 64, 321);
  const std::size_t replicas = 300;

  std::vector<double> serial_sup(replicas), parallel_sup(replicas);
  std::vector<double> serial_last(replicas), parallel_last(replicas);
  replica_sweep_serial(replicas, [&](std::size_t i) {
    const auto y = rad.run(i);
    serial_sup[i] = y.qnorm_sup();
    serial_last[i] = y.coords(n - 1, y.coords.cols() - 1);
  });
  replica_sweep(replicas, ExecMode::parallel, [&](std::size_t i) {
    const auto y = rad.run(i);
    parallel_sup[i] = y.qnorm_sup();
    parallel_last[i] = y.coords(n - 1, y.coords.cols() - 1);
  });
  for (std::size_t i = 0; i < replicas; ++i) {
    CHECK(serial_sup[i] == parallel_sup[i]);
    CHECK(serial_last[i] == parallel_last[i]);
  }
}

TEST_CASE("checks produce identical results under both execution modes") {
  const Eigen::Index n = 8;
  const Radonifier rad(make_wiener(n), LinearOperator::diagonal(inverse_index_diag(n)),
                       HilbertianSeminorm::euclidean(n), n, 1.0, 64, 654);
  McConfig serial;
  serial.replicas = 400;
  serial.seed = 654;
  serial.grid_resolution = 64;
  serial.exec = ExecMode::serial;
  McConfig parallel = serial;
  parallel.exec = ExecMode::parallel;

  const auto a = check_version(rad, serial);
  const auto b = check_version(rad, parallel);
  CHECK(a.statistic == b.statistic);
  CHECK(a.pass == b.pass);

  const auto ca = check_levy_increments(rad, serial);
  const auto cb = check_levy_increments(rad, parallel);
  CHECK(ca.statistic == cb.statistic);
  CHECK(ca.details == cb.details);
}

TEST_CASE("exceptions inside the sweep propagate in both modes") {
  for (ExecMode mode : {ExecMode::serial, ExecMode::parallel}) {
    CHECK_THROWS_AS(replica_sweep(64, mode,
                                  [&](std::size_t i) {
                                    if (i == 13) throw std::runtime_error("boom");
                                  }),
                    std::runtime_error);
  }
}

TEST_CASE("hardware threads reported") { CHECK(hardware_threads() >= 1); }
