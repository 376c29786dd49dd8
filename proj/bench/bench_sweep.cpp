// Benchmarks the replica sweep that dominates every verification run: sample
// a cylindrical Wiener process, regularize it, and reduce a sup statistic.
// Compares the serial reference against the OpenMP path on the same kernel.

#include "cylreg/regularize.hpp"
#include "cylreg/replica_sweep.hpp"

#include <chrono>
#include <cstdio>
#include <vector>

using namespace cylreg;

namespace {

Eigen::VectorXd inverse_index_diag(Eigen::Index n) {
  Eigen::VectorXd d(n);
  for (Eigen::Index j = 1; j <= n; ++j) d[j - 1] = 1.0 / static_cast<double>(j);
  return d;
}

double time_sweep(const Radonifier& rad, std::size_t replicas, ExecMode mode,
                  std::vector<double>& out) {
  const auto start = std::chrono::steady_clock::now();
  replica_sweep(replicas, mode, [&](std::size_t i) {
    out[i] = rad.run(static_cast<std::uint64_t>(i)).qnorm_sup();
  });
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(stop - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t replicas = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 2000;
  const Eigen::Index dim = argc > 2 ? std::strtol(argv[2], nullptr, 10) : 50;
  const int resolution = argc > 3 ? std::atoi(argv[3]) : 256;

  const Radonifier rad(make_wiener(dim), LinearOperator::diagonal(inverse_index_diag(dim)),
                       HilbertianSeminorm::euclidean(dim), dim, 1.0, resolution, 12345);

  std::printf("replica sweep: %zu replicas, dim %ld, resolution %d, %d thread(s)\n", replicas,
              static_cast<long>(dim), resolution, hardware_threads());

  std::vector<double> serial_out(replicas), parallel_out(replicas);
  // warm-up pass so allocation noise does not land on either side
  time_sweep(rad, std::min<std::size_t>(replicas, 64), ExecMode::serial, serial_out);

  const double t_serial = time_sweep(rad, replicas, ExecMode::serial, serial_out);
  const double t_parallel = time_sweep(rad, replicas, ExecMode::parallel, parallel_out);

  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < replicas; ++i) {
    if (serial_out[i] != parallel_out[i]) ++mismatches;
  }

  std::printf("  serial reference : %8.3f s  (%.1f replicas/s)\n", t_serial,
              static_cast<double>(replicas) / t_serial);
  std::printf("  openmp           : %8.3f s  (%.1f replicas/s)\n", t_parallel,
              static_cast<double>(replicas) / t_parallel);
  std::printf("  speedup          : %8.2fx\n", t_serial / t_parallel);
  std::printf("  bit-identical    : %s\n", mismatches == 0 ? "yes" : "NO");
  return mismatches == 0 ? 0 : 1;
}
