#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spikescan {

// Forward and backward wall-clock timing of one neuron layer on random input.
// Neurons: "dsn" (taped conv, sigmoid, scan, fire), "lif" (taped BPTT),
// "psn" (dense [T x T] mixing kernels), "sliding-psn" (shared-tap kernels).
struct BenchConfig {
  std::vector<std::string> neurons{"dsn", "psn"};
  std::vector<std::size_t> lengths{1024, 2048, 4096, 8192};
  std::size_t batch = 16;
  std::size_t channels = 32;
  std::size_t reps = 100;
  std::size_t warmup = 3;
  std::uint64_t seed = 0;

  // Throws DomainError for an unknown neuron, an empty or unsorted length list
  // or a zero extent.
  void validate() const;
};

struct BenchRow {
  std::string neuron;
  std::size_t length = 0;
  double fwd_ms = 0.0;  // mean over reps
  double bwd_ms = 0.0;
  double fwd_median_ms = 0.0;
  double bwd_median_ms = 0.0;
  // Sum of the forward output and of the input gradient; identical for a
  // fixed seed whatever the timings.
  double checksum = 0.0;

  double total_ms() const { return fwd_ms + bwd_ms; }
};

std::vector<BenchRow> run_bench(const BenchConfig& cfg);

// Least-squares slope of log(y) on log(x). Throws DomainError for fewer than
// two points or a nonpositive value.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Slope of total_ms against length for each neuron, in cfg.neurons order.
std::vector<std::pair<std::string, double>> bench_slopes(const std::vector<BenchRow>& rows);

// neuron,length,fwd_ms,bwd_ms,fwd_median_ms,bwd_median_ms
std::string bench_csv(const std::vector<BenchRow>& rows);
// neuron,length,checksum: the seed-determined part of a run.
std::string bench_checksum_csv(const std::vector<BenchRow>& rows);

}  // namespace spikescan
