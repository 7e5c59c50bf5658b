#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fastop/operator.hpp"

namespace fastop::bench {

/// A benchmark request. `sizes` are operator row counts.
struct Scenario {
    std::string name;
    std::vector<index_t> sizes;
    index_t repetitions = 3;
    std::uint64_t seed = 0;
    /// Dense baselines above this many bytes are skipped.
    std::size_t mem_cap_bytes = kDefaultMaterializationCap;
};

struct BenchRecord {
    std::string scenario;
    index_t size = 0;
    double structured_min_s = 0.0;
    double structured_avg_s = 0.0;
    std::optional<double> dense_min_s;
    std::optional<double> dense_avg_s;
    std::size_t structured_mem_bytes = 0;
    std::size_t dense_mem_bytes = 0;
    /// 2-norm of the structured result; independent of timing.
    double checksum = 0.0;
};

/// hadamard.forward, kron.forward, blockdiag.forward, circulant.solve,
/// ista.recovery, saft.forward.
const std::vector<std::string>& scenario_names();

/// Throws UnknownScenario for an unknown name and InvalidArgument for sizes
/// the scenario cannot build, non-ascending sizes or fewer than 3 repetitions.
void validate(const Scenario& s);

/// Builds, times and cross-checks each size. Throws VerificationFailure when
/// the structured and dense results disagree beyond 1e-8 relative.
std::vector<BenchRecord> run_scenario(const Scenario& s);

inline constexpr const char* kCsvHeader =
    "size,structured_min_s,structured_avg_s,dense_min_s,dense_avg_s,structured_mem_bytes,"
    "dense_mem_bytes,checksum";

/// Writes the CSV table (header plus rows sorted by size).
void emit_csv(std::span<const BenchRecord> records, std::ostream& out);
/// Throws IoError when the file cannot be written.
void emit_csv(std::span<const BenchRecord> records, const std::filesystem::path& path);

/// Compressed-sensing test problem: b = M x_true with
/// M = partial(Hadamard(signal_dim), random rows) * Circulant(c).
struct SensingProblem {
    OperatorPtr matrix;
    DenseBatch x_true;
    DenseBatch measurement;
    std::vector<index_t> true_support;
};

/// `rows` random distinct Hadamard rows (sorted), Gaussian circulant kernel
/// scaled by 1/sqrt(signal_dim), and a `sparsity`-sparse Gaussian signal.
SensingProblem make_sensing_problem(index_t rows, index_t signal_dim, index_t sparsity,
                                    std::uint64_t seed);

/// Well-conditioned real deconvolution kernel of length n: c_0 = 4 plus
/// random +-1/sqrt(n) taps.
std::vector<double> deconvolution_kernel(index_t n, std::uint64_t seed);

}  // namespace fastop::bench
