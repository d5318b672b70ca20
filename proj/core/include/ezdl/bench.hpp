#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ezdl {

/// One CSV row. mean_evals counts aux_eval calls for the linear algorithm and
/// its solvers, rounds for alternating, and is 0 for sorted_oracle.
struct BenchRecord {
    std::size_t n = 0;
    std::string algorithm;
    std::size_t trials = 0;
    double mean_evals = 0.0;
    double std_evals = 0.0;
    double mean_time_ns = 0.0;
};

enum class Algorithm { linear, sorted_oracle, alternating };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::linear, Algorithm::sorted_oracle, Algorithm::alternating};

std::string_view to_string(Algorithm algorithm) noexcept;
std::optional<Algorithm> parse_algorithm(std::string_view name) noexcept;

inline constexpr std::size_t kDefaultBenchSizes[] = {1u << 4, 1u << 8, 1u << 12, 1u << 16, 1u << 20, 1u << 24};

/// Inputs for dimension n are drawn from a generator seeded with
/// bench_stream_seed(seed, n), so adding or removing sizes leaves the others
/// unchanged.
std::uint64_t bench_stream_seed(std::uint64_t seed, std::size_t n) noexcept;

/// Projects `trials` uniform random vectors in [0, 1)^n to sigma_star with
/// each of the four solvers, on identical inputs, and records how many
/// auxiliary function evaluations each needed.
std::vector<BenchRecord> bench_solvers(std::span<const std::size_t> sizes, double sigma_star, std::size_t trials,
                                       std::uint64_t seed);

/// Times the algorithms on uniform random vectors that are first projected to
/// sigma_pre and then to sigma_star. Each trial reports the median of
/// `repetitions` runs. The results of all algorithms are compared and
/// NumericalInconsistency is thrown if they differ by more than 1e-8.
std::vector<BenchRecord> bench_timing(std::span<const std::size_t> sizes, std::span<const Algorithm> algorithms,
                                      std::size_t trials, double sigma_pre, double sigma_star, std::uint64_t seed,
                                      std::size_t repetitions = 5);

inline constexpr std::string_view kBenchCsvHeader = "n,algorithm,trials,mean_evals,std_evals,mean_time_ns";

/// Header line, then one line per record.
void write_csv(std::ostream& out, std::span<const BenchRecord> records);

} // namespace ezdl
