#include <ezdl/bench.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <string>

#include <ezdl/error.hpp>
#include <ezdl/linalg.hpp>
#include <ezdl/projection.hpp>
#include <ezdl/rng.hpp>
#include <ezdl/sparseness.hpp>

namespace ezdl {

namespace {

constexpr double kAgreementTolerance = 1e-8;

struct Moments {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t count = 0;

    void add(double v) noexcept
    {
        sum += v;
        sum_sq += v * v;
        ++count;
    }
    double mean() const noexcept { return count ? sum / static_cast<double>(count) : 0.0; }
    // Population standard deviation.
    double stddev() const noexcept
    {
        if (count == 0) return 0.0;
        const double m = mean();
        return std::sqrt(std::max(0.0, sum_sq / static_cast<double>(count) - m * m));
    }
};

void check_sizes(std::span<const std::size_t> sizes, std::size_t trials)
{
    if (trials == 0) throw Error(ErrorKind::InvalidConfig, "bench needs at least one trial");
    for (std::size_t n : sizes) {
        if (n < 4) throw Error(ErrorKind::InvalidConfig, "bench dimensions must be at least 4, got " + std::to_string(n));
    }
}

std::vector<double> uniform_vector(std::size_t n, Rng& rng)
{
    std::vector<double> x(n);
    for (double& v : x) v = rng.uniform();
    return x;
}

template <class F>
double elapsed_ns(F&& f)
{
    const auto start = std::chrono::steady_clock::now();
    f();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::nano>(stop - start).count();
}

void compare(std::span<const double> reference, std::span<const double> other, Algorithm algorithm, std::size_t n)
{
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double scale = std::max(1.0, std::abs(reference[i]));
        if (!(std::abs(reference[i] - other[i]) <= kAgreementTolerance * scale)) {
            throw Error(ErrorKind::NumericalInconsistency, std::string(to_string(algorithm)) + " disagrees with the "
                                                               "linear projection at n=" + std::to_string(n) +
                                                               ", index " + std::to_string(i));
        }
    }
}

void append_number(std::string& line, double v)
{
    std::array<char, 64> buf{};
    const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    line.append(buf.data(), result.ptr);
}

} // namespace

std::string_view to_string(Algorithm algorithm) noexcept
{
    switch (algorithm) {
    case Algorithm::linear: return "linear";
    case Algorithm::sorted_oracle: return "sorted_oracle";
    case Algorithm::alternating: return "alternating";
    }
    return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) noexcept
{
    for (Algorithm a : kAllAlgorithms) {
        if (to_string(a) == name) return a;
    }
    return std::nullopt;
}

std::uint64_t bench_stream_seed(std::uint64_t seed, std::size_t n) noexcept
{
    Rng mixer(seed ^ (static_cast<std::uint64_t>(n) * 0xD1B54A32D192ED03ULL));
    return mixer.next();
}

std::vector<BenchRecord> bench_solvers(std::span<const std::size_t> sizes, double sigma_star, std::size_t trials,
                                       std::uint64_t seed)
{
    check_sizes(sizes, trials);
    std::vector<BenchRecord> records;
    for (std::size_t n : sizes) {
        Rng rng(bench_stream_seed(seed, n));
        std::array<Moments, 4> evals{};
        std::array<Moments, 4> times{};
        std::vector<double> work(n);
        for (std::size_t t = 0; t < trials; ++t) {
            const std::vector<double> x = uniform_vector(n, rng);
            const SparsenessTarget target = target_norms(sigma_star, n, norm2(x));
            for (std::size_t s = 0; s < std::size(kAllSolvers); ++s) {
                std::ranges::copy(x, work.begin());
                ProjectionOutcome outcome;
                times[s].add(elapsed_ns([&] { outcome = project_nonneg(work, target, kAllSolvers[s]); }));
                evals[s].add(static_cast<double>(outcome.solver_evals));
            }
        }
        for (std::size_t s = 0; s < std::size(kAllSolvers); ++s) {
            records.push_back({n, std::string(to_string(kAllSolvers[s])), trials, evals[s].mean(), evals[s].stddev(),
                               times[s].mean()});
        }
    }
    return records;
}

std::vector<BenchRecord> bench_timing(std::span<const std::size_t> sizes, std::span<const Algorithm> algorithms,
                                      std::size_t trials, double sigma_pre, double sigma_star, std::uint64_t seed,
                                      std::size_t repetitions)
{
    check_sizes(sizes, trials);
    if (algorithms.empty()) throw Error(ErrorKind::InvalidConfig, "no algorithms selected");
    repetitions = std::max<std::size_t>(repetitions, 1);
    std::vector<BenchRecord> records;
    for (std::size_t n : sizes) {
        Rng rng(bench_stream_seed(seed, n));
        std::vector<Moments> evals(algorithms.size());
        std::vector<Moments> times(algorithms.size());
        std::vector<double> work(n);
        std::vector<double> reference(n);
        std::vector<double> rep_times(repetitions);
        for (std::size_t t = 0; t < trials; ++t) {
            std::vector<double> x = uniform_vector(n, rng);
            project_nonneg(x, target_norms(sigma_pre, n, norm2(x)));
            const SparsenessTarget target = target_norms(sigma_star, n, norm2(x));

            // The linear result is the reference for the agreement check.
            std::ranges::copy(x, reference.begin());
            project_nonneg(reference, target);

            for (std::size_t a = 0; a < algorithms.size(); ++a) {
                double count = 0.0;
                for (std::size_t r = 0; r < repetitions; ++r) {
                    switch (algorithms[a]) {
                    case Algorithm::linear: {
                        std::ranges::copy(x, work.begin());
                        ProjectionOutcome outcome;
                        rep_times[r] = elapsed_ns([&] { outcome = project_nonneg(work, target); });
                        count = static_cast<double>(outcome.solver_evals);
                        break;
                    }
                    case Algorithm::sorted_oracle:
                        rep_times[r] = elapsed_ns([&] { work = oracle_project_sorted(x, target); });
                        break;
                    case Algorithm::alternating: {
                        AlternatingTrace trace;
                        rep_times[r] = elapsed_ns([&] { work = alternating_project(x, target, 0, &trace); });
                        count = static_cast<double>(trace.rounds);
                        break;
                    }
                    }
                }
                compare(reference, work, algorithms[a], n);
                std::ranges::nth_element(rep_times, rep_times.begin() + static_cast<std::ptrdiff_t>(repetitions / 2));
                times[a].add(rep_times[repetitions / 2]);
                evals[a].add(count);
            }
        }
        for (std::size_t a = 0; a < algorithms.size(); ++a) {
            records.push_back({n, std::string(to_string(algorithms[a])), trials, evals[a].mean(), evals[a].stddev(),
                               times[a].mean()});
        }
    }
    return records;
}

void write_csv(std::ostream& out, std::span<const BenchRecord> records)
{
    out << kBenchCsvHeader << '\n';
    std::string line;
    for (const BenchRecord& r : records) {
        line = std::to_string(r.n) + ',' + r.algorithm + ',' + std::to_string(r.trials) + ',';
        append_number(line, r.mean_evals);
        line += ',';
        append_number(line, r.std_evals);
        line += ',';
        append_number(line, r.mean_time_ns);
        out << line << '\n';
    }
}

} // namespace ezdl
