// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//   ezdl_acceptance                 run every criterion
//   ezdl_acceptance --criterion N   run criterion N only

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <ezdl/bench.hpp>
#include <ezdl/dictionary.hpp>
#include <ezdl/error.hpp>
#include <ezdl/imaging.hpp>
#include <ezdl/linalg.hpp>
#include <ezdl/projection.hpp>
#include <ezdl/reconstruct.hpp>
#include <ezdl/rng.hpp>
#include <ezdl/sparseness.hpp>
#include <ezdl/trainer.hpp>

#include "random.hpp"
#include "synthetic.hpp"

#ifdef EZDL_HAVE_CLI
#include <cli.hpp>
#endif

using namespace ezdl;

namespace {

// Tolerances and limits.
constexpr double kOracleRelTol = 1e-9;
constexpr double kPropertyTol = 1e-9;
constexpr double kFiniteDiffStep = 1e-6;
constexpr double kGradientRelTol = 1e-5;
constexpr double kKinkExclusion = 1e-4;
constexpr double kNewtonSqMaxEvals = 8.0;
constexpr double kScalingLow = 8.0;
constexpr double kScalingHigh = 32.0;
constexpr double kEckartYoungTol = 1e-4;
constexpr double kMinSsim = 0.90;
constexpr double kTrendFraction = 0.80;
constexpr double kAtomNormTol = 1e-9;
constexpr double kSeparableRatio = 1e-8;

constexpr double kSigmaGrid[] = {0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.99};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* pattern, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

double max_abs(std::span<const double> v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Largest coordinate difference, relative to the largest reference entry.
double relative_gap(std::span<const double> a, std::span<const double> ref)
{
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - ref[i]));
    return diff / std::max(max_abs(ref), 1e-300);
}

std::size_t random_dimension(Rng& rng, std::size_t lo, std::size_t hi)
{
    // Log-uniform so that small and large dimensions are both well covered.
    const double t = rng.uniform(std::log(static_cast<double>(lo)), std::log(static_cast<double>(hi) + 1.0));
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::exp(t)), lo, hi);
}

Verdict oracle_equivalence()
{
    const auto t0 = Clock::now();
    Rng rng(1001);
    double worst = 0.0;
    std::size_t cases = 0;
    for (; cases < 10000; ++cases) {
        const std::size_t n = random_dimension(rng, 2, 4096);
        const double sigma = kSigmaGrid[rng.index(std::size(kSigmaGrid))];
        const std::vector<double> x = fixtures::uniform_vector(n, rng);
        const SparsenessTarget t = target_norms(sigma, n, norm2(x));
        const std::vector<double> oracle = oracle_project_sorted(x, t);
        worst = std::max(worst, relative_gap(alternating_project(x, t), oracle));
        for (Solver s : kAllSolvers) {
            std::vector<double> p = x;
            project_nonneg(p, t, s);
            worst = std::max(worst, relative_gap(p, oracle));
        }
    }
    const double elapsed = seconds_since(t0);
    return {worst <= kOracleRelTol && elapsed < 120.0,
            fmt("%zu cases, max relative gap %.3g (tol %.0e), %.1f s (limit 120 s)", cases, worst, kOracleRelTol,
                elapsed)};
}

Verdict projection_properties()
{
    Rng rng(2002);
    std::size_t feasibility = 0;
    std::size_t idempotence = 0;
    std::size_t order = 0;
    std::size_t sign = 0;
    double worst_sigma = 0.0;
    double worst_fixed = 0.0;
    const std::size_t cases = 1000;
    for (std::size_t c = 0; c < cases; ++c) {
        const std::size_t n = random_dimension(rng, 2, 1024);
        const double sigma = rng.uniform(0.05, 0.99);
        const Solver solver = kAllSolvers[c % std::size(kAllSolvers)];
        const std::vector<double> x = fixtures::uniform_vector(n, rng);
        const SparsenessTarget t = target_norms(sigma, n, norm2(x));

        std::vector<double> p = x;
        project_nonneg(p, t, solver);
        const double gap = std::abs(hoyer_sigma(p) - sigma);
        worst_sigma = std::max(worst_sigma, gap);
        if (gap > kPropertyTol) ++feasibility;

        std::vector<double> again = p;
        project_nonneg(again, t, solver);
        const double fixed = relative_gap(again, p);
        worst_fixed = std::max(worst_fixed, fixed);
        if (fixed > kPropertyTol) ++idempotence;

        bool ordered = true;
        for (std::size_t i = 0; i < n && ordered; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                if (x[i] >= x[k] && p[i] < p[k]) {
                    ordered = false;
                    break;
                }
            }
        }
        if (!ordered) ++order;

        const std::vector<double> z = fixtures::normal_vector(n, rng);
        const std::vector<double> r = project_signed(z, sigma, ScaleMode::preserve_l2(), solver);
        for (std::size_t i = 0; i < n; ++i) {
            if (r[i] * z[i] < 0.0) {
                ++sign;
                break;
            }
        }
    }
    return {feasibility + idempotence + order + sign == 0,
            fmt("%zu cases per property; violations: feasibility %zu (max %.2g), idempotence %zu (max %.2g), "
                "order %zu, sign %zu",
                cases, feasibility, worst_sigma, idempotence, worst_fixed, order, sign)};
}

Verdict gradient_check()
{
    Rng rng(3003);
    double worst = 0.0;
    std::size_t checked = 0;
    std::size_t excluded = 0;
    while (checked < 500) {
        const std::size_t n = 3 + rng.index(48);
        const double sigma = rng.uniform(0.1, 0.9);
        const std::vector<double> x = fixtures::uniform_vector(n, rng);
        const std::vector<double> y = fixtures::normal_vector(n, rng);
        const SparsenessTarget t = target_norms(sigma, n, norm2(x));
        std::vector<double> p = x;
        const ProjectionOutcome out = project_nonneg(p, t);
        if (std::ranges::any_of(x, [&](double v) { return std::abs(v - out.alpha_star) < kKinkExclusion; })) {
            ++excluded;
            continue;
        }
        const std::vector<double> analytic = grad_apply(p, out, t, y);
        std::vector<double> plus(n);
        std::vector<double> minus(n);
        for (std::size_t i = 0; i < n; ++i) {
            plus[i] = x[i] + kFiniteDiffStep * y[i];
            minus[i] = x[i] - kFiniteDiffStep * y[i];
        }
        project_nonneg(plus, t);
        project_nonneg(minus, t);
        std::vector<double> numeric(n);
        for (std::size_t i = 0; i < n; ++i) numeric[i] = (plus[i] - minus[i]) / (2 * kFiniteDiffStep);
        // Relative to the probe as well: with two survivors the Jacobian is zero.
        double diff = 0.0;
        double scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
            scale = std::max({scale, std::abs(numeric[i]), std::abs(y[i])});
        }
        worst = std::max(worst, diff / scale);
        ++checked;
    }
    return {worst <= kGradientRelTol,
            fmt("%zu pairs (%zu excluded near the threshold), max relative error %.3g (tol %.0e)", checked, excluded,
                worst, kGradientRelTol)};
}

Verdict solver_ordering()
{
    const auto t0 = Clock::now();
    const std::size_t sizes[] = {std::size_t{1} << 20};
    const std::vector<BenchRecord> records = bench_solvers(sizes, 0.9, 200, 4004);
    double evals[4] = {};
    for (const BenchRecord& r : records) {
        for (std::size_t s = 0; s < 4; ++s) {
            if (r.algorithm == to_string(kAllSolvers[s])) evals[s] = r.mean_evals;
        }
    }
    const double bisection = evals[0];
    const double newton = evals[1];
    const double newton_sq = evals[2];
    const double halley = evals[3];
    const double elapsed = seconds_since(t0);
    const bool ordered = newton_sq < halley && halley < newton && newton < bisection;
    return {ordered && newton_sq <= kNewtonSqMaxEvals && elapsed < 300.0,
            fmt("n=2^20, 200 trials: newton_sq %.2f, halley %.2f, newton %.2f, bisection %.2f (bound %.0f), %.1f s "
                "(limit 300 s)",
                newton_sq, halley, newton, bisection, kNewtonSqMaxEvals, elapsed)};
}

Verdict linear_scaling()
{
    const auto t0 = Clock::now();
    const std::size_t small = std::size_t{1} << 20;
    const std::size_t large = std::size_t{1} << 24;
    const std::size_t sizes[] = {small, large};
    const std::vector<BenchRecord> records = bench_timing(sizes, kAllAlgorithms, 3, 0.5, 0.9, 5005, 3);
    auto time_of = [&](std::size_t n, Algorithm a) {
        for (const BenchRecord& r : records) {
            if (r.n == n && r.algorithm == to_string(a)) return r.mean_time_ns;
        }
        return std::nan("");
    };
    const double ratio = time_of(large, Algorithm::linear) / time_of(small, Algorithm::linear);
    bool fastest = true;
    std::string table;
    for (std::size_t n : sizes) {
        const double lin = time_of(n, Algorithm::linear);
        const double sorted = time_of(n, Algorithm::sorted_oracle);
        const double alt = time_of(n, Algorithm::alternating);
        fastest = fastest && lin < sorted && lin < alt;
        table += fmt("; n=2^%d linear %.1f ms, sorted %.1f ms, alternating %.1f ms", static_cast<int>(std::log2(n)),
                     lin * 1e-6, sorted * 1e-6, alt * 1e-6);
    }
    const double elapsed = seconds_since(t0);
    return {ratio >= kScalingLow && ratio <= kScalingHigh && fastest && elapsed < 600.0,
            fmt("t(2^24)/t(2^20) = %.2f (want [%.0f, %.0f])", ratio, kScalingLow, kScalingHigh) + table +
                fmt("; %.1f s (limit 600 s)", elapsed)};
}

// Best rank-k fit with a given column space: the orthogonal projection of M
// onto it. For k = 1 the space is span{u}, for k = 2 it is the complement of w.
Matrix fit_given_direction(const Matrix& m, const std::array<double, 3>& dir, std::size_t k)
{
    Matrix p(3, 3);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            const double outer = dir[i] * dir[j];
            p(i, j) = k == 1 ? outer : (i == j ? 1.0 : 0.0) - outer;
        }
    }
    Matrix a(3, 3);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < 3; ++l) s += p(i, l) * m(l, j);
            a(i, j) = s;
        }
    }
    return a;
}

double frobenius_gap(const Matrix& a, const Matrix& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.vec().size(); ++i) s += (a.vec()[i] - b.vec()[i]) * (a.vec()[i] - b.vec()[i]);
    return std::sqrt(s);
}

std::array<double, 3> direction(double theta, double phi)
{
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

// Coarse grid over the unit sphere, then repeated local refinement of the
// best few cells.
Matrix exhaustive_rank_fit(const Matrix& m, std::size_t k)
{
    auto residual = [&](double theta, double phi) {
        return frobenius_gap(m, fit_given_direction(m, direction(theta, phi), k));
    };
    struct Cell {
        double value;
        double theta;
        double phi;
    };
    std::vector<Cell> coarse;
    const int nt = 90;
    const int np = 180;
    for (int i = 0; i <= nt; ++i) {
        for (int j = 0; j < np; ++j) {
            const double theta = M_PI * i / nt;
            const double phi = 2 * M_PI * j / np;
            coarse.push_back({residual(theta, phi), theta, phi});
        }
    }
    std::ranges::sort(coarse, {}, &Cell::value);
    Cell best = coarse.front();
    for (std::size_t c = 0; c < 8; ++c) {
        Cell cur = coarse[c];
        double dt = M_PI / nt;
        double dp = 2 * M_PI / np;
        for (int level = 0; level < 60; ++level) {
            Cell next = cur;
            for (int a = -5; a <= 5; ++a) {
                for (int b = -5; b <= 5; ++b) {
                    const double theta = cur.theta + a * dt / 5;
                    const double phi = cur.phi + b * dp / 5;
                    const double v = residual(theta, phi);
                    if (v < next.value) next = {v, theta, phi};
                }
            }
            cur = next;
            dt *= 0.5;
            dp *= 0.5;
        }
        if (cur.value < best.value) best = cur;
    }
    return fit_given_direction(m, direction(best.theta, best.phi), k);
}

Verdict eckart_young()
{
    Rng rng(6006);
    double worst = 0.0;
    std::size_t count = 0;
    for (; count < 50; ++count) {
        Matrix m(3, 3);
        for (double& v : m.vec()) v = rng.normal();
        for (std::size_t k : {1, 2}) {
            worst = std::max(worst, frobenius_gap(rank_project(m, k), exhaustive_rank_fit(m, k)));
        }
    }
    return {worst <= kEckartYoungTol,
            fmt("%zu matrices, k in {1, 2}, max Frobenius distance to the search minimizer %.3g (tol %.0e)", count,
                worst, kEckartYoungTol)};
}

// Shared setup for the reproduction criteria.
struct DeskRun {
    Dictionary dict;
    std::vector<double> trend;
    double train_seconds = 0.0;
};

constexpr std::uint64_t kDeskSeed = 7;

DeskRun desk_training()
{
    const auto t0 = Clock::now();
    const std::vector<GrayImage> scenes = fixtures::training_scenes();
    Rng patch_rng(kDeskSeed);
    const PatchSet data = extract_patches(scenes, 8, 2000, patch_rng);
    Rng held_rng(kDeskSeed + 1);
    const PatchSet held = extract_patches(fixtures::held_out_scene(), 8, 500, held_rng);

    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.samples_per_epoch = 2000;
    cfg.model = OrdinaryModel{0.95};
    cfg.seed = kDeskSeed;

    DeskRun run;
    TrainConfig start = cfg;
    start.epochs = 0;
    run.trend.push_back(
        mean_reproduction_correlation(train(data, 64, start, PatchShape{8, 8}), held, cfg.model));
    run.dict = train(data, 64, cfg, PatchShape{8, 8}, std::nullopt,
                     [&](std::size_t epoch, const Dictionary& dict, const EpochStats&) {
                         if (epoch % 10 == 0) run.trend.push_back(mean_reproduction_correlation(dict, held, cfg.model));
                     });
    run.train_seconds = seconds_since(t0);
    return run;
}

double reproduction_ssim(const Dictionary& dict, const GrayImage& img, double sigma_i, std::size_t iters)
{
    InferenceConfig cfg;
    cfg.sigma_i = sigma_i;
    cfg.max_iters = iters;
    return ssim(reconstruct_image(dict, img, 8, cfg), img);
}

Verdict desk_reproduction()
{
    const auto t0 = Clock::now();
    const DeskRun run = desk_training();
    const GrayImage held = fixtures::held_out_scene();
    const double s75 = reproduction_ssim(run.dict, held, 0.75, 100);
    const double s95 = reproduction_ssim(run.dict, held, 0.95, 100);

    std::size_t rising = 0;
    std::string trend;
    for (std::size_t i = 0; i < run.trend.size(); ++i) {
        trend += fmt(i == 0 ? "%.3f" : " %.3f", run.trend[i]);
        if (i > 0 && run.trend[i] >= run.trend[i - 1]) ++rising;
    }
    const std::size_t steps = run.trend.size() - 1;
    const bool trend_ok = rising >= kTrendFraction * steps;
    const double elapsed = seconds_since(t0);
    return {s75 >= kMinSsim && s75 >= s95 && trend_ok && elapsed < 600.0,
            fmt("SSIM %.4f at sigma_I=0.75 (min %.2f), %.4f at 0.95; held-out correlation every 10 epochs [%s], "
                "%zu/%zu non-decreasing; %.1f s (limit 600 s)",
                s75, kMinSsim, s95, trend.c_str(), rising, steps, elapsed)};
}

Verdict landweber_benefit()
{
    const DeskRun run = desk_training();
    const GrayImage held = fixtures::held_out_scene();
    double many = 0.0;
    double one = 0.0;
    const double sigmas[] = {0.75, 0.95};
    for (double s : sigmas) {
        many += reproduction_ssim(run.dict, held, s, 100) / std::size(sigmas);
        one += reproduction_ssim(run.dict, held, s, 1) / std::size(sigmas);
    }
    return {many >= one,
            fmt("mean SSIM over sigma_I in {0.75, 0.95}: %.4f with 100 iterations, %.4f with 1", many, one)};
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

#ifdef EZDL_HAVE_CLI
int cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "ezdl");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    if (code != 0) std::fprintf(stderr, "ezdl failed (%d): %s", code, err.str().c_str());
    return code;
}

// Runs the tool once into dir and returns the produced artifacts.
std::vector<std::string> cli_artifacts(const std::filesystem::path& dir, const std::filesystem::path& images)
{
    std::filesystem::create_directories(dir);
    const auto p = [&](const char* name) { return (dir / name).string(); };
    std::ofstream(dir / "x.txt") << "0.3 1.7 0.2 0.9 2.4 0.05 1.1\n";
    cli({"train", "--images", images.string(), "--patch", "8", "--atoms", "32", "--patches-per-image", "500",
         "--epochs", "5", "--per-epoch", "500", "--sigma-h", "0.9", "--atom-rank", "1", "--seed", "19", "--out",
         p("dict.bin")});
    cli({"project", "--in", p("x.txt"), "--out", p("p.txt"), "--sigma", "0.7"});
    cli({"corrupt", "--in", (images / "scene0.pgm").string(), "--out", p("noisy.pgm"), "--std", "25", "--seed", "4"});
    cli({"bench-solvers", "--out", p("evals.csv"), "--sizes", "16,256,4096", "--trials", "50", "--seed", "8"});
    std::vector<std::string> out;
    for (const char* name : {"dict.bin", "p.txt", "noisy.pgm", "evals.csv"}) out.push_back(slurp(dir / name));
    return out;
}
#endif

std::vector<std::string> library_artifacts()
{
    std::vector<std::string> out;
    const std::vector<GrayImage> scenes = fixtures::training_scenes();
    Rng patch_rng(19);
    const PatchSet data = extract_patches(scenes, 8, 500, patch_rng);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.samples_per_epoch = 500;
    cfg.model = OrdinaryModel{0.9};
    cfg.atom_rank = 1;
    cfg.seed = 19;
    const std::vector<std::uint8_t> dict = encode_dictionary(train(data, 32, cfg, PatchShape{8, 8}));
    out.emplace_back(dict.begin(), dict.end());

    std::ostringstream proj;
    for (double v : project_signed(std::vector<double>{0.3, 1.7, 0.2, 0.9, 2.4, 0.05, 1.1}, 0.7)) proj << v << '\n';
    out.push_back(proj.str());

    Rng noise_rng(4);
    const std::vector<std::uint8_t> noisy = save_pgm(add_gaussian_noise(scenes[0], 25.0, noise_rng));
    out.emplace_back(noisy.begin(), noisy.end());

    std::ostringstream csv;
    const std::size_t sizes[] = {16, 256, 4096};
    auto records = bench_solvers(sizes, 0.9, 50, 8);
    for (BenchRecord& r : records) r.mean_time_ns = 0.0;  // wall-clock is not part of the contract
    write_csv(csv, records);
    out.push_back(csv.str());
    return out;
}

// Bench CSVs carry wall-clock times; only the evaluation columns must match.
std::string strip_times(const std::string& csv)
{
    std::istringstream in(csv);
    std::string out;
    for (std::string line; std::getline(in, line);) out += line.substr(0, line.rfind(',')) + '\n';
    return out;
}

Verdict determinism()
{
    const char* names[] = {"dictionary", "projection", "noisy image", "eval CSV"};
    std::vector<std::string> first;
    std::vector<std::string> second;
#ifdef EZDL_HAVE_CLI
    const std::filesystem::path root = std::filesystem::current_path() / "acceptance_determinism";
    std::filesystem::remove_all(root);
    const std::filesystem::path images = root / "images";
    std::filesystem::create_directories(images);
    const std::vector<GrayImage> scenes = fixtures::training_scenes();
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        write_pgm_file(images / ("scene" + std::to_string(i) + ".pgm"), scenes[i]);
    }
    first = cli_artifacts(root / "run1", images);
    second = cli_artifacts(root / "run2", images);
    first[3] = strip_times(first[3]);
    second[3] = strip_times(second[3]);
    const char* via = "command-line tool";
#else
    first = library_artifacts();
    second = library_artifacts();
    const char* via = "library";
#endif
    bool same = true;
    std::string detail = fmt("two runs via the %s:", via);
    for (std::size_t i = 0; i < first.size(); ++i) {
        const bool ok = !first[i].empty() && first[i] == second[i];
        same = same && ok;
        detail += fmt(" %s %s (%zu bytes);", names[i], ok ? "identical" : "DIFFERENT", first[i].size());
    }
#ifdef EZDL_HAVE_CLI
    std::filesystem::remove_all(root);
#endif
    return {same, detail};
}

Verdict constraint_guarantees()
{
    const std::vector<GrayImage> scenes = fixtures::training_scenes();
    Rng patch_rng(10010);
    const PatchSet data = extract_patches(scenes, 8, 1000, patch_rng);

    double worst_norm = 0.0;
    double worst_ratio = 0.0;
    std::size_t epochs_checked = 0;
    auto check = [&](bool separable) {
        return [&, separable](std::size_t, const Dictionary& dict, const EpochStats&) {
            ++epochs_checked;
            for (std::size_t j = 0; j < dict.size(); ++j) {
                const auto col = dict.atoms.col(j);
                worst_norm = std::max(worst_norm, std::abs(norm2(col) - 1.0));
                if (separable) {
                    const Svd svd = svd_topk(Matrix::from_vec(col, 8, 8), 2);
                    worst_ratio = std::max(worst_ratio, svd.s[1] / svd.s[0]);
                }
            }
        };
    };

    TrainConfig plain;
    plain.epochs = 10;
    plain.samples_per_epoch = 1000;
    plain.model = OrdinaryModel{0.9};
    plain.seed = 10;
    train(data, 48, plain, PatchShape{8, 8}, std::nullopt, check(false));

    TrainConfig sparse_atoms = plain;
    sparse_atoms.atom_sigma = 0.6;
    sparse_atoms.model = TopographicModel{0.9, build_topography(6, 8)};
    train(data, 48, sparse_atoms, PatchShape{8, 8}, GridShape{6, 8}, check(false));

    TrainConfig rank_one = plain;
    rank_one.atom_rank = 1;
    train(data, 48, rank_one, PatchShape{8, 8}, std::nullopt, check(true));

    return {worst_norm <= kAtomNormTol && worst_ratio <= kSeparableRatio,
            fmt("%zu epochs checked: max |norm - 1| %.3g (tol %.0e); rank-1 atoms max s2/s1 %.3g (tol %.0e)",
                epochs_checked, worst_norm, kAtomNormTol, worst_ratio, kSeparableRatio)};
}

struct Criterion {
    const char* name;
    std::function<Verdict()> run;
};

const Criterion kCriteria[] = {
    {"oracle equivalence", oracle_equivalence},
    {"projection properties", projection_properties},
    {"gradient check", gradient_check},
    {"solver ordering", solver_ordering},
    {"linear scaling", linear_scaling},
    {"best low-rank approximation", eckart_young},
    {"desk-scale reproduction", desk_reproduction},
    {"Landweber iteration benefit", landweber_benefit},
    {"determinism", determinism},
    {"atom constraints", constraint_guarantees},
};

bool run_criterion(std::size_t index)
{
    Verdict v;
    try {
        v = kCriteria[index].run();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s C%zu %s: %s\n", v.pass ? "PASS" : "FAIL", index + 1, kCriteria[index].name, v.detail.c_str());
    std::fflush(stdout);
    return v.pass;
}

} // namespace

int main(int argc, char** argv)
{
    std::vector<std::size_t> selected;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            const long c = std::strtol(argv[++i], nullptr, 10);
            if (c < 1 || c > static_cast<long>(std::size(kCriteria))) {
                std::fprintf(stderr, "criterion must be 1..%zu\n", std::size(kCriteria));
                return 2;
            }
            selected.push_back(static_cast<std::size_t>(c - 1));
        } else {
            std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
            return 2;
        }
    }
    if (selected.empty()) {
        selected.resize(std::size(kCriteria));
        std::iota(selected.begin(), selected.end(), 0);
    }
    bool all = true;
    for (std::size_t c : selected) all = run_criterion(c) && all;
    return all ? 0 : 1;
}
