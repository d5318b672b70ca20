#include "cli.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <ezdl/bench.hpp>
#include <ezdl/dictionary.hpp>
#include <ezdl/error.hpp>
#include <ezdl/imaging.hpp>
#include <ezdl/projection.hpp>
#include <ezdl/reconstruct.hpp>
#include <ezdl/trainer.hpp>

namespace ezdl::cli {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string format_number(double v)
{
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto end = std::to_chars(buf.data(), buf.data() + buf.size(), v).ptr;
    std::string s(buf.data(), end);
    if (s.find_first_of(".en") == std::string::npos) s += ".0";
    return s;
}

std::vector<double> read_vector(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::vector<double> values;
    std::string token;
    while (in >> token) {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(v)) {
            throw Error(ErrorKind::MalformedHeader, path.string() + ": not a number: " + token);
        }
        values.push_back(v);
    }
    if (values.empty()) throw Error(ErrorKind::InsufficientData, path.string() + ": no values");
    return values;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
}

std::vector<GrayImage> read_image_dir(const fs::path& dir)
{
    if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
    }
    std::ranges::sort(files);
    if (files.empty()) throw Error(ErrorKind::InsufficientData, "no .pgm files in " + dir.string());
    std::vector<GrayImage> images;
    for (const auto& f : files) images.push_back(read_pgm_file(f));
    return images;
}

GridShape parse_grid(const std::string& text)
{
    const auto x = text.find('x');
    std::size_t rows = 0;
    std::size_t cols = 0;
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    if (x == std::string::npos || std::from_chars(begin, begin + x, rows).ptr != begin + x ||
        std::from_chars(begin + x + 1, end, cols).ptr != end || rows == 0 || cols == 0) {
        throw UsageError("--grid expects RxC, got '" + text + "'");
    }
    return {rows, cols};
}

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

// key=value lines, '#' starts a comment. Keys are long option names of the
// chosen subcommand without the leading dashes.
std::vector<std::pair<std::string, std::string>> read_config(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path.string());
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    for (std::size_t number = 1; std::getline(in, line); ++number) {
        const std::string body = trim(std::string_view(line).substr(0, line.find('#')));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path.string() + ":" + std::to_string(number) + ": expected key=value");
        }
        std::string key = trim(std::string_view(body).substr(0, eq));
        if (key.starts_with("--")) key.erase(0, 2);
        entries.emplace_back(std::move(key), trim(std::string_view(body).substr(eq + 1)));
    }
    return entries;
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& flag)
{
    return std::ranges::any_of(args, [&](const std::string& a) { return a == flag || a.starts_with(flag + "="); });
}

// Removes "--config FILE" from args and inserts the file's settings after the
// subcommand name, skipping options that were given explicitly.
void merge_config(CLI::App& app, std::vector<std::string>& args)
{
    std::optional<std::string> path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].starts_with("--config=")) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (!path) return;
    auto sub_pos = std::ranges::find_if(args.begin() + 1, args.end(), [&](const std::string& a) {
        return app.get_subcommand_no_throw(a) != nullptr;
    });
    if (sub_pos == args.end()) throw UsageError("--config needs a subcommand");
    CLI::App* sub = app.get_subcommand(*sub_pos);
    std::vector<std::string> inserted;
    for (const auto& [key, value] : read_config(*path)) {
        const std::string flag = "--" + key;
        if (sub->get_option_no_throw(flag) == nullptr) {
            throw UsageError("unknown key '" + key + "' in " + *path + " for " + sub->get_name());
        }
        if (!given_on_command_line(args, flag)) inserted.push_back(flag + "=" + value);
    }
    args.insert(sub_pos + 1, inserted.begin(), inserted.end());
}

struct ProjectArgs {
    std::string in;
    std::string out;
    double sigma = 0.0;
    std::string solver{to_string(kDefaultSolver)};
    std::optional<double> lambda2;
};

void run_project(const ProjectArgs& a)
{
    const auto solver = parse_solver(a.solver);
    if (!solver) throw UsageError("unknown solver '" + a.solver + "'");
    const std::vector<double> x = read_vector(a.in);
    const ScaleMode scale = a.lambda2 ? ScaleMode::explicit_l2(*a.lambda2) : ScaleMode::preserve_l2();
    const std::vector<double> p = project_signed(x, a.sigma, scale, *solver);
    std::string text;
    for (double v : p) text += format_number(v) + '\n';
    write_text(a.out, text);
}

struct TrainArgs {
    std::string images;
    std::string out;
    std::size_t patch = 8;
    std::size_t atoms = 256;
    std::size_t patches_per_image = 10000;
    double sigma_h = 0.99;
    std::size_t epochs = 1000;
    std::size_t per_epoch = 30000;
    double eta0 = 1.0;
    std::string model = "ordinary";
    std::string grid;
    std::optional<std::size_t> kappa_h;
    std::optional<double> atom_sigma;
    std::optional<std::size_t> atom_rank;
    std::optional<std::size_t> whiten;
    double noise_std0 = 0.01;
    double noise_decay = 0.95;
    std::uint64_t seed = 0;
};

void run_train(const TrainArgs& a)
{
    std::optional<GridShape> grid;
    if (!a.grid.empty()) {
        grid = parse_grid(a.grid);
        if (grid->rows * grid->cols != a.atoms) throw UsageError("--grid does not match --atoms");
    }
    TrainConfig cfg;
    cfg.eta0 = a.eta0;
    cfg.epochs = a.epochs;
    cfg.samples_per_epoch = a.per_epoch;
    cfg.atom_sigma = a.atom_sigma;
    cfg.atom_rank = a.atom_rank;
    cfg.noise_std0 = a.noise_std0;
    cfg.noise_decay = a.noise_decay;
    cfg.seed = a.seed;
    if (a.model == "ordinary") {
        cfg.model = OrdinaryModel{a.sigma_h};
    } else if (a.model == "topographic" || a.model == "rank-topo") {
        if (!grid) throw UsageError("--model " + a.model + " needs --grid");
        if (a.model == "topographic") {
            cfg.model = TopographicModel{a.sigma_h, build_topography(grid->rows, grid->cols)};
        } else {
            cfg.model = RankTopographicModel{a.sigma_h, a.kappa_h.value_or(1), grid->rows, grid->cols};
        }
    } else {
        throw UsageError("unknown model '" + a.model + "'");
    }
    if (a.kappa_h && a.model != "rank-topo") throw UsageError("--kappa-h needs --model rank-topo");
    if (a.whiten && a.atom_rank) throw UsageError("--atom-rank needs pixel atoms and cannot be combined with --whiten");

    const std::vector<GrayImage> images = read_image_dir(a.images);
    Rng rng(a.seed);
    PatchSet patches = extract_patches(images, a.patch, a.patches_per_image, rng);
    std::optional<PatchShape> shape = PatchShape{a.patch, a.patch};
    if (a.whiten) {
        patches = whiten_patches(whiten_fit(patches, *a.whiten), patches);
        shape.reset();
    }
    const Dictionary dict = train(patches, a.atoms, cfg, shape, grid);
    save_dictionary(a.out, dict);
}

struct ReconstructArgs {
    std::string dict;
    std::string in;
    std::string out;
    double sigma_i = 0.75;
    std::size_t iters = 100;
    std::size_t block = 8;
};

void run_reconstruct(const ReconstructArgs& a, std::size_t threads)
{
    const Dictionary dict = load_dictionary(a.dict);
    const GrayImage img = read_pgm_file(a.in);
    InferenceConfig cfg;
    cfg.sigma_i = a.sigma_i;
    cfg.max_iters = a.iters;
    write_pgm_file(a.out, reconstruct_image(dict, img, a.block, cfg, threads));
}

struct CorruptArgs {
    std::string in;
    std::string out;
    double std = 25.0;
    std::uint64_t seed = 0;
};

void run_corrupt(const CorruptArgs& a)
{
    Rng rng(a.seed);
    write_pgm_file(a.out, add_gaussian_noise(read_pgm_file(a.in), a.std, rng));
}

void run_metrics(const std::string& a, const std::string& b, std::ostream& out)
{
    const GrayImage x = read_pgm_file(a);
    const GrayImage y = read_pgm_file(b);
    out << "psnr_db=" << format_number(psnr(x, y)) << " ssim=" << format_number(ssim(x, y)) << '\n';
}

struct BenchArgs {
    std::string out;
    std::vector<std::size_t> sizes;
    bool huge = false;
    std::size_t trials = 100;
    double sigma = 0.9;
    double sigma_pre = 0.5;
    std::vector<std::string> algorithms{"linear", "sorted_oracle", "alternating"};
    std::size_t repetitions = 5;
    std::uint64_t seed = 0;
};

std::vector<std::size_t> bench_sizes(const BenchArgs& a)
{
    std::vector<std::size_t> sizes = a.sizes;
    if (sizes.empty()) sizes.assign(std::begin(kDefaultBenchSizes), std::end(kDefaultBenchSizes));
    if (a.huge) sizes.push_back(std::size_t{1} << 30);
    return sizes;
}

void write_records(const std::string& path, const std::vector<BenchRecord>& records)
{
    std::ostringstream csv;
    write_csv(csv, records);
    write_text(path, csv.str());
}

void add_bench_common(CLI::App* sub, BenchArgs& a)
{
    sub->add_option("--out", a.out, "CSV output")->required();
    sub->add_option("--sizes", a.sizes, "problem dimensions (default 2^4 .. 2^24)")->delimiter(',')
        ->check(CLI::Range(std::size_t{4}, std::size_t{1} << 31));
    sub->add_flag("--huge", a.huge, "also run n = 2^30 (needs about 8 GiB per vector)");
    sub->add_option("--trials", a.trials, "random vectors per dimension")->check(CLI::PositiveNumber);
    sub->add_option("--sigma", a.sigma, "target sparseness")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--seed", a.seed, "random seed");
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Sparseness-constrained projections and dictionary learning"};
    app.name("ezdl");
    app.require_subcommand(1);
    std::size_t threads = 1;
    app.add_option("--threads", threads, "worker threads for block reconstruction")->check(CLI::PositiveNumber);
    // Handled by merge_config; declared for --help.
    std::string config_path;
    app.add_option("--config", config_path, "key=value file with defaults for the subcommand");

    ProjectArgs project;
    auto* project_cmd = app.add_subcommand("project", "project a text vector to a sparseness degree");
    project_cmd->add_option("--in", project.in, "input vector, whitespace separated")->required();
    project_cmd->add_option("--out", project.out, "output vector, one value per line")->required();
    project_cmd->add_option("--sigma", project.sigma, "target sparseness in (0, 1)")->required()
        ->check(CLI::Range(0.0, 1.0));
    project_cmd->add_option("--solver", project.solver, "bisection, newton, newton_sq or halley");
    project_cmd->add_option("--lambda2", project.lambda2, "L2 norm of the result (default: that of the input)")
        ->check(CLI::PositiveNumber);

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "learn a dictionary from the .pgm images in a directory");
    train_cmd->add_option("--images", train_args.images, "directory of 8-bit binary PGM images")->required();
    train_cmd->add_option("--out", train_args.out, "dictionary file")->required();
    train_cmd->add_option("--patch", train_args.patch, "patch edge length")->check(CLI::PositiveNumber);
    train_cmd->add_option("--atoms", train_args.atoms, "number of atoms")->check(CLI::Range(2, 65535));
    train_cmd->add_option("--patches-per-image", train_args.patches_per_image, "training patches per image")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--sigma-h", train_args.sigma_h, "code word sparseness")->check(CLI::Range(0.0, 1.0));
    train_cmd->add_option("--epochs", train_args.epochs, "learning epochs");
    train_cmd->add_option("--per-epoch", train_args.per_epoch, "samples per epoch");
    train_cmd->add_option("--eta0", train_args.eta0, "initial step size")->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--model", train_args.model, "ordinary, topographic or rank-topo")
        ->check(CLI::IsMember({"ordinary", "topographic", "rank-topo"}));
    train_cmd->add_option("--grid", train_args.grid, "atom grid RxC");
    train_cmd->add_option("--kappa-h", train_args.kappa_h, "code word rank for rank-topo")->check(CLI::PositiveNumber);
    train_cmd->add_option("--atom-sigma", train_args.atom_sigma, "atom sparseness")->check(CLI::Range(0.0, 1.0));
    train_cmd->add_option("--atom-rank", train_args.atom_rank, "atom rank")->check(CLI::PositiveNumber);
    train_cmd->add_option("--whiten", train_args.whiten, "train on this many whitened principal components")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--noise-std", train_args.noise_std0, "initial relative code word noise")
        ->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--noise-decay", train_args.noise_decay, "noise decay per epoch")
        ->check(CLI::Range(0.0, 1.0));
    train_cmd->add_option("--seed", train_args.seed, "random seed");

    ReconstructArgs rec;
    auto* rec_cmd = app.add_subcommand("reconstruct", "reproduce an image block by block from a dictionary");
    rec_cmd->add_option("--dict", rec.dict, "dictionary file")->required();
    rec_cmd->add_option("--in", rec.in, "input PGM")->required();
    rec_cmd->add_option("--out", rec.out, "output PGM")->required();
    rec_cmd->add_option("--sigma-i", rec.sigma_i, "inference sparseness")->check(CLI::Range(0.0, 1.0));
    rec_cmd->add_option("--iters", rec.iters, "Landweber iterations")->check(CLI::PositiveNumber);
    rec_cmd->add_option("--block", rec.block, "block edge length")->check(CLI::PositiveNumber);

    CorruptArgs corrupt;
    auto* corrupt_cmd = app.add_subcommand("corrupt", "add white Gaussian noise to an image");
    corrupt_cmd->add_option("--in", corrupt.in, "input PGM")->required();
    corrupt_cmd->add_option("--out", corrupt.out, "output PGM")->required();
    corrupt_cmd->add_option("--std", corrupt.std, "noise standard deviation")->check(CLI::NonNegativeNumber);
    corrupt_cmd->add_option("--seed", corrupt.seed, "random seed");

    std::string metric_a;
    std::string metric_b;
    auto* metrics_cmd = app.add_subcommand("metrics", "print PSNR and SSIM of two images");
    metrics_cmd->add_option("--a", metric_a, "first PGM")->required();
    metrics_cmd->add_option("--b", metric_b, "second PGM")->required();

    BenchArgs solvers;
    solvers.trials = 1000;
    auto* solvers_cmd = app.add_subcommand("bench-solvers", "count auxiliary function evaluations per solver");
    add_bench_common(solvers_cmd, solvers);

    BenchArgs timing;
    timing.trials = 10;
    auto* timing_cmd = app.add_subcommand("bench-timing", "time the projection algorithms");
    add_bench_common(timing_cmd, timing);
    timing_cmd->add_option("--sigma-pre", timing.sigma_pre, "sparseness of the inputs")->check(CLI::Range(0.0, 1.0));
    timing_cmd->add_option("--algorithms", timing.algorithms, "linear, sorted_oracle, alternating")->delimiter(',')
        ->check(CLI::IsMember({"linear", "sorted_oracle", "alternating"}));
    timing_cmd->add_option("--reps", timing.repetitions, "repetitions per trial (median)")->check(CLI::PositiveNumber);

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    std::vector<std::string> args(argv, argv + argc);
    try {
        merge_config(app, args);
    } catch (const UsageError& e) {
        err << "ezdl: " << e.what() << '\n';
        return kExitUsage;
    }
    std::vector<const char*> merged;
    for (const auto& a : args) merged.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(merged.size()), merged.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "ezdl: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*project_cmd) {
            run_project(project);
        } else if (*train_cmd) {
            run_train(train_args);
        } else if (*rec_cmd) {
            run_reconstruct(rec, threads);
        } else if (*corrupt_cmd) {
            run_corrupt(corrupt);
        } else if (*metrics_cmd) {
            run_metrics(metric_a, metric_b, out);
        } else if (*solvers_cmd) {
            write_records(solvers.out, bench_solvers(bench_sizes(solvers), solvers.sigma, solvers.trials, solvers.seed));
        } else if (*timing_cmd) {
            std::vector<Algorithm> algorithms;
            for (const auto& name : timing.algorithms) algorithms.push_back(*parse_algorithm(name));
            write_records(timing.out, bench_timing(bench_sizes(timing), algorithms, timing.trials, timing.sigma_pre,
                                                   timing.sigma, timing.seed, timing.repetitions));
        }
    } catch (const UsageError& e) {
        err << "ezdl: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "ezdl: " << e.what() << '\n';
        return e.kind() == ErrorKind::InvalidConfig ? kExitUsage : kExitData;
    } catch (const std::exception& e) {
        err << "ezdl: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

} // namespace ezdl::cli
