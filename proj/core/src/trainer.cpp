#include <ezdl/trainer.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <ezdl/error.hpp>
#include <ezdl/sparseness.hpp>

namespace ezdl {

namespace {

[[noreturn]] void bad_config(const std::string& what)
{
    throw Error(ErrorKind::InvalidConfig, what);
}

bool open_unit(double v) noexcept
{
    return v > 0.0 && v < 1.0;
}

struct Centered {
    double mean_a = 0.0;
    double mean_x = 0.0;
    double lambda = 0.0;  // centered squared norm of a
    double mu = 0.0;      // centered squared norm of x
    double cross = 0.0;
};

Centered centered_moments(std::span<const double> a, std::span<const double> x)
{
    if (a.size() != x.size() || a.empty()) {
        throw Error(ErrorKind::DimensionMismatch, "corrcoef: vectors of different length");
    }
    const auto d = static_cast<double>(a.size());
    Centered c;
    double sq_a = 0.0;
    double sq_x = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        c.mean_a += a[i];
        c.mean_x += x[i];
        sq_a += a[i] * a[i];
        sq_x += x[i] * x[i];
    }
    c.mean_a /= d;
    c.mean_x /= d;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - c.mean_a;
        const double dx = x[i] - c.mean_x;
        c.lambda += da * da;
        c.mu += dx * dx;
        c.cross += da * dx;
    }
    if (!(c.lambda > 1e-14 * sq_a) || !(c.mu > 1e-14 * sq_x)) {
        throw Error(ErrorKind::ZeroVariance, "corrcoef: a vector has no variance");
    }
    return c;
}

std::vector<double> project_response(std::span<const double> v, const InferenceModel& model, ScaleMode scale)
{
    std::vector<double> h = project_signed(v, sparseness_of(model), scale);
    if (const auto* rank = std::get_if<RankTopographicModel>(&model)) {
        const Matrix grid = rank_project(Matrix::from_vec(h, rank->rows, rank->cols), rank->kappa_h);
        std::ranges::copy(grid.vec(), h.begin());
    }
    return h;
}

std::vector<double> pooled(std::span<const double> u, const InferenceModel& model)
{
    std::vector<double> v(u.size());
    if (const auto* topo = std::get_if<TopographicModel>(&model)) {
        topo->pooling.apply(u, v);
    } else {
        std::ranges::copy(u, v.begin());
    }
    return v;
}

void normalize_column(std::span<double> col, std::size_t j)
{
    const double norm = norm2(col);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw Error(ErrorKind::NumericalInconsistency, "atom " + std::to_string(j) + " has no usable norm");
    }
    for (double& v : col) v /= norm;
}

} // namespace

void Topography::apply(std::span<const double> in, std::span<double> out) const
{
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) acc += weight_[k] * in[col_index_[k]];
        out[i] = acc;
    }
}

Matrix Topography::dense() const
{
    const std::size_t n = size();
    Matrix g(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) g(i, col_index_[k]) = weight_[k];
    }
    return g;
}

Topography build_topography(std::size_t rows, std::size_t cols)
{
    if (rows == 0 || cols == 0) bad_config("topography grid needs at least one row and column");
    Topography g;
    g.grid_ = {rows, cols};
    const std::size_t n = rows * cols;
    g.row_start_.reserve(n + 1);
    g.row_start_.push_back(0);
    std::vector<int> hits(n, 0);
    std::vector<std::size_t> touched;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            touched.clear();
            for (std::size_t dr = rows - 1; dr < rows + 2; ++dr) {
                for (std::size_t dc = cols - 1; dc < cols + 2; ++dc) {
                    const std::size_t j = ((r + dr) % rows) * cols + (c + dc) % cols;
                    if (hits[j]++ == 0) touched.push_back(j);
                }
            }
            std::ranges::sort(touched);
            for (std::size_t j : touched) {
                g.col_index_.push_back(j);
                g.weight_.push_back(hits[j] / 9.0);
                hits[j] = 0;
            }
            g.row_start_.push_back(g.col_index_.size());
        }
    }
    return g;
}

double sparseness_of(const InferenceModel& model) noexcept
{
    return std::visit([](const auto& m) { return m.sigma_h; }, model);
}

void validate(const InferenceModel& model, std::size_t n)
{
    if (!open_unit(sparseness_of(model))) bad_config("sigma_h must lie in (0, 1)");
    if (n < 2) bad_config("inference needs at least two atoms");
    if (const auto* topo = std::get_if<TopographicModel>(&model)) {
        if (topo->pooling.size() != n) bad_config("topography size does not match the atom count");
    }
    if (const auto* rank = std::get_if<RankTopographicModel>(&model)) {
        if (rank->rows * rank->cols != n) bad_config("grid shape does not match the atom count");
        if (rank->kappa_h < 1 || rank->kappa_h > std::min(rank->rows, rank->cols)) {
            bad_config("kappa_h must lie in [1, min(rows, cols)]");
        }
    }
}

std::vector<double> infer(std::span<const double> u, const InferenceModel& model, ScaleMode scale, Rng* jitter)
{
    std::vector<double> v = pooled(u, model);
    double peak = 0.0;
    for (double x : v) peak = std::max(peak, std::abs(x));
    if (peak == 0.0) {
        if (jitter == nullptr) throw Error(ErrorKind::ZeroResponse, "all filter responses are zero");
        for (double& x : v) x = jitter->uniform(-1e-10, 1e-10);
        return project_response(v, model, scale);
    }
    try {
        return project_response(v, model, scale);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NonUniqueProjection || jitter == nullptr) throw;
    }
    const double size = 1e-10 * peak;
    for (double& x : v) x += jitter->uniform(-size, size);
    return project_response(v, model, scale);
}

double corrcoef(std::span<const double> a, std::span<const double> x)
{
    const Centered c = centered_moments(a, x);
    return std::clamp(c.cross / std::sqrt(c.lambda * c.mu), -1.0, 1.0);
}

std::vector<double> corrcoef_grad(std::span<const double> a, std::span<const double> x)
{
    const Centered c = centered_moments(a, x);
    const double inv = 1.0 / std::sqrt(c.lambda * c.mu);
    const double rho_over_lambda = c.cross * inv / c.lambda;
    std::vector<double> g(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        g[i] = inv * (x[i] - c.mean_x) - rho_over_lambda * (a[i] - c.mean_a);
    }
    return g;
}

void validate(const TrainConfig& cfg, const Dictionary& dict)
{
    dict.check();
    if (!(cfg.eta0 >= 0.0) || !std::isfinite(cfg.eta0)) bad_config("eta0 must be a nonnegative number");
    if (!(cfg.noise_std0 >= 0.0)) bad_config("noise_std0 must be nonnegative");
    if (!(cfg.noise_decay > 0.0 && cfg.noise_decay <= 1.0)) bad_config("noise_decay must lie in (0, 1]");
    validate(cfg.model, dict.size());
    if (cfg.atom_sigma && !open_unit(*cfg.atom_sigma)) bad_config("atom_sigma must lie in (0, 1)");
    if (cfg.atom_sigma && dict.dim() < 2) bad_config("atom_sigma needs atoms of dimension two or more");
    if (cfg.atom_rank) {
        if (!dict.patch_shape) bad_config("atom_rank needs a patch shape");
        const auto [ph, pw] = *dict.patch_shape;
        if (*cfg.atom_rank < 1 || *cfg.atom_rank > std::min(ph, pw)) bad_config("atom_rank must lie in [1, min(p_h, p_w)]");
    }
}

EpochStats train_epoch(Dictionary& dict, const PatchSet& data, const TrainConfig& cfg, std::size_t epoch, Rng& rng)
{
    validate(cfg, dict);
    if (epoch == 0) bad_config("epochs are counted from 1");
    if (data.dim() != dict.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "samples have dimension " + std::to_string(data.dim()) +
                                                      ", atoms " + std::to_string(dict.dim()));
    }
    if (data.count() == 0) throw Error(ErrorKind::InsufficientData, "no training samples");

    const std::size_t n = dict.size();
    const double eta = cfg.eta0 / static_cast<double>(epoch);
    const double noise_scale = cfg.noise_std0 * std::pow(cfg.noise_decay, static_cast<double>(epoch - 1)) /
                               std::sqrt(static_cast<double>(n));
    Matrix& w = dict.atoms;
    std::vector<double> u(n);
    std::vector<double> approx(dict.dim());
    EpochStats stats;
    for (std::size_t s = 0; s < cfg.samples_per_epoch; ++s) {
        const auto x = data.data.col(static_cast<std::size_t>(rng.index(data.count())));
        multiply_transposed(w, x, u);
        std::vector<double> h = infer(u, cfg.model, ScaleMode::preserve_l2(), &rng);
        if (noise_scale > 0.0) {
            const double sd = noise_scale * norm2(h);
            for (double& v : h) v += sd * rng.normal();
        }
        multiply(w, h, approx);
        ++stats.presented;
        std::vector<double> g;
        try {
            g = corrcoef_grad(approx, x);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ZeroVariance) throw;
            ++stats.skipped;
            continue;
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (h[j] == 0.0) continue;
            const double step = eta * h[j];
            auto col = w.col(j);
            for (std::size_t i = 0; i < col.size(); ++i) col[i] += step * g[i];
        }
    }
    apply_atom_constraints(dict, cfg);
    return stats;
}

void apply_atom_constraints(Dictionary& dict, const TrainConfig& cfg)
{
    if (cfg.atom_rank && !dict.patch_shape) bad_config("atom_rank needs a patch shape");
    for (std::size_t j = 0; j < dict.size(); ++j) {
        auto col = dict.atoms.col(j);
        normalize_column(col, j);
        if (cfg.atom_sigma) project_signed_into(col, col, *cfg.atom_sigma);
        if (cfg.atom_rank) {
            const auto [ph, pw] = *dict.patch_shape;
            const Matrix low = rank_project(Matrix::from_vec(col, ph, pw), *cfg.atom_rank);
            std::ranges::copy(low.vec(), col.begin());
        }
        normalize_column(col, j);
    }
}

Dictionary init_dictionary(const PatchSet& data, std::size_t n, Rng& rng)
{
    if (n == 0) bad_config("a dictionary needs at least one atom");
    if (data.count() < n) {
        throw Error(ErrorKind::InsufficientData, "need " + std::to_string(n) + " samples to seed the atoms, have " +
                                                     std::to_string(data.count()));
    }
    std::vector<std::size_t> order(data.count());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Dictionary dict{Matrix(data.dim(), n), std::nullopt, std::nullopt};
    for (std::size_t j = 0; j < n; ++j) {
        const auto pick = j + static_cast<std::size_t>(rng.index(order.size() - j));
        std::swap(order[j], order[pick]);
        auto col = dict.atoms.col(j);
        std::ranges::copy(data.data.col(order[j]), col.begin());
        normalize_column(col, j);
    }
    return dict;
}

Dictionary train(const PatchSet& data, std::size_t atoms, const TrainConfig& cfg, std::optional<PatchShape> patch_shape,
                 std::optional<GridShape> grid_shape, const EpochObserver& observer)
{
    Rng rng(cfg.seed);
    Dictionary dict = init_dictionary(data, atoms, rng);
    dict.patch_shape = patch_shape;
    dict.grid_shape = grid_shape;
    validate(cfg, dict);
    apply_atom_constraints(dict, cfg);
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const EpochStats stats = train_epoch(dict, data, cfg, epoch, rng);
        if (observer) observer(epoch, dict, stats);
    }
    return dict;
}

double mean_reproduction_correlation(const Dictionary& dict, const PatchSet& data, const InferenceModel& model)
{
    std::vector<double> u(dict.size());
    std::vector<double> approx(dict.dim());
    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t j = 0; j < data.count(); ++j) {
        const auto x = data.data.col(j);
        multiply_transposed(dict.atoms, x, u);
        try {
            const std::vector<double> h = infer(u, model);
            multiply(dict.atoms, h, approx);
            total += corrcoef(approx, x);
            ++used;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ZeroVariance && e.kind() != ErrorKind::ZeroResponse &&
                e.kind() != ErrorKind::NonUniqueProjection) {
                throw;
            }
        }
    }
    return used == 0 ? 0.0 : total / static_cast<double>(used);
}

} // namespace ezdl
