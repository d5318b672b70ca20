#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <ezdl/dictionary.hpp>
#include <ezdl/imaging.hpp>
#include <ezdl/linalg.hpp>
#include <ezdl/projection.hpp>
#include <ezdl/rng.hpp>

namespace ezdl {

/// Sparse row-stochastic n x n operator (CSR) that averages every grid cell
/// over its circular 3 x 3 neighbourhood.
class Topography {
public:
    Topography() = default;

    std::size_t size() const noexcept { return row_start_.empty() ? 0 : row_start_.size() - 1; }
    GridShape grid() const noexcept { return grid_; }

    /// out = G in. out must not alias in.
    void apply(std::span<const double> in, std::span<double> out) const;
    Matrix dense() const;

    friend Topography build_topography(std::size_t rows, std::size_t cols);

private:
    GridShape grid_;
    std::vector<std::size_t> row_start_;
    std::vector<std::size_t> col_index_;
    std::vector<double> weight_;
};

/// Cells are numbered row-major, i = row * cols + col.
Topography build_topography(std::size_t rows, std::size_t cols);

struct OrdinaryModel {
    double sigma_h = 0.0;
};

struct TopographicModel {
    double sigma_h = 0.0;
    Topography pooling;
};

struct RankTopographicModel {
    double sigma_h = 0.0;
    std::size_t kappa_h = 1;
    std::size_t rows = 0;
    std::size_t cols = 0;
};

using InferenceModel = std::variant<OrdinaryModel, TopographicModel, RankTopographicModel>;

double sparseness_of(const InferenceModel& model) noexcept;

/// Throws InvalidConfig when the model parameters are out of range or do not
/// fit n atoms.
void validate(const InferenceModel& model, std::size_t n);

/// Maps filter responses u to a code word.
///
/// ordinary: project_signed(u); topographic: project_signed(G u);
/// rank-topographic: project_signed(u), reshaped to rows x cols column-major and
/// truncated to rank kappa_h. The L2 norm of the projected vector comes from
/// `scale` (by default the norm of u, or of G u).
///
/// With a generator, a response that has no unique projection is perturbed by
/// uniform jitter of size 1e-10 * max|u| and projected once more, and u = 0 is
/// replaced by jitter of size 1e-10. Without one these cases throw
/// NonUniqueProjection and ZeroResponse.
std::vector<double> infer(std::span<const double> u, const InferenceModel& model,
                          ScaleMode scale = ScaleMode::preserve_l2(), Rng* jitter = nullptr);

/// Pearson correlation of a and x. Throws ZeroVariance.
double corrcoef(std::span<const double> a, std::span<const double> x);

/// Gradient of corrcoef(a, x) with respect to a. Throws ZeroVariance.
std::vector<double> corrcoef_grad(std::span<const double> a, std::span<const double> x);

struct TrainConfig {
    double eta0 = 1.0;
    std::size_t epochs = 1000;
    std::size_t samples_per_epoch = 30000;
    InferenceModel model = OrdinaryModel{0.99};
    std::optional<double> atom_sigma;
    std::optional<std::size_t> atom_rank;
    double noise_std0 = 0.01;
    double noise_decay = 0.95;
    std::uint64_t seed = 0;
};

/// Throws InvalidConfig when cfg does not fit the dictionary.
void validate(const TrainConfig& cfg, const Dictionary& dict);

struct EpochStats {
    std::size_t presented = 0;
    std::size_t skipped = 0;  // samples whose approximation had no variance
};

/// One learning epoch followed by apply_atom_constraints.
///
/// For each of cfg.samples_per_epoch samples x drawn with replacement:
/// h = infer(W^T x) plus Gaussian noise of standard deviation
/// noise_std0 * noise_decay^(epoch - 1) * ||h||_2 / sqrt(n), and
/// W += (eta0 / epoch) * g h^T with g the gradient of corrcoef(W h, x).
/// Only atoms with h_j != 0 are touched. epoch counts from 1.
EpochStats train_epoch(Dictionary& dict, const PatchSet& data, const TrainConfig& cfg, std::size_t epoch, Rng& rng);

/// Per atom: normalize, project to atom_sigma, truncate to atom_rank on the
/// patch shape, normalize again.
void apply_atom_constraints(Dictionary& dict, const TrainConfig& cfg);

/// n distinct samples chosen at random, normalized. Throws InsufficientData.
Dictionary init_dictionary(const PatchSet& data, std::size_t n, Rng& rng);

using EpochObserver = std::function<void(std::size_t epoch, const Dictionary&, const EpochStats&)>;

/// init_dictionary followed by cfg.epochs epochs, all drawn from one
/// generator seeded with cfg.seed.
Dictionary train(const PatchSet& data, std::size_t atoms, const TrainConfig& cfg,
                 std::optional<PatchShape> patch_shape = std::nullopt,
                 std::optional<GridShape> grid_shape = std::nullopt, const EpochObserver& observer = {});

/// Mean of corrcoef(W infer(W^T x), x) over the columns of data, skipping
/// columns with a degenerate approximation.
double mean_reproduction_correlation(const Dictionary& dict, const PatchSet& data, const InferenceModel& model);

} // namespace ezdl
