#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include <ezdl/linalg.hpp>
#include <ezdl/rng.hpp>

namespace ezdl {

/// Grayscale raster, row-major. Values are nominally in [0, 255] but are kept
/// unclamped until written to disk.
struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> pixels;

    GrayImage() = default;
    GrayImage(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), pixels(w * h, fill) {}

    double& at(std::size_t x, std::size_t y) noexcept { return pixels[y * width + x]; }
    double at(std::size_t x, std::size_t y) const noexcept { return pixels[y * width + x]; }

    bool operator==(const GrayImage&) const = default;
};

/// Binary PGM ("P5", maxval 255). Header tokens may be separated by any
/// whitespace and '#' comments; exactly one whitespace byte precedes the data.
GrayImage load_pgm(std::span<const std::uint8_t> bytes);
/// Writes "P5\n<w> <h>\n255\n" followed by clamped, rounded pixels.
std::vector<std::uint8_t> save_pgm(const GrayImage& img);

GrayImage read_pgm_file(const std::filesystem::path& path);
void write_pgm_file(const std::filesystem::path& path, const GrayImage& img);

/// A batch of samples stored as the columns of `data`, each normalized to
/// zero mean and unit (population) variance. means/stds record what was
/// removed from each column.
struct PatchSet {
    Matrix data;
    std::vector<double> means;
    std::vector<double> stds;

    std::size_t dim() const noexcept { return data.rows(); }
    std::size_t count() const noexcept { return data.cols(); }
};

/// Patches with a variance below this are discarded or passed through.
inline constexpr double kMinPatchVariance = 1e-12;

/// Subtracts the mean and divides by the population standard deviation in
/// place. Returns {mean, std}; std is 0 and x is left untouched when the
/// variance is below kMinPatchVariance.
std::pair<double, double> normalize_in_place(std::span<double> x);

/// Copies the size x size block with top-left corner (x0, y0) column by column.
void read_block(const GrayImage& img, std::size_t x0, std::size_t y0, std::size_t size, std::span<double> out);
void write_block(GrayImage& img, std::size_t x0, std::size_t y0, std::size_t size, std::span<const double> in);

/// `count` normalized patches at uniformly random positions. Throws
/// InsufficientVariance if 100 * count draws do not yield enough patches.
PatchSet extract_patches(const GrayImage& img, std::size_t size, std::size_t count, Rng& rng);

/// `count_per_image` patches from each image in turn, concatenated.
PatchSet extract_patches(std::span<const GrayImage> images, std::size_t size, std::size_t count_per_image, Rng& rng);

/// "PSET" file: magic | u32 version (1) | u32 dim | u32 count | dim*count f64
/// column-major, little-endian. Normalization records are not stored.
inline constexpr std::uint32_t kPatchSetFormatVersion = 1;
std::vector<std::uint8_t> encode_patchset(const PatchSet& patches);
PatchSet decode_patchset(std::span<const std::uint8_t> bytes);

/// PCA whitening onto the k leading principal components.
struct WhitenModel {
    std::size_t k = 0;
    std::vector<double> mean;
    Matrix forward;   // k x d, diag(lambda)^(-1/2) E^T
    Matrix backward;  // d x k, E diag(lambda)^(1/2)
};

/// Throws RankDeficient if the k-th eigenvalue is below 1e-12 of the largest.
WhitenModel whiten_fit(const PatchSet& patches, std::size_t k);
std::vector<double> whiten_apply(const WhitenModel& model, std::span<const double> patch);
std::vector<double> dewhiten(const WhitenModel& model, std::span<const double> coefficients);
/// Whitens every column and renormalizes the coefficient vectors.
PatchSet whiten_patches(const WhitenModel& model, const PatchSet& patches);

/// Returned by psnr for (near) identical images.
inline constexpr double kPsnrInfinity = std::numeric_limits<double>::infinity();

/// 10 log10(255^2 / MSE) in dB. Throws DimensionMismatch.
double psnr(const GrayImage& a, const GrayImage& b);

/// Mean SSIM over the valid region of an 11 x 11 Gaussian window (std 1.5),
/// C1 = (0.01 * 255)^2, C2 = (0.03 * 255)^2. Throws DimensionMismatch or TooSmall.
double ssim(const GrayImage& a, const GrayImage& b);

/// Adds i.i.d. N(0, std^2) noise to every pixel, row-major order.
GrayImage add_gaussian_noise(const GrayImage& img, double stddev, Rng& rng);

} // namespace ezdl
