#include <ezdl/imaging.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <string>

#include <ezdl/error.hpp>

#include "byte_io.hpp"

namespace ezdl {

namespace {

class PgmHeader {
public:
    explicit PgmHeader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t number()
    {
        skip_space_and_comments();
        std::size_t value = 0;
        std::size_t digits = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            if (value > 100'000'000) throw Error(ErrorKind::MalformedHeader, "pgm: header value too large");
            value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
            ++pos_;
            ++digits;
        }
        if (digits == 0) {
            if (pos_ >= bytes_.size()) throw Error(ErrorKind::TruncatedData, "pgm: header ends early");
            throw Error(ErrorKind::MalformedHeader, "pgm: expected a number in the header");
        }
        return value;
    }

    // The raster starts after exactly one whitespace byte.
    std::size_t raster_start()
    {
        if (pos_ >= bytes_.size()) throw Error(ErrorKind::TruncatedData, "pgm: header ends early");
        if (!std::isspace(bytes_[pos_])) throw Error(ErrorKind::MalformedHeader, "pgm: no whitespace after maxval");
        return pos_ + 1;
    }

private:
    void skip_space_and_comments()
    {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 2;
};

void check_same_shape(const GrayImage& a, const GrayImage& b)
{
    if (a.width != b.width || a.height != b.height) {
        throw Error(ErrorKind::DimensionMismatch, "images differ in size: " + std::to_string(a.width) + "x" +
                                                      std::to_string(a.height) + " vs " + std::to_string(b.width) +
                                                      "x" + std::to_string(b.height));
    }
}

PatchSet gather(std::vector<std::vector<double>>& columns, std::vector<double>& means, std::vector<double>& stds,
                std::size_t dim)
{
    PatchSet out{Matrix(dim, columns.size()), std::move(means), std::move(stds)};
    for (std::size_t j = 0; j < columns.size(); ++j) std::ranges::copy(columns[j], out.data.col(j).begin());
    return out;
}

void extract_into(const GrayImage& img, std::size_t size, std::size_t count, Rng& rng,
                  std::vector<std::vector<double>>& columns, std::vector<double>& means, std::vector<double>& stds)
{
    if (size == 0 || size > std::min(img.width, img.height)) {
        throw Error(ErrorKind::OutOfRange, "patch size " + std::to_string(size) + " does not fit a " +
                                               std::to_string(img.width) + "x" + std::to_string(img.height) +
                                               " image");
    }
    const std::size_t xs = img.width - size + 1;
    const std::size_t ys = img.height - size + 1;
    const std::size_t budget = 100 * count;
    std::vector<double> patch(size * size);
    std::size_t found = 0;
    for (std::size_t draw = 0; draw < budget && found < count; ++draw) {
        const auto x0 = static_cast<std::size_t>(rng.index(xs));
        const auto y0 = static_cast<std::size_t>(rng.index(ys));
        read_block(img, x0, y0, size, patch);
        const auto [mean, std] = normalize_in_place(patch);
        if (std == 0.0) continue;
        columns.push_back(patch);
        means.push_back(mean);
        stds.push_back(std);
        ++found;
    }
    if (found < count) {
        throw Error(ErrorKind::InsufficientVariance, "only " + std::to_string(found) + " of " + std::to_string(count) +
                                                         " patches with nonzero variance after " +
                                                         std::to_string(budget) + " draws");
    }
}

std::array<double, 11> gaussian_window()
{
    std::array<double, 11> w{};
    double total = 0.0;
    for (int i = 0; i < 11; ++i) {
        const double t = i - 5;
        w[static_cast<std::size_t>(i)] = std::exp(-t * t / (2.0 * 1.5 * 1.5));
        total += w[static_cast<std::size_t>(i)];
    }
    for (double& v : w) v /= total;
    return w;
}

// Valid-region separable filtering of a row-major plane.
std::vector<double> filter_valid(const std::vector<double>& plane, std::size_t width, std::size_t height,
                                 const std::array<double, 11>& w)
{
    const std::size_t ow = width - 10;
    const std::size_t oh = height - 10;
    std::vector<double> horizontal(ow * height);
    for (std::size_t y = 0; y < height; ++y) {
        const double* row = plane.data() + y * width;
        for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 11; ++k) acc += w[k] * row[x + k];
            horizontal[y * ow + x] = acc;
        }
    }
    std::vector<double> out(ow * oh);
    for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 11; ++k) acc += w[k] * horizontal[(y + k) * ow + x];
            out[y * ow + x] = acc;
        }
    }
    return out;
}

} // namespace

GrayImage load_pgm(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < 2) throw Error(ErrorKind::TruncatedData, "pgm: file too short");
    if (bytes[0] != 'P' || bytes[1] != '5') throw Error(ErrorKind::MalformedHeader, "pgm: expected magic P5");
    PgmHeader header(bytes);
    const std::size_t width = header.number();
    const std::size_t height = header.number();
    const std::size_t maxval = header.number();
    if (width == 0 || height == 0) throw Error(ErrorKind::MalformedHeader, "pgm: zero image dimension");
    if (maxval != 255) throw Error(ErrorKind::UnsupportedMaxval, "pgm: maxval " + std::to_string(maxval) + " (only 255)");
    const std::size_t start = header.raster_start();
    if (bytes.size() - start < width * height) {
        throw Error(ErrorKind::TruncatedData, "pgm: raster has " + std::to_string(bytes.size() - start) +
                                                  " bytes, expected " + std::to_string(width * height));
    }
    GrayImage img(width, height);
    for (std::size_t i = 0; i < width * height; ++i) img.pixels[i] = bytes[start + i];
    return img;
}

std::vector<std::uint8_t> save_pgm(const GrayImage& img)
{
    const std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(header.size() + img.pixels.size());
    for (double v : img.pixels) {
        const double c = std::isnan(v) ? 0.0 : std::clamp(std::round(v), 0.0, 255.0);
        out.push_back(static_cast<std::uint8_t>(c));
    }
    return out;
}

GrayImage read_pgm_file(const std::filesystem::path& path)
{
    return load_pgm(detail::read_file(path));
}

void write_pgm_file(const std::filesystem::path& path, const GrayImage& img)
{
    detail::write_file(path, save_pgm(img));
}

std::pair<double, double> normalize_in_place(std::span<double> x)
{
    if (x.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.size());
    if (var < kMinPatchVariance) return {mean, 0.0};
    const double std = std::sqrt(var);
    for (double& v : x) v = (v - mean) / std;
    return {mean, std};
}

void read_block(const GrayImage& img, std::size_t x0, std::size_t y0, std::size_t size, std::span<double> out)
{
    for (std::size_t c = 0; c < size; ++c) {
        for (std::size_t r = 0; r < size; ++r) out[c * size + r] = img.at(x0 + c, y0 + r);
    }
}

void write_block(GrayImage& img, std::size_t x0, std::size_t y0, std::size_t size, std::span<const double> in)
{
    for (std::size_t c = 0; c < size; ++c) {
        for (std::size_t r = 0; r < size; ++r) img.at(x0 + c, y0 + r) = in[c * size + r];
    }
}

PatchSet extract_patches(const GrayImage& img, std::size_t size, std::size_t count, Rng& rng)
{
    return extract_patches(std::span<const GrayImage>(&img, 1), size, count, rng);
}

PatchSet extract_patches(std::span<const GrayImage> images, std::size_t size, std::size_t count_per_image, Rng& rng)
{
    if (images.empty() || count_per_image == 0) {
        throw Error(ErrorKind::InsufficientData, "no images or zero patches requested");
    }
    std::vector<std::vector<double>> columns;
    std::vector<double> means;
    std::vector<double> stds;
    columns.reserve(images.size() * count_per_image);
    for (const GrayImage& img : images) extract_into(img, size, count_per_image, rng, columns, means, stds);
    return gather(columns, means, stds, size * size);
}

std::vector<std::uint8_t> encode_patchset(const PatchSet& patches)
{
    detail::ByteWriter w;
    w.magic("PSET");
    w.uint<std::uint32_t>(kPatchSetFormatVersion);
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(patches.dim()));
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(patches.count()));
    for (double v : patches.data.vec()) w.f64(v);
    return w.take();
}

PatchSet decode_patchset(std::span<const std::uint8_t> bytes)
{
    detail::ByteReader r(bytes, "patch set");
    r.expect_magic("PSET");
    const auto version = r.uint<std::uint32_t>();
    if (version != kPatchSetFormatVersion) {
        throw Error(ErrorKind::MalformedHeader, "patch set: unsupported version " + std::to_string(version));
    }
    const auto dim = r.uint<std::uint32_t>();
    const auto count = r.uint<std::uint32_t>();
    if (dim == 0 || count == 0) throw Error(ErrorKind::MalformedHeader, "patch set: empty shape");
    if (r.remaining() / 8 < static_cast<std::size_t>(dim) * count) {
        throw Error(ErrorKind::TruncatedData, "patch set: payload shorter than dim * count values");
    }
    PatchSet out{Matrix(dim, count), std::vector<double>(count, 0.0), std::vector<double>(count, 1.0)};
    for (double& v : out.data.vec()) v = r.f64();
    return out;
}

WhitenModel whiten_fit(const PatchSet& patches, std::size_t k)
{
    const std::size_t d = patches.dim();
    const std::size_t m = patches.count();
    if (k == 0 || k > d || d > m) {
        throw Error(ErrorKind::OutOfRange, "whitening needs 1 <= k <= dim <= count, got k=" + std::to_string(k) +
                                               " dim=" + std::to_string(d) + " count=" + std::to_string(m));
    }
    WhitenModel model;
    model.k = k;
    model.mean.assign(d, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        const auto col = patches.data.col(j);
        for (std::size_t i = 0; i < d; ++i) model.mean[i] += col[i];
    }
    for (double& v : model.mean) v /= static_cast<double>(m);

    Matrix cov(d, d);
    std::vector<double> centered(d);
    for (std::size_t j = 0; j < m; ++j) {
        const auto col = patches.data.col(j);
        for (std::size_t i = 0; i < d; ++i) centered[i] = col[i] - model.mean[i];
        for (std::size_t b = 0; b < d; ++b) {
            const double cb = centered[b];
            auto out = cov.col(b);
            for (std::size_t a = b; a < d; ++a) out[a] += centered[a] * cb;
        }
    }
    for (std::size_t b = 0; b < d; ++b) {
        for (std::size_t a = b; a < d; ++a) {
            cov(a, b) /= static_cast<double>(m);
            cov(b, a) = cov(a, b);
        }
    }

    const SymmetricEigen eig = sym_eigh(cov);
    const double top = eig.values.front();
    if (!(top > 0.0) || eig.values[k - 1] < 1e-12 * top) {
        throw Error(ErrorKind::RankDeficient, "covariance has fewer than " + std::to_string(k) +
                                                  " significant principal components");
    }
    model.forward = Matrix(k, d);
    model.backward = Matrix(d, k);
    for (std::size_t c = 0; c < k; ++c) {
        const double root = std::sqrt(eig.values[c]);
        for (std::size_t i = 0; i < d; ++i) {
            model.forward(c, i) = eig.vectors(i, c) / root;
            model.backward(i, c) = eig.vectors(i, c) * root;
        }
    }
    return model;
}

std::vector<double> whiten_apply(const WhitenModel& model, std::span<const double> patch)
{
    if (patch.size() != model.mean.size()) throw Error(ErrorKind::DimensionMismatch, "whiten_apply: wrong patch length");
    std::vector<double> centered(patch.size());
    for (std::size_t i = 0; i < patch.size(); ++i) centered[i] = patch[i] - model.mean[i];
    std::vector<double> out(model.k);
    multiply(model.forward, centered, out);
    return out;
}

std::vector<double> dewhiten(const WhitenModel& model, std::span<const double> coefficients)
{
    if (coefficients.size() != model.k) throw Error(ErrorKind::DimensionMismatch, "dewhiten: wrong coefficient count");
    std::vector<double> out(model.mean.size());
    multiply(model.backward, coefficients, out);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += model.mean[i];
    return out;
}

PatchSet whiten_patches(const WhitenModel& model, const PatchSet& patches)
{
    std::vector<std::vector<double>> columns;
    std::vector<double> means;
    std::vector<double> stds;
    for (std::size_t j = 0; j < patches.count(); ++j) {
        std::vector<double> w = whiten_apply(model, patches.data.col(j));
        const auto [mean, std] = normalize_in_place(w);
        if (std == 0.0) continue;
        columns.push_back(std::move(w));
        means.push_back(mean);
        stds.push_back(std);
    }
    if (columns.empty()) throw Error(ErrorKind::InsufficientVariance, "every whitened patch has zero variance");
    return gather(columns, means, stds, model.k);
}

double psnr(const GrayImage& a, const GrayImage& b)
{
    check_same_shape(a, b);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double diff = a.pixels[i] - b.pixels[i];
        sum += diff * diff;
    }
    const double mse = sum / static_cast<double>(a.pixels.size());
    if (mse < 1e-12) return kPsnrInfinity;
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double ssim(const GrayImage& a, const GrayImage& b)
{
    check_same_shape(a, b);
    if (a.width < 11 || a.height < 11) throw Error(ErrorKind::TooSmall, "ssim needs images of at least 11x11 pixels");
    constexpr double c1 = (0.01 * 255) * (0.01 * 255);
    constexpr double c2 = (0.03 * 255) * (0.03 * 255);
    const auto w = gaussian_window();
    const std::size_t n = a.pixels.size();
    std::vector<double> aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
        aa[i] = a.pixels[i] * a.pixels[i];
        bb[i] = b.pixels[i] * b.pixels[i];
        ab[i] = a.pixels[i] * b.pixels[i];
    }
    const auto mu_a = filter_valid(a.pixels, a.width, a.height, w);
    const auto mu_b = filter_valid(b.pixels, a.width, a.height, w);
    const auto e_aa = filter_valid(aa, a.width, a.height, w);
    const auto e_bb = filter_valid(bb, a.width, a.height, w);
    const auto e_ab = filter_valid(ab, a.width, a.height, w);
    double total = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i];
        const double mb = mu_b[i];
        const double va = e_aa[i] - ma * ma;
        const double vb = e_bb[i] - mb * mb;
        const double cov = e_ab[i] - ma * mb;
        total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    return total / static_cast<double>(mu_a.size());
}

GrayImage add_gaussian_noise(const GrayImage& img, double stddev, Rng& rng)
{
    if (!(stddev >= 0.0)) throw Error(ErrorKind::OutOfRange, "noise standard deviation must be nonnegative");
    GrayImage out = img;
    if (stddev == 0.0) return out;
    for (double& v : out.pixels) v += stddev * rng.normal();
    return out;
}

} // namespace ezdl
