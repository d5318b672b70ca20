#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include <ezdl/error.hpp>
#include <ezdl/imaging.hpp>

#include "synthetic.hpp"

using namespace ezdl;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& header, std::vector<std::uint8_t> raster)
{
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), raster.begin(), raster.end());
    return out;
}

ErrorKind load_error(const std::vector<std::uint8_t>& bytes)
{
    try {
        load_pgm(bytes);
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "load_pgm accepted malformed input";
    return ErrorKind::Io;
}

} // namespace

TEST(Pgm, LoadTwoByTwo)
{
    const auto bytes = bytes_of("P5\n2 2\n255\n", {0, 85, 170, 255});
    const GrayImage img = load_pgm(bytes);
    EXPECT_EQ(img.width, 2u);
    EXPECT_EQ(img.height, 2u);
    EXPECT_EQ(img.pixels, (std::vector<double>{0, 85, 170, 255}));
    EXPECT_EQ(save_pgm(img), bytes);
}

TEST(Pgm, CommentsAndWhitespace)
{
    const GrayImage img = load_pgm(bytes_of("P5 # made by hand\n3\t1 # width height\n255\r", {1, 2, 3}));
    EXPECT_EQ(img.pixels, (std::vector<double>{1, 2, 3}));
}

TEST(Pgm, RasterMayStartWithWhitespaceByte)
{
    const GrayImage img = load_pgm(bytes_of("P5\n2 1\n255\n", {'\n', ' '}));
    EXPECT_EQ(img.pixels, (std::vector<double>{10, 32}));
}

TEST(Pgm, Errors)
{
    EXPECT_EQ(load_error(bytes_of("P5\n2 2\n65535\n", {0, 0, 0, 0, 0, 0, 0, 0})), ErrorKind::UnsupportedMaxval);
    EXPECT_EQ(load_error(bytes_of("P2\n2 2\n255\n", {0, 0, 0, 0})), ErrorKind::MalformedHeader);
    EXPECT_EQ(load_error(bytes_of("P5\nx 2\n255\n", {0, 0, 0, 0})), ErrorKind::MalformedHeader);
    EXPECT_EQ(load_error(bytes_of("P5\n2 2\n255\n", {0, 0, 0})), ErrorKind::TruncatedData);
    EXPECT_EQ(load_error(bytes_of("P5\n2 2", {})), ErrorKind::TruncatedData);
}

TEST(Pgm, SaveClampsAndRounds)
{
    GrayImage img(4, 1);
    img.pixels = {-3.0, 12.49, 12.5, 300.0};
    const GrayImage back = load_pgm(save_pgm(img));
    EXPECT_EQ(back.pixels, (std::vector<double>{0, 12, 13, 255}));
}

TEST(Patches, NormalizedAndDeterministic)
{
    const GrayImage img = fixtures::synthetic_scene(64, 48, 1);
    Rng a(5);
    Rng b(5);
    const PatchSet p = extract_patches(img, 8, 300, a);
    const PatchSet q = extract_patches(img, 8, 300, b);
    EXPECT_EQ(p.data, q.data);
    ASSERT_EQ(p.dim(), 64u);
    ASSERT_EQ(p.count(), 300u);
    for (std::size_t j = 0; j < p.count(); ++j) {
        double mean = 0.0;
        double var = 0.0;
        for (double v : p.data.col(j)) mean += v;
        mean /= 64;
        for (double v : p.data.col(j)) var += (v - mean) * (v - mean);
        EXPECT_NEAR(mean, 0.0, 1e-9);
        EXPECT_NEAR(var / 64, 1.0, 1e-9);
        EXPECT_GT(p.stds[j], 0.0);
    }
}

TEST(Patches, ColumnMajorLayoutAndRecords)
{
    GrayImage img(2, 2);
    img.pixels = {1, 2, 3, 5};  // row-major: (x0,y0)=1 (x1,y0)=2 (x0,y1)=3 (x1,y1)=5
    Rng rng(0);
    const PatchSet p = extract_patches(img, 2, 1, rng);
    const double mean = 11.0 / 4;
    const double sd = std::sqrt(((1 - mean) * (1 - mean) + (2 - mean) * (2 - mean) + (3 - mean) * (3 - mean) +
                                 (5 - mean) * (5 - mean)) / 4);
    EXPECT_NEAR(p.means[0], mean, 1e-15);
    EXPECT_NEAR(p.stds[0], sd, 1e-15);
    // Column-major within the patch: (0,0), (0,1), (1,0), (1,1) in (x,y).
    EXPECT_NEAR(p.data(1, 0), (3 - mean) / sd, 1e-15);
    EXPECT_NEAR(p.data(2, 0), (2 - mean) / sd, 1e-15);
}

TEST(Patches, ConstantImageHasNoVariance)
{
    const GrayImage flat(16, 16, 128.0);
    Rng rng(1);
    try {
        extract_patches(flat, 4, 10, rng);
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InsufficientVariance);
    }
}

TEST(PatchSetFormat, RoundTrip)
{
    const GrayImage img = fixtures::synthetic_scene(32, 32, 2);
    Rng rng(2);
    const PatchSet p = extract_patches(img, 4, 20, rng);
    const std::vector<std::uint8_t> bytes = encode_patchset(p);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "PSET");
    EXPECT_EQ(bytes.size(), 16u + 16 * 20 * 8);
    EXPECT_EQ(decode_patchset(bytes).data, p.data);
}

TEST(Whitening, IdentityCovarianceAndInverse)
{
    const GrayImage img = fixtures::synthetic_scene(96, 96, 3);
    Rng rng(3);
    const PatchSet p = extract_patches(img, 6, 2000, rng);
    const std::size_t k = 20;
    const WhitenModel model = whiten_fit(p, k);

    const Matrix product = model.forward * model.backward;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) EXPECT_NEAR(product(i, j), i == j ? 1.0 : 0.0, 1e-8);
    }

    for (double v : whiten_apply(model, model.mean)) EXPECT_NEAR(v, 0.0, 1e-12);

    Matrix cov(k, k);
    for (std::size_t j = 0; j < p.count(); ++j) {
        const std::vector<double> c = whiten_apply(model, p.data.col(j));
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < k; ++b) cov(a, b) += c[a] * c[b];
        }
    }
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            EXPECT_NEAR(cov(a, b) / p.count(), a == b ? 1.0 : 0.0, 1e-6);
        }
    }

    // A point in the retained subspace survives the round trip.
    std::vector<double> coeff(k);
    for (std::size_t i = 0; i < k; ++i) coeff[i] = std::sin(1.0 + i);
    const std::vector<double> patch = dewhiten(model, coeff);
    const std::vector<double> again = whiten_apply(model, patch);
    for (std::size_t i = 0; i < k; ++i) EXPECT_NEAR(again[i], coeff[i], 1e-6);

    const PatchSet w = whiten_patches(model, p);
    EXPECT_EQ(w.dim(), k);
}

TEST(Whitening, RankDeficient)
{
    const GrayImage img = fixtures::synthetic_scene(64, 64, 4);
    Rng rng(4);
    const PatchSet p = extract_patches(img, 4, 500, rng);
    // Normalized patches have zero mean, so one direction carries no variance.
    try {
        whiten_fit(p, 16);
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::RankDeficient);
    }
}

TEST(Psnr, ClosedFormAndSentinel)
{
    const GrayImage zeros(8, 8, 0.0);
    const GrayImage ones(8, 8, 1.0);
    EXPECT_NEAR(psnr(zeros, ones), 20 * std::log10(255.0), 1e-12);
    EXPECT_NEAR(psnr(zeros, ones), 48.130803608679, 1e-9);
    EXPECT_EQ(psnr(zeros, zeros), kPsnrInfinity);
    const GrayImage a = fixtures::synthetic_scene(20, 20, 5);
    const GrayImage b = fixtures::synthetic_scene(20, 20, 6);
    EXPECT_EQ(psnr(a, b), psnr(b, a));
    EXPECT_THROW(psnr(a, GrayImage(20, 21)), Error);
}

TEST(Ssim, IdentitySymmetryAndMonotonicity)
{
    const GrayImage img = fixtures::synthetic_scene(128, 128, 7);
    EXPECT_DOUBLE_EQ(ssim(img, img), 1.0);
    Rng rng(8);
    const GrayImage mild = add_gaussian_noise(img, 5.0, rng);
    const GrayImage strong = add_gaussian_noise(img, 25.0, rng);
    EXPECT_DOUBLE_EQ(ssim(img, mild), ssim(mild, img));
    EXPECT_LT(ssim(img, strong), ssim(img, mild));
    EXPECT_LT(ssim(img, mild), 1.0);
}

TEST(Ssim, MatchesDirectWindowSum)
{
    const GrayImage a = fixtures::synthetic_scene(13, 12, 9);
    const GrayImage b = fixtures::synthetic_scene(13, 12, 10);
    double w[11];
    double total = 0.0;
    for (int i = 0; i < 11; ++i) total += w[i] = std::exp(-(i - 5.0) * (i - 5.0) / 4.5);
    double sum = 0.0;
    int windows = 0;
    for (std::size_t y0 = 0; y0 + 11 <= a.height; ++y0) {
        for (std::size_t x0 = 0; x0 + 11 <= a.width; ++x0) {
            double ma = 0, mb = 0, aa = 0, bb = 0, ab = 0;
            for (int dy = 0; dy < 11; ++dy) {
                for (int dx = 0; dx < 11; ++dx) {
                    const double k = w[dy] * w[dx] / (total * total);
                    const double va = a.at(x0 + dx, y0 + dy);
                    const double vb = b.at(x0 + dx, y0 + dy);
                    ma += k * va;
                    mb += k * vb;
                    aa += k * va * va;
                    bb += k * vb * vb;
                    ab += k * va * vb;
                }
            }
            const double c1 = 6.5025;
            const double c2 = 58.5225;
            sum += (2 * ma * mb + c1) * (2 * (ab - ma * mb) + c2) /
                   ((ma * ma + mb * mb + c1) * (aa - ma * ma + bb - mb * mb + c2));
            ++windows;
        }
    }
    EXPECT_EQ(windows, 6);
    EXPECT_NEAR(ssim(a, b), sum / windows, 1e-12);
}

TEST(Ssim, TooSmall)
{
    try {
        ssim(GrayImage(10, 20), GrayImage(10, 20));
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::TooSmall);
    }
}

TEST(Noise, StatisticsAndDeterminism)
{
    const GrayImage img(512, 512, 100.0);
    Rng quiet(1);
    EXPECT_EQ(add_gaussian_noise(img, 0.0, quiet), img);
    Rng a(2);
    Rng b(2);
    const GrayImage noisy = add_gaussian_noise(img, 10.0, a);
    EXPECT_EQ(noisy, add_gaussian_noise(img, 10.0, b));
    double sum = 0.0;
    double sq = 0.0;
    for (double v : noisy.pixels) {
        sum += v - 100.0;
        sq += (v - 100.0) * (v - 100.0);
    }
    const double n = noisy.pixels.size();
    const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
    EXPECT_NEAR(sd, 10.0, 0.2);
}
