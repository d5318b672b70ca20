#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <ezdl/dictionary.hpp>
#include <ezdl/imaging.hpp>

namespace ezdl {

/// Projected Landweber inference with bold-driver step control.
struct InferenceConfig {
    double sigma_i = 0.75;
    std::size_t max_iters = 100;
    double eta_init = 1.0;
    double grow = 1.1;
    double shrink = 0.5;
};

/// Throws InvalidConfig.
void validate(const InferenceConfig& cfg);

/// Objective and step size after every iteration of landweber_infer.
struct LandweberTrace {
    std::vector<double> objective;  // corrcoef(W h, x) of the kept iterate
    std::vector<double> step;       // step size to be used next
    std::vector<bool> accepted;
};

/// Starts at project_signed(W^T x, sigma_i) and runs up to max_iters - 1
/// gradient ascent steps on corrcoef(W h, x), projecting every candidate back
/// to sigma_i. A candidate is kept only if it strictly improves the objective;
/// then the step grows, otherwise it shrinks.
std::vector<double> landweber_infer(const Dictionary& dict, std::span<const double> x, const InferenceConfig& cfg,
                                    LandweberTrace* trace = nullptr);

/// Reproduces img from non-overlapping block x block tiles.
///
/// Each tile is normalized, encoded with landweber_infer, decoded as W h and
/// mapped back to the tile's mean and standard deviation. Tiles without
/// variance and the strips left over when block does not divide the image are
/// copied unchanged. The output does not depend on `threads`.
GrayImage reconstruct_image(const Dictionary& dict, const GrayImage& img, std::size_t block,
                            const InferenceConfig& cfg, std::size_t threads = 1);

} // namespace ezdl
