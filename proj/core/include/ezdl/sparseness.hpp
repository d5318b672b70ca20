#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ezdl {

/// Target sparseness together with the L1/L2 norms that realize it.
///
/// Every vector s >= 0 with ||s||_1 = lambda1 and ||s||_2 = lambda2 has
/// Hoyer sparseness sigma_star. lambda2 is a free scale.
struct SparsenessTarget {
    std::size_t n = 0;
    double sigma_star = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;

    double ratio() const noexcept { return lambda1 / lambda2; }
};

/// Smallest distance of sigma_star from 0 or 1 that is accepted.
inline constexpr double kSigmaBoundaryGuard = 1e-9;

/// Hoyer's sparseness (sqrt(n) - ||x||_1 / ||x||_2) / (sqrt(n) - 1).
///
/// 1 for a single nonzero entry, 0 for a vector with all |x_i| equal.
/// Throws ZeroVector or DimensionTooSmall.
double hoyer_sigma(std::span<const double> x);

/// Inverse of hoyer_sigma on the norm ratio: (sigma*, n) -> lambda1 given lambda2.
double sigma_from_norms(std::size_t n, double lambda1, double lambda2);

/// Builds the target for sigma_star in (0, 1) at scale lambda2.
/// Throws OutOfRange for sigma_star within kSigmaBoundaryGuard of 0 or 1.
SparsenessTarget target_norms(double sigma_star, std::size_t n, double lambda2);

/// Throws InvalidTarget unless the target's invariants hold.
void validate(const SparsenessTarget& target);

/// An explicit member of the constraint set supported on the first d
/// coordinates: d-1 entries psi followed by one entry omega.
/// Throws InfeasibleSupport when d * lambda2^2 <= lambda1^2.
std::vector<double> construct_member(const SparsenessTarget& target, std::size_t d);

} // namespace ezdl
