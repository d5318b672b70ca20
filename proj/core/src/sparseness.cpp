#include <ezdl/sparseness.hpp>

#include <algorithm>
#include <cmath>
#include <string>

#include <ezdl/error.hpp>

namespace ezdl {

double hoyer_sigma(std::span<const double> x)
{
    const std::size_t n = x.size();
    if (n < 2) {
        throw Error(ErrorKind::DimensionTooSmall, "need at least 2 entries, got " + std::to_string(n));
    }
    // Scale by max |x_i| first so very large or small inputs do not overflow.
    double amax = 0.0;
    for (double v : x) amax = std::max(amax, std::abs(v));
    if (amax == 0.0) throw Error(ErrorKind::ZeroVector, "sparseness of the zero vector");

    double l1 = 0.0, l2sq = 0.0;
    for (double v : x) {
        const double s = std::abs(v) / amax;
        l1 += s;
        l2sq += s * s;
    }
    const double rn = std::sqrt(static_cast<double>(n));
    const double sigma = (rn - l1 / std::sqrt(l2sq)) / (rn - 1.0);
    return std::clamp(sigma, 0.0, 1.0);
}

double sigma_from_norms(std::size_t n, double lambda1, double lambda2)
{
    const double rn = std::sqrt(static_cast<double>(n));
    return (rn - lambda1 / lambda2) / (rn - 1.0);
}

SparsenessTarget target_norms(double sigma_star, std::size_t n, double lambda2)
{
    if (n < 2) {
        throw Error(ErrorKind::DimensionTooSmall, "need n >= 2, got " + std::to_string(n));
    }
    if (!(sigma_star >= kSigmaBoundaryGuard && sigma_star <= 1.0 - kSigmaBoundaryGuard)) {
        throw Error(ErrorKind::OutOfRange, "sigma* must lie in (0, 1), got " + std::to_string(sigma_star));
    }
    if (!(lambda2 > 0.0) || !std::isfinite(lambda2)) {
        throw Error(ErrorKind::OutOfRange, "lambda2 must be positive and finite");
    }
    const double rn = std::sqrt(static_cast<double>(n));
    return SparsenessTarget{n, sigma_star, lambda2 * (rn - sigma_star * (rn - 1.0)), lambda2};
}

void validate(const SparsenessTarget& t)
{
    const double rn = std::sqrt(static_cast<double>(t.n));
    const bool ok = t.n >= 2 && t.lambda2 > 0.0 && std::isfinite(t.lambda1) && std::isfinite(t.lambda2)
                 && t.lambda2 < t.lambda1 && t.lambda1 < rn * t.lambda2;
    if (!ok) throw Error(ErrorKind::InvalidTarget, "norm targets violate lambda2 < lambda1 < sqrt(n) lambda2");
}

std::vector<double> construct_member(const SparsenessTarget& target, std::size_t d)
{
    validate(target);
    if (d < 2 || d > target.n) {
        throw Error(ErrorKind::InfeasibleSupport, "support size must lie in [2, n]");
    }
    const double dd = static_cast<double>(d);
    const double l1 = target.lambda1;
    const double l2 = target.lambda2;
    const double disc = dd * l2 * l2 - l1 * l1;
    if (!(disc > 0.0)) {
        throw Error(ErrorKind::InfeasibleSupport,
                    "support of size " + std::to_string(d) + " cannot reach the target ratio");
    }
    const double psi = (l1 - std::sqrt(disc) / std::sqrt(dd - 1.0)) / dd;
    const double omega = l1 - (dd - 1.0) * psi;

    std::vector<double> s(target.n, 0.0);
    for (std::size_t i = 0; i + 1 < d; ++i) s[i] = psi;
    s[d - 1] = omega;
    return s;
}

} // namespace ezdl
