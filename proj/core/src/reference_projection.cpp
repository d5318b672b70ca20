// Reference projections used as oracles and as benchmark baselines. Both are
// deliberately independent of the root-finding path in projection.cpp.

#include <ezdl/projection.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include <ezdl/error.hpp>

namespace ezdl {

namespace {

void check_input(std::span<const double> x, const SparsenessTarget& t)
{
    validate(t);
    if (x.size() != t.n) throw Error(ErrorKind::DimensionMismatch, "vector size differs from target dimension");
    bool any = false;
    for (double v : x) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw Error(ErrorKind::OutOfRange, "non-negative projection needs finite entries >= 0");
        }
        any = any || v > 0.0;
    }
    if (!any) throw Error(ErrorKind::ZeroVector, "cannot project the zero vector");
}

std::vector<double> shrink_and_scale(std::span<const double> x, double alpha, double lambda2)
{
    std::vector<double> p(x.size());
    double rho = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        p[i] = std::max(x[i] - alpha, 0.0);
        rho += p[i] * p[i];
    }
    if (!(rho > 0.0)) return {};
    const double beta = lambda2 / std::sqrt(rho);
    for (double& v : p) v *= beta;
    return p;
}

} // namespace

std::vector<double> oracle_project_sorted(std::span<const double> x, const SparsenessTarget& t)
{
    check_input(x, t);
    const std::size_t n = x.size();
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());

    // Running mean and sum of squared deviations (Welford) over the sorted
    // prefix; d * m2[d] equals d ||x_I||_2^2 - ||x_I||_1^2 without cancellation.
    std::vector<double> mean(n + 1, 0.0), m2(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double delta = sorted[i] - mean[i];
        mean[i + 1] = mean[i] + delta / static_cast<double>(i + 1);
        m2[i + 1] = m2[i] + delta * (sorted[i] - mean[i + 1]);
    }
    const double l1 = t.lambda1, l2 = t.lambda2;
    // Inputs already on the target set have alpha* = 0 exactly, which rounding
    // can push just below the next zero entry.
    const double slack = 1e-12 * sorted[0];

    for (std::size_t d = n; d >= 2; --d) {
        const double dd = static_cast<double>(d);
        const double b = dd * l2 * l2 - l1 * l1;
        if (!(b > 0.0)) continue;
        const double spread = dd * std::max(m2[d], 0.0);
        const double alpha = mean[d] - l1 * std::sqrt(spread / b) / dd;
        if (!(sorted[d - 1] > alpha)) continue;
        if (d < n && !(sorted[d] <= alpha + slack)) continue;
        auto p = shrink_and_scale(x, alpha, l2);
        if (!p.empty()) return p;
    }
    throw Error(ErrorKind::NonUniqueProjection, "no support size yields a unique projection");
}

std::vector<double> alternating_project(std::span<const double> x, const SparsenessTarget& t,
                                        std::size_t max_rounds, AlternatingTrace* trace)
{
    check_input(x, t);
    const std::size_t n = x.size();
    if (max_rounds == 0) max_rounds = n;
    const double l1 = t.lambda1, l2 = t.lambda2;

    // Hyperplane {sum = lambda1}.
    std::vector<double> r(x.begin(), x.end());
    const double shift = (l1 - std::accumulate(x.begin(), x.end(), 0.0)) / static_cast<double>(n);
    for (double& v : r) v += shift;

    std::vector<char> in_support(n, 1);
    std::size_t d = n;
    std::vector<double> s(n, 0.0);
    std::vector<double> scratch;
    scratch.reserve(n);

    for (std::size_t round = 1; round <= max_rounds; ++round) {
        if (trace) {
            trace->support_sizes.push_back(d);
            trace->rounds = round;
        }
        // Hypercircle {sum = lambda1, ||.||_2 = lambda2} within the support.
        const double dd = static_cast<double>(d);
        const double m = l1 / dd;
        const double radius_sq = l2 * l2 - l1 * l1 / dd;
        if (!(radius_sq > 0.0)) {
            throw Error(ErrorKind::NumericalInconsistency, "support became too small for the target ratio");
        }
        double dist_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (in_support[i]) dist_sq += (r[i] - m) * (r[i] - m);
        }
        if (!(dist_sq > 0.0)) {
            throw Error(ErrorKind::NonUniqueProjection, "iterate sits at the hypercircle center");
        }
        const double delta = std::sqrt(radius_sq / dist_sq);
        bool nonneg = true;
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = in_support[i] ? m + delta * (r[i] - m) : 0.0;
            nonneg = nonneg && s[i] >= 0.0;
        }
        if (nonneg) return s;

        // Simplex {s >= 0, sum = lambda1} restricted to the current support.
        scratch.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (in_support[i]) scratch.push_back(s[i]);
        }
        std::sort(scratch.begin(), scratch.end(), std::greater<>());
        double running = 0.0, offset = 0.0;
        for (std::size_t k = 0; k < scratch.size(); ++k) {
            running += scratch[k];
            const double candidate = (running - l1) / static_cast<double>(k + 1);
            if (scratch[k] - candidate > 0.0) offset = candidate;
            else break;
        }
        d = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (in_support[i] && s[i] > offset) {
                r[i] = s[i] - offset;
                ++d;
            } else {
                r[i] = 0.0;
                in_support[i] = 0;
            }
        }
    }
    throw Error(ErrorKind::MaxRoundsExceeded,
                "support still changing after " + std::to_string(max_rounds) + " rounds");
}

} // namespace ezdl
