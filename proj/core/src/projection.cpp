#include <ezdl/projection.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <ezdl/error.hpp>

namespace ezdl {

std::string_view to_string(Solver solver) noexcept
{
    switch (solver) {
        case Solver::bisection: return "bisection";
        case Solver::newton: return "newton";
        case Solver::newton_sq: return "newton_sq";
        case Solver::halley: return "halley";
    }
    return "unknown";
}

std::optional<Solver> parse_solver(std::string_view name) noexcept
{
    for (Solver s : kAllSolvers) {
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

namespace {

// Ties within this fraction of max(x) are treated as equal.
constexpr double kTieTolerance = 1e-12;
// Relative slack before a negative d*ell2^2 - ell1^2 is reported.
constexpr double kConsistencySlack = 1e-9;
// Root finding normally stops after a handful of evaluations; this only
// guards against a sign test that rounding keeps from ever firing.
constexpr std::size_t kMaxRootIterations = 200;

struct Extremes {
    double max = 0.0;
    double second = 0.0;   // largest entry not tied with max, 0 if none
    std::size_t ties = 0;  // entries tied with max
};

Extremes scan_extremes(std::span<const double> x)
{
    Extremes e;
    double second = -1.0;
    for (double v : x) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw Error(ErrorKind::OutOfRange, "non-negative projection needs finite entries >= 0");
        }
        if (v > e.max) {
            second = e.max;
            e.max = v;
            e.ties = 1;
        } else if (v == e.max) {
            ++e.ties;
        } else if (v > second) {
            second = v;
        }
    }
    e.second = std::max(second, 0.0);
    if (e.max > 0.0 && e.max - e.second <= kTieTolerance * e.max) {
        // Near-ties: recount with the tolerance band.
        const double band = e.max - kTieTolerance * e.max;
        e.ties = 0;
        e.second = 0.0;
        for (double v : x) {
            if (v >= band) ++e.ties;
            else e.second = std::max(e.second, v);
        }
    }
    return e;
}

double spread_of(const AuxEvaluation& a)
{
    const double d = static_cast<double>(a.d);
    const double spread = d * a.pivot_sum_sq - a.pivot_sum * a.pivot_sum;
    if (spread < -kConsistencySlack * d * a.pivot_sum_sq) {
        throw Error(ErrorKind::NumericalInconsistency, "negative spread of the surviving entries");
    }
    return std::max(spread, 0.0);
}

// alpha* - pivot; alpha* itself may be too coarse near the pivot.
double offset_from_pivot(const AuxEvaluation& a, const SparsenessTarget& t)
{
    const double d = static_cast<double>(a.d);
    const double b = d * t.lambda2 * t.lambda2 - t.lambda1 * t.lambda1;
    if (!(b > 0.0)) {
        throw Error(ErrorKind::NumericalInconsistency,
                    "support of size " + std::to_string(a.d) + " cannot reach the target ratio");
    }
    // alpha* = mean of the survivors - lambda1 * sqrt(spread / b) / d.
    return (a.pivot_sum - t.lambda1 * std::sqrt(spread_of(a) / b)) / d;
}

} // namespace

AuxEvaluation aux_eval(std::span<const double> x, const SparsenessTarget& t, double alpha)
{
    double ell1 = 0.0, ell2_sq = 0.0, s1 = 0.0, s2 = 0.0;
    // Sums relative to the first surviving entry; they give the spread of the
    // survivors without cancellation however far alpha is from them.
    double pivot = 0.0, u1 = 0.0, u2 = 0.0;
    std::size_t d = 0;
    double xj = 0.0, dxj = -alpha;
    double xk = std::numeric_limits<double>::infinity();
    double dxk = std::numeric_limits<double>::infinity();

    for (double v : x) {
        const double s = v - alpha;
        if (s > 0.0) {
            if (d == 0) pivot = v;
            const double w = v - pivot;
            ell1 += v;
            ell2_sq += v * v;
            s1 += s;
            s2 += s * s;
            u1 += w;
            u2 += w * w;
            ++d;
            if (s < dxk) {
                xk = v;
                dxk = s;
            }
        } else if (s > dxj) {
            xj = v;
            dxj = s;
        }
    }
    if (d == 0) {
        throw Error(ErrorKind::EmptySupport, "offset " + std::to_string(alpha) + " is not below max(x)");
    }

    AuxEvaluation out;
    out.ell1 = ell1;
    out.ell2_sq = ell2_sq;
    out.d = d;
    out.alpha = alpha;
    out.ell1_at_alpha = s1;
    out.ell2_sq_at_alpha = s2;
    out.pivot = pivot;
    out.pivot_sum = u1;
    out.pivot_sum_sq = u2;

    const double dd = static_cast<double>(d);
    const double ratio = t.ratio();
    const double l2 = std::sqrt(s2);
    const double r = s1 / l2;
    out.psi = r - ratio;
    out.psi_d1 = (r * r - dd) / l2;
    out.psi_d2 = 3.0 * out.psi_d1 * s1 / s2;
    out.psi_sq = r * r - ratio * ratio;
    out.psi_sq_d1 = 2.0 * r * out.psi_d1;

    // With a fixed support, lambda2 * ell1(xi) >= lambda1 * ell2(xi) reduces
    // to ell1(xi) >= 0 and ell1(xi)^2 * b >= lambda1^2 * spread.
    const double spread = std::max(dd * u2 - u1 * u1, 0.0);
    const double b = dd * t.lambda2 * t.lambda2 - t.lambda1 * t.lambda1;
    const auto reaches = [&](double xi) {
        const double l1 = u1 + dd * (pivot - xi);
        return l1 >= 0.0 && l1 * l1 * b >= t.lambda1 * t.lambda1 * spread;
    };
    out.finished = b > 0.0 && reaches(xj) && !reaches(xk);
    return out;
}

ProjectionOutcome project_nonneg(std::span<double> x, const SparsenessTarget& t, Solver solver)
{
    validate(t);
    if (x.size() != t.n) {
        throw Error(ErrorKind::DimensionMismatch,
                    "vector has " + std::to_string(x.size()) + " entries, target expects " + std::to_string(t.n));
    }
    const Extremes ext = scan_extremes(x);
    if (ext.max == 0.0) throw Error(ErrorKind::ZeroVector, "cannot project the zero vector");

    ProjectionOutcome out;
    AuxEvaluation a = aux_eval(x, t, 0.0);
    out.solver_evals = 1;

    if (a.psi <= 0.0) {
        // Sparseness decreases: every entry survives, including zeros.
        const double zeros = static_cast<double>(x.size() - a.d);
        a.pivot_sum -= zeros * a.pivot;
        a.pivot_sum_sq += zeros * a.pivot * a.pivot;
        a.d = x.size();
    } else {
        if (std::sqrt(static_cast<double>(ext.ties)) >= t.ratio()) {
            throw Error(ErrorKind::NonUniqueProjection,
                        std::to_string(ext.ties) + " tied maxima; the nearest point is not unique");
        }
        double lo = 0.0;
        double up = ext.second;
        double alpha = lo + 0.5 * (up - lo);
        a = aux_eval(x, t, alpha);
        ++out.solver_evals;

        std::size_t iter = 0;
        while (!a.finished) {
            if (a.psi > 0.0) lo = alpha;
            else up = alpha;
            if (++iter > kMaxRootIterations || !(up > lo)) break;

            if (solver == Solver::bisection) {
                alpha = lo + 0.5 * (up - lo);
            } else {
                switch (solver) {
                    case Solver::newton:
                        alpha -= a.psi / a.psi_d1;
                        break;
                    case Solver::newton_sq:
                        alpha -= a.psi_sq / a.psi_sq_d1;
                        break;
                    case Solver::halley: {
                        const double h = 1.0 - (a.psi * a.psi_d2) / (2.0 * a.psi_d1 * a.psi_d1);
                        alpha -= a.psi / (std::clamp(h, 0.5, 1.5) * a.psi_d1);
                        break;
                    }
                    case Solver::bisection:
                        break;
                }
                // Also catches NaN from a vanishing derivative.
                if (!(alpha >= lo && alpha <= up)) alpha = lo + 0.5 * (up - lo);
            }
            a = aux_eval(x, t, alpha);
            ++out.solver_evals;
        }
        // A stalled loop leaves alpha within rounding distance of the zero,
        // so its support is the right one.
    }

    const double offset = offset_from_pivot(a, t);
    out.alpha_star = a.pivot + offset;
    out.ell1 = a.ell1;
    out.ell2_sq = a.ell2_sq;
    out.spread = spread_of(a);
    out.d = a.d;

    double rho = 0.0;
    for (double& v : x) {
        const double s = (v - a.pivot) - offset;
        if (s > 0.0) {
            v = s;
            rho += s * s;
        } else {
            v = 0.0;
        }
    }
    if (!(rho > 0.0)) throw Error(ErrorKind::NumericalInconsistency, "projection collapsed to zero");
    out.beta_star = t.lambda2 / std::sqrt(rho);
    for (double& v : x) v *= out.beta_star;
    return out;
}

SignedProjection project_signed_into(std::span<const double> x, std::span<double> out, double sigma_star,
                                     ScaleMode scale, Solver solver)
{
    if (out.size() != x.size()) throw Error(ErrorKind::DimensionMismatch, "output size differs from input");
    if (x.size() < 2) throw Error(ErrorKind::DimensionTooSmall, "need at least 2 entries");

    double amax = 0.0;
    for (double v : x) amax = std::max(amax, std::abs(v));
    if (amax == 0.0) throw Error(ErrorKind::ZeroVector, "cannot project the zero vector");

    double lambda2 = 0.0;
    if (scale.lambda2) {
        lambda2 = *scale.lambda2;
    } else {
        double ss = 0.0;
        for (double v : x) ss += (v / amax) * (v / amax);
        lambda2 = amax * std::sqrt(ss);
    }
    const SparsenessTarget target = target_norms(sigma_star, x.size(), lambda2);

    if (out.data() == x.data()) {
        // In-place call: the signs have to be saved before |x| overwrites them.
        std::vector<signed char> sign(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            sign[i] = x[i] < 0.0 ? -1 : 1;
            out[i] = std::abs(x[i]);
        }
        SignedProjection res{project_nonneg(out, target, solver), target};
        for (std::size_t i = 0; i < out.size(); ++i) out[i] *= sign[i];
        return res;
    }

    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::abs(x[i]);
    SignedProjection res{project_nonneg(out, target, solver), target};
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (x[i] < 0.0) out[i] = -out[i];
    }
    return res;
}

std::vector<double> project_signed(std::span<const double> x, double sigma_star, ScaleMode scale, Solver solver)
{
    std::vector<double> out(x.size());
    project_signed_into(x, out, sigma_star, scale, solver);
    return out;
}

std::vector<double> grad_apply(std::span<const double> p, const ProjectionOutcome& o, const SparsenessTarget& t,
                               std::span<const double> y)
{
    if (p.size() != y.size() || p.size() != t.n) {
        throw Error(ErrorKind::DimensionMismatch, "gradient product needs vectors of the target dimension");
    }
    double sum_y = 0.0, scp_py = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) {
            sum_y += y[i];
            scp_py += p[i] * y[i];
            ++count;
        }
    }
    if (count != o.d) {
        throw Error(ErrorKind::DimensionMismatch, "projection support does not match the recorded support size");
    }
    const double d = static_cast<double>(o.d);
    const double a = o.spread;
    const double b = d * t.lambda2 * t.lambda2 - t.lambda1 * t.lambda1;
    if (!(a > 0.0)) throw Error(ErrorKind::DegenerateGradient, "surviving entries are all equal");

    const double scale = std::sqrt(b / a);
    const double inv = 1.0 / std::sqrt(a * b);
    const double coef_p = inv * (t.lambda1 * sum_y - d * scp_py);
    const double coef_e = inv * (t.lambda1 * scp_py - t.lambda2 * t.lambda2 * sum_y);

    std::vector<double> z(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) z[i] = scale * y[i] + coef_p * p[i] + coef_e;
    }
    return z;
}

} // namespace ezdl
