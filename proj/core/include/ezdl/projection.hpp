#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <ezdl/sparseness.hpp>

namespace ezdl {

/// Root-finding strategy for the zero of the auxiliary function.
enum class Solver { bisection, newton, newton_sq, halley };

inline constexpr Solver kDefaultSolver = Solver::newton_sq;
inline constexpr Solver kAllSolvers[] = {Solver::bisection, Solver::newton, Solver::newton_sq, Solver::halley};

std::string_view to_string(Solver solver) noexcept;
std::optional<Solver> parse_solver(std::string_view name) noexcept;

/// Result of one linear scan at offset alpha.
///
/// psi is ||max(x - alpha, 0)||_1 / ||max(x - alpha, 0)||_2 - lambda1 / lambda2,
/// psi_sq the same ratio squared minus (lambda1 / lambda2)^2. ell1, ell2_sq and
/// d describe the entries strictly above alpha. finished is set when psi
/// changes sign between the two entries of x that bracket alpha, in which case
/// the exact offset follows in closed form from ell1, ell2_sq and d.
struct AuxEvaluation {
    double psi = 0.0;
    double psi_d1 = 0.0;
    double psi_d2 = 0.0;
    double psi_sq = 0.0;
    double psi_sq_d1 = 0.0;
    bool finished = false;
    double ell1 = 0.0;
    double ell2_sq = 0.0;
    std::size_t d = 0;
    std::size_t eval_count_hint = 1;

    // The same sums taken relative to alpha, accumulated during the scan.
    // They avoid cancellation in ell2_sq - 2 alpha ell1 + d alpha^2.
    double alpha = 0.0;
    double ell1_at_alpha = 0.0;
    double ell2_sq_at_alpha = 0.0;

    // Sums of (x_i - pivot) and their squares over the same entries, pivot
    // being the first of them. They give the shift-invariant spread
    // d * ell2_sq - ell1^2 accurately.
    double pivot = 0.0;
    double pivot_sum = 0.0;
    double pivot_sum_sq = 0.0;
};

/// Scalars describing a projection p = beta_star * max(x - alpha_star, 0).
///
/// ell1, ell2_sq and d are the L1 norm, squared L2 norm and size of the
/// surviving entries of the input; grad_apply needs them. solver_evals counts
/// every aux_eval call, including the initial one at alpha = 0.
struct ProjectionOutcome {
    double ell1 = 0.0;
    double ell2_sq = 0.0;
    double spread = 0.0;  // d * ell2_sq - ell1^2, computed without cancellation
    std::size_t d = 0;
    double alpha_star = 0.0;
    double beta_star = 0.0;
    std::size_t solver_evals = 0;
};

/// How the L2 norm of a signed projection is chosen.
struct ScaleMode {
    std::optional<double> lambda2;

    static ScaleMode preserve_l2() noexcept { return {}; }
    static ScaleMode explicit_l2(double lambda2) noexcept { return {lambda2}; }
};

/// One O(n) pass over x >= 0 at offset alpha in [0, max(x)).
/// Throws EmptySupport when alpha >= max(x).
AuxEvaluation aux_eval(std::span<const double> x, const SparsenessTarget& target, double alpha);

/// Projects x >= 0 onto {s >= 0 : ||s||_1 = lambda1, ||s||_2 = lambda2} in place.
///
/// Linear time and no allocation. Throws NonUniqueProjection when the maximum
/// of x is shared by so many entries that the nearest point is a whole orbit,
/// ZeroVector for x = 0, and InvalidTarget for a target with broken norms.
ProjectionOutcome project_nonneg(std::span<double> x, const SparsenessTarget& target,
                                 Solver solver = kDefaultSolver);

/// Nearest point of sparseness sigma_star to an arbitrary real vector.
///
/// Works on |x| and restores the signs of x afterwards; zero entries count as
/// positive. out may alias x. Returns the outcome of the underlying
/// non-negative projection together with the target that was used.
struct SignedProjection {
    ProjectionOutcome outcome;
    SparsenessTarget target;
};

SignedProjection project_signed_into(std::span<const double> x, std::span<double> out, double sigma_star,
                                     ScaleMode scale = ScaleMode::preserve_l2(), Solver solver = kDefaultSolver);

std::vector<double> project_signed(std::span<const double> x, double sigma_star,
                                   ScaleMode scale = ScaleMode::preserve_l2(), Solver solver = kDefaultSolver);

/// Product of the Jacobian of project_nonneg at x with y.
///
/// p is the projection written by project_nonneg, outcome its returned
/// scalars. Only dot products and scaled vector additions on the support are
/// used. Throws DegenerateGradient when the surviving entries are all equal.
std::vector<double> grad_apply(std::span<const double> p, const ProjectionOutcome& outcome,
                               const SparsenessTarget& target, std::span<const double> y);

/// Sort-based reference: checks every candidate support size from n down to 2.
/// O(n log n) time, O(n) space.
std::vector<double> oracle_project_sorted(std::span<const double> x, const SparsenessTarget& target);

/// Support sizes visited by alternating_project, one entry per round.
struct AlternatingTrace {
    std::vector<std::size_t> support_sizes;
    std::size_t rounds = 0;
};

/// Alternating projections onto the hyperplane/hypercircle and the simplex
/// until the support stops shrinking. max_rounds = 0 means n.
/// Throws MaxRoundsExceeded.
std::vector<double> alternating_project(std::span<const double> x, const SparsenessTarget& target,
                                        std::size_t max_rounds = 0, AlternatingTrace* trace = nullptr);

} // namespace ezdl
