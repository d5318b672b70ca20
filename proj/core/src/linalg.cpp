#include <ezdl/linalg.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <ezdl/error.hpp>

namespace ezdl {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill)
{
    if (rows == 0 || cols == 0) throw Error(ErrorKind::OutOfRange, "matrix dimensions must be positive");
}

Matrix Matrix::identity(std::size_t n)
{
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows)
{
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) throw Error(ErrorKind::DimensionMismatch, "ragged matrix literal");
        std::size_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

Matrix Matrix::from_vec(std::span<const double> values, std::size_t rows, std::size_t cols)
{
    if (values.size() != rows * cols) {
        throw Error(ErrorKind::DimensionMismatch,
                    "cannot reshape " + std::to_string(values.size()) + " values to " + std::to_string(rows) + "x"
                        + std::to_string(cols));
    }
    Matrix m(rows, cols);
    std::copy(values.begin(), values.end(), m.data_.begin());
    return m;
}

Matrix Matrix::transpose() const
{
    Matrix t(cols_, rows_);
    for (std::size_t j = 0; j < cols_; ++j)
        for (std::size_t i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
    return t;
}

double Matrix::frobenius_norm() const noexcept { return norm2(data_); }

Matrix operator*(const Matrix& a, const Matrix& b)
{
    if (a.cols() != b.rows()) throw Error(ErrorKind::DimensionMismatch, "inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double bkj = b(k, j);
            if (bkj == 0.0) continue;
            for (std::size_t i = 0; i < a.rows(); ++i) c(i, j) += a(i, k) * bkj;
        }
    return c;
}

Matrix operator-(const Matrix& a, const Matrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorKind::DimensionMismatch, "shapes differ");
    Matrix c = a;
    auto cv = c.vec();
    auto bv = b.vec();
    for (std::size_t i = 0; i < cv.size(); ++i) cv[i] -= bv[i];
    return c;
}

void multiply(const Matrix& a, std::span<const double> x, std::span<double> y)
{
    if (x.size() != a.cols() || y.size() != a.rows()) throw Error(ErrorKind::DimensionMismatch, "A x: bad sizes");
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t j = 0; j < a.cols(); ++j) {
        const double xj = x[j];
        if (xj == 0.0) continue;
        const auto c = a.col(j);
        for (std::size_t i = 0; i < c.size(); ++i) y[i] += c[i] * xj;
    }
}

void multiply_transposed(const Matrix& a, std::span<const double> x, std::span<double> y)
{
    if (x.size() != a.rows() || y.size() != a.cols()) throw Error(ErrorKind::DimensionMismatch, "A^T x: bad sizes");
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] = dot(a.col(j), x);
}

double dot(std::span<const double> a, std::span<const double> b) noexcept
{
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(std::span<const double> a) noexcept
{
    double amax = 0.0;
    for (double v : a) amax = std::max(amax, std::abs(v));
    if (amax == 0.0 || !std::isfinite(amax)) return amax;
    double ss = 0.0;
    for (double v : a) ss += (v / amax) * (v / amax);
    return amax * std::sqrt(ss);
}

namespace {

// Flips column j of `primary` (and of `partner`) so that the first entry of
// primary's column that is clearly nonzero is positive.
void canonical_sign(Matrix& primary, Matrix& partner, std::size_t j)
{
    const auto c = primary.col(j);
    double amax = 0.0;
    for (double v : c) amax = std::max(amax, std::abs(v));
    for (double v : c) {
        if (std::abs(v) > 1e-12 * amax) {
            if (v < 0.0) {
                for (double& w : primary.col(j)) w = -w;
                for (double& w : partner.col(j)) w = -w;
            }
            return;
        }
    }
}

// Replaces column j of u by a unit vector orthogonal to columns [0, j).
void complete_basis(Matrix& u, std::size_t j)
{
    const std::size_t m = u.rows();
    for (std::size_t e = 0; e < m; ++e) {
        std::vector<double> cand(m, 0.0);
        cand[e] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < j; ++k) {
                const double proj = dot(u.col(k), cand);
                const auto uk = u.col(k);
                for (std::size_t i = 0; i < m; ++i) cand[i] -= proj * uk[i];
            }
        }
        const double nrm = norm2(cand);
        if (nrm > 1e-6) {
            auto uj = u.col(j);
            for (std::size_t i = 0; i < m; ++i) uj[i] = cand[i] / nrm;
            return;
        }
    }
}

// Full thin SVD of a tall (rows >= cols) matrix.
Svd jacobi_svd_tall(Matrix a)
{
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    Matrix v = Matrix::identity(n);
    // Columns below this energy are rounding noise; rotating them against
    // each other never settles.
    const double fro = a.frobenius_norm();
    const double negligible = 1e-30 * fro * fro;

    bool converged = n < 2;
    for (int sweep = 0; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
        converged = true;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                auto ap = a.col(p);
                auto aq = a.col(q);
                const double alpha = dot(ap, ap);
                const double beta = dot(aq, aq);
                const double gamma = dot(ap, aq);
                if (alpha <= negligible || beta <= negligible) continue;
                if (std::abs(gamma) <= kJacobiTolerance * std::sqrt(alpha * beta)) continue;
                converged = false;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double x = ap[i], y = aq[i];
                    ap[i] = c * x - s * y;
                    aq[i] = s * x + c * y;
                }
                auto vp = v.col(p);
                auto vq = v.col(q);
                for (std::size_t i = 0; i < n; ++i) {
                    const double x = vp[i], y = vq[i];
                    vp[i] = c * x - s * y;
                    vq[i] = s * x + c * y;
                }
            }
        }
    }
    if (!converged) {
        throw Error(ErrorKind::ConvergenceFailure,
                    "Jacobi SVD did not converge in " + std::to_string(kMaxJacobiSweeps) + " sweeps");
    }

    std::vector<double> sv(n);
    for (std::size_t j = 0; j < n; ++j) sv[j] = norm2(a.col(j));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return sv[i] > sv[j]; });

    Svd out{Matrix(m, n), std::vector<double>(n), Matrix(n, n)};
    const double smax = sv[order[0]];
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        out.s[j] = sv[src];
        std::copy(v.col(src).begin(), v.col(src).end(), out.v.col(j).begin());
        if (sv[src] > 1e-14 * smax && sv[src] > 0.0) {
            const auto ac = a.col(src);
            auto uc = out.u.col(j);
            for (std::size_t i = 0; i < m; ++i) uc[i] = ac[i] / sv[src];
        } else {
            out.s[j] = 0.0;
            complete_basis(out.u, j);
        }
    }
    return out;
}

Svd leading(const Svd& full, std::size_t k)
{
    Svd out{Matrix(full.u.rows(), k), std::vector<double>(full.s.begin(), full.s.begin() + k),
            Matrix(full.v.rows(), k)};
    for (std::size_t j = 0; j < k; ++j) {
        std::copy(full.u.col(j).begin(), full.u.col(j).end(), out.u.col(j).begin());
        std::copy(full.v.col(j).begin(), full.v.col(j).end(), out.v.col(j).begin());
    }
    return out;
}

} // namespace

Svd svd_topk(const Matrix& m, std::size_t k)
{
    const std::size_t kmax = std::min(m.rows(), m.cols());
    if (k < 1 || k > kmax) {
        throw Error(ErrorKind::OutOfRange, "k must lie in [1, " + std::to_string(kmax) + "]");
    }
    Svd full;
    if (m.rows() >= m.cols()) {
        full = jacobi_svd_tall(m);
    } else {
        Svd t = jacobi_svd_tall(m.transpose());
        full = Svd{std::move(t.v), std::move(t.s), std::move(t.u)};
    }
    for (std::size_t j = 0; j < kmax; ++j) canonical_sign(full.v, full.u, j);
    return leading(full, k);
}

Matrix rank_project(const Matrix& m, std::size_t k)
{
    const Svd svd = svd_topk(m, k);
    Matrix out(m.rows(), m.cols());
    for (std::size_t j = 0; j < k; ++j) {
        const auto u = svd.u.col(j);
        const auto v = svd.v.col(j);
        for (std::size_t c = 0; c < m.cols(); ++c) {
            const double f = svd.s[j] * v[c];
            auto oc = out.col(c);
            for (std::size_t r = 0; r < m.rows(); ++r) oc[r] += f * u[r];
        }
    }
    return out;
}

SymmetricEigen sym_eigh(const Matrix& input)
{
    const std::size_t n = input.rows();
    if (input.cols() != n) throw Error(ErrorKind::NotSymmetric, "matrix is not square");
    const double fro = input.frobenius_norm();
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = j + 1; i < n; ++i)
            if (std::abs(input(i, j) - input(j, i)) > 1e-10 * fro) {
                throw Error(ErrorKind::NotSymmetric, "entries (" + std::to_string(i) + "," + std::to_string(j)
                                                         + ") and its mirror differ");
            }

    Matrix a = input;
    // Work on the exactly symmetric part.
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = j + 1; i < n; ++i) a(i, j) = a(j, i) = 0.5 * (input(i, j) + input(j, i));
    Matrix v = Matrix::identity(n);

    auto off_norm = [&] {
        double ss = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i)
                if (i != j) ss += a(i, j) * a(i, j);
        return std::sqrt(ss);
    };

    bool converged = off_norm() <= kJacobiTolerance * fro;
    for (int sweep = 0; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // A <- J^T A J with J the rotation in the (p, q) plane.
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                auto vp = v.col(p);
                auto vq = v.col(q);
                for (std::size_t k = 0; k < n; ++k) {
                    const double x = vp[k], y = vq[k];
                    vp[k] = c * x - s * y;
                    vq[k] = s * x + c * y;
                }
            }
        }
        converged = off_norm() <= kJacobiTolerance * fro;
    }
    if (!converged) {
        throw Error(ErrorKind::ConvergenceFailure,
                    "Jacobi eigensolver did not converge in " + std::to_string(kMaxJacobiSweeps) + " sweeps");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
    SymmetricEigen out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]);
        std::copy(v.col(order[j]).begin(), v.col(order[j]).end(), out.vectors.col(j).begin());
    }
    for (std::size_t j = 0; j < n; ++j) {
        const auto c = out.vectors.col(j);
        double amax = 0.0;
        for (double x : c) amax = std::max(amax, std::abs(x));
        for (double x : c) {
            if (std::abs(x) > 1e-12 * amax) {
                if (x < 0.0)
                    for (double& w : out.vectors.col(j)) w = -w;
                break;
            }
        }
    }
    return out;
}

} // namespace ezdl
