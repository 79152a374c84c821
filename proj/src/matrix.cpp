#include "alora/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "alora/errors.hpp"

namespace alora {

std::size_t Matrix::checked_size(int rows, int cols) {
    if (rows < 0 || cols < 0)
        throw std::invalid_argument("Matrix: negative dimension");
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const int r = static_cast<int>(rows.size());
    const int c = r > 0 ? static_cast<int>(rows.begin()->size()) : 0;
    Matrix m(r, c);
    int i = 0;
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != c)
            throw std::invalid_argument("Matrix::from_rows: ragged rows");
        int j = 0;
        for (double x : row) m(i, j++) = x;
        ++i;
    }
    return m;
}

Matrix Matrix::gaussian(int rows, int cols, Rng& rng, double stddev) {
    Matrix m(rows, cols);
    for (double& x : m.data()) x = rng.gaussian(stddev);
    return m;
}

bool Matrix::all_finite() const {
    for (double x : data_)
        if (!std::isfinite(x)) return false;
    return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("matmul: inner dimensions " + std::to_string(a.cols()) +
                                    " and " + std::to_string(b.rows()) + " do not match");
    const int m = a.rows(), p = a.cols(), n = b.cols();
    Matrix c(m, n);
#pragma omp parallel for if (m >= 64) schedule(static)
    for (int i = 0; i < m; ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (int t = 0; t < p; ++t) {
            const double s = ai[t];
            const double* bt = b.row(t);
            for (int j = 0; j < n; ++j) ci[j] += s * bt[j];
        }
    }
    return c;
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

Matrix add(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("add: shape mismatch");
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] += b.data()[i];
    return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("sub: shape mismatch");
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] -= b.data()[i];
    return c;
}

Matrix scale(const Matrix& m, double c) {
    Matrix s = m;
    for (double& x : s.data()) x *= c;
    return s;
}

void axpy(Matrix& dst, double c, const Matrix& m) {
    if (dst.rows() != m.rows() || dst.cols() != m.cols())
        throw std::invalid_argument("axpy: shape mismatch");
    for (std::size_t i = 0; i < dst.size(); ++i) dst.data()[i] += c * m.data()[i];
}

double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (double x : m.data()) s += x * x;
    return std::sqrt(s);
}

double frobenius_inner(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("frobenius_inner: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
    return s;
}

double max_abs(const Matrix& m) {
    double s = 0.0;
    for (double x : m.data()) s = std::max(s, std::abs(x));
    return s;
}

namespace {

// Orthogonalizes the columns of g in place by Jacobi rotations and
// accumulates them into v. Returns the worst relative off-diagonal
// coupling seen in the final sweep (0 when fully converged).
bool jacobi_orthogonalize(Matrix& g, Matrix& v, double tol, int max_sweeps, double& worst) {
    const int d = g.rows(), p = g.cols();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        int rotations = 0;
        worst = 0.0;
        for (int cp = 0; cp < p - 1; ++cp) {
            for (int cq = cp + 1; cq < p; ++cq) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (int i = 0; i < d; ++i) {
                    const double x = g(i, cp), y = g(i, cq);
                    app += x * x;
                    aqq += y * y;
                    apq += x * y;
                }
                if (app == 0.0 || aqq == 0.0) continue;
                const double coupling = std::abs(apq) / std::sqrt(app * aqq);
                worst = std::max(worst, coupling);
                if (coupling <= tol) continue;
                ++rotations;

                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                for (int i = 0; i < d; ++i) {
                    const double x = g(i, cp), y = g(i, cq);
                    g(i, cp) = cs * x - sn * y;
                    g(i, cq) = sn * x + cs * y;
                }
                for (int i = 0; i < p; ++i) {
                    const double x = v(i, cp), y = v(i, cq);
                    v(i, cp) = cs * x - sn * y;
                    v(i, cq) = sn * x + cs * y;
                }
            }
        }
        if (rotations == 0) return true;
    }
    return false;
}

// Fills column j of u with a unit vector orthogonal to columns 0..j-1.
// Deterministic: picks the standard basis vector with the largest
// residual after projection, then re-normalizes.
void complete_basis_column(Matrix& u, int j) {
    const int d = u.rows();
    std::vector<double> best;
    double best_norm = -1.0;
    for (int e = 0; e < d; ++e) {
        std::vector<double> cand(d, 0.0);
        cand[e] = 1.0;
        for (int c = 0; c < j; ++c) {
            double proj = 0.0;
            for (int i = 0; i < d; ++i) proj += cand[i] * u(i, c);
            for (int i = 0; i < d; ++i) cand[i] -= proj * u(i, c);
        }
        double n2 = 0.0;
        for (double x : cand) n2 += x * x;
        if (n2 > best_norm) {
            best_norm = n2;
            best = std::move(cand);
        }
        if (best_norm > 0.5) break;
    }
    // Second orthogonalization pass for accuracy.
    for (int c = 0; c < j; ++c) {
        double proj = 0.0;
        for (int i = 0; i < d; ++i) proj += best[i] * u(i, c);
        for (int i = 0; i < d; ++i) best[i] -= proj * u(i, c);
    }
    double nrm = 0.0;
    for (double x : best) nrm += x * x;
    nrm = std::sqrt(nrm);
    for (int i = 0; i < d; ++i) u(i, j) = best[i] / nrm;
}

} // namespace

SvdResult svd(const Matrix& m) {
    if (!m.all_finite())
        throw std::invalid_argument("svd: input has non-finite entries");
    if (m.rows() == 0 || m.cols() == 0)
        throw std::invalid_argument("svd: empty matrix");

    const bool transposed = m.rows() < m.cols();
    Matrix g = transposed ? transpose(m) : m;
    const int d = g.rows(), p = g.cols();

    Matrix v = Matrix::identity(p);
    double worst = 0.0;
    if (!jacobi_orthogonalize(g, v, 1e-12, 60, worst))
        throw NumericalError("svd: Jacobi sweeps did not converge (worst coupling " +
                                 std::to_string(worst) + ")",
                             worst);

    // Column norms are the singular values; sort non-increasing with
    // ties broken by original column index.
    std::vector<double> norms(p);
    for (int j = 0; j < p; ++j) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += g(i, j) * g(i, j);
        norms[j] = std::sqrt(s);
    }
    std::vector<int> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return norms[a] > norms[b]; });

    SvdResult out;
    out.u = Matrix(d, p);
    out.v = Matrix(p, p);
    out.sigma.resize(p);
    const double sigma_max = norms[order[0]];
    for (int j = 0; j < p; ++j) {
        const int src = order[j];
        out.sigma[j] = norms[src];
        for (int i = 0; i < p; ++i) out.v(i, j) = v(i, src);
        if (norms[src] > sigma_max * 1e-14 && norms[src] > 0.0) {
            for (int i = 0; i < d; ++i) out.u(i, j) = g(i, src) / norms[src];
        } else {
            complete_basis_column(out.u, j);
        }
    }

    if (transposed) std::swap(out.u, out.v);

    // Sign convention: first nonzero entry of each left singular vector
    // made non-negative, for reproducible logs.
    const int rows_u = out.u.rows();
    const int rows_v = out.v.rows();
    for (int j = 0; j < p; ++j) {
        double lead = 0.0;
        for (int i = 0; i < rows_u; ++i) {
            if (out.u(i, j) != 0.0) {
                lead = out.u(i, j);
                break;
            }
        }
        if (lead < 0.0) {
            for (int i = 0; i < rows_u; ++i) out.u(i, j) = -out.u(i, j);
            for (int i = 0; i < rows_v; ++i) out.v(i, j) = -out.v(i, j);
        }
    }
    return out;
}

std::pair<Matrix, double> truncate_rank(const Matrix& m, int r) {
    const int p = std::min(m.rows(), m.cols());
    if (r < 1 || r > p)
        throw std::invalid_argument("truncate_rank: rank " + std::to_string(r) +
                                    " outside [1, " + std::to_string(p) + "]");
    const SvdResult dec = svd(m);
    Matrix t(m.rows(), m.cols());
    for (int i = 0; i < r; ++i) {
        const double s = dec.sigma[i];
        for (int a = 0; a < m.rows(); ++a) {
            const double ua = s * dec.u(a, i);
            for (int b = 0; b < m.cols(); ++b) t(a, b) += ua * dec.v(b, i);
        }
    }
    double tail = 0.0;
    for (int i = r; i < p; ++i) tail += dec.sigma[i] * dec.sigma[i];
    return {std::move(t), std::sqrt(tail)};
}

} // namespace alora
