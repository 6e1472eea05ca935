#include "segrelab/error.hpp"
#include "segrelab/mesh.hpp"

#include <cmath>

namespace segrelab {

namespace {

// Adds the Dirichlet couplings of the boundary entries of x to b.
void boundary_rhs(const Grid& g, const std::vector<double>& x, std::vector<double>& b) {
    const int nx = g.nx();
    const double ihx = 1.0 / (g.spacing(0) * g.spacing(0));
    if (g.dim() == 1) {
        b[1] += x[0] * ihx;
        b[nx - 2] += x[nx - 1] * ihx;
        return;
    }
    const int ny = g.ny();
    const double ihy = 1.0 / (g.spacing(1) * g.spacing(1));
    for (int j = 1; j < ny - 1; ++j) {
        b[g.index(1, j)] += x[g.index(0, j)] * ihx;
        b[g.index(nx - 2, j)] += x[g.index(nx - 1, j)] * ihx;
    }
    for (int i = 1; i < nx - 1; ++i) {
        b[g.index(i, 1)] += x[g.index(i, 0)] * ihy;
        b[g.index(i, ny - 2)] += x[g.index(i, ny - 1)] * ihy;
    }
}

// y = (diag(shift) + A0) x on interior nodes, A0 with homogeneous Dirichlet
// data; boundary entries of x must be zero.
void apply_operator(const Grid& g, const std::vector<double>& shift, const std::vector<double>& x,
                    std::vector<double>& y) {
    apply_neg_laplacian(g, x.data(), y.data());
    const int nx = g.nx(), ny = g.ny();
    if (g.dim() == 1) {
        for (int i = 1; i < nx - 1; ++i) y[i] += shift[i] * x[i];
        return;
    }
    for (int j = 1; j < ny - 1; ++j)
        for (int i = 1; i < nx - 1; ++i) {
            std::size_t k = g.index(i, j);
            y[k] += shift[k] * x[k];
        }
}

double interior_dot(const Grid& g, const std::vector<double>& a, const std::vector<double>& b) {
    const int nx = g.nx(), ny = g.ny();
    double s = 0;
    if (g.dim() == 1) {
        for (int i = 1; i < nx - 1; ++i) s += a[i] * b[i];
        return s;
    }
    for (int j = 1; j < ny - 1; ++j) {
        const std::size_t row = static_cast<std::size_t>(j) * nx;
        for (int i = 1; i < nx - 1; ++i) s += a[row + i] * b[row + i];
    }
    return s;
}

// Relative residual of the interior system; b already holds boundary couplings.
double true_residual(const Grid& g, const std::vector<double>& shift, const std::vector<double>& b,
                     const std::vector<double>& x_interior, std::vector<double>& scratch, double bnorm) {
    apply_operator(g, shift, x_interior, scratch);
    double s = 0;
    for (std::size_t k : g.interior_nodes()) {
        double r = b[k] - scratch[k];
        s += r * r;
    }
    return bnorm > 0 ? std::sqrt(s) / bnorm : std::sqrt(s);
}

} // namespace

SolveStats solve_shifted(const Grid& g, const std::vector<double>& shift, const std::vector<double>& rhs,
                         std::vector<double>& x, double rtol, int max_iterations) {
    const std::size_t N = g.size();
    if (shift.size() != N || rhs.size() != N || x.size() != N)
        throw PreconditionError("solve_shifted: array sizes do not match grid");

    std::vector<double> b(N, 0.0);
    for (std::size_t k : g.interior_nodes()) b[k] = rhs[k];
    boundary_rhs(g, x, b);
    const double bnorm = std::sqrt(interior_dot(g, b, b));

    SolveStats stats;
    if (g.dim() == 1) {
        // Tridiagonal elimination on interior nodes 1..n.
        const int n = g.count(0);
        const double ih = 1.0 / (g.spacing(0) * g.spacing(0));
        std::vector<double> c(n), d(n);
        double denom = shift[1] + 2.0 * ih;
        c[0] = -ih / denom;
        d[0] = b[1] / denom;
        for (int i = 1; i < n; ++i) {
            denom = shift[i + 1] + 2.0 * ih + ih * c[i - 1];
            c[i] = -ih / denom;
            d[i] = (b[i + 1] + ih * d[i - 1]) / denom;
        }
        x[n] = d[n - 1];
        for (int i = n - 2; i >= 0; --i) x[i + 1] = d[i] - c[i] * x[i + 2];
        std::vector<double> xi(N, 0.0), scratch(N, 0.0);
        for (int i = 1; i <= n; ++i) xi[i] = x[i];
        stats.iterations = 1;
        stats.residual = true_residual(g, shift, b, xi, scratch, bnorm);
        if (!(stats.residual <= rtol) && !(bnorm == 0 && stats.residual == 0))
            throw SolveError("tridiagonal solve lost accuracy", stats.residual);
        return stats;
    }

    // Jacobi-preconditioned conjugate gradients on the interior unknowns.
    const auto interior = g.interior_nodes();
    const double diag0 = 2.0 / (g.spacing(0) * g.spacing(0)) + 2.0 / (g.spacing(1) * g.spacing(1));
    std::vector<double> xi(N, 0.0), r(N, 0.0), z(N, 0.0), p(N, 0.0), q(N, 0.0), inv_diag(N, 0.0);
    for (std::size_t k : interior) {
        xi[k] = x[k];
        inv_diag[k] = 1.0 / (diag0 + shift[k]);
    }
    if (bnorm == 0) {
        for (std::size_t k : interior) x[k] = 0.0;
        return stats;
    }

    int total = 0;
    for (int restart = 0; restart < 4; ++restart) {
        apply_operator(g, shift, xi, q);
        for (std::size_t k : interior) r[k] = b[k] - q[k];
        double rnorm = std::sqrt(interior_dot(g, r, r));
        if (rnorm <= rtol * bnorm) break;
        for (std::size_t k : interior) p[k] = z[k] = inv_diag[k] * r[k];
        double rz = interior_dot(g, r, z);
        while (total < max_iterations) {
            apply_operator(g, shift, p, q);
            const double alpha = rz / interior_dot(g, p, q);
            for (std::size_t k : interior) {
                xi[k] += alpha * p[k];
                r[k] -= alpha * q[k];
            }
            ++total;
            rnorm = std::sqrt(interior_dot(g, r, r));
            if (rnorm <= 0.5 * rtol * bnorm) break;
            for (std::size_t k : interior) z[k] = inv_diag[k] * r[k];
            const double rz_new = interior_dot(g, r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t k : interior) p[k] = z[k] + beta * p[k];
        }
        if (total >= max_iterations) break;
    }
    std::vector<double> scratch(N, 0.0);
    stats.iterations = total;
    stats.residual = true_residual(g, shift, b, xi, scratch, bnorm);
    for (std::size_t k : interior) x[k] = xi[k];
    if (!(stats.residual <= rtol)) throw SolveError("conjugate gradient did not converge", stats.residual);
    return stats;
}

} // namespace segrelab
