#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace segrelab {

/// Uniform tensor-product grid on (0,L1) or (0,L1)x(0,L2) with Dirichlet
/// boundary nodes. Nodes are stored row-major: index = j*(n1+2) + i.
class Grid {
public:
    Grid() = default;
    Grid(int dim, std::array<double, 2> lengths, std::array<int, 2> counts);

    static Grid line(double L, int n);
    static Grid rect(double L1, double L2, int n1, int n2);

    int dim() const { return dim_; }
    double length(int axis) const { return lengths_[axis]; }
    int count(int axis) const { return counts_[axis]; }
    double spacing(int axis) const { return lengths_[axis] / (counts_[axis] + 1); }

    /// Nodes per row (n1+2) and number of rows (n2+2, or 1 in 1D).
    int nx() const { return counts_[0] + 2; }
    int ny() const { return dim_ == 2 ? counts_[1] + 2 : 1; }
    std::size_t size() const { return static_cast<std::size_t>(nx()) * ny(); }
    std::size_t index(int i, int j = 0) const { return static_cast<std::size_t>(j) * nx() + i; }

    bool is_boundary(std::size_t k) const;
    bool is_corner(std::size_t k) const;
    std::vector<std::size_t> boundary_nodes() const;
    std::vector<std::size_t> interior_nodes() const;
    std::size_t interior_count() const;

    /// Lumped quadrature weight h^d of an interior node.
    double weight() const;
    /// Lumped measure of the domain: interior_count * weight.
    double measure() const { return interior_count() * weight(); }

    double coord(std::size_t k, int axis) const;

    /// Short identifier like "1d-n255-L1" used in reports.
    std::string id() const;

    bool operator==(const Grid& o) const {
        return dim_ == o.dim_ && lengths_ == o.lengths_ && counts_ == o.counts_;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }

private:
    int dim_ = 1;
    std::array<double, 2> lengths_{1.0, 1.0};
    std::array<int, 2> counts_{3, 1};
};

/// Scalar nodal function on a grid (interior and boundary values).
struct Field {
    Grid grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
    Field(const Grid& g, std::vector<double> v);

    double& operator[](std::size_t k) { return values[k]; }
    double operator[](std::size_t k) const { return values[k]; }
    std::size_t size() const { return values.size(); }
};

/// Boundary values listed in Grid::boundary_nodes() order.
using Trace = std::vector<double>;

Trace trace_of(const Field& f);
void set_trace(Field& f, const Trace& tr);
Field operator-(const Field& a, const Field& b);
Field operator+(const Field& a, const Field& b);
Field operator*(double s, const Field& a);

/// -Delta_h f at interior nodes, zero on the boundary.
Field laplacian_apply(const Field& f);

/// Raw kernel behind laplacian_apply: out[k] = (-Delta_h in)[k] for interior k.
/// Boundary entries of out are left untouched.
void apply_neg_laplacian(const Grid& g, const double* in, double* out);

struct EigenSystem {
    Grid grid;
    std::vector<double> eigenvalues;             // ascending
    std::vector<std::array<int, 2>> modes;       // wave numbers, same order

    /// Orthonormal (lumped inner product) sine mode, zero on the boundary.
    Field mode(std::size_t k) const;
    double lambda_min() const { return eigenvalues.front(); }
    double lambda_max() const { return eigenvalues.back(); }
};

/// Eigenvalue of the wave-number pair (k1, k2); k2 ignored in 1D.
double grid_eigenvalue(const Grid& g, int k1, int k2 = 1);
EigenSystem eigensystem(const Grid& g);
double poincare_constant(const Grid& g);

/// Discrete harmonic field with the given trace.
Field harmonic_extension(const Trace& boundary_values, const Grid& g);

struct Norms {
    double l2 = 0, h1_semi = 0, h1 = 0, linf = 0;
};

Norms norms(const Field& f);
double l2_norm(const Field& f);
double h1_semi_norm(const Field& f);
double h1_norm(const Field& f);
double linf_norm(const Field& f);
double lp_norm(const Field& f, double p);

/// Lumped inner product over interior nodes.
double l2_inner(const Field& a, const Field& b);
/// Sum over grid edges of forward-difference products: the discrete
/// Dirichlet form whose diagonal is h1_semi^2.
double grad_inner(const Field& a, const Field& b);

/// Outward one-sided normal difference (u_b - u_inner)/h at every boundary
/// node; zero at 2D corners.
Trace normal_derivative(const Field& f);
/// Lumped boundary weights: 1 in 1D, tangential spacing in 2D, 0 at corners.
std::vector<double> boundary_weights(const Grid& g);
double boundary_pairing(const Grid& g, const Trace& a, const Trace& b);

/// Orthonormal discrete sine transform on interior nodes.
class SineTransform {
public:
    explicit SineTransform(const Grid& g);
    /// Coefficients indexed (k2-1)*n1 + (k1-1).
    std::vector<double> analyze(const Field& f) const;
    /// Interior values from coefficients; boundary set to zero.
    Field synthesize(const std::vector<double>& coeffs) const;
    double eigenvalue(std::size_t c) const { return lambda_[c]; }
    std::size_t mode_count() const { return lambda_.size(); }

private:
    Grid grid_;
    std::vector<double> sx_, sy_;   // basis tables, (k-1)*n + (i-1)
    std::vector<double> lambda_;
};

struct SolveStats {
    int iterations = 0;
    double residual = 0;   // relative residual
};

/// Solves (diag(shift) + A_h) x = rhs at interior nodes, where A_h is -Delta_h
/// with Dirichlet values taken from the boundary entries of x. On entry x
/// holds the boundary data and an initial guess; shift and rhs are full node
/// arrays. 1D uses a tridiagonal elimination, 2D uses Jacobi-preconditioned CG.
SolveStats solve_shifted(const Grid& g, const std::vector<double>& shift,
                         const std::vector<double>& rhs, std::vector<double>& x,
                         double rtol = 1e-12, int max_iterations = 20000);

/// Test hook: when enabled, the off-diagonal stencil sign in laplacian_apply
/// is flipped so the verify suite can demonstrate it catches the fault.
void set_stencil_fault(bool enabled);
bool stencil_fault();

/// Full-precision decimal (shortest round-trip).
std::string format_double(double x);

void write_snapshot(std::ostream& os, const Field& f, double t);
void write_snapshot(const std::string& path, const Field& f, double t);
/// Returns the field and stores the header time in *t when non-null.
Field read_snapshot(std::istream& is, double* t = nullptr);
Field read_snapshot(const std::string& path, double* t = nullptr);

} // namespace segrelab
