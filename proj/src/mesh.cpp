#include "segrelab/mesh.hpp"
#include "segrelab/error.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

namespace segrelab {

namespace {
std::atomic<bool> g_stencil_fault{false};

void require_finite(const Field& f, const char* what) {
    for (double x : f.values)
        if (!std::isfinite(x)) throw PreconditionError(std::string(what) + ": non-finite field value");
}

void require_same_grid(const Field& a, const Field& b) {
    if (a.grid != b.grid || a.size() != b.size()) throw PreconditionError("field grids differ");
}
} // namespace

void set_stencil_fault(bool enabled) { g_stencil_fault = enabled; }
bool stencil_fault() { return g_stencil_fault; }

Grid::Grid(int dim, std::array<double, 2> lengths, std::array<int, 2> counts)
    : dim_(dim), lengths_(lengths), counts_(counts) {
    if (dim != 1 && dim != 2) throw PreconditionError("grid dimension must be 1 or 2");
    if (dim == 1) {
        lengths_[1] = 1.0;
        counts_[1] = 1;
    }
    for (int a = 0; a < dim; ++a) {
        if (!(lengths_[a] > 0) || !std::isfinite(lengths_[a]))
            throw PreconditionError("grid length must be positive");
        if (counts_[a] < 3) throw PreconditionError("grid needs at least 3 interior nodes per axis");
    }
}

Grid Grid::line(double L, int n) { return Grid(1, {L, 1.0}, {n, 1}); }
Grid Grid::rect(double L1, double L2, int n1, int n2) { return Grid(2, {L1, L2}, {n1, n2}); }

bool Grid::is_boundary(std::size_t k) const {
    int i = static_cast<int>(k % nx());
    if (i == 0 || i == nx() - 1) return true;
    if (dim_ == 1) return false;
    int j = static_cast<int>(k / nx());
    return j == 0 || j == ny() - 1;
}

bool Grid::is_corner(std::size_t k) const {
    if (dim_ == 1) return false;
    int i = static_cast<int>(k % nx());
    int j = static_cast<int>(k / nx());
    return (i == 0 || i == nx() - 1) && (j == 0 || j == ny() - 1);
}

std::vector<std::size_t> Grid::boundary_nodes() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < size(); ++k)
        if (is_boundary(k)) out.push_back(k);
    return out;
}

std::vector<std::size_t> Grid::interior_nodes() const {
    std::vector<std::size_t> out;
    out.reserve(interior_count());
    for (std::size_t k = 0; k < size(); ++k)
        if (!is_boundary(k)) out.push_back(k);
    return out;
}

std::size_t Grid::interior_count() const {
    return static_cast<std::size_t>(counts_[0]) * (dim_ == 2 ? counts_[1] : 1);
}

double Grid::weight() const { return dim_ == 1 ? spacing(0) : spacing(0) * spacing(1); }

double Grid::coord(std::size_t k, int axis) const {
    if (axis == 0) return static_cast<double>(k % nx()) * spacing(0);
    return static_cast<double>(k / nx()) * spacing(1);
}

std::string Grid::id() const {
    std::ostringstream os;
    os << dim_ << "d-n" << counts_[0];
    if (dim_ == 2) os << "x" << counts_[1];
    os << "-L" << format_double(lengths_[0]);
    if (dim_ == 2) os << "x" << format_double(lengths_[1]);
    return os.str();
}

Field::Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != g.size()) throw PreconditionError("field value count does not match grid");
}

Trace trace_of(const Field& f) {
    Trace tr;
    for (std::size_t k : f.grid.boundary_nodes()) tr.push_back(f[k]);
    return tr;
}

void set_trace(Field& f, const Trace& tr) {
    auto nodes = f.grid.boundary_nodes();
    if (tr.size() != nodes.size()) throw PreconditionError("trace length does not match boundary");
    for (std::size_t b = 0; b < nodes.size(); ++b) f[nodes[b]] = tr[b];
}

Field operator-(const Field& a, const Field& b) {
    require_same_grid(a, b);
    Field out(a.grid);
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] - b[k];
    return out;
}

Field operator+(const Field& a, const Field& b) {
    require_same_grid(a, b);
    Field out(a.grid);
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] + b[k];
    return out;
}

Field operator*(double s, const Field& a) {
    Field out(a.grid);
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = s * a[k];
    return out;
}

void apply_neg_laplacian(const Grid& g, const double* in, double* out) {
    const int nx = g.nx();
    const double ihx = 1.0 / (g.spacing(0) * g.spacing(0));
    if (g.dim() == 1) {
        for (int i = 1; i < nx - 1; ++i) out[i] = (2.0 * in[i] - in[i - 1] - in[i + 1]) * ihx;
        return;
    }
    const int ny = g.ny();
    const double ihy = 1.0 / (g.spacing(1) * g.spacing(1));
    for (int j = 1; j < ny - 1; ++j) {
        const double* c = in + static_cast<std::size_t>(j) * nx;
        double* o = out + static_cast<std::size_t>(j) * nx;
        for (int i = 1; i < nx - 1; ++i)
            o[i] = (2.0 * c[i] - c[i - 1] - c[i + 1]) * ihx + (2.0 * c[i] - c[i - nx] - c[i + nx]) * ihy;
    }
}

Field laplacian_apply(const Field& f) {
    require_finite(f, "laplacian_apply");
    Field out(f.grid, 0.0);
    if (!stencil_fault()) {
        apply_neg_laplacian(f.grid, f.values.data(), out.values.data());
        return out;
    }
    // Faulty variant: neighbours enter with the wrong sign.
    Field flipped(f.grid);
    for (std::size_t k = 0; k < f.size(); ++k) flipped[k] = -f[k];
    apply_neg_laplacian(f.grid, flipped.values.data(), out.values.data());
    const double diag = 2.0 / std::pow(f.grid.spacing(0), 2) +
                        (f.grid.dim() == 2 ? 2.0 / std::pow(f.grid.spacing(1), 2) : 0.0);
    for (std::size_t k : f.grid.interior_nodes()) out[k] += 2.0 * diag * f[k];
    return out;
}

double grid_eigenvalue(const Grid& g, int k1, int k2) {
    double lam = 0;
    for (int a = 0; a < g.dim(); ++a) {
        const int k = a == 0 ? k1 : k2;
        const double h = g.spacing(a);
        const double s = std::sin(k * M_PI * h / (2.0 * g.length(a)));
        lam += 4.0 / (h * h) * s * s;
    }
    return lam;
}

EigenSystem eigensystem(const Grid& g) {
    EigenSystem es;
    es.grid = g;
    const int n2 = g.dim() == 2 ? g.count(1) : 1;
    std::vector<std::pair<double, std::array<int, 2>>> all;
    for (int k2 = 1; k2 <= n2; ++k2)
        for (int k1 = 1; k1 <= g.count(0); ++k1) all.push_back({grid_eigenvalue(g, k1, k2), {k1, k2}});
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [lam, m] : all) {
        es.eigenvalues.push_back(lam);
        es.modes.push_back(m);
    }
    return es;
}

Field EigenSystem::mode(std::size_t k) const {
    Field out(grid, 0.0);
    const auto [k1, k2] = modes.at(k);
    for (std::size_t node : grid.interior_nodes()) {
        double v = std::sqrt(2.0 / grid.length(0)) * std::sin(k1 * M_PI * grid.coord(node, 0) / grid.length(0));
        if (grid.dim() == 2)
            v *= std::sqrt(2.0 / grid.length(1)) * std::sin(k2 * M_PI * grid.coord(node, 1) / grid.length(1));
        out[node] = v;
    }
    return out;
}

double poincare_constant(const Grid& g) { return grid_eigenvalue(g, 1, 1); }

Field harmonic_extension(const Trace& boundary_values, const Grid& g) {
    for (double b : boundary_values)
        if (!std::isfinite(b)) throw PreconditionError("harmonic_extension: non-finite boundary value");
    Field out(g, 0.0);
    set_trace(out, boundary_values);
    // Start from the boundary mean; cheap and keeps the CG start inside the range.
    double mean = boundary_values.empty()
                      ? 0.0
                      : std::accumulate(boundary_values.begin(), boundary_values.end(), 0.0) / boundary_values.size();
    for (std::size_t k : g.interior_nodes()) out[k] = mean;
    std::vector<double> zero(g.size(), 0.0);
    solve_shifted(g, zero, zero, out.values, 1e-12);
    return out;
}

double l2_inner(const Field& a, const Field& b) {
    require_same_grid(a, b);
    double s = 0;
    for (std::size_t k : a.grid.interior_nodes()) s += a[k] * b[k];
    return s * a.grid.weight();
}

double grad_inner(const Field& a, const Field& b) {
    require_same_grid(a, b);
    const Grid& g = a.grid;
    const int nx = g.nx();
    const double hx = g.spacing(0);
    if (g.dim() == 1) {
        double s = 0;
        for (int i = 0; i + 1 < nx; ++i) s += (a[i + 1] - a[i]) * (b[i + 1] - b[i]);
        return s / hx;
    }
    const int ny = g.ny();
    const double hy = g.spacing(1);
    double sx = 0, sy = 0;
    for (int j = 1; j < ny - 1; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            std::size_t k = g.index(i, j);
            sx += (a[k + 1] - a[k]) * (b[k + 1] - b[k]);
        }
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 1; i < nx - 1; ++i) {
            std::size_t k = g.index(i, j);
            sy += (a[k + nx] - a[k]) * (b[k + nx] - b[k]);
        }
    return sx * hy / hx + sy * hx / hy;
}

double l2_norm(const Field& f) { return std::sqrt(l2_inner(f, f)); }
double h1_semi_norm(const Field& f) { return std::sqrt(grad_inner(f, f)); }
double h1_norm(const Field& f) { return std::sqrt(l2_inner(f, f) + grad_inner(f, f)); }

double linf_norm(const Field& f) {
    double m = 0;
    for (std::size_t k : f.grid.interior_nodes()) m = std::max(m, std::abs(f[k]));
    return m;
}

double lp_norm(const Field& f, double p) {
    if (!(p >= 2)) throw PreconditionError("lp_norm: p must be >= 2");
    if (std::isinf(p)) return linf_norm(f);
    double s = 0;
    for (std::size_t k : f.grid.interior_nodes()) s += std::pow(std::abs(f[k]), p);
    return std::pow(s * f.grid.weight(), 1.0 / p);
}

Norms norms(const Field& f) {
    require_finite(f, "norms");
    Norms n;
    double l2sq = l2_inner(f, f), gsq = grad_inner(f, f);
    n.l2 = std::sqrt(l2sq);
    n.h1_semi = std::sqrt(gsq);
    n.h1 = std::sqrt(l2sq + gsq);
    n.linf = linf_norm(f);
    return n;
}

Trace normal_derivative(const Field& f) {
    const Grid& g = f.grid;
    Trace out;
    const int nx = g.nx(), ny = g.ny();
    for (std::size_t k : g.boundary_nodes()) {
        if (g.is_corner(k)) {
            out.push_back(0.0);
            continue;
        }
        const int i = static_cast<int>(k % nx);
        const int j = static_cast<int>(k / nx);
        std::size_t inner;
        double h;
        if (i == 0) inner = k + 1, h = g.spacing(0);
        else if (i == nx - 1) inner = k - 1, h = g.spacing(0);
        else if (j == 0) inner = k + nx, h = g.spacing(1);
        else inner = k - nx, h = g.spacing(1);
        (void)ny;
        out.push_back((f[k] - f[inner]) / h);
    }
    return out;
}

std::vector<double> boundary_weights(const Grid& g) {
    std::vector<double> w;
    for (std::size_t k : g.boundary_nodes()) {
        if (g.dim() == 1) {
            w.push_back(1.0);
        } else if (g.is_corner(k)) {
            w.push_back(0.0);
        } else {
            const int i = static_cast<int>(k % g.nx());
            w.push_back(i == 0 || i == g.nx() - 1 ? g.spacing(1) : g.spacing(0));
        }
    }
    return w;
}

double boundary_pairing(const Grid& g, const Trace& a, const Trace& b) {
    auto w = boundary_weights(g);
    if (a.size() != w.size() || b.size() != w.size()) throw PreconditionError("trace length does not match boundary");
    double s = 0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * a[i] * b[i];
    return s;
}

SineTransform::SineTransform(const Grid& g) : grid_(g) {
    auto table = [](int n, double L) {
        std::vector<double> t(static_cast<std::size_t>(n) * n);
        const double h = L / (n + 1);
        const double c = std::sqrt(2.0 / L);
        for (int k = 1; k <= n; ++k)
            for (int i = 1; i <= n; ++i) t[(k - 1) * n + (i - 1)] = c * std::sin(k * M_PI * i * h / L);
        return t;
    };
    sx_ = table(g.count(0), g.length(0));
    if (g.dim() == 2) sy_ = table(g.count(1), g.length(1));
    const int n2 = g.dim() == 2 ? g.count(1) : 1;
    for (int k2 = 1; k2 <= n2; ++k2)
        for (int k1 = 1; k1 <= g.count(0); ++k1) lambda_.push_back(grid_eigenvalue(g, k1, k2));
}

std::vector<double> SineTransform::analyze(const Field& f) const {
    if (f.grid != grid_) throw PreconditionError("SineTransform: grid mismatch");
    const int n1 = grid_.count(0);
    const double hx = grid_.spacing(0);
    if (grid_.dim() == 1) {
        std::vector<double> c(n1, 0.0);
        for (int k = 0; k < n1; ++k) {
            double s = 0;
            for (int i = 0; i < n1; ++i) s += sx_[k * n1 + i] * f[i + 1];
            c[k] = s * hx;
        }
        return c;
    }
    const int n2 = grid_.count(1);
    const double hy = grid_.spacing(1);
    std::vector<double> tmp(static_cast<std::size_t>(n1) * n2);   // tmp[j][k1]
    for (int j = 0; j < n2; ++j)
        for (int k = 0; k < n1; ++k) {
            double s = 0;
            for (int i = 0; i < n1; ++i) s += sx_[k * n1 + i] * f[grid_.index(i + 1, j + 1)];
            tmp[j * n1 + k] = s * hx;
        }
    std::vector<double> c(static_cast<std::size_t>(n1) * n2);
    for (int k2 = 0; k2 < n2; ++k2)
        for (int k1 = 0; k1 < n1; ++k1) {
            double s = 0;
            for (int j = 0; j < n2; ++j) s += sy_[k2 * n2 + j] * tmp[j * n1 + k1];
            c[k2 * n1 + k1] = s * hy;
        }
    return c;
}

Field SineTransform::synthesize(const std::vector<double>& coeffs) const {
    if (coeffs.size() != lambda_.size()) throw PreconditionError("SineTransform: coefficient count mismatch");
    Field out(grid_, 0.0);
    const int n1 = grid_.count(0);
    if (grid_.dim() == 1) {
        for (int i = 0; i < n1; ++i) {
            double s = 0;
            for (int k = 0; k < n1; ++k) s += sx_[k * n1 + i] * coeffs[k];
            out[i + 1] = s;
        }
        return out;
    }
    const int n2 = grid_.count(1);
    std::vector<double> tmp(static_cast<std::size_t>(n1) * n2);   // tmp[j][k1]
    for (int j = 0; j < n2; ++j)
        for (int k1 = 0; k1 < n1; ++k1) {
            double s = 0;
            for (int k2 = 0; k2 < n2; ++k2) s += sy_[k2 * n2 + j] * coeffs[k2 * n1 + k1];
            tmp[j * n1 + k1] = s;
        }
    for (int j = 0; j < n2; ++j)
        for (int i = 0; i < n1; ++i) {
            double s = 0;
            for (int k1 = 0; k1 < n1; ++k1) s += sx_[k1 * n1 + i] * tmp[j * n1 + k1];
            out[grid_.index(i + 1, j + 1)] = s;
        }
    return out;
}

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

} // namespace segrelab
